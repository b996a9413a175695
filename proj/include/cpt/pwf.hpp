#pragma once

#include <cmath>

#include "cpt/common.hpp"

namespace cpt {

enum class PwfKind { Identity, TverskyKahneman };

// Probability weighting function: w(0)=0, w(1)=1, monotone on [0,1].
// delta is used only by the Tversky-Kahneman form.
struct Pwf {
    PwfKind kind = PwfKind::Identity;
    double delta = 0.65;
};

inline double apply_pwf(const Pwf& w, double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ProbOutOfRange(prob);
    if (w.kind == PwfKind::Identity) return prob;
    if (prob == 0.0 || prob == 1.0) return prob;
    const double pd = std::pow(prob, w.delta);
    const double qd = std::pow(1.0 - prob, w.delta);
    return pd / std::pow(pd + qd, 1.0 / w.delta);
}

}  // namespace cpt
