#pragma once

#include <cmath>
#include <string>

#include "cpt/common.hpp"

namespace cpt {

// Parameters of the two-branch exponential utility
//
//   u(x) = lambda1 * (mu1 - exp((alpha/gamma1) * (x - x0)/m)) / alpha   for x >= x0
//   u(x) = lambda2 * (mu2 - exp((beta /gamma2) * (x - x0)/n)) / beta    for x <  x0
//
// x0 is the reference point; for the power-allocation instantiation it is a
// reference SNR and the generators fix mu1 = mu2 = 1.
struct CptParams {
    double alpha = 1.0;
    double beta = 1.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double gamma1 = -1.0;
    double gamma2 = -1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double m = 1.0;
    double n = 1.0;
    double x0 = 0.0;
};

// Accepts iff all structural invariants hold; throws InvalidParams naming the
// first violated field.
inline void validate_params(const CptParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.alpha)) throw InvalidParams("alpha");
    if (!finite(p.beta)) throw InvalidParams("beta");
    if (!finite(p.lambda1) || p.lambda1 == 0.0) throw InvalidParams("lambda1");
    if (!finite(p.lambda2) || p.lambda2 == 0.0) throw InvalidParams("lambda2");
    if (!finite(p.gamma1) || p.gamma1 == 0.0) throw InvalidParams("gamma1");
    if (!finite(p.gamma2) || p.gamma2 == 0.0) throw InvalidParams("gamma2");
    if (!finite(p.mu1)) throw InvalidParams("mu1");
    if (!finite(p.mu2)) throw InvalidParams("mu2");
    if (!finite(p.m) || p.m <= 0.0) throw InvalidParams("m");
    if (!finite(p.n) || p.n <= 0.0) throw InvalidParams("n");
    if (!finite(p.x0)) throw InvalidParams("x0");
}

inline bool params_valid(const CptParams& p) {
    try {
        validate_params(p);
        return true;
    } catch (const InvalidParams&) {
        return false;
    }
}

enum class Shape { Constant, Linear, Convex, Concave, Other };

struct ShapeClass {
    Shape gain_shape = Shape::Other;
    Shape loss_shape = Shape::Other;
};

inline const char* shape_name(Shape s) {
    switch (s) {
        case Shape::Constant: return "constant";
        case Shape::Linear: return "linear";
        case Shape::Convex: return "convex";
        case Shape::Concave: return "concave";
        default: return "other";
    }
}

// Branch shape classification. Limit regimes ("gamma -> 0", "alpha -> 0") are
// matched with the eps_limit threshold; rows are checked in table order and
// anything unmatched is Other.
inline ShapeClass classify_shape(const CptParams& p, double eps_limit = kEpsLimit) {
    validate_params(p);
    ShapeClass out;

    const bool gamma1_to_zero_minus = p.gamma1 < 0.0 && p.gamma1 > -eps_limit;
    const bool alpha_to_zero = std::abs(p.alpha) < eps_limit;
    if (gamma1_to_zero_minus && p.alpha > 0.0 && p.lambda1 * p.mu1 > 0.0) {
        out.gain_shape = Shape::Constant;
    } else if (alpha_to_zero && p.lambda1 / p.gamma1 < 0.0) {
        out.gain_shape = Shape::Linear;
    } else if (p.lambda1 / p.gamma1 < 0.0 && p.alpha / p.gamma1 > 0.0 && p.mu1 <= 1.0) {
        out.gain_shape = Shape::Convex;
    } else if (p.lambda1 / p.gamma1 < 0.0 && p.alpha / p.gamma1 < 0.0 && p.mu1 >= 1.0) {
        out.gain_shape = Shape::Concave;
    } else {
        out.gain_shape = Shape::Other;
    }

    const bool gamma2_to_zero_plus = p.gamma2 > 0.0 && p.gamma2 < eps_limit;
    const bool beta_to_zero = std::abs(p.beta) < eps_limit;
    if (gamma2_to_zero_plus && p.beta > 0.0 && p.lambda2 * p.mu2 < 0.0) {
        out.loss_shape = Shape::Constant;
    } else if (beta_to_zero && p.lambda2 / p.gamma2 < 0.0) {
        out.loss_shape = Shape::Linear;
    } else if (p.lambda2 / p.gamma2 < 0.0 && p.beta / p.gamma2 > 0.0 && p.mu2 >= 1.0) {
        out.loss_shape = Shape::Convex;
    } else if (p.lambda2 / p.gamma2 < 0.0 && p.beta / p.gamma2 < 0.0 && p.mu2 <= 1.0) {
        out.loss_shape = Shape::Concave;
    } else {
        out.loss_shape = Shape::Other;
    }
    return out;
}

}  // namespace cpt
