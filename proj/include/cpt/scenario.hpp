#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cpt/common.hpp"
#include "cpt/params.hpp"
#include "cpt/pwf.hpp"
#include "cpt/utility.hpp"

namespace cpt {

struct Agent {
    CptParams params;   // x0 holds the agent's reference SNR
    double gain = 1.0;  // channel power gain |h|^2
    double prob = 1.0;  // activity probability fed through the PWF
};

struct AllocationProblem {
    std::vector<Agent> agents;
    double noise_var = 1.0;
    double p_total = 1.0;
    Pwf pwf;

    std::size_t size() const { return agents.size(); }

    void validate() const {
        if (agents.empty()) throw BadSpec("no agents");
        if (!(noise_var > 0.0)) throw BadSpec("noise_var must be positive");
        if (!(p_total > 0.0)) throw BadSpec("p_total must be positive");
        for (const Agent& a : agents) {
            validate_params(a.params);
            if (!(a.gain > 0.0)) throw BadSpec("agent gain must be positive");
            if (!(a.prob >= 0.0 && a.prob <= 1.0)) throw BadSpec("agent prob outside [0,1]");
        }
    }
};

inline double snr(double power, double gain, double noise_var) {
    return power * gain / noise_var;
}

// Budget constraint g(P) = sum(P) - P_total, feasible iff <= 0.
inline double budget_slack(const AllocationProblem& pr, const Vec& alloc) {
    double s = 0.0;
    for (double v : alloc) s += v;
    return s - pr.p_total;
}

// Minimization-oriented objective f(P) = -sum_i w(p_i) * u_i(SNR_i).
inline double objective(const AllocationProblem& pr, const Vec& alloc) {
    if (alloc.size() != pr.agents.size())
        throw DimensionMismatch(pr.agents.size(), alloc.size());
    double f = 0.0;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        const Agent& a = pr.agents[i];
        const double w = apply_pwf(pr.pwf, a.prob);
        if (w == 0.0) continue;
        f -= w * eval_utility(a.params, snr(alloc[i], a.gain, pr.noise_var));
    }
    return f;
}

enum class ParamSampler { SShaped, Concave, Mixed };

inline const char* sampler_name(ParamSampler s) {
    switch (s) {
        case ParamSampler::SShaped: return "s_shaped";
        case ParamSampler::Concave: return "concave";
        default: return "mixed";
    }
}

inline ParamSampler sampler_from_name(const std::string& name) {
    if (name == "s_shaped") return ParamSampler::SShaped;
    if (name == "concave") return ParamSampler::Concave;
    if (name == "mixed") return ParamSampler::Mixed;
    throw BadSpec("unknown sampler '" + name + "'");
}

struct ScenarioSpec {
    std::size_t n_agents = 3;
    double mean_snr_db = 7.0;  // average SNR at equal power split
    double p_total = 1.0;
    ParamSampler sampler = ParamSampler::SShaped;
    std::uint64_t seed = 1;
    double prob = 1.0;
    Pwf pwf;

    void validate() const {
        if (n_agents == 0) throw BadSpec("n_agents must be positive");
        if (!(p_total > 0.0)) throw BadSpec("p_total must be positive");
        if (!std::isfinite(mean_snr_db)) throw BadSpec("mean_snr_db must be finite");
        if (!(prob >= 0.0 && prob <= 1.0)) throw BadSpec("prob outside [0,1]");
        if (pwf.kind == PwfKind::TverskyKahneman && !(pwf.delta > 0.0 && pwf.delta <= 1.0))
            throw BadSpec("pwf delta outside (0,1]");
    }
};

namespace detail {

// Uniform doubles built from raw engine bits so the generated stream depends
// only on the (standardized) mt19937_64 sequence, not on library
// distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double exponential1() { return -std::log1p(-uniform01()); }

  private:
    std::mt19937_64 eng_;
};

// Draw order is fixed: gain first, then shape parameters. The per-branch
// scale factors keep the utility increasing with the loss side steeper at
// the reference (slope ratio in [1.5, 3]).
inline Agent sample_agent(Rng& rng, ParamSampler sampler, double snr_equal_split, double prob) {
    Agent a;
    a.gain = rng.exponential1();
    a.prob = prob;

    CptParams& p = a.params;
    const double slope_gain = rng.uniform(0.5, 1.5);
    const double loss_aversion = rng.uniform(1.5, 3.0);
    const double slope_loss = loss_aversion * slope_gain;
    p.m = rng.uniform(0.5, 2.0);
    p.n = rng.uniform(0.5, 2.0);
    p.mu1 = 1.0;
    p.mu2 = 1.0;
    p.x0 = rng.uniform(0.5, 2.0) * snr_equal_split;

    switch (sampler) {
        case ParamSampler::SShaped:
            p.gamma1 = rng.uniform(0.5, 1.0);
            p.alpha = -rng.uniform(0.5, 2.0);
            p.gamma2 = rng.uniform(0.5, 1.0);
            p.beta = rng.uniform(0.5, 2.0);
            break;
        case ParamSampler::Concave:
            p.gamma1 = rng.uniform(0.5, 1.0);
            p.alpha = -rng.uniform(0.5, 2.0);
            p.gamma2 = rng.uniform(0.5, 1.0);
            p.beta = -rng.uniform(0.5, 2.0);
            break;
        case ParamSampler::Mixed:
            p.gamma1 = -rng.uniform(0.5, 1.0);
            p.alpha = -rng.uniform(0.5, 2.0);
            p.gamma2 = -rng.uniform(1.0, 2.0);
            p.beta = -rng.uniform(0.5, 2.0);
            break;
    }
    // lambda chosen so u'(x0+) = slope_gain and u'(x0-) = slope_loss.
    p.lambda1 = -slope_gain * p.gamma1 * p.m;
    p.lambda2 = -slope_loss * p.gamma2 * p.n;
    return a;
}

}  // namespace detail

// Deterministic per seed. Channel gains are Exp(1); the noise variance is
// calibrated so the mean SNR at equal power split hits mean_snr_db:
//   sigma^2 = (P_total/N) * E[gain] / 10^(mean_snr_db/10).
inline AllocationProblem generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    const double snr_equal_split = std::pow(10.0, spec.mean_snr_db / 10.0);

    AllocationProblem pr;
    pr.p_total = spec.p_total;
    pr.noise_var = (spec.p_total / static_cast<double>(spec.n_agents)) / snr_equal_split;
    pr.pwf = spec.pwf;
    pr.agents.reserve(spec.n_agents);

    detail::Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n_agents; ++i)
        pr.agents.push_back(detail::sample_agent(rng, spec.sampler, snr_equal_split, spec.prob));
    pr.validate();
    return pr;
}

}  // namespace cpt
