#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cpt/common.hpp"
#include "cpt/scenario.hpp"
#include "cpt/surrogate.hpp"

namespace cpt {

// Step schedule c / i^exponent for i >= 1. Square summable but not summable
// requires exponent in (1/2, 1].
struct StepSchedule {
    double c = 1.0;
    double exponent = 1.0;

    void validate() const {
        if (!(c > 0.0)) throw BadSpec("step schedule scale must be positive");
        if (!(exponent > 0.5 && exponent <= 1.0))
            throw BadSpec("step schedule exponent outside (1/2, 1]");
    }

    double at(std::size_t i) const {
        return exponent == 1.0 ? c / static_cast<double>(i)
                               : c / std::pow(static_cast<double>(i), exponent);
    }
};

struct DualConfig {
    StepSchedule zeta{1.0, 1.0};  // dual steps
    StepSchedule eta{std::numeric_limits<double>::quiet_NaN(), 1.0};  // primal steps
    double k_init = 0.0;
    std::size_t max_dual_iters = 200;
    std::size_t max_primal_iters = 2000;
    double gap_tol = 1e-6;       // on |min(g,0) * k|
    double feas_tol = 1e-6;      // relative to P_total
    double divergence_cap = 1e6; // sup-norm cap on primal iterates
    // The primal loop stops early once the best Lagrangian value stalls.
    std::size_t stall_window = 50;
    double stall_tol = 1e-12;

    // eta scale defaults to 0.1 * P_total / N when left unset.
    double eta_scale(double p_total, std::size_t n) const {
        if (std::isnan(eta.c)) return 0.1 * p_total / static_cast<double>(n);
        return eta.c;
    }
};

// Per-solve cache: PWF weights and the SNR chain factors |h|^2 / sigma^2.
struct ProblemView {
    const AllocationProblem* problem = nullptr;
    Vec weight;
    Vec chain;
    double p_total = 0.0;

    std::size_t size() const { return weight.size(); }
};

inline ProblemView make_view(const AllocationProblem& pr) {
    ProblemView v;
    v.problem = &pr;
    v.p_total = pr.p_total;
    v.weight.reserve(pr.size());
    v.chain.reserve(pr.size());
    for (const Agent& a : pr.agents) {
        v.weight.push_back(apply_pwf(pr.pwf, a.prob));
        v.chain.push_back(a.gain / pr.noise_var);
    }
    return v;
}

inline Vec project_nonneg(Vec p) {
    for (double& v : p) v = std::max(v, 0.0);
    return p;
}

// Surrogate objective f~(P) = -sum_i w_i * u~_i(snr_i(P_i)).
inline double surrogate_objective(const std::vector<SurrogateUtility>& surr,
                                  const ProblemView& view, const Vec& alloc) {
    double f = 0.0;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        if (view.weight[i] == 0.0) continue;
        f -= view.weight[i] *
             eval_surrogate(surr[i], view.problem->agents[i].params, alloc[i] * view.chain[i]);
    }
    return f;
}

inline double lagrangian(const std::vector<SurrogateUtility>& surr, const ProblemView& view,
                         const Vec& alloc, double k) {
    double g = -view.p_total;
    for (double v : alloc) g += v;
    return surrogate_objective(surr, view, alloc) + k * g;
}

// One projected dual step (k + zeta * g)_+.
inline double dual_step(double k, double zeta, double g) { return std::max(0.0, k + zeta * g); }

struct InnerResult {
    Vec alloc;          // best iterate by Lagrangian value
    double lagrangian = 0.0;
    double feasible_obj_min = std::numeric_limits<double>::infinity();
    std::size_t iters = 0;
};

// Projected subgradient descent of f~ + k*g over the nonnegative orthant.
// Subgradient components are -w_i * u~_i'(snr_i) * chain_i + k with the
// configured kink rule at the breakpoint. Returns the best iterate found.
inline InnerResult inner_minimize(const std::vector<SurrogateUtility>& surr,
                                  const ProblemView& view, double k, const DualConfig& cfg,
                                  Vec start, Side kink_side = Side::Right) {
    const std::size_t n = view.size();
    if (start.size() != n) throw DimensionMismatch(n, start.size());
    const double eta0 = cfg.eta_scale(view.p_total, n);
    const double feas_abs = cfg.feas_tol * view.p_total;

    Vec p = project_nonneg(std::move(start));
    InnerResult best;
    best.alloc = p;
    best.lagrangian = lagrangian(surr, view, p, k);

    auto note_feasible = [&](const Vec& q, double fval) {
        if (fval < best.feasible_obj_min) best.feasible_obj_min = fval;
        (void)q;
    };
    {
        double g0 = -view.p_total;
        for (double v : p) g0 += v;
        if (g0 <= feas_abs) note_feasible(p, best.lagrangian - k * g0);
    }

    double stall_ref = best.lagrangian;
    for (std::size_t j = 1; j <= cfg.max_primal_iters; ++j) {
        const double eta = cfg.eta.exponent == 1.0
                               ? eta0 / static_cast<double>(j)
                               : eta0 / std::pow(static_cast<double>(j), cfg.eta.exponent);
        double g = -view.p_total;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = p[i] * view.chain[i];
            const double slope =
                surrogate_subgradient_slope(surr[i], view.problem->agents[i].params, x, kink_side);
            const double w = -view.weight[i] * slope * view.chain[i] + k;
            p[i] = std::max(0.0, p[i] - eta * w);
            if (p[i] > cfg.divergence_cap)
                throw Diverged("primal iterate exceeded the divergence cap; surrogate is not "
                               "concave or steps are unstable");
            g += p[i];
        }
        const double L = lagrangian(surr, view, p, k);
        if (!std::isfinite(L)) throw Diverged("non-finite Lagrangian value");
        if (L < best.lagrangian) {
            best.lagrangian = L;
            best.alloc = p;
        }
        if (g <= feas_abs) note_feasible(p, L - k * g);
        best.iters = j;
        if (j % cfg.stall_window == 0) {
            if (stall_ref - best.lagrangian <= cfg.stall_tol * (1.0 + std::abs(best.lagrangian)))
                break;
            stall_ref = best.lagrangian;
        }
    }
    return best;
}

enum class DualStatus { Converged, BudgetExhausted };

struct DualResult {
    Vec alloc;
    double k = 0.0;
    double gap = 0.0;          // complementary-slackness estimate k * g(P)
    double dual_value = 0.0;   // h(k) at the returned pair
    double surrogate_obj = 0.0;
    double budget_violation = 0.0;  // g(P) at the returned pair
    // min over feasible iterates of f~ minus max dual value; weak duality
    // holds when this stays above -1e-9.
    double weak_duality_margin = std::numeric_limits<double>::infinity();
    DualStatus status = DualStatus::Converged;
    std::size_t dual_iters = 0;
    std::size_t primal_iters = 0;
};

// Projected subgradient ascent on the scalar dual variable:
//   k_{i+1} = (k_i + zeta_i * g(P*(k_i)))_+
// with P*(k) from inner_minimize, warm-started from the previous primal.
inline DualResult dual_ascent(const std::vector<SurrogateUtility>& surr, const ProblemView& view,
                              const DualConfig& cfg, Vec warm_alloc, double warm_k,
                              Side kink_side = Side::Right) {
    const double feas_abs = cfg.feas_tol * view.p_total;
    double k = std::max(0.0, warm_k);
    Vec p = std::move(warm_alloc);

    DualResult out;
    double h_best = -std::numeric_limits<double>::infinity();
    double feas_obj_min = std::numeric_limits<double>::infinity();

    for (std::size_t i = 1; i <= cfg.max_dual_iters; ++i) {
        InnerResult inner = inner_minimize(surr, view, k, cfg, std::move(p), kink_side);
        p = inner.alloc;
        out.primal_iters += inner.iters;
        out.dual_iters = i;
        feas_obj_min = std::min(feas_obj_min, inner.feasible_obj_min);

        double g = -view.p_total;
        for (double v : p) g += v;

        const bool better = inner.lagrangian > h_best;
        if (better || i == 1) {
            h_best = inner.lagrangian;
            out.alloc = p;
            out.k = k;
            out.gap = k * g;
            out.dual_value = inner.lagrangian;
            out.surrogate_obj = inner.lagrangian - k * g;
            out.budget_violation = g;
        }

        if (std::abs(std::min(g, 0.0) * k) <= cfg.gap_tol && g <= feas_abs) {
            out.alloc = p;
            out.k = k;
            out.gap = k * g;
            out.dual_value = inner.lagrangian;
            out.surrogate_obj = inner.lagrangian - k * g;
            out.budget_violation = g;
            out.status = DualStatus::Converged;
            out.weak_duality_margin = feas_obj_min - h_best;
            return out;
        }
        k = dual_step(k, cfg.zeta.at(i), g);
    }
    out.status = DualStatus::BudgetExhausted;
    out.weak_duality_margin = feas_obj_min - h_best;
    return out;
}

}  // namespace cpt
