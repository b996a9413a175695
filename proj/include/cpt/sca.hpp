#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cpt/common.hpp"
#include "cpt/dual.hpp"
#include "cpt/scenario.hpp"
#include "cpt/surrogate.hpp"

namespace cpt {

enum class ThetaKind { Harmonic, Power, Constant1 };

// Diminishing step sizes: theta in (0,1], theta -> 0 (except Constant1) and
// sum theta = infinity.
struct ThetaSchedule {
    ThetaKind kind = ThetaKind::Harmonic;
    double theta0 = 1.0;
    double param = 0.1;  // Harmonic decay c, or the Power exponent

    void validate() const {
        if (!(theta0 > 0.0 && theta0 <= 1.0)) throw BadSpec("theta0 outside (0,1]");
        if (kind == ThetaKind::Harmonic && !(param > 0.0))
            throw BadSpec("harmonic decay must be positive");
        if (kind == ThetaKind::Power && !(param > 0.0 && param <= 1.0))
            throw BadSpec("power exponent outside (0,1]");
    }
};

inline double theta(const ThetaSchedule& s, std::size_t l) {
    switch (s.kind) {
        case ThetaKind::Harmonic: return s.theta0 / (1.0 + s.param * static_cast<double>(l));
        case ThetaKind::Power:
            return s.theta0 / std::pow(1.0 + static_cast<double>(l), s.param);
        default: return 1.0;
    }
}

struct ScaConfig {
    ThetaSchedule theta_schedule;
    std::size_t max_outer_iters = 500;
    double x_tol = 1e-6;  // sup-norm step tolerance
    double f_tol = 1e-9;  // relative objective-change tolerance
    // Unit steps with a descent safeguard (majorization-minimization mode).
    bool monotone_mode = false;
    bool record_trace = true;
    SurrogateConfig surrogate;
};

inline double theta(const ScaConfig& cfg, std::size_t l) {
    return cfg.monotone_mode ? 1.0 : theta(cfg.theta_schedule, l);
}

enum class Termination { XTol, FTol, MaxOuterIters };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::XTol: return "x_tol";
        case Termination::FTol: return "f_tol";
        default: return "max_outer_iters";
    }
}

struct TraceRecord {
    Vec alloc;
    double objective = 0.0;
    double surrogate_opt = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    DualStatus inner_status = DualStatus::Converged;
    double inner_gap = 0.0;
    double step_inf = 0.0;
};

using ScaTrace = std::vector<TraceRecord>;

struct SolveResult {
    Vec alloc;
    double objective = 0.0;
    double dual_k = 0.0;
    Termination termination = Termination::MaxOuterIters;
    std::size_t outer_iters = 0;
    ScaTrace trace;
    // Aggregated inner-solver diagnostics.
    double min_weak_duality_margin = std::numeric_limits<double>::infinity();
    double max_rel_gap = 0.0;  // max |k*g| / (1 + |f~|) over inner solves
    std::size_t inner_exhausted = 0;
    double max_touch_error = 0.0;  // max |f~(P|P) - f(P)| over iterations

    bool converged() const { return termination != Termination::MaxOuterIters; }
};

// Inner solver backed by dual_ascent; keeps the dual variable warm across
// outer iterations. Distinct solves use distinct instances.
class DualInnerSolver {
  public:
    explicit DualInnerSolver(DualConfig cfg = {}) : cfg_(cfg) {}

    const DualConfig& config() const { return cfg_; }

    DualResult operator()(const std::vector<SurrogateUtility>& surr, const ProblemView& view,
                          const Vec& current, Side kink_side) {
        DualResult r = dual_ascent(surr, view, cfg_, current, warm_k_, kink_side);
        warm_k_ = r.k;
        return r;
    }

  private:
    DualConfig cfg_;
    double warm_k_ = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double sup_dist(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace detail

// Algorithm: at iterate P, build per-agent surrogates at snr(P), solve the
// convex surrogate problem over {P >= 0, g(P) <= 0} via the inner solver,
// then blend P <- P + theta * (P_hat - P).
template <class Inner>
SolveResult sca_solve(const AllocationProblem& problem, Vec x_init, const ScaConfig& cfg,
                      Inner&& inner) {
    problem.validate();
    cfg.theta_schedule.validate();
    const std::size_t n = problem.size();
    if (x_init.size() != n) throw DimensionMismatch(n, x_init.size());
    for (double v : x_init)
        if (!(v >= 0.0)) throw InfeasibleStart("allocation has a negative component");
    if (budget_slack(problem, x_init) > 1e-12 * (1.0 + problem.p_total))
        throw InfeasibleStart("initial allocation exceeds the budget");

    const ProblemView view = make_view(problem);
    SolveResult out;
    Vec p = std::move(x_init);
    double f_cur = objective(problem, p);

    if (cfg.record_trace) {
        TraceRecord rec;
        rec.alloc = p;
        rec.objective = f_cur;
        out.trace.push_back(std::move(rec));
    }

    for (std::size_t l = 0; l < cfg.max_outer_iters; ++l) {
        std::vector<SurrogateUtility> surr;
        surr.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            surr.push_back(build_surrogate(problem.agents[i].params, p[i] * view.chain[i],
                                           cfg.surrogate));

        out.max_touch_error =
            std::max(out.max_touch_error, std::abs(surrogate_objective(surr, view, p) - f_cur));

        DualResult sub;
        try {
            sub = inner(surr, view, p, cfg.surrogate.kink_side);
        } catch (const Diverged& e) {
            throw InnerSolverFailure(l, e.what());
        }
        out.dual_k = sub.k;
        out.min_weak_duality_margin =
            std::min(out.min_weak_duality_margin, sub.weak_duality_margin);
        out.max_rel_gap = std::max(out.max_rel_gap,
                                   std::abs(sub.gap) / (1.0 + std::abs(sub.surrogate_obj)));
        if (sub.status == DualStatus::BudgetExhausted) ++out.inner_exhausted;

        Vec p_hat = std::move(sub.alloc);
        const double slack = budget_slack(problem, p_hat);
        if (slack > 0.0) {
            const double scale = problem.p_total / (slack + problem.p_total);
            for (double& v : p_hat) v *= scale;
        }

        const double th = theta(cfg, l);
        Vec p_next(n);
        for (std::size_t i = 0; i < n; ++i)
            p_next[i] = std::max(0.0, p[i] + th * (p_hat[i] - p[i]));

        double f_next = objective(problem, p_next);
        if (cfg.monotone_mode && f_next > f_cur) {
            // Unit-step mode keeps the previous iterate when the inner
            // solution fails to improve; the zero step then terminates below.
            p_next = p;
            f_next = f_cur;
        }

        const double step = detail::sup_dist(p_next, p);
        out.outer_iters = l + 1;

        if (cfg.record_trace) {
            TraceRecord rec;
            rec.alloc = p_next;
            rec.objective = f_next;
            rec.surrogate_opt = surrogate_objective(surr, view, p_hat);
            rec.theta = th;
            rec.inner_status = sub.status;
            rec.inner_gap = sub.gap;
            rec.step_inf = step;
            out.trace.push_back(std::move(rec));
        }

        const double df = std::abs(f_next - f_cur);
        p = std::move(p_next);
        f_cur = f_next;

        if (step <= cfg.x_tol) {
            out.termination = Termination::XTol;
            out.alloc = std::move(p);
            out.objective = f_cur;
            return out;
        }
        if (df <= cfg.f_tol * (1.0 + std::abs(f_cur))) {
            out.termination = Termination::FTol;
            out.alloc = std::move(p);
            out.objective = f_cur;
            return out;
        }
    }
    out.termination = Termination::MaxOuterIters;
    out.alloc = std::move(p);
    out.objective = f_cur;
    return out;
}

inline SolveResult sca_solve(const AllocationProblem& problem, Vec x_init, const ScaConfig& cfg,
                             const DualConfig& dual_cfg = {}) {
    DualInnerSolver inner(dual_cfg);
    return sca_solve(problem, std::move(x_init), cfg, inner);
}

inline Vec equal_split(const AllocationProblem& problem) {
    return Vec(problem.size(), problem.p_total / static_cast<double>(problem.size()));
}

}  // namespace cpt
