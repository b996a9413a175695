#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "cpt/common.hpp"
#include "cpt/params.hpp"
#include "cpt/utility.hpp"

namespace cpt {

enum class CaseId { Case1 = 1, Case2, Case3, Case4, Case5, Case6 };

struct SurrogateConfig {
    // Strong-concavity modulus / floor on |rate| for built pieces.
    double eps_curv = 1e-3;
    // Optional proximal term -tau * (x - x_expansion)^2 added to the
    // surrogate; nonpositive, so minorization is preserved. Off by default.
    double prox_tau = 0.0;
    // |x_expansion - x0| below this makes rule 6 applicable in rule checks.
    double rule6_eps = 1e-6;
    // Side used for the kink subgradient at the breakpoint.
    Side kink_side = Side::Right;
};

// Which original branch a kept (unchanged) piece delegates to.
enum class BranchRef { None, Gain, Loss };

// One exponential piece lam * (1 - exp(rate*(x-center)/scale))/rate + offset.
// Kept subdomains carry from_original != None and evaluate the original
// branch instead (the fields still hold the equivalent parameters).
struct SurrogatePiece {
    double lam = -1.0;
    double rate = -1.0;
    double center = 0.0;
    double scale = 1.0;
    double offset = 0.0;
    BranchRef from_original = BranchRef::None;

    bool strongly_concave(double eps_curv) const {
        return rate <= -eps_curv && lam * rate > 0.0;
    }
};

namespace detail {

// (exp(z) - 1)/z, stable near zero; phi(0) = 1.
inline double phi(double z) {
    if (z > kExpHardCap) throw Overflow(z);
    if (z > kExpClip) z = kExpClip;
    if (z < -kExpClip) z = -kExpClip;
    if (std::abs(z) < 1e-12) return 1.0 + z / 2.0;
    return std::expm1(z) / z;
}

inline double piece_value(const SurrogatePiece& pc, const CptParams& p, double x) {
    if (pc.from_original == BranchRef::Gain) return eval_gain_branch(p, x);
    if (pc.from_original == BranchRef::Loss) return eval_loss_branch(p, x);
    const double d = (x - pc.center) / pc.scale;
    return pc.offset - pc.lam * d * phi(pc.rate * d);
}

inline double piece_slope(const SurrogatePiece& pc, const CptParams& p, double x) {
    if (pc.from_original == BranchRef::Gain) return gain_branch_slope(p, x);
    if (pc.from_original == BranchRef::Loss) return loss_branch_slope(p, x);
    const double d = (x - pc.center) / pc.scale;
    return -(pc.lam / pc.scale) * guarded_exp(pc.rate * d);
}

}  // namespace detail

// Piecewise-concave surrogate: gain piece on x >= breakpoint, loss piece on
// x < breakpoint. Case 1 passes the original utility through unchanged.
struct SurrogateUtility {
    SurrogatePiece gain;
    SurrogatePiece loss;
    double breakpoint = 0.0;
    CaseId case_id = CaseId::Case1;
    bool passthrough = false;
    double x_expansion = 0.0;
    double prox_tau = 0.0;
};

// Picks the construction case from the curvature-ratio signs and the position
// of the expansion point relative to the reference. Exact equality
// x_expansion == x0 with both ratios nonnegative is Case 6.
inline CaseId select_case(const CptParams& p, double x_expansion) {
    validate_params(p);
    const double qg = p.alpha / p.gamma1;
    const double ql = p.beta / p.gamma2;
    if (std::isnan(qg) || std::isnan(ql) || std::isnan(x_expansion))
        throw NoCaseApplies("non-finite case conditions");
    if (qg < 0.0 && ql < 0.0) return CaseId::Case1;
    if (x_expansion == p.x0 && qg >= 0.0 && ql >= 0.0) return CaseId::Case6;
    if (x_expansion >= p.x0 && qg < 0.0 && ql >= 0.0) return CaseId::Case2;
    if (x_expansion > p.x0 && qg >= 0.0) return CaseId::Case3;
    if (x_expansion <= p.x0 && qg >= 0.0 && ql < 0.0) return CaseId::Case4;
    if (x_expansion < p.x0 && ql >= 0.0) return CaseId::Case5;
    throw NoCaseApplies("parameter signs match no construction case");
}

namespace detail {

// Default free curvature rate: at least as curved as the original branch,
// never shallower than eps_curv, and within the case's upper bound.
inline double default_rate(double branch_ratio, double upper_bound, double eps_curv) {
    return std::min(upper_bound, -std::max(std::abs(branch_ratio), eps_curv));
}

// Rate for the paired-parameter pieces (Case 3 loss, Case 5 gain). The
// second parameter of the pair is fixed to the original exponent numerator,
// so the rate must also dominate its magnitude for the pair's ratio to reach
// one; otherwise the one-sided slopes cannot converge to the original ones
// as the expansion point approaches the reference.
inline double paired_rate(double branch_ratio, double orig_param, double upper_bound,
                          double eps_curv) {
    return std::min(upper_bound,
                    -std::max({std::abs(branch_ratio), std::abs(orig_param), eps_curv}));
}

// lam from slope s at the piece center: slope(center) = -lam/scale.
inline double lam_for_slope(double slope, double scale) { return -scale * slope; }

}  // namespace detail

inline SurrogateUtility build_surrogate(const CptParams& p, double x_expansion,
                                        const SurrogateConfig& cfg = {}) {
    const CaseId cid = select_case(p, x_expansion);
    const double qg = p.alpha / p.gamma1;
    const double ql = p.beta / p.gamma2;
    const double slope_gain_ref = gain_slope_at_ref(p);
    const double slope_loss_ref = loss_slope_at_ref(p);

    SurrogateUtility s;
    s.breakpoint = p.x0;
    s.case_id = cid;
    s.x_expansion = x_expansion;
    s.prox_tau = cfg.prox_tau;

    auto kept_gain = [&] {
        return SurrogatePiece{p.lambda1 / p.gamma1, qg, p.x0, p.m,
                              eval_gain_branch(p, p.x0), BranchRef::Gain};
    };
    auto kept_loss = [&] {
        return SurrogatePiece{p.lambda2 / p.gamma2, ql, p.x0, p.n,
                              eval_loss_branch(p, p.x0), BranchRef::Loss};
    };

    switch (cid) {
        case CaseId::Case1:
            s.passthrough = true;
            s.gain = kept_gain();
            s.loss = kept_loss();
            break;

        case CaseId::Case2: {
            s.gain = kept_gain();
            SurrogatePiece& lp = s.loss;
            lp.rate = detail::default_rate(ql, 0.0, cfg.eps_curv);
            lp.center = p.x0;
            lp.scale = p.n;
            lp.lam = detail::lam_for_slope(slope_loss_ref, p.n);
            lp.offset = eval_gain_branch(p, p.x0);
            break;
        }

        case CaseId::Case3: {
            SurrogatePiece& gp = s.gain;
            gp.rate = detail::default_rate(qg, 0.0, cfg.eps_curv);
            gp.center = x_expansion;
            gp.scale = p.m;
            gp.lam = detail::lam_for_slope(gain_branch_slope(p, x_expansion), p.m);
            gp.offset = eval_gain_branch(p, x_expansion);

            SurrogatePiece& lp = s.loss;
            lp.rate = detail::paired_rate(ql, p.beta, std::min(0.0, ql), cfg.eps_curv);
            lp.center = p.x0;
            lp.scale = p.n;
            const double pair_ratio =
                std::abs(p.beta) < kEpsLimit ? 1.0 : p.beta / lp.rate;
            const double gain_slope_at_x0 = detail::piece_slope(gp, p, p.x0);
            lp.lam = -p.n * pair_ratio * std::max(slope_loss_ref, gain_slope_at_x0);
            lp.offset = detail::piece_value(gp, p, p.x0);
            break;
        }

        case CaseId::Case4: {
            s.loss = kept_loss();
            SurrogatePiece& gp = s.gain;
            gp.rate = detail::default_rate(qg, 0.0, cfg.eps_curv);
            gp.center = p.x0;
            gp.scale = p.m;
            gp.lam = detail::lam_for_slope(slope_gain_ref, p.m);
            gp.offset = eval_loss_branch(p, p.x0);
            break;
        }

        case CaseId::Case5: {
            SurrogatePiece& lp = s.loss;
            lp.rate = detail::default_rate(ql, 0.0, cfg.eps_curv);
            lp.center = x_expansion;
            lp.scale = p.n;
            lp.lam = detail::lam_for_slope(loss_branch_slope(p, x_expansion), p.n);
            lp.offset = eval_loss_branch(p, x_expansion);

            SurrogatePiece& gp = s.gain;
            gp.rate = detail::paired_rate(qg, p.alpha, 0.0, cfg.eps_curv);
            gp.center = p.x0;
            gp.scale = p.m;
            const double pair_ratio =
                std::abs(p.alpha) < kEpsLimit ? 1.0 : p.alpha / gp.rate;
            const double loss_slope_at_x0 = detail::piece_slope(lp, p, p.x0);
            gp.lam = -p.m * pair_ratio * std::min(slope_gain_ref, loss_slope_at_x0);
            gp.offset = detail::piece_value(lp, p, p.x0);
            break;
        }

        case CaseId::Case6: {
            SurrogatePiece& gp = s.gain;
            gp.rate = detail::default_rate(qg, 0.0, cfg.eps_curv);
            gp.center = p.x0;
            gp.scale = p.m;
            gp.lam = detail::lam_for_slope(slope_gain_ref, p.m);
            gp.offset = eval_gain_branch(p, p.x0);

            SurrogatePiece& lp = s.loss;
            lp.rate = detail::default_rate(ql, 0.0, cfg.eps_curv);
            lp.center = p.x0;
            lp.scale = p.n;
            lp.lam = detail::lam_for_slope(slope_loss_ref, p.n);
            lp.offset = eval_loss_branch(p, p.x0);
            break;
        }
    }

    // A concave junction needs the loss-side slope at the breakpoint to
    // dominate the gain-side slope; agents violating it are outside the
    // method's assumptions.
    const double sg = detail::piece_slope(s.gain, p, p.x0);
    const double sl = detail::piece_slope(s.loss, p, p.x0);
    const double slack = 1e-9 * (1.0 + std::abs(sg) + std::abs(sl));
    if (sl < sg - slack) throw SlopeOrderViolation(sl, sg);
    return s;
}

inline double eval_surrogate(const SurrogateUtility& s, const CptParams& p, double x) {
    double v;
    if (s.passthrough) {
        v = eval_utility(p, x);
    } else {
        v = x >= s.breakpoint ? detail::piece_value(s.gain, p, x)
                              : detail::piece_value(s.loss, p, x);
    }
    if (s.prox_tau > 0.0) {
        const double d = x - s.x_expansion;
        v -= s.prox_tau * d * d;
    }
    return v;
}

inline double eval_surrogate_slope(const SurrogateUtility& s, const CptParams& p, double x,
                                   Side side = Side::TwoSided) {
    double sl;
    if (x > s.breakpoint) {
        sl = detail::piece_slope(s.gain, p, x);
    } else if (x < s.breakpoint) {
        sl = detail::piece_slope(s.loss, p, x);
    } else {
        switch (side) {
            case Side::Right: sl = detail::piece_slope(s.gain, p, x); break;
            case Side::Left: sl = detail::piece_slope(s.loss, p, x); break;
            default: throw KinkAt(s.breakpoint);
        }
    }
    if (s.prox_tau > 0.0) sl -= 2.0 * s.prox_tau * (x - s.x_expansion);
    return sl;
}

// Slope with the configured kink rule applied at the breakpoint; what the
// inner solver uses as its subgradient component.
inline double surrogate_subgradient_slope(const SurrogateUtility& s, const CptParams& p, double x,
                                          Side kink_side = Side::Right) {
    if (x == s.breakpoint) return eval_surrogate_slope(s, p, x, kink_side);
    return eval_surrogate_slope(s, p, x);
}

struct RuleReport {
    CaseId case_id = CaseId::Case1;
    // Rule 1: strong concavity. min over interior grid points of
    // -second_difference - eps_curv * h^2.
    double rule1_margin = 0.0;
    bool rule1_pass = false;
    // Rule 2: gradient match at the expansion point (one-sided when the
    // expansion point sits at the reference).
    double rule2_error = 0.0;
    bool rule2_pass = false;
    // Rule 3: slope continuity away from the breakpoint (finite-difference
    // probe against the analytic slope).
    double rule3_error = 0.0;
    bool rule3_pass = false;
    // Rule 5: minorization margin min(u - surrogate) over the grid.
    double rule5_margin = 0.0;
    bool rule5_pass = false;
    // Rule 6: one-sided slope agreement at the reference when the expansion
    // point is within rule6_eps of it.
    bool rule6_applicable = false;
    double rule6_gain_error = 0.0;
    double rule6_loss_error = 0.0;
    bool rule6_pass = true;

    bool all_pass() const {
        return rule1_pass && rule2_pass && rule3_pass && rule5_pass && rule6_pass;
    }
};

inline RuleReport verify_construction_rules(const SurrogateUtility& s, const CptParams& p,
                                            double x_expansion, std::span<const double> grid,
                                            const SurrogateConfig& cfg = {}) {
    RuleReport r;
    r.case_id = s.case_id;

    // Rule 1: second differences on consecutive grid triples.
    double margin1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double h = grid[i + 1] - grid[i];
        const double d2 = eval_surrogate(s, p, grid[i + 1]) - 2.0 * eval_surrogate(s, p, grid[i]) +
                          eval_surrogate(s, p, grid[i - 1]);
        margin1 = std::min(margin1, -d2 - cfg.eps_curv * h * h);
    }
    r.rule1_margin = margin1;
    r.rule1_pass = margin1 >= -1e-12;

    // Rule 2: gradient match at the expansion point.
    if (x_expansion == p.x0) {
        const double eg = std::abs(eval_surrogate_slope(s, p, p.x0, Side::Right) -
                                   gain_slope_at_ref(p));
        const double el = std::abs(eval_surrogate_slope(s, p, p.x0, Side::Left) -
                                   loss_slope_at_ref(p));
        r.rule2_error = std::max(eg, el);
    } else {
        r.rule2_error = std::abs(eval_surrogate_slope(s, p, x_expansion) -
                                 eval_derivative(p, x_expansion));
    }
    r.rule2_pass = r.rule2_error <= 1e-10 * (1.0 + std::abs(eval_derivative(
                                                p, x_expansion,
                                                x_expansion >= p.x0 ? Side::Right : Side::Left)));

    // Rule 3: probe slope continuity away from the breakpoint.
    double err3 = 0.0;
    for (double x : grid) {
        const double delta = 1e-6 * (1.0 + std::abs(x));
        if (std::abs(x - s.breakpoint) <= 2.0 * delta) continue;
        const double fd =
            (eval_surrogate(s, p, x + delta) - eval_surrogate(s, p, x - delta)) / (2.0 * delta);
        const double an = eval_surrogate_slope(s, p, x);
        err3 = std::max(err3, std::abs(fd - an) / (1.0 + std::abs(an)));
    }
    r.rule3_error = err3;
    r.rule3_pass = err3 <= 1e-5;

    // Rule 5: minorization over the grid.
    double margin5 = std::numeric_limits<double>::infinity();
    for (double x : grid)
        margin5 = std::min(margin5, eval_utility(p, x) - eval_surrogate(s, p, x));
    r.rule5_margin = margin5;
    r.rule5_pass = margin5 >= -1e-9;

    // Rule 6: one-sided slopes at the reference for near-reference expansions.
    if (std::abs(x_expansion - p.x0) <= cfg.rule6_eps) {
        r.rule6_applicable = true;
        r.rule6_gain_error =
            std::abs(eval_surrogate_slope(s, p, p.x0, Side::Right) - gain_slope_at_ref(p));
        r.rule6_loss_error =
            std::abs(eval_surrogate_slope(s, p, p.x0, Side::Left) - loss_slope_at_ref(p));
        const double tol = 1e-4 * (1.0 + std::abs(gain_slope_at_ref(p)) +
                                   std::abs(loss_slope_at_ref(p)));
        r.rule6_pass = r.rule6_gain_error <= tol && r.rule6_loss_error <= tol;
    }
    return r;
}

}  // namespace cpt
