#pragma once

#include <cmath>

#include "cpt/common.hpp"
#include "cpt/params.hpp"

namespace cpt {

enum class Side { Left, Right, TwoSided };

namespace detail {

// Guarded exponent: clips at +-kExpClip, refuses beyond the hard cap. Only a
// large positive exponent is unrepresentable; a large negative one underflows
// to zero harmlessly, so the refusal applies to the positive side.
inline double guarded_exp(double e, double hard_cap = kExpHardCap) {
    if (e > hard_cap) throw Overflow(e);
    if (e > kExpClip) e = kExpClip;
    if (e < -kExpClip) e = -kExpClip;
    return std::exp(e);
}

// One branch of the utility: lam * (mu - exp((a/g)*(x-x0)/s)) / a.
// For |a| below eps_limit the value is computed from the series of
// (1 - exp(a*t))/a in powers of a (through second order), with the
// (mu - 1)/a part kept separate, so the linear regime is a continuous limit.
inline double branch_value(double lam, double a, double g, double mu, double s, double x,
                           double x0, double eps_limit = kEpsLimit) {
    const double t = (x - x0) / (g * s);
    if (std::abs(a) < eps_limit) {
        const double base = (mu == 1.0) ? 0.0 : (mu - 1.0) / a;
        const double z = a * t;
        return lam * (base - t * (1.0 + z / 2.0 + z * z / 6.0));
    }
    const double e = guarded_exp(a * t);
    return lam * (mu - e) / a;
}

// Analytic branch derivative -(lam/(g*s)) * exp((a/g)*(x-x0)/s); no small-a
// special case is needed because the expression has no cancellation.
inline double branch_slope(double lam, double a, double g, double s, double x, double x0) {
    const double t = (x - x0) / (g * s);
    return -(lam / (g * s)) * guarded_exp(a * t);
}

}  // namespace detail

// Gain-branch formula evaluated at any x (the expression extends smoothly
// beyond its subdomain).
inline double eval_gain_branch(const CptParams& p, double x) {
    return detail::branch_value(p.lambda1, p.alpha, p.gamma1, p.mu1, p.m, x, p.x0);
}

inline double eval_loss_branch(const CptParams& p, double x) {
    return detail::branch_value(p.lambda2, p.beta, p.gamma2, p.mu2, p.n, x, p.x0);
}

inline double gain_branch_slope(const CptParams& p, double x) {
    return detail::branch_slope(p.lambda1, p.alpha, p.gamma1, p.m, x, p.x0);
}

inline double loss_branch_slope(const CptParams& p, double x) {
    return detail::branch_slope(p.lambda2, p.beta, p.gamma2, p.n, x, p.x0);
}

// u'(x0+) and u'(x0-): the one-sided slopes at the reference point.
inline double gain_slope_at_ref(const CptParams& p) { return -p.lambda1 / (p.gamma1 * p.m); }
inline double loss_slope_at_ref(const CptParams& p) { return -p.lambda2 / (p.gamma2 * p.n); }

inline double eval_utility(const CptParams& p, double x) {
    return x >= p.x0 ? eval_gain_branch(p, x) : eval_loss_branch(p, x);
}

// Analytic derivative of the active branch. At x = x0 the branch is chosen by
// `side`; a TwoSided query at the kink throws.
inline double eval_derivative(const CptParams& p, double x, Side side = Side::TwoSided) {
    if (x > p.x0) return gain_branch_slope(p, x);
    if (x < p.x0) return loss_branch_slope(p, x);
    switch (side) {
        case Side::Right: return gain_slope_at_ref(p);
        case Side::Left: return loss_slope_at_ref(p);
        default: throw KinkAt(p.x0);
    }
}

// Kink magnitude u'(x0-) - u'(x0+); positive under loss aversion.
inline double slope_jump_at_ref(const CptParams& p) {
    return loss_slope_at_ref(p) - gain_slope_at_ref(p);
}

struct UrParts {
    double smooth;  // U: u plus the kink-cancelling linear term on gains
    double hinge;   // R: the nonsmooth hinge, U + R = u exactly
};

// Splits u into a smooth part U and a hinge R:
//   U(x) = u(x) + 1{x >= x0} * (u'(x0-) - u'(x0+)) * (x - x0)
//   R(x) =      - 1{x >= x0} * (u'(x0-) - u'(x0+)) * (x - x0)
inline UrParts decompose_u_r(const CptParams& p, double x) {
    const double u = eval_utility(p, x);
    if (x >= p.x0) {
        const double lin = slope_jump_at_ref(p) * (x - p.x0);
        return {u + lin, -lin};
    }
    return {u, 0.0};
}

// Derivative of the smooth part U (one-sided at the kink both sides agree,
// which is the point of the decomposition).
inline double smooth_part_slope(const CptParams& p, double x, Side side = Side::TwoSided) {
    if (x > p.x0) return gain_branch_slope(p, x) + slope_jump_at_ref(p);
    if (x < p.x0) return loss_branch_slope(p, x);
    (void)side;
    return loss_slope_at_ref(p);
}

}  // namespace cpt
