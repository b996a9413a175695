#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "cpt/common.hpp"
#include "cpt/dual.hpp"
#include "cpt/scenario.hpp"
#include "cpt/utility.hpp"

namespace cpt {

struct OracleConfig {
    std::size_t grid_points_per_axis = 401;
    std::size_t n_starts = 16;
    std::uint64_t start_seed = 1;
    double local_tol = 1e-10;
    std::size_t max_local_iters = 5000;
    double step0_rel = 0.5;
};

inline constexpr std::size_t kGridMaxAgents = 4;

// Exact Euclidean projection onto {x >= 0, sum(x) <= cap}. When the clamped
// point already fits the budget it is the projection; otherwise the budget is
// active and the sort-based simplex threshold applies.
inline Vec project_capped_simplex(Vec x, double cap) {
    Vec y = x;
    double s = 0.0;
    for (double& v : y) {
        v = std::max(v, 0.0);
        s += v;
    }
    if (s <= cap) return y;

    Vec u = x;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - cap) / static_cast<double>(j + 1);
        if (j + 1 == u.size() || u[j + 1] <= t) {
            tau = t;
            break;
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(x[i] - tau, 0.0);
    return x;
}

namespace detail {

inline bool lex_less(const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

template <class Fn>
void parallel_chunks(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        fn(0, 0, count);
        return;
    }
    workers = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, w, lo, hi] { fn(w, lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

struct GridResult {
    Vec alloc;
    double objective = std::numeric_limits<double>::infinity();
    std::size_t points_evaluated = 0;
};

// Exhaustive lattice search over {P >= 0, sum(P) <= P_total} with
// grid_points_per_axis values per axis. Per-agent utility values are
// tabulated per lattice level, so a point costs N adds. Deterministic; ties
// resolve to the lexicographically smallest allocation.
inline GridResult grid_search(const AllocationProblem& pr, const OracleConfig& cfg,
                              std::size_t workers = 1) {
    pr.validate();
    const std::size_t n = pr.size();
    if (n > kGridMaxAgents) throw TooManyAgents(n, kGridMaxAgents);
    const std::size_t g = cfg.grid_points_per_axis;
    if (g < 2) throw BadSpec("grid_points_per_axis must be at least 2");
    const double step = pr.p_total / static_cast<double>(g - 1);

    // value_table[i][j] = -w_i * u_i(snr(j*step)); objective = sum of rows.
    std::vector<Vec> table(n, Vec(g));
    for (std::size_t i = 0; i < n; ++i) {
        const Agent& a = pr.agents[i];
        const double w = apply_pwf(pr.pwf, a.prob);
        for (std::size_t j = 0; j < g; ++j) {
            const double p = static_cast<double>(j) * step;
            table[i][j] = w == 0.0 ? 0.0 : -w * eval_utility(a.params, snr(p, a.gain, pr.noise_var));
        }
    }

    struct Best {
        double f = std::numeric_limits<double>::infinity();
        std::array<std::size_t, kGridMaxAgents> idx{};
        std::size_t count = 0;
    };
    std::vector<Best> best_per_chunk(std::max<std::size_t>(workers, 1));

    // Integer budget: sum of indices <= g - 1 corresponds exactly to
    // sum(P) <= P_total.
    detail::parallel_chunks(g, workers, [&](std::size_t w, std::size_t lo, std::size_t hi) {
        Best best;
        std::array<std::size_t, kGridMaxAgents> idx{};
        auto consider = [&](double f) {
            if (f < best.f) {
                best.f = f;
                best.idx = idx;
            }
        };
        for (std::size_t j0 = lo; j0 < hi; ++j0) {
            idx[0] = j0;
            const std::size_t rem0 = g - 1 - j0;
            const double f0 = table[0][j0];
            if (n == 1) {
                consider(f0);
                ++best.count;
                continue;
            }
            for (std::size_t j1 = 0; j1 <= rem0; ++j1) {
                idx[1] = j1;
                const std::size_t rem1 = rem0 - j1;
                const double f1 = f0 + table[1][j1];
                if (n == 2) {
                    consider(f1);
                    ++best.count;
                    continue;
                }
                for (std::size_t j2 = 0; j2 <= rem1; ++j2) {
                    idx[2] = j2;
                    const std::size_t rem2 = rem1 - j2;
                    const double f2 = f1 + table[2][j2];
                    if (n == 3) {
                        consider(f2);
                        ++best.count;
                        continue;
                    }
                    for (std::size_t j3 = 0; j3 <= rem2; ++j3) {
                        idx[3] = j3;
                        consider(f2 + table[3][j3]);
                        ++best.count;
                    }
                }
            }
        }
        best_per_chunk[w] = best;
    });

    // Enumeration is in lexicographic order within each chunk and chunks are
    // ordered by the first index, so keeping the first strict improvement
    // yields the lexicographically smallest argmin.
    Best overall;
    for (const Best& b : best_per_chunk) {
        overall.count += b.count;
        if (b.f < overall.f) {
            overall.f = b.f;
            overall.idx = b.idx;
        }
    }

    GridResult out;
    out.objective = overall.f;
    out.points_evaluated = overall.count;
    out.alloc.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.alloc[i] = static_cast<double>(overall.idx[i]) * step;
    return out;
}

struct StartOutcome {
    std::size_t start_index = 0;
    double objective = std::numeric_limits<double>::infinity();
    std::size_t iters = 0;
    bool stalled = false;  // stopped by local_tol rather than the budget
};

struct MultistartResult {
    Vec alloc;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<StartOutcome> starts;
};

namespace detail {

// Projected gradient descent with diminishing steps on the piecewise-smooth
// objective; the hinge at the reference point uses the right-side derivative.
// Feasibility is kept by exact projection onto the capped simplex.
inline std::pair<Vec, double> local_descent(const AllocationProblem& pr, const ProblemView& view,
                                            Vec p, const OracleConfig& cfg,
                                            StartOutcome& outcome) {
    const std::size_t n = pr.size();
    Vec grad(n);
    auto fill_grad = [&](const Vec& q) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = q[i] * view.chain[i];
            const double du = eval_derivative(pr.agents[i].params, x,
                                              x == pr.agents[i].params.x0 ? Side::Right
                                                                          : Side::TwoSided);
            grad[i] = -view.weight[i] * du * view.chain[i];
        }
    };

    fill_grad(p);
    double gmax = 0.0;
    for (double v : grad) gmax = std::max(gmax, std::abs(v));
    const double step0 =
        cfg.step0_rel * pr.p_total / (static_cast<double>(n) * (1.0 + gmax));

    Vec best = p;
    double f_best = objective(pr, p);
    double stall_ref = f_best;
    for (std::size_t j = 1; j <= cfg.max_local_iters; ++j) {
        const double eta = step0 / std::sqrt(static_cast<double>(j));
        fill_grad(p);
        for (std::size_t i = 0; i < n; ++i) p[i] -= eta * grad[i];
        p = project_capped_simplex(std::move(p), pr.p_total);
        const double f = objective(pr, p);
        if (f < f_best) {
            f_best = f;
            best = p;
        }
        outcome.iters = j;
        if (j % 100 == 0) {
            if (stall_ref - f_best <= cfg.local_tol * (1.0 + std::abs(f_best))) {
                outcome.stalled = true;
                break;
            }
            stall_ref = f_best;
        }
    }
    outcome.objective = f_best;
    return {std::move(best), f_best};
}

}  // namespace detail

// Multi-start local baseline: seeded uniform-simplex starts (normalized
// exponentials), each refined by projected gradient descent. Starts run in
// parallel; the merge is deterministic with ties broken toward the
// lexicographically smallest allocation.
inline MultistartResult multistart_local(const AllocationProblem& pr, const OracleConfig& cfg,
                                         std::size_t workers = 1) {
    pr.validate();
    const std::size_t n = pr.size();
    const ProblemView view = make_view(pr);

    std::vector<Vec> results(cfg.n_starts);
    std::vector<double> values(cfg.n_starts);
    MultistartResult out;
    out.starts.resize(cfg.n_starts);

    detail::parallel_chunks(cfg.n_starts, workers, [&](std::size_t, std::size_t lo,
                                                       std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            detail::Rng rng(cfg.start_seed + 0x9e3779b97f4a7c15ULL * (s + 1));
            Vec p(n);
            double sum = 0.0;
            for (double& v : p) {
                v = rng.exponential1();
                sum += v;
            }
            for (double& v : p) v *= pr.p_total / sum;
            out.starts[s].start_index = s;
            auto [alloc, f] = detail::local_descent(pr, view, std::move(p), cfg, out.starts[s]);
            results[s] = std::move(alloc);
            values[s] = f;
        }
    });

    for (std::size_t s = 0; s < cfg.n_starts; ++s) {
        if (values[s] < out.objective ||
            (values[s] == out.objective && detail::lex_less(results[s], out.alloc))) {
            out.objective = values[s];
            out.alloc = results[s];
        }
    }
    return out;
}

}  // namespace cpt
