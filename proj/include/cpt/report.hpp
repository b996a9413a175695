#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cpt/common.hpp"

namespace cpt {

// One benchmark instance: solver vs baseline, minimization orientation.
// rel_improvement = (f_baseline - f_solver) / |f_baseline|; positive means
// the solver found a better (lower) objective.
struct RunRow {
    std::uint64_t seed = 0;
    std::size_t n_agents = 0;
    double solver_obj = 0.0;
    double baseline_obj = 0.0;
    double rel_improvement = 0.0;
    std::string status;
    bool failed = false;
    std::string error;
};

inline double relative_improvement(double solver_obj, double baseline_obj) {
    const double denom = std::max(std::abs(baseline_obj), 1e-12);
    return (baseline_obj - solver_obj) / denom;
}

// Symmetric trimmed mean: drops ceil(q * count) smallest and largest values.
inline double trimmed_mean(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t drop =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    if (2 * drop >= values.size()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t i = drop; i < values.size() - drop; ++i) sum += values[i];
    return sum / static_cast<double>(values.size() - 2 * drop);
}

// Equal-or-better within a tolerance of tol_pct percent: a relative
// difference no worse than -tol_pct/100 counts as equivalent.
inline bool better_or_equal(double rel_improvement, double tol_pct) {
    return rel_improvement >= -tol_pct / 100.0;
}

struct Aggregate {
    std::size_t n_agents = 0;
    std::size_t count = 0;
    std::size_t failed = 0;
    double pct_better_eq_tol0 = 0.0;
    double pct_better_eq_tol2 = 0.0;
    double mean_improvement_pct = 0.0;
    double trimmed_1pct = 0.0;
    double trimmed_2pct = 0.0;
    double trimmed_5pct = 0.0;
};

struct RunReport {
    std::vector<RunRow> rows;       // sorted by (n_agents, seed)
    std::vector<Aggregate> groups;  // one per n_agents, ascending
};

inline void sort_rows(std::vector<RunRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
        if (a.n_agents != b.n_agents) return a.n_agents < b.n_agents;
        return a.seed < b.seed;
    });
}

inline std::vector<Aggregate> aggregate_rows(const std::vector<RunRow>& rows) {
    std::map<std::size_t, std::vector<const RunRow*>> by_n;
    for (const RunRow& r : rows) by_n[r.n_agents].push_back(&r);

    std::vector<Aggregate> out;
    for (const auto& [n, group] : by_n) {
        Aggregate a;
        a.n_agents = n;
        a.count = group.size();
        std::vector<double> gaps;
        gaps.reserve(group.size());
        std::size_t ok0 = 0;
        std::size_t ok2 = 0;
        double sum = 0.0;
        for (const RunRow* r : group) {
            if (r->failed) {
                ++a.failed;
                continue;
            }
            gaps.push_back(r->rel_improvement);
            sum += r->rel_improvement;
            if (better_or_equal(r->rel_improvement, 0.0)) ++ok0;
            if (better_or_equal(r->rel_improvement, 2.0)) ++ok2;
        }
        const double denom = gaps.empty() ? 1.0 : static_cast<double>(gaps.size());
        a.pct_better_eq_tol0 = 100.0 * static_cast<double>(ok0) / denom;
        a.pct_better_eq_tol2 = 100.0 * static_cast<double>(ok2) / denom;
        a.mean_improvement_pct = gaps.empty() ? 0.0 : 100.0 * sum / denom;
        a.trimmed_1pct = 100.0 * trimmed_mean(gaps, 0.01);
        a.trimmed_2pct = 100.0 * trimmed_mean(gaps, 0.02);
        a.trimmed_5pct = 100.0 * trimmed_mean(gaps, 0.05);
        out.push_back(a);
    }
    return out;
}

}  // namespace cpt
