#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hyperlattice/tdtransform.hpp"

namespace hyperlattice {

struct CompareTolerances {
    double time = 0.0;              ///< absolute, usually 2 dt
    double amplitude_relative = 0.1;
};

struct PeakMatch {
    std::size_t candidate = 0;
    std::size_t reference = 0;
    double time_delta = 0.0;      ///< candidate - reference
    double amplitude_delta = 0.0; ///< candidate - reference
};

struct CompareReport {
    std::vector<PeakMatch> matches;
    std::vector<std::size_t> unmatched_candidate;
    std::vector<std::size_t> unmatched_reference;

    bool passed() const { return unmatched_candidate.empty(); }
};

/// One-to-one matching of candidate peaks (usually the solver's) against
/// reference peaks: a candidate matches the nearest unused reference within
/// the time tolerance whose amplitude agrees to the relative tolerance.
inline CompareReport compare_arrivals(const std::vector<Arrival>& candidate, const std::vector<Arrival>& reference,
                                      const CompareTolerances& tol) {
    CompareReport report;
    std::vector<bool> used(reference.size(), false);
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        const auto& c = candidate[i];
        std::size_t best = reference.size();
        double best_dt = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < reference.size(); ++j) {
            if (used[j]) continue;
            const auto& r = reference[j];
            const double dt = std::abs(c.time - r.time);
            if (dt > tol.time) continue;
            if (std::abs(c.amplitude - r.amplitude) > tol.amplitude_relative * std::abs(r.amplitude)) continue;
            if (dt < best_dt) {
                best_dt = dt;
                best = j;
            }
        }
        if (best == reference.size()) {
            report.unmatched_candidate.push_back(i);
            continue;
        }
        used[best] = true;
        report.matches.push_back({i, best, c.time - reference[best].time, c.amplitude - reference[best].amplitude});
    }
    for (std::size_t j = 0; j < reference.size(); ++j)
        if (!used[j]) report.unmatched_reference.push_back(j);
    return report;
}

} // namespace hyperlattice
