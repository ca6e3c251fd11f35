#pragma once

// Scenario orchestration: canonical runs, the in-vivo and in-vitro variants
// and the excess (dimension-attributable) response.
//
//   total     - the lattice as generated
//   in_vivo   - connectors of one level stretched past the observation window,
//               impedances untouched, so every junction scatters exactly as
//               before but nothing returns through those connectors in time
//   in_vitro  - connectors of one level replaced by pressure-release ends,
//               decoupling the generator entirely
//   excess    - total minus in_vivo

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperlattice/error.hpp"
#include "hyperlattice/fdsolver.hpp"
#include "hyperlattice/lattice.hpp"
#include "hyperlattice/tdtransform.hpp"

namespace hyperlattice {

enum class Variant { total, in_vivo, in_vitro, excess };

inline const char* to_string(Variant v) {
    switch (v) {
    case Variant::total: return "total";
    case Variant::in_vivo: return "in_vivo";
    case Variant::in_vitro: return "in_vitro";
    case Variant::excess: return "excess";
    }
    return "?";
}

/// Everything a single frequency sweep needs.
struct ScenarioInputs {
    Lattice lattice;
    DriveSpec drive;
    AssessSpec assess;
    SweepConfig sweep;
};

struct ScenarioResult {
    Variant variant = Variant::total;
    Lattice lattice;
    DriveSpec drive;
    AssessSpec assess;
    SweepConfig sweep;
    FrequencyResponse frequency;
    TimeResponse time;
    std::vector<Arrival> arrivals;
};

/// Loss factor of system 1 in the canonical runs.
inline constexpr double kCanonicalLossFactor = 0.003;

/// Drive system 1 at 0.2, assess it at 0.7, unit amplitude, default sweep.
/// System 1 keeps L = c = rho = 1 and eta = 0.003; overrides are applied last.
inline ScenarioInputs canonical_scenario(int dimension, std::uint64_t seed, const ParameterOverrides& overrides = {},
                                         const GenerateOptions& options = {}) {
    Lattice lat = generate(dimension, options, seed);
    auto& first = lat.edges[lat.edge_index(1)];
    first.length = first.speed = first.density = 1.0;
    first.loss_factor = kCanonicalLossFactor;
    lat = override_parameters(lat, overrides);
    return {std::move(lat), DriveSpec{1, 0.2, 1.0}, AssessSpec{1, 0.7}, SweepConfig{}};
}

namespace detail {

inline std::vector<int> require_connectors(const Lattice& lat, int level) {
    auto ids = lat.connector_ids(level);
    if (ids.empty())
        throw UsageError("lattice has no connector edges at level " + std::to_string(level));
    return ids;
}

} // namespace detail

/// Lengthens every level-`level` connector by speed * time_window, so even a
/// one-way traversal outlasts the window. Impedances and thus every junction
/// matrix are unchanged.
inline Lattice in_vivo_variant(const Lattice& lattice, int level, double time_window) {
    if (!(time_window > 0.0)) throw DomainError("in_vivo_variant: time_window must be positive");
    Lattice out = lattice;
    for (int id : detail::require_connectors(lattice, level)) {
        auto& e = out.edges[out.edge_index(id)];
        e.length += e.speed * time_window;
    }
    return out;
}

/// Zero connector impedance: every node touched by a level-`level` connector
/// becomes a pressure-release junction (R = -1, no transmission).
inline Lattice in_vitro_variant(const Lattice& lattice, int level) {
    Lattice out = lattice;
    for (int id : detail::require_connectors(lattice, level))
        for (auto& node : out.nodes)
            for (const auto& p : node.ports)
                if (p.edge == id) node.termination = Termination::release();
    return out;
}

inline TimeResponse excess_response(const TimeResponse& total, const TimeResponse& in_vivo) {
    if (total.dt != in_vivo.dt || total.values.size() != in_vivo.values.size() ||
        total.unit_peak != in_vivo.unit_peak)
        throw UsageError("excess_response: time grids differ");
    TimeResponse out = total;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = total.values[i] - in_vivo.values[i];
    out.imag_residue = std::max(total.imag_residue, in_vivo.imag_residue);
    return out;
}

inline ScenarioResult run_scenario(const ScenarioInputs& in, Variant variant = Variant::total,
                                   double relative_threshold = 1e-3, unsigned jobs = 1) {
    ScenarioResult r;
    r.variant = variant;
    r.lattice = in.lattice;
    r.drive = in.drive;
    r.assess = in.assess;
    r.sweep = in.sweep;
    r.frequency = frequency_response(in.lattice, in.drive, in.assess, in.sweep.grid(), jobs);
    r.time = to_time(r.frequency, in.sweep);
    r.arrivals = find_arrivals(r.time, relative_threshold);
    return r;
}

/// Excess of a total run over its in-vivo counterpart. Both must share drive,
/// assessment point and sweep.
inline ScenarioResult excess_result(const ScenarioResult& total, const ScenarioResult& in_vivo,
                                    double relative_threshold = 1e-3) {
    if (!(total.drive == in_vivo.drive) || !(total.assess == in_vivo.assess) || !(total.sweep == in_vivo.sweep))
        throw UsageError("excess_result: runs differ in drive, assessment point or sweep");
    ScenarioResult r;
    r.variant = Variant::excess;
    r.lattice = total.lattice;
    r.drive = total.drive;
    r.assess = total.assess;
    r.sweep = total.sweep;
    r.frequency.grid = total.frequency.grid;
    r.frequency.values.resize(total.frequency.values.size());
    for (std::size_t m = 0; m < r.frequency.values.size(); ++m)
        r.frequency.values[m] = total.frequency.values[m] - in_vivo.frequency.values[m];
    r.time = excess_response(total.time, in_vivo.time);
    r.arrivals = find_arrivals(r.time, relative_threshold);
    return r;
}

} // namespace hyperlattice
