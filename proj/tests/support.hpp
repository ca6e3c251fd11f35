#pragma once

// Small fixtures shared by the test programs.

#include "hyperlattice/hyperlattice.hpp"

namespace testing_support {

using namespace hyperlattice;

/// Single unit edge with both ends terminated in its own impedance (R = 0).
inline Lattice matched_edge(double loss_factor = 0.0) {
    Lattice lat = generate(1, 0);
    lat.edges[0].loss_factor = loss_factor;
    for (auto& n : lat.nodes) n.termination = Termination::impedance(1.0);
    return lat;
}

/// The single-string scenario: L = c = rho = 1, pressure-release ends.
inline Lattice paper_string(double loss_factor = 0.003) {
    Lattice lat = generate(1, 0);
    lat.edges[0].loss_factor = loss_factor;
    return lat;
}

/// Square with all lengths, speeds and densities equal to one.
inline Lattice unit_square(double loss_factor = 0.003) {
    GenerateOptions o;
    o.length = Sampler::constant(1.0);
    o.density = Sampler::constant(1.0);
    o.loss_factor = loss_factor;
    o.min_round_trip_separation = 0.0;
    return generate(2, o, 0);
}

} // namespace testing_support
