#pragma once

// Propagation along a single edge and scattering at junctions.
//
// Junctions enforce pressure continuity and volume-velocity conservation, so
// the branches seen from an incident port act as admittances in parallel.
// For a degree-2 junction this is the familiar two-media pressure coefficient
// R = (z2 - z1) / (z2 + z1).

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hyperlattice/error.hpp"
#include "hyperlattice/lattice.hpp"

namespace hyperlattice {

using complex = std::complex<double>;

struct Wavenumber {
    complex value;
};

/// k = (omega / c) (1 - i eta).
inline Wavenumber wavenumber(double omega, double speed, double loss_factor) {
    if (!(speed > 0.0)) throw DomainError("wavenumber: speed must be positive");
    if (omega < 0.0) throw DomainError("wavenumber: omega must be nonnegative");
    const double k0 = omega / speed;
    return {complex(k0, -k0 * loss_factor)};
}

inline complex propagator(Wavenumber k, double distance) {
    return std::exp(complex(0.0, -1.0) * k.value * distance);
}

/// Load seen by a wave arriving on one port. Infinite for an isolated rigid end.
struct LoadImpedance {
    double value = 0.0;

    bool is_infinite() const { return std::isinf(value); }
};

inline LoadImpedance load_impedance(const Node& node, std::size_t incident_port,
                                    std::span<const double> branch_impedances) {
    if (incident_port >= node.ports.size() || branch_impedances.size() != node.ports.size())
        throw UsageError("load_impedance: port index or impedance list does not match node " +
                         std::to_string(node.id));
    if (node.termination.pressure_release) return {0.0};
    double admittance = node.termination.admittance;
    for (std::size_t j = 0; j < branch_impedances.size(); ++j)
        if (j != incident_port) admittance += 1.0 / branch_impedances[j];
    if (admittance == 0.0) return {std::numeric_limits<double>::infinity()};
    return {1.0 / admittance};
}

/// Column q holds the outgoing pressure waves produced by a unit wave arriving
/// on port q; the diagonal is reflection.
struct JunctionScattering {
    int node = 0;
    Eigen::MatrixXd s;
};

inline JunctionScattering junction_matrix(const Node& node, std::span<const double> branch_impedances) {
    for (double z : branch_impedances)
        if (!(z > 0.0)) throw DomainError("junction_matrix: branch impedances must be positive");
    const auto n = static_cast<Eigen::Index>(node.ports.size());
    JunctionScattering out{node.id, Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index q = 0; q < n; ++q) {
        const auto load = load_impedance(node, static_cast<std::size_t>(q), branch_impedances);
        const double zq = branch_impedances[static_cast<std::size_t>(q)];
        const double r = load.is_infinite() ? 1.0 : (load.value - zq) / (load.value + zq);
        for (Eigen::Index p = 0; p < n; ++p) out.s(p, q) = (p == q) ? r : 1.0 + r;
    }
    return out;
}

/// Characteristic impedances of the branches meeting at a node, in port order.
inline std::vector<double> branch_impedances(const Lattice& lat, const Node& node) {
    std::vector<double> z;
    z.reserve(node.ports.size());
    for (const auto& p : node.ports) z.push_back(lat.edge(p.edge).impedance());
    return z;
}

inline JunctionScattering junction_matrix(const Lattice& lat, const Node& node) {
    const auto z = branch_impedances(lat, node);
    return junction_matrix(node, z);
}

} // namespace hyperlattice
