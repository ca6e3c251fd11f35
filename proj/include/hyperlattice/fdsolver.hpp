#pragma once

// Frequency-domain response of a waveguide lattice.
//
// Unknowns are the outgoing wave amplitudes a[e, end]: the wave leaving the
// node at that end of edge e and travelling into e. They are ordered
// a[e1, low], a[e1, high], a[e2, low], ... with edges in id order. A wave that
// leaves one end arrives at the other multiplied by exp(-i k_e L_e), where it
// is scattered by the junction matrix, giving (I - S P) a = S b with b the
// drive's waves arriving at the ends of its edge.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "hyperlattice/error.hpp"
#include "hyperlattice/lattice.hpp"
#include "hyperlattice/scattering.hpp"

namespace hyperlattice {

/// Point drive strictly inside an edge; position is measured from the low end.
struct DriveSpec {
    int edge = 1;
    double position = 0.2;
    double amplitude = 1.0;

    friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

struct AssessSpec {
    int edge = 1;
    double position = 0.7;

    friend bool operator==(const AssessSpec&, const AssessSpec&) = default;
};

/// omega_m = m * delta_omega for m = 0 .. count-1.
struct FrequencyGrid {
    double delta_omega = 0.0;
    std::size_t count = 0;

    double omega(std::size_t m) const { return static_cast<double>(m) * delta_omega; }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

struct LinearSystem {
    Eigen::MatrixXcd matrix;
    std::vector<Port> unknowns; ///< unknowns[i] is the (edge, end) amplitude in column i
};

struct WaveState {
    double omega = 0.0;
    std::uint64_t lattice_fingerprint = 0;
    Eigen::VectorXcd amplitudes;
    double relative_residual = 0.0;
};

struct FrequencyResponse {
    FrequencyGrid grid;
    std::vector<complex> values;
};

inline std::size_t unknown_index(std::size_t edge_index, EdgeEnd end) {
    return 2 * edge_index + (end == EdgeEnd::high ? 1 : 0);
}

namespace detail {

inline void require_interior(const Lattice& lat, int edge, double position, const char* what) {
    if (!lat.has_edge(edge))
        throw UsageError(std::string(what) + " references unknown edge " + std::to_string(edge));
    const double len = lat.edge(edge).length;
    if (!(position > 0.0 && position < len))
        throw UsageError(std::string(what) + " position must lie strictly inside edge " +
                         std::to_string(edge));
}

inline void require_structure(const Lattice& lat) {
    const auto v = structural_violations(lat);
    if (!v.empty()) throw UsageError("lattice is not solvable: " + v.front());
}

/// Frequency-independent part of the system: junction matrices and the
/// unknown index of every port's outgoing and incoming wave.
class Network {
public:
    struct Junction {
        Eigen::MatrixXd s;
        std::vector<std::size_t> outgoing; ///< row of a[port edge, port end]
        std::vector<std::size_t> incoming; ///< unknown whose wave arrives on the port
        std::vector<std::size_t> edge;     ///< edge index of each port
    };

    explicit Network(const Lattice& lat) : lattice_(&lat) {
        require_structure(lat);
        junctions_.reserve(lat.nodes.size());
        for (const auto& node : lat.nodes) {
            Junction j;
            j.s = junction_matrix(lat, node).s;
            for (const auto& p : node.ports) {
                const auto ei = lat.edge_index(p.edge);
                j.outgoing.push_back(unknown_index(ei, p.end));
                j.incoming.push_back(unknown_index(ei, opposite(p.end)));
                j.edge.push_back(ei);
            }
            junctions_.push_back(std::move(j));
        }
    }

    const Lattice& lattice() const { return *lattice_; }
    std::size_t size() const { return 2 * lattice_->edges.size(); }

    Eigen::VectorXcd edge_propagators(double omega) const {
        const auto& edges = lattice_->edges;
        Eigen::VectorXcd p(static_cast<Eigen::Index>(edges.size()));
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto k = wavenumber(omega, edges[i].speed, edges[i].loss_factor);
            p[static_cast<Eigen::Index>(i)] = propagator(k, edges[i].length);
        }
        return p;
    }

    Eigen::MatrixXcd matrix(const Eigen::VectorXcd& prop) const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
        for (const auto& j : junctions_) {
            const auto deg = j.outgoing.size();
            for (std::size_t p = 0; p < deg; ++p)
                for (std::size_t q = 0; q < deg; ++q) {
                    const double s = j.s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                    if (s == 0.0) continue;
                    a(static_cast<Eigen::Index>(j.outgoing[p]), static_cast<Eigen::Index>(j.incoming[q])) -=
                        s * prop[static_cast<Eigen::Index>(j.edge[q])];
                }
        }
        return a;
    }

    /// S b, where b holds the drive's two half-amplitude waves on arrival at
    /// the ends of the driven edge.
    Eigen::VectorXcd source(const DriveSpec& drive, double omega) const {
        const auto& lat = *lattice_;
        const auto di = lat.edge_index(drive.edge);
        const auto& e = lat.edges[di];
        const auto k = wavenumber(omega, e.speed, e.loss_factor);
        const double half = 0.5 * drive.amplitude;
        const complex at_low = half * propagator(k, drive.position);
        const complex at_high = half * propagator(k, e.length - drive.position);

        Eigen::VectorXcd s = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(size()));
        for (const auto& j : junctions_) {
            const auto deg = j.outgoing.size();
            for (std::size_t q = 0; q < deg; ++q) {
                if (j.edge[q] != di) continue;
                // incoming[q] names the departing amplitude on the far end, so
                // the port at the low end receives the wave heading toward low.
                const bool port_is_low = j.incoming[q] == unknown_index(di, EdgeEnd::high);
                const complex b = port_is_low ? at_low : at_high;
                for (std::size_t p = 0; p < deg; ++p)
                    s[static_cast<Eigen::Index>(j.outgoing[p])] +=
                        j.s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * b;
            }
        }
        return s;
    }

private:
    const Lattice* lattice_;
    std::vector<Junction> junctions_;
};

inline std::string omega_text(double omega) {
    std::ostringstream os;
    os.precision(12);
    os << omega;
    return os.str();
}

inline WaveState solve(const Network& net, const DriveSpec& drive, double omega, std::uint64_t fp) {
    if (!(omega > 0.0))
        throw NumericalError("omega = 0 gives a singular system (rigid-body mode); the DC bin is defined as 0",
                             omega);
    const auto prop = net.edge_propagators(omega);
    const Eigen::MatrixXcd a = net.matrix(prop);
    const Eigen::VectorXcd s = net.source(drive, omega);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13))
        throw NumericalError("system is numerically singular at omega = " + omega_text(omega) +
                                 " (exact resonance); use a loss factor eta > 0",
                             omega);
    WaveState st;
    st.omega = omega;
    st.lattice_fingerprint = fp;
    st.amplitudes = lu.solve(s);
    const double snorm = s.norm();
    st.relative_residual = snorm > 0.0 ? (a * st.amplitudes - s).norm() / snorm : (a * st.amplitudes).norm();
    if (!std::isfinite(st.relative_residual) || st.relative_residual > 1e-10)
        throw NumericalError("linear solve residual " + omega_text(st.relative_residual) +
                                 " exceeds 1e-10 at omega = " + omega_text(omega),
                             omega);
    return st;
}

inline complex field(const Lattice& lat, const WaveState& st, const DriveSpec& drive,
                     const AssessSpec& point) {
    const auto ei = lat.edge_index(point.edge);
    const auto& e = lat.edges[ei];
    const auto k = wavenumber(st.omega, e.speed, e.loss_factor);
    const double u = point.position;
    complex psi = st.amplitudes[static_cast<Eigen::Index>(unknown_index(ei, EdgeEnd::low))] * propagator(k, u) +
                  st.amplitudes[static_cast<Eigen::Index>(unknown_index(ei, EdgeEnd::high))] *
                      propagator(k, e.length - u);
    if (point.edge == drive.edge)
        psi += 0.5 * drive.amplitude * propagator(k, std::abs(u - drive.position));
    return psi;
}

} // namespace detail

/// The 2E x 2E system A = I - S P at one frequency.
inline LinearSystem assemble(const Lattice& lattice, double omega) {
    if (!(omega > 0.0))
        throw NumericalError("omega = 0 gives a singular system (rigid-body mode)", omega);
    detail::Network net(lattice);
    LinearSystem sys;
    sys.matrix = net.matrix(net.edge_propagators(omega));
    for (const auto& e : lattice.edges) {
        sys.unknowns.push_back({e.id, EdgeEnd::low});
        sys.unknowns.push_back({e.id, EdgeEnd::high});
    }
    return sys;
}

inline WaveState solve_frequency(const Lattice& lattice, const DriveSpec& drive, double omega) {
    detail::require_interior(lattice, drive.edge, drive.position, "drive");
    detail::Network net(lattice);
    return detail::solve(net, drive, omega, fingerprint(lattice));
}

/// Complex field psi at the assessment point.
inline complex field_at(const WaveState& state, const Lattice& lattice, const DriveSpec& drive,
                        const AssessSpec& point, double omega) {
    if (state.lattice_fingerprint != fingerprint(lattice) ||
        state.amplitudes.size() != static_cast<Eigen::Index>(2 * lattice.edges.size()))
        throw UsageError("field_at: wave state was solved on a different lattice");
    if (state.omega != omega) throw UsageError("field_at: wave state was solved at a different omega");
    detail::require_interior(lattice, point.edge, point.position, "assess");
    return detail::field(lattice, state, drive, point);
}

/// Field at the assessment point over the whole grid; bin 0 is defined as 0.
/// Bins are split into contiguous blocks over `jobs` threads; the result does
/// not depend on the schedule.
inline FrequencyResponse frequency_response(const Lattice& lattice, const DriveSpec& drive,
                                            const AssessSpec& assess, const FrequencyGrid& grid,
                                            unsigned jobs = 1) {
    if (!(grid.delta_omega > 0.0) || grid.count < 2)
        throw UsageError("frequency_response: grid needs delta_omega > 0 and at least 2 bins");
    detail::require_interior(lattice, drive.edge, drive.position, "drive");
    detail::require_interior(lattice, assess.edge, assess.position, "assess");
    const detail::Network net(lattice);
    const auto fp = fingerprint(lattice);

    FrequencyResponse out{grid, std::vector<complex>(grid.count, complex{})};
    jobs = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(grid.count - 1));

    std::vector<std::exception_ptr> errors(jobs);
    auto work = [&](unsigned w) {
        const std::size_t begin = 1 + (grid.count - 1) * w / jobs;
        const std::size_t end = 1 + (grid.count - 1) * (w + 1) / jobs;
        try {
            for (std::size_t m = begin; m < end; ++m) {
                const auto st = detail::solve(net, drive, grid.omega(m), fp);
                out.values[m] = detail::field(lattice, st, drive, assess);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace hyperlattice
