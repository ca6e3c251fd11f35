#pragma once

// Path-enumeration predictor of pulse arrivals.
//
// Walks every reverberation path from the drive point: the two launched
// half-amplitude waves travel along their edge, and at each junction the walk
// branches into the reflection and every transmission, multiplying by the
// junction coefficient. Each crossing of the assessment point is an arrival.
// Nothing here touches the frequency-domain solver; it only shares the
// junction coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "hyperlattice/error.hpp"
#include "hyperlattice/fdsolver.hpp"
#include "hyperlattice/lattice.hpp"
#include "hyperlattice/scattering.hpp"
#include "hyperlattice/tdtransform.hpp"

namespace hyperlattice {

/// Distance covered on one edge; positions are measured from the low end.
struct PathSegment {
    int edge = 0;
    double from = 0.0;
    double to = 0.0;
};

/// One reverberation path ending at the assessment point.
struct PathArrival {
    double time = 0.0;
    double distance = 0.0;
    /// sum over segments of eta * d / c; the path is attenuated by
    /// exp(-omega * loss_depth) at frequency omega.
    double loss_depth = 0.0;
    double amplitude = 0.0; ///< 1/2 times the product of junction coefficients
    int reflections = 0;
    std::uint64_t connector_levels = 0; ///< bit L set when a level-L connector was traversed
    std::vector<int> edge_sequence;     ///< empty unless paths are recorded
    std::vector<PathSegment> segments;

    bool touches_connector(int level) const { return (connector_levels >> level) & 1u; }
};

/// Arrivals closer than the merge tolerance, summed.
struct CoalescedArrival {
    double time = 0.0;
    double amplitude = 0.0;
    std::size_t path_count = 0;
    std::uint64_t connector_levels = 0;
};

struct EnumerateOptions {
    double t_max = 10.0;
    double amplitude_floor = 1e-6;
    bool record_paths = true;
    /// Edges the walk may not enter (used to restrict to connector-free paths).
    std::vector<int> forbidden_edges;
    /// Safety valve against runaway enumerations.
    std::size_t max_arrivals = 50'000'000;
};

namespace detail {

class PathWalker {
public:
    PathWalker(const Lattice& lat, const DriveSpec& drive, const AssessSpec& assess, const EnumerateOptions& opts)
        : lat_(lat), drive_(drive), assess_(assess), opts_(opts) {
        require_structure(lat);
        require_interior(lat, drive.edge, drive.position, "drive");
        require_interior(lat, assess.edge, assess.position, "assess");
        // Port lookup: (edge index, end) -> (node index, port index).
        port_of_.assign(2 * lat.edges.size(), {0, 0});
        for (std::size_t ni = 0; ni < lat.nodes.size(); ++ni) {
            const auto& node = lat.nodes[ni];
            for (std::size_t p = 0; p < node.ports.size(); ++p)
                port_of_[unknown_index(lat.edge_index(node.ports[p].edge), node.ports[p].end)] = {ni, p};
            junctions_.push_back(junction_matrix(lat, node).s);
        }
        forbidden_.assign(lat.edges.size(), false);
        for (int id : opts.forbidden_edges)
            if (lat.has_edge(id)) forbidden_[lat.edge_index(id)] = true;
        assess_index_ = lat.edge_index(assess.edge);
    }

    std::vector<PathArrival> run() {
        const auto di = lat_.edge_index(drive_.edge);
        if (forbidden_[di]) return {};
        const double half = 0.5 * drive_.amplitude;
        if (std::abs(half) < opts_.amplitude_floor) return {};
        State s{};
        s.amplitude = half;
        s.levels = level_bit(lat_.edges[di]);
        walk(di, drive_.position, EdgeEnd::high, s);
        walk(di, drive_.position, EdgeEnd::low, s);
        std::stable_sort(out_.begin(), out_.end(),
                         [](const PathArrival& a, const PathArrival& b) { return a.time < b.time; });
        return std::move(out_);
    }

private:
    struct State {
        double time = 0.0;
        double distance = 0.0;
        double loss_depth = 0.0;
        double amplitude = 0.0;
        int reflections = 0;
        std::uint64_t levels = 0;
    };

    static std::uint64_t level_bit(const WaveguideEdge& e) {
        return e.role == EdgeRole::connector && e.level < 64 ? (std::uint64_t{1} << e.level) : 0;
    }

    void emit(const State& s, std::size_t ei, double from, double to) {
        if (out_.size() >= opts_.max_arrivals)
            throw NumericalError("path enumeration exceeded max_arrivals; raise amplitude_floor or lower t_max");
        const auto& e = lat_.edges[ei];
        const double d = std::abs(to - from);
        PathArrival a;
        a.time = s.time + d / e.speed;
        if (a.time > opts_.t_max) return;
        a.distance = s.distance + d;
        a.loss_depth = s.loss_depth + e.loss_factor * d / e.speed;
        a.amplitude = s.amplitude;
        a.reflections = s.reflections;
        a.connector_levels = s.levels;
        if (opts_.record_paths) {
            a.edge_sequence = edges_;
            a.edge_sequence.push_back(e.id);
            a.segments = segments_;
            a.segments.push_back({e.id, from, to});
        }
        out_.push_back(std::move(a));
    }

    /// Travel along edge ei from position `from` toward `toward`, then scatter.
    void walk(std::size_t ei, double from, EdgeEnd toward, const State& s) {
        const auto& e = lat_.edges[ei];
        const double to = toward == EdgeEnd::high ? e.length : 0.0;
        if (ei == assess_index_) {
            const double x = assess_.position;
            // Half-open crossing rule: moving up includes the start, moving down excludes it.
            const bool crosses = toward == EdgeEnd::high ? (from <= x && x < to) : (x < from && x > to);
            if (crosses) emit(s, ei, from, x);
        }

        const double d = std::abs(to - from);
        State next = s;
        next.time += d / e.speed;
        next.distance += d;
        next.loss_depth += e.loss_factor * d / e.speed;
        if (next.time > opts_.t_max) return;

        if (opts_.record_paths) {
            edges_.push_back(e.id);
            segments_.push_back({e.id, from, to});
        }
        const auto [ni, q] = port_of_[unknown_index(ei, toward)];
        const auto& node = lat_.nodes[ni];
        const auto& sm = junctions_[ni];
        for (std::size_t p = 0; p < node.ports.size(); ++p) {
            const double coeff = sm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            if (coeff == 0.0) continue;
            const auto& port = node.ports[p];
            const auto pi = lat_.edge_index(port.edge);
            if (forbidden_[pi]) continue;
            State branch = next;
            branch.amplitude *= coeff;
            if (std::abs(branch.amplitude) < opts_.amplitude_floor) continue;
            if (p == q) ++branch.reflections;
            branch.levels |= level_bit(lat_.edges[pi]);
            const double start = port.end == EdgeEnd::low ? 0.0 : lat_.edges[pi].length;
            walk(pi, start, opposite(port.end), branch);
        }
        if (opts_.record_paths) {
            edges_.pop_back();
            segments_.pop_back();
        }
    }

    const Lattice& lat_;
    DriveSpec drive_;
    AssessSpec assess_;
    EnumerateOptions opts_;
    std::vector<std::pair<std::size_t, std::size_t>> port_of_;
    std::vector<Eigen::MatrixXd> junctions_;
    std::vector<bool> forbidden_;
    std::size_t assess_index_ = 0;
    std::vector<int> edges_;
    std::vector<PathSegment> segments_;
    std::vector<PathArrival> out_;
};

} // namespace detail

/// Every path arrival with time <= t_max and |amplitude| >= amplitude_floor,
/// sorted by time (ties keep enumeration order).
inline std::vector<PathArrival> enumerate_arrivals(const Lattice& lattice, const DriveSpec& drive,
                                                   const AssessSpec& assess, const EnumerateOptions& opts) {
    if (!(opts.t_max > 0.0)) throw DomainError("enumerate_arrivals: t_max must be positive");
    if (!(opts.amplitude_floor > 0.0)) throw DomainError("enumerate_arrivals: amplitude_floor must be positive");
    return detail::PathWalker(lattice, drive, assess, opts).run();
}

/// Groups arrivals whose times lie within `tolerance` of the group's first
/// arrival; the group time is the mean of its members.
inline std::vector<CoalescedArrival> coalesce(const std::vector<PathArrival>& arrivals, double tolerance) {
    std::vector<CoalescedArrival> out;
    double group_start = 0.0, time_sum = 0.0;
    for (const auto& a : arrivals) {
        if (out.empty() || a.time - group_start > tolerance) {
            if (!out.empty()) out.back().time = time_sum / static_cast<double>(out.back().path_count);
            out.push_back({a.time, 0.0, 0, 0});
            group_start = a.time;
            time_sum = 0.0;
        }
        auto& g = out.back();
        g.amplitude += a.amplitude;
        g.connector_levels |= a.connector_levels;
        ++g.path_count;
        time_sum += a.time;
    }
    if (!out.empty()) out.back().time = time_sum / static_cast<double>(out.back().path_count);
    return out;
}

/// Spectrum predicted by the path sum on a frequency grid: each arrival
/// contributes a * exp(-i omega t) * exp(-omega * loss_depth), which is the
/// product of its per-edge propagators. Bin 0 is 0, as for the solver.
inline FrequencyResponse render_spectrum(const std::vector<PathArrival>& arrivals, const FrequencyGrid& grid) {
    FrequencyResponse out{grid, std::vector<complex>(grid.count, complex{})};
    for (const auto& a : arrivals) {
        const complex step = std::exp(complex(-a.loss_depth, -a.time) * grid.delta_omega);
        complex phasor = step;
        for (std::size_t m = 1; m < grid.count; ++m) {
            out.values[m] += a.amplitude * phasor;
            phasor *= step;
        }
    }
    return out;
}

/// Peaks of the band-limited pulse train the enumerated paths produce under
/// the given sweep. Overlapping and wrapped arrivals combine exactly as they
/// do in the solver's time response.
inline std::vector<Arrival> rendered_arrivals(const std::vector<PathArrival>& arrivals, const SweepConfig& sweep,
                                              double relative_threshold) {
    return find_arrivals(to_time(render_spectrum(arrivals, sweep.grid()), sweep), relative_threshold);
}

/// Earliest arrival over paths that traverse at least one connector of
/// `level`, or nullopt when none arrives by `horizon`. Shortest-time search
/// over (directed edge, touched) states; transitions with zero coefficient
/// are not paths.
inline std::optional<double> first_connector_arrival(const Lattice& lattice, const DriveSpec& drive,
                                                     const AssessSpec& assess, int level, double horizon = 10.0) {
    if (lattice.connector_ids(level).empty())
        throw UsageError("first_connector_arrival: lattice has no connectors at level " + std::to_string(level));
    detail::require_structure(lattice);
    detail::require_interior(lattice, drive.edge, drive.position, "drive");
    detail::require_interior(lattice, assess.edge, assess.position, "assess");

    const std::size_t ne = lattice.edges.size();
    std::vector<std::pair<std::size_t, std::size_t>> port_of(2 * ne);
    std::vector<Eigen::MatrixXd> junctions;
    for (std::size_t ni = 0; ni < lattice.nodes.size(); ++ni) {
        const auto& node = lattice.nodes[ni];
        for (std::size_t p = 0; p < node.ports.size(); ++p)
            port_of[unknown_index(lattice.edge_index(node.ports[p].edge), node.ports[p].end)] = {ni, p};
        junctions.push_back(junction_matrix(lattice, node).s);
    }
    auto is_connector = [&](std::size_t ei) {
        const auto& e = lattice.edges[ei];
        return e.role == EdgeRole::connector && e.level == level;
    };
    const auto ai = lattice.edge_index(assess.edge);
    const auto di = lattice.edge_index(drive.edge);

    // State: arrived at `end` of edge ei with the touched flag, keyed by time.
    using Entry = std::tuple<double, std::size_t, int, bool>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    std::vector<double> best(4 * ne, std::numeric_limits<double>::infinity());
    auto key = [](std::size_t ei, EdgeEnd end, bool touched) {
        return 4 * ei + (end == EdgeEnd::high ? 2 : 0) + (touched ? 1 : 0);
    };
    auto push = [&](double t, std::size_t ei, EdgeEnd end, bool touched) {
        if (t > horizon) return;
        auto& b = best[key(ei, end, touched)];
        if (t < b) {
            b = t;
            pq.emplace(t, ei, end == EdgeEnd::high ? 1 : 0, touched);
        }
    };

    double answer = std::numeric_limits<double>::infinity();
    const auto& de = lattice.edges[di];
    const bool start_touched = is_connector(di);
    if (start_touched && di == ai) answer = std::abs(assess.position - drive.position) / de.speed;
    push((de.length - drive.position) / de.speed, di, EdgeEnd::high, start_touched);
    push(drive.position / de.speed, di, EdgeEnd::low, start_touched);

    while (!pq.empty()) {
        const auto [t, ei, end_flag, touched] = pq.top();
        pq.pop();
        const EdgeEnd end = end_flag ? EdgeEnd::high : EdgeEnd::low;
        if (t > best[key(ei, end, touched)] || t >= answer) continue;
        const auto [ni, q] = port_of[unknown_index(ei, end)];
        const auto& node = lattice.nodes[ni];
        for (std::size_t p = 0; p < node.ports.size(); ++p) {
            if (junctions[ni](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) == 0.0) continue;
            const auto& port = node.ports[p];
            const auto pi = lattice.edge_index(port.edge);
            const auto& pe = lattice.edges[pi];
            const bool now = touched || is_connector(pi);
            if (now && pi == ai) {
                const double offset = port.end == EdgeEnd::low ? assess.position : pe.length - assess.position;
                answer = std::min(answer, t + offset / pe.speed);
            }
            push(t + pe.length / pe.speed, pi, opposite(port.end), now);
        }
    }
    if (answer > horizon) return std::nullopt;
    return answer;
}

} // namespace hyperlattice
