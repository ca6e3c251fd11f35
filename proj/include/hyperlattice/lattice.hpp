#pragma once

// Hypercube-skeleton lattices of 1-D waveguides.
//
// A lattice of dimension N+1 is produced by translating the N lattice in a new
// orthogonal direction: the original becomes the generator, the translated
// copy the image, and every generator vertex is joined to its image by a
// connector edge. Edge ids are 1-based: for the square, 1 is the generator,
// 2 the right connector, 3 the image and 4 the left connector; later steps
// number the image copies next and the connectors last. Node ids are 0-based
// hypercube vertex labels (bit s-1 set <=> the vertex lies in the image half
// of step s).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "hyperlattice/error.hpp"

namespace hyperlattice {

enum class EdgeRole { generator, image, connector };
enum class EdgeEnd { low, high };

inline const char* to_string(EdgeRole role) {
    switch (role) {
    case EdgeRole::generator: return "generator";
    case EdgeRole::image: return "image";
    case EdgeRole::connector: return "connector";
    }
    return "?";
}

inline const char* to_string(EdgeEnd end) { return end == EdgeEnd::low ? "low" : "high"; }

inline EdgeEnd opposite(EdgeEnd end) { return end == EdgeEnd::low ? EdgeEnd::high : EdgeEnd::low; }

/// One 1-D wave-bearing system. Lengths and speeds are in units of system 1.
struct WaveguideEdge {
    int id = 0;
    double length = 1.0;
    double speed = 1.0;
    double density = 1.0;
    double loss_factor = 0.0;
    EdgeRole role = EdgeRole::generator;
    int level = 1; ///< translation step that created the edge

    /// Characteristic impedance z = rho * c.
    double impedance() const { return density * speed; }
    double travel_time() const { return length / speed; }

    friend bool operator==(const WaveguideEdge&, const WaveguideEdge&) = default;
};

struct Port {
    int edge = 0;
    EdgeEnd end = EdgeEnd::low;

    friend bool operator==(const Port&, const Port&) = default;
    friend auto operator<=>(const Port&, const Port&) = default;
};

/// Lumped termination stored as an admittance so that a pressure-release end
/// (z_t = 0) needs no infinity.
struct Termination {
    double admittance = 0.0;
    bool pressure_release = false;

    static Termination none() { return {}; }
    static Termination release() { return {0.0, true}; }
    static Termination impedance(double z) { return {1.0 / z, false}; }

    bool is_none() const { return !pressure_release && admittance == 0.0; }

    friend bool operator==(const Termination&, const Termination&) = default;
};

struct Node {
    int id = 0;
    std::vector<Port> ports;
    Termination termination;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Lattice {
    int dimension = 1;
    std::vector<WaveguideEdge> edges; ///< sorted by id
    std::vector<Node> nodes;          ///< sorted by id
    std::uint64_t seed = 0;

    friend bool operator==(const Lattice&, const Lattice&) = default;

    /// Index of the edge with this id; throws UsageError when absent.
    std::size_t edge_index(int id) const {
        auto it = std::lower_bound(edges.begin(), edges.end(), id,
                                   [](const WaveguideEdge& e, int v) { return e.id < v; });
        if (it == edges.end() || it->id != id)
            throw UsageError("lattice has no edge with id " + std::to_string(id));
        return static_cast<std::size_t>(it - edges.begin());
    }

    bool has_edge(int id) const {
        auto it = std::lower_bound(edges.begin(), edges.end(), id,
                                   [](const WaveguideEdge& e, int v) { return e.id < v; });
        return it != edges.end() && it->id == id;
    }

    const WaveguideEdge& edge(int id) const { return edges[edge_index(id)]; }

    /// Highest translation step present (the level of the newest connectors).
    int top_level() const {
        int top = 1;
        for (const auto& e : edges) top = std::max(top, e.level);
        return top;
    }

    std::vector<int> connector_ids(int level) const {
        std::vector<int> ids;
        for (const auto& e : edges)
            if (e.role == EdgeRole::connector && e.level == level) ids.push_back(e.id);
        return ids;
    }
};

/// n_N from n_{N+1} = 2 n_N + 2^N, n_1 = 1.
inline std::int64_t edge_count(int dimension) {
    if (dimension < 1) throw DomainError("edge_count: dimension must be >= 1");
    if (dimension > 60) throw DomainError("edge_count: dimension too large");
    std::int64_t n = 1;
    for (int step = 1; step < dimension; ++step) n = 2 * n + (std::int64_t{1} << step);
    return n;
}

/// Positive-real distribution for a per-edge parameter.
struct Sampler {
    enum class Kind { uniform, constant };
    Kind kind = Kind::uniform;
    double min = 0.7;
    double max = 1.3;

    static Sampler uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static Sampler constant(double v) { return {Kind::constant, v, v}; }

    friend bool operator==(const Sampler&, const Sampler&) = default;
};

struct GenerateOptions {
    Sampler length = Sampler::uniform(0.7, 1.3);
    Sampler density = Sampler::uniform(0.7, 1.3);
    double speed = 1.0;
    double loss_factor = 0.003;
    /// Minimum spacing between round-trip times 2L/c of distinct edges; 0 disables.
    double min_round_trip_separation = 0.02;
    int max_resample_attempts = 2000;

    friend bool operator==(const GenerateOptions&, const GenerateOptions&) = default;
};

namespace detail {

inline void check_sampler(const Sampler& s, const char* field) {
    const bool finite = std::isfinite(s.min) && std::isfinite(s.max);
    if (!finite || s.min <= 0.0 || s.max < s.min)
        throw ConfigError(std::string("sampler '") + field +
                          "' needs finite bounds with 0 < min <= max");
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double draw(const Sampler& s, std::mt19937_64& rng) {
    if (s.kind == Sampler::Kind::constant) return s.min;
    return s.min + (s.max - s.min) * unit_uniform(rng);
}

inline void sort_ports(Lattice& lat) {
    for (auto& n : lat.nodes) std::sort(n.ports.begin(), n.ports.end());
}

/// Topology only: ids, roles, levels and incidence. Parameters are unit values.
inline Lattice hypercube_topology(int dimension) {
    Lattice lat;
    lat.dimension = 1;
    lat.edges.push_back({1, 1.0, 1.0, 1.0, 0.0, EdgeRole::generator, 1});
    lat.nodes.push_back({0, {{1, EdgeEnd::low}}, Termination::release()});
    lat.nodes.push_back({1, {{1, EdgeEnd::high}}, Termination::release()});

    for (int step = 2; step <= dimension; ++step) {
        const int n_prev = static_cast<int>(lat.edges.size());
        const int v_prev = static_cast<int>(lat.nodes.size());
        // Endpoints of every existing edge, indexed by id - 1.
        std::vector<std::pair<int, int>> ends(static_cast<std::size_t>(n_prev));
        for (const auto& node : lat.nodes)
            for (const auto& p : node.ports) {
                auto& slot = ends[static_cast<std::size_t>(p.edge - 1)];
                (p.end == EdgeEnd::low ? slot.first : slot.second) = node.id;
            }

        std::vector<Node> nodes(static_cast<std::size_t>(2 * v_prev));
        for (int v = 0; v < 2 * v_prev; ++v) nodes[static_cast<std::size_t>(v)].id = v;
        std::vector<WaveguideEdge> edges;
        auto connect = [&](const WaveguideEdge& e, int low, int high) {
            edges.push_back(e);
            nodes[static_cast<std::size_t>(low)].ports.push_back({e.id, EdgeEnd::low});
            nodes[static_cast<std::size_t>(high)].ports.push_back({e.id, EdgeEnd::high});
        };

        for (const auto& e : lat.edges) {
            const auto [lo, hi] = ends[static_cast<std::size_t>(e.id - 1)];
            connect(e, lo, hi);
        }

        if (step == 2) {
            // Square numbering: 1 bottom, 2 right connector, 3 top image, 4 left connector.
            connect({2, 1.0, 1.0, 1.0, 0.0, EdgeRole::connector, 2}, 1, 3);
            connect({3, 1.0, 1.0, 1.0, 0.0, EdgeRole::image, 2}, 2, 3);
            connect({4, 1.0, 1.0, 1.0, 0.0, EdgeRole::connector, 2}, 0, 2);
        } else {
            for (const auto& e : lat.edges) {
                const auto [lo, hi] = ends[static_cast<std::size_t>(e.id - 1)];
                connect({e.id + n_prev, 1.0, 1.0, 1.0, 0.0, EdgeRole::image, step}, lo + v_prev,
                        hi + v_prev);
            }
            for (int v = 0; v < v_prev; ++v)
                connect({2 * n_prev + 1 + v, 1.0, 1.0, 1.0, 0.0, EdgeRole::connector, step}, v,
                        v + v_prev);
        }

        std::sort(edges.begin(), edges.end(),
                  [](const WaveguideEdge& a, const WaveguideEdge& b) { return a.id < b.id; });
        lat.edges = std::move(edges);
        lat.nodes = std::move(nodes);
        lat.dimension = step;
    }
    sort_ports(lat);
    return lat;
}

} // namespace detail

/// Random lattice of the given dimension. Edge 1 keeps unit length, speed and
/// density; every other edge draws its length and density from the samplers.
/// Equal arguments give equal lattices on every platform.
inline Lattice generate(int dimension, const GenerateOptions& opts, std::uint64_t seed) {
    if (dimension < 1) throw DomainError("generate: dimension must be >= 1");
    if (dimension > 16) throw DomainError("generate: dimension above 16 is not supported");
    detail::check_sampler(opts.length, "length");
    detail::check_sampler(opts.density, "density");
    if (!(opts.speed > 0.0) || !std::isfinite(opts.speed))
        throw ConfigError("sampler 'speed' must be a positive finite value");
    if (!(opts.loss_factor >= 0.0) || !std::isfinite(opts.loss_factor))
        throw ConfigError("sampler 'loss_factor' must be a nonnegative finite value");
    if (!(opts.min_round_trip_separation >= 0.0))
        throw ConfigError("sampler 'min_round_trip_separation' must be >= 0");

    Lattice lat = detail::hypercube_topology(dimension);
    lat.seed = seed;
    std::mt19937_64 rng(seed);

    std::vector<double> round_trips;
    auto nearest_gap = [&](double rt) {
        double gap = std::numeric_limits<double>::infinity();
        for (double other : round_trips) gap = std::min(gap, std::abs(other - rt));
        return gap;
    };

    for (auto& e : lat.edges) {
        e.loss_factor = opts.loss_factor;
        if (e.id == 1) {
            e.length = e.speed = e.density = 1.0;
            round_trips.push_back(2.0);
            continue;
        }
        e.speed = opts.speed;
        e.density = detail::draw(opts.density, rng);
        e.length = detail::draw(opts.length, rng);

        // Resample colliding round-trip times; when the band is too crowded to
        // honour the separation, keep the best-separated candidate seen.
        const double sep = opts.min_round_trip_separation;
        if (sep > 0.0 && opts.length.kind == Sampler::Kind::uniform) {
            double best_len = e.length;
            double best_gap = nearest_gap(2.0 * e.length / e.speed);
            for (int attempt = 0; best_gap < sep && attempt < opts.max_resample_attempts; ++attempt) {
                const double len = detail::draw(opts.length, rng);
                const double gap = nearest_gap(2.0 * len / e.speed);
                if (gap > best_gap) {
                    best_gap = gap;
                    best_len = len;
                }
            }
            e.length = best_len;
        }
        round_trips.push_back(2.0 * e.length / e.speed);
    }
    return lat;
}

inline Lattice generate(int dimension, std::uint64_t seed = 0) {
    return generate(dimension, GenerateOptions{}, seed);
}

/// Optional replacements for one edge's physical parameters.
struct EdgeAssignment {
    std::optional<double> length;
    std::optional<double> density;
    std::optional<double> speed;
    std::optional<double> loss_factor;

    friend bool operator==(const EdgeAssignment&, const EdgeAssignment&) = default;
};

using ParameterOverrides = std::map<int, EdgeAssignment>;

inline Lattice override_parameters(const Lattice& lattice, const ParameterOverrides& assignments) {
    Lattice out = lattice;
    for (const auto& [id, a] : assignments) {
        if (!out.has_edge(id))
            throw ConfigError("override references unknown edge id " + std::to_string(id));
        auto& e = out.edges[out.edge_index(id)];
        auto positive = [&](const std::optional<double>& v, const char* field) {
            if (v && !(*v > 0.0 && std::isfinite(*v)))
                throw ConfigError("override for edge " + std::to_string(id) + ": " + field +
                                  " must be positive");
        };
        positive(a.length, "length");
        positive(a.density, "density");
        positive(a.speed, "speed");
        if (a.loss_factor && !(*a.loss_factor >= 0.0 && std::isfinite(*a.loss_factor)))
            throw ConfigError("override for edge " + std::to_string(id) +
                              ": loss_factor must be nonnegative");
        if (a.length) e.length = *a.length;
        if (a.density) e.density = *a.density;
        if (a.speed) e.speed = *a.speed;
        if (a.loss_factor) e.loss_factor = *a.loss_factor;
    }
    return out;
}

/// Violations that make a lattice unusable for the solvers: bad parameters,
/// unknown or repeated edge ends, empty nodes.
inline std::vector<std::string> structural_violations(const Lattice& lat) {
    std::vector<std::string> out;
    auto edge_name = [](int id) { return "edge " + std::to_string(id); };

    for (std::size_t i = 0; i < lat.edges.size(); ++i) {
        const auto& e = lat.edges[i];
        if (e.id < 1) out.push_back(edge_name(e.id) + ": id must be positive");
        if (i > 0 && lat.edges[i - 1].id >= e.id)
            out.push_back(edge_name(e.id) + ": ids must be unique and ascending");
        if (!(e.length > 0.0) || !std::isfinite(e.length)) out.push_back(edge_name(e.id) + ": length must be > 0");
        if (!(e.speed > 0.0) || !std::isfinite(e.speed)) out.push_back(edge_name(e.id) + ": speed must be > 0");
        if (!(e.density > 0.0) || !std::isfinite(e.density)) out.push_back(edge_name(e.id) + ": density must be > 0");
        if (!(e.loss_factor >= 0.0) || !std::isfinite(e.loss_factor))
            out.push_back(edge_name(e.id) + ": loss_factor must be >= 0");
    }

    std::map<Port, int> seen;
    for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
        const auto& n = lat.nodes[i];
        const std::string name = "node " + std::to_string(n.id);
        if (i > 0 && lat.nodes[i - 1].id >= n.id) out.push_back(name + ": ids must be unique and ascending");
        if (n.ports.empty()) out.push_back(name + ": has no ports");
        if (n.termination.admittance < 0.0 || !std::isfinite(n.termination.admittance))
            out.push_back(name + ": termination admittance must be >= 0");
        for (const auto& p : n.ports) {
            if (!lat.has_edge(p.edge))
                out.push_back(name + ": port references unknown edge " + std::to_string(p.edge));
            else if (++seen[p] > 1)
                out.push_back(edge_name(p.edge) + " " + to_string(p.end) + " end appears in more than one port");
        }
    }
    for (const auto& e : lat.edges)
        for (EdgeEnd end : {EdgeEnd::low, EdgeEnd::high})
            if (!seen.contains({e.id, end}))
                out.push_back(edge_name(e.id) + " " + to_string(end) + " end is dangling (no node)");
    return out;
}

/// Every violated invariant of a generated hypercube lattice. Empty iff valid.
inline std::vector<std::string> validate(const Lattice& lat) {
    std::vector<std::string> out = structural_violations(lat);
    if (lat.dimension < 1) {
        out.push_back("lattice: dimension must be >= 1");
        return out;
    }
    if (lat.dimension > 16) {
        out.push_back("lattice: dimension above 16 is not supported");
        return out;
    }

    const auto expected_edges = edge_count(lat.dimension);
    if (static_cast<std::int64_t>(lat.edges.size()) != expected_edges)
        out.push_back("lattice: " + std::to_string(lat.edges.size()) + " edges but n_" +
                      std::to_string(lat.dimension) + " = " + std::to_string(expected_edges) +
                      " systems per the edge-count recurrence");
    const std::size_t expected_nodes = std::size_t{1} << lat.dimension;
    if (lat.nodes.size() != expected_nodes)
        out.push_back("lattice: " + std::to_string(lat.nodes.size()) + " nodes, expected 2^N = " +
                      std::to_string(expected_nodes));

    for (const auto& n : lat.nodes) {
        const std::string name = "node " + std::to_string(n.id);
        if (lat.dimension == 1) {
            if (n.ports.size() != 1) out.push_back(name + ": degree must be 1 for N = 1");
            if (!n.termination.pressure_release) out.push_back(name + ": N = 1 ends must be pressure-release (z_t = 0)");
        } else {
            if (n.ports.size() != static_cast<std::size_t>(lat.dimension))
                out.push_back(name + ": degree " + std::to_string(n.ports.size()) + ", expected " +
                              std::to_string(lat.dimension));
            if (!n.termination.is_none()) out.push_back(name + ": N >= 2 nodes carry no lumped termination");
        }
    }

    // Connectivity and bipartiteness over the port incidence.
    std::map<int, std::vector<int>> edge_nodes;
    std::map<int, std::size_t> node_index;
    for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
        node_index[lat.nodes[i].id] = i;
        for (const auto& p : lat.nodes[i].ports) edge_nodes[p.edge].push_back(lat.nodes[i].id);
    }
    std::vector<std::vector<std::size_t>> adj(lat.nodes.size());
    for (const auto& [id, ns] : edge_nodes) {
        if (ns.size() != 2) continue;
        const auto a = node_index[ns[0]], b = node_index[ns[1]];
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    if (!lat.nodes.empty()) {
        std::vector<int> colour(lat.nodes.size(), -1);
        std::queue<std::size_t> q;
        colour[0] = 0;
        q.push(0);
        bool bipartite = true;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (auto v : adj[u]) {
                if (colour[v] < 0) {
                    colour[v] = 1 - colour[u];
                    q.push(v);
                } else if (colour[v] == colour[u]) {
                    bipartite = false;
                }
            }
        }
        if (std::any_of(colour.begin(), colour.end(), [](int c) { return c < 0; }))
            out.push_back("lattice: graph is not connected");
        if (!bipartite) out.push_back("lattice: graph is not bipartite");
    }
    return out;
}

/// Content hash used to tie solver states to the lattice they were solved on.
inline std::uint64_t fingerprint(const Lattice& lat) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& e : lat.edges) {
        mix(&e.id, sizeof e.id);
        mix(&e.length, sizeof e.length);
        mix(&e.speed, sizeof e.speed);
        mix(&e.density, sizeof e.density);
        mix(&e.loss_factor, sizeof e.loss_factor);
    }
    for (const auto& n : lat.nodes) {
        mix(&n.id, sizeof n.id);
        for (const auto& p : n.ports) {
            mix(&p.edge, sizeof p.edge);
            const int end = p.end == EdgeEnd::low ? 0 : 1;
            mix(&end, sizeof end);
        }
        mix(&n.termination.admittance, sizeof n.termination.admittance);
        const int pr = n.termination.pressure_release ? 1 : 0;
        mix(&pr, sizeof pr);
    }
    return h;
}

} // namespace hyperlattice
