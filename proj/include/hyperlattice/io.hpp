#pragma once

// Lattice documents (JSON), CSV tables and a minimal SVG plot.
//
// Lattice document:
//   { "format": "hyperlattice-lattice", "version": 1, "dimension": N, "seed": S,
//     "edges": [ {"id", "length", "speed", "density", "loss_factor", "role", "level"} ],
//     "nodes": [ {"id", "ports": [[edge, "low"|"high"], ...],
//                 "termination": "none" | "infinite" | <admittance>} ] }
//
// CSV files use '.' as decimal separator, a header row and '\n' after every
// record; numbers are written with 17 significant digits so they round-trip.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyperlattice/error.hpp"
#include "hyperlattice/experiments.hpp"
#include "hyperlattice/lattice.hpp"
#include "hyperlattice/oracle.hpp"
#include "hyperlattice/tdtransform.hpp"

namespace hyperlattice {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Lattice documents

inline json termination_to_json(const Termination& t) {
    if (t.pressure_release) return "infinite";
    if (t.admittance == 0.0) return "none";
    return t.admittance;
}

inline Termination termination_from_json(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "none") return Termination::none();
        if (s == "pressure_release" || s == "infinite") return Termination::release();
        throw ConfigError(where + ": unknown termination '" + s + "'");
    }
    if (j.is_number()) {
        const double y = j.get<double>();
        if (!(y >= 0.0) || !std::isfinite(y)) throw ConfigError(where + ": termination admittance must be >= 0");
        return {y, false};
    }
    throw ConfigError(where + ": termination must be a number or a string");
}

inline EdgeRole role_from_string(const std::string& s) {
    if (s == "generator") return EdgeRole::generator;
    if (s == "image") return EdgeRole::image;
    if (s == "connector") return EdgeRole::connector;
    throw ConfigError("unknown edge role '" + s + "'");
}

inline json lattice_to_json(const Lattice& lat) {
    json doc;
    doc["format"] = "hyperlattice-lattice";
    doc["version"] = 1;
    doc["dimension"] = lat.dimension;
    doc["seed"] = lat.seed;
    json edges = json::array();
    for (const auto& e : lat.edges)
        edges.push_back({{"id", e.id},
                         {"length", e.length},
                         {"speed", e.speed},
                         {"density", e.density},
                         {"loss_factor", e.loss_factor},
                         {"role", to_string(e.role)},
                         {"level", e.level}});
    doc["edges"] = std::move(edges);
    json nodes = json::array();
    for (const auto& n : lat.nodes) {
        json ports = json::array();
        for (const auto& p : n.ports) ports.push_back(json::array({p.edge, to_string(p.end)}));
        nodes.push_back({{"id", n.id}, {"ports", std::move(ports)}, {"termination", termination_to_json(n.termination)}});
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

/// Accepts any graph; run validate() to check hypercube invariants.
inline Lattice lattice_from_json(const json& doc) {
    try {
        if (doc.value("format", std::string{}) != "hyperlattice-lattice")
            throw ConfigError("lattice document: missing or wrong \"format\"");
        Lattice lat;
        lat.dimension = doc.at("dimension").get<int>();
        lat.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& e : doc.at("edges")) {
            WaveguideEdge w;
            w.id = e.at("id").get<int>();
            w.length = e.at("length").get<double>();
            w.speed = e.at("speed").get<double>();
            w.density = e.at("density").get<double>();
            w.loss_factor = e.value("loss_factor", 0.0);
            w.role = role_from_string(e.value("role", std::string("generator")));
            w.level = e.value("level", 1);
            lat.edges.push_back(w);
        }
        for (const auto& n : doc.at("nodes")) {
            Node node;
            node.id = n.at("id").get<int>();
            for (const auto& p : n.at("ports")) {
                const auto end = p.at(1).get<std::string>();
                if (end != "low" && end != "high") throw ConfigError("lattice document: port end must be low or high");
                node.ports.push_back({p.at(0).get<int>(), end == "low" ? EdgeEnd::low : EdgeEnd::high});
            }
            node.termination = n.contains("termination")
                                   ? termination_from_json(n.at("termination"), "node " + std::to_string(node.id))
                                   : Termination::none();
            lat.nodes.push_back(std::move(node));
        }
        std::sort(lat.edges.begin(), lat.edges.end(),
                  [](const WaveguideEdge& a, const WaveguideEdge& b) { return a.id < b.id; });
        std::sort(lat.nodes.begin(), lat.nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
        return lat;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("lattice document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string frequency_csv(const FrequencyResponse& fr) {
    std::string out = "omega,re,im\n";
    for (std::size_t m = 0; m < fr.values.size(); ++m)
        out += format_number(fr.grid.omega(m)) + ',' + format_number(fr.values[m].real()) + ',' +
               format_number(fr.values[m].imag()) + '\n';
    return out;
}

inline std::string time_csv(const TimeResponse& tr) {
    const auto env = envelope(tr);
    std::string out = "t,value,envelope\n";
    for (std::size_t i = 0; i < tr.values.size(); ++i)
        out += format_number(tr.t(i)) + ',' + format_number(tr.values[i]) + ',' + format_number(env[i]) + '\n';
    return out;
}

inline std::string arrivals_csv(const std::vector<Arrival>& arrivals) {
    std::string out = "time,amplitude,prominence\n";
    for (const auto& a : arrivals)
        out += format_number(a.time) + ',' + format_number(a.amplitude) + ',' + format_number(a.prominence) + '\n';
    return out;
}

/// One row per path. loss_depth follows the contracted columns so the list
/// can be rendered into a pulse train later.
inline std::string oracle_csv(const std::vector<PathArrival>& paths) {
    std::string out = "time,amplitude,n_reflections,edge_sequence,loss_depth\n";
    for (const auto& p : paths) {
        std::string seq;
        for (std::size_t i = 0; i < p.edge_sequence.size(); ++i) {
            if (i) seq += ';';
            seq += std::to_string(p.edge_sequence[i]);
        }
        out += format_number(p.time) + ',' + format_number(p.amplitude) + ',' + std::to_string(p.reflections) + ',' +
               seq + ',' + format_number(p.loss_depth) + '\n';
    }
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("CSV has no column '" + std::string(name) + "'");
    }
    bool has_column(std::string_view name) const {
        return std::find(header.begin(), header.end(), name) != header.end();
    }
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw ConfigError("CSV row has the wrong number of cells: " + line);
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ConfigError("CSV is empty");
    return t;
}

inline double parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ConfigError("malformed number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("malformed number '" + s + "'");
    }
}

inline std::vector<Arrival> arrivals_from_csv(const CsvTable& t) {
    const auto ct = t.column("time"), ca = t.column("amplitude"), cp = t.column("prominence");
    std::vector<Arrival> out;
    for (const auto& r : t.rows) out.push_back({parse_number(r[ct]), parse_number(r[ca]), parse_number(r[cp])});
    return out;
}

inline std::vector<PathArrival> paths_from_csv(const CsvTable& t) {
    const auto ct = t.column("time"), ca = t.column("amplitude"), cr = t.column("n_reflections"),
               cs = t.column("edge_sequence"), cl = t.column("loss_depth");
    std::vector<PathArrival> out;
    for (const auto& r : t.rows) {
        PathArrival p;
        p.time = parse_number(r[ct]);
        p.distance = p.time;
        p.amplitude = parse_number(r[ca]);
        p.reflections = static_cast<int>(parse_number(r[cr]));
        p.loss_depth = parse_number(r[cl]);
        std::istringstream ss(r[cs]);
        std::string id;
        while (std::getline(ss, id, ';'))
            if (!id.empty()) p.edge_sequence.push_back(static_cast<int>(parse_number(id)));
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plot

/// Line plot of a time response with arrival markers, as a standalone SVG.
inline std::string time_plot_svg(const TimeResponse& tr, const std::vector<Arrival>& arrivals,
                                 const std::string& title) {
    constexpr double width = 960, height = 360, margin = 40;
    const std::size_t n = tr.values.size();
    double vmax = 0.0;
    for (double v : tr.values) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) vmax = 1.0;
    const double t_end = tr.period();
    auto x_of = [&](double t) { return margin + (width - 2 * margin) * t / t_end; };
    auto y_of = [&](double v) { return height / 2 - (height / 2 - margin) * v / vmax; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"360\" viewBox=\"0 0 960 360\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"40\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    svg += "<line x1=\"40\" y1=\"180\" x2=\"920\" y2=\"180\" stroke=\"#999\"/>\n";
    // min/max per pixel column keeps narrow pulses visible
    const std::size_t columns = static_cast<std::size_t>(width - 2 * margin);
    svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
    char buf[64];
    for (std::size_t c = 0; c < columns && n > 0; ++c) {
        const std::size_t a = c * n / columns, b = std::max(a + 1, (c + 1) * n / columns);
        double lo = tr.values[a], hi = tr.values[a];
        for (std::size_t i = a; i < b && i < n; ++i) {
            lo = std::min(lo, tr.values[i]);
            hi = std::max(hi, tr.values[i]);
        }
        const double x = margin + static_cast<double>(c);
        std::snprintf(buf, sizeof buf, "%.1f,%.2f %.1f,%.2f ", x, y_of(hi), x, y_of(lo));
        svg += buf;
    }
    svg += "\"/>\n";
    for (const auto& a : arrivals) {
        std::snprintf(buf, sizeof buf, "%.2f", x_of(a.time));
        svg += std::string("<circle cx=\"") + buf + "\" cy=\"" + (a.amplitude >= 0 ? "48" : "312") +
               "\" r=\"2.5\" fill=\"#c0392b\"/>\n";
    }
    std::snprintf(buf, sizeof buf, "%.3g", t_end);
    svg += std::string("<text x=\"920\" y=\"350\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">t = ") +
           buf + "</text>\n</svg>\n";
    return svg;
}

} // namespace hyperlattice
