// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not taken from the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hyperlattice/hyperlattice.hpp"

using namespace hyperlattice;
using std::numbers::pi;

namespace {

constexpr double kTimeTolerance1d = 0.01;
constexpr double kRuntime1d = 5.0;
constexpr double kRuntime4d = 60.0;
constexpr double kPeakThreshold = 1e-3;
constexpr double kOracleAmplitudeTolerance = 0.10;
constexpr double kOracleFloor = 1e-6;
constexpr double kInVivoNull = 0.01;
constexpr double kInVitroAmplitudeTolerance = 0.02;
constexpr double kPowerTolerance = 1e-12;
constexpr double kReciprocityTolerance = 1e-9;
constexpr double kSemigroupTolerance = 1e-14;

const std::uint64_t kSeeds[] = {1, 2, 3};

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why) {
        if (!ok) {
            pass = false;
            detail << " [" << why << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const Arrival* arrival_near(const std::vector<Arrival>& arrivals, double t, double tol) {
    const Arrival* best = nullptr;
    for (const auto& a : arrivals)
        if (std::abs(a.time - t) <= tol && (!best || std::abs(a.time - t) < std::abs(best->time - t))) best = &a;
    return best;
}

ScenarioInputs with_in_vivo(const ScenarioInputs& in, int level) {
    auto out = in;
    out.lattice = in_vivo_variant(in.lattice, level, in.sweep.period());
    return out;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// 1 and 2 share a run of the single-string preset.
void single_string(Verdict& times, Verdict& signs) {
    const auto in = scenario_inputs(preset("paper-1d"));
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_scenario(in, Variant::total, kPeakThreshold, 1);
    const double elapsed = seconds_since(start);

    const double nominal[] = {0.5, 0.9, 1.1, 1.5, 2.5, 2.9, 3.1};
    double amp[7] = {};
    double worst = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
        const auto* a = arrival_near(r.arrivals, nominal[i], kTimeTolerance1d);
        if (!a) {
            times.require(false, "no arrival near " + format_number(nominal[i]));
            continue;
        }
        worst = std::max(worst, std::abs(a->time - nominal[i]));
        amp[i] = a->amplitude;
    }
    times.require(elapsed < kRuntime1d, "runtime " + format_number(elapsed) + " s");
    times.detail << " max |dt| = " << worst << ", runtime " << elapsed << " s";

    const double ref = amp[0];
    signs.require(ref != 0.0, "no reference arrival at 0.5");
    signs.require(amp[1] * ref < 0 && amp[2] * ref < 0, "0.9 and 1.1 should oppose 0.5");
    signs.require(amp[3] * ref > 0 && amp[4] * ref > 0, "1.5 and 2.5 should match 0.5");
    signs.detail << " amplitudes 0.5:" << amp[0] << " 0.9:" << amp[1] << " 1.1:" << amp[2] << " 1.5:" << amp[3]
                 << " 2.5:" << amp[4];
}

// Same pipeline as the compare subcommand: solver peaks against the peaks of
// the oracle's path list rendered under the same sweep.
void oracle_equivalence(Verdict& v) {
    double slowest4 = 0.0;
    std::size_t peaks = 0;
    for (int n = 2; n <= 4; ++n)
        for (auto seed : kSeeds) {
            const auto in = canonical_scenario(n, seed);
            const auto start = std::chrono::steady_clock::now();
            const auto solver = run_scenario(in, Variant::total, kPeakThreshold, 1);
            EnumerateOptions opts;
            opts.t_max = in.sweep.period();
            opts.amplitude_floor = kOracleFloor;
            opts.record_paths = false;
            const auto paths = enumerate_arrivals(in.lattice, in.drive, in.assess, opts);
            const auto oracle = rendered_arrivals(paths, in.sweep, kPeakThreshold);
            const double elapsed = seconds_since(start);
            if (n == 4) slowest4 = std::max(slowest4, elapsed);
            const auto report =
                compare_arrivals(solver.arrivals, oracle, {2 * in.sweep.dt(), kOracleAmplitudeTolerance});
            peaks += solver.arrivals.size();
            v.require(report.passed(), "N=" + std::to_string(n) + " seed " + std::to_string(seed) + ": " +
                                           std::to_string(report.unmatched_candidate.size()) + " unmatched");
        }
    v.require(slowest4 < kRuntime4d, "N=4 runtime " + format_number(slowest4) + " s");
    v.detail << " " << peaks << " solver peaks over 9 lattices, slowest N=4 " << slowest4 << " s";
}

void in_vivo_null(Verdict& v) {
    double worst = 0.0;
    for (int n = 2; n <= 4; ++n)
        for (auto seed : kSeeds) {
            const auto in = canonical_scenario(n, seed);
            const auto total = run_scenario(in);
            const auto vivo = run_scenario(with_in_vivo(in, n), Variant::in_vivo);
            const auto t_star = first_connector_arrival(in.lattice, in.drive, in.assess, n, in.sweep.period());
            const std::string tag = "N=" + std::to_string(n) + " seed " + std::to_string(seed);
            if (!t_star) {
                v.require(false, tag + ": no connector arrival in the window");
                continue;
            }
            double before = 0.0;
            for (std::size_t i = 0; i < total.time.values.size() && total.time.t(i) < *t_star; ++i)
                before = std::max(before, std::abs(total.time.values[i] - vivo.time.values[i]));
            const double ratio = before / max_abs(total.time.values);
            worst = std::max(worst, ratio);
            v.require(ratio <= kInVivoNull, tag + ": " + format_number(ratio));
        }
    v.detail << " worst max|total - in_vivo| / max|total| before t* = " << worst;
}

// Unit square with z2 = 1.7 and z4 = 1.8. Driving at 0.2 and listening at 0.7
// on edge 1, the generator path 0.5 + 2 * 2 and the loop 0.8 + 3 + 0.7 both
// arrive at t = 4.5.
void degeneracy(Verdict& v) {
    GenerateOptions o;
    o.length = Sampler::constant(1.0);
    o.density = Sampler::constant(1.0);
    o.min_round_trip_separation = 0.0;
    ParameterOverrides ov;
    ov[2].density = 1.7;
    ov[4].density = 1.8;
    const auto in = canonical_scenario(2, 0, ov, o);
    constexpr double t_deg = 4.5;
    const double tol = 2 * in.sweep.dt();

    EnumerateOptions opts;
    opts.t_max = in.sweep.period();
    opts.amplitude_floor = kOracleFloor;
    const auto paths = enumerate_arrivals(in.lattice, in.drive, in.assess, opts);
    std::size_t count = 0, with_connector = 0;
    for (const auto& g : coalesce(paths, 0.25 * in.sweep.dt()))
        if (std::abs(g.time - t_deg) <= tol) count = g.path_count;
    std::vector<PathArrival> connector_paths;
    for (const auto& p : paths) {
        if (!p.touches_connector(2)) continue;
        connector_paths.push_back(p);
        if (std::abs(p.time - t_deg) <= tol) ++with_connector;
    }
    v.require(count > 1, "oracle has no coalesced arrival at 4.5");
    v.require(with_connector > 0 && with_connector < count, "coalesced arrival does not mix path kinds");

    const auto total = run_scenario(in);
    const auto vivo = run_scenario(with_in_vivo(in, 2), Variant::in_vivo);
    const auto excess = excess_result(total, vivo);
    const auto* peak = arrival_near(excess.arrivals, t_deg, tol);
    const auto predicted = rendered_arrivals(connector_paths, in.sweep, kPeakThreshold);
    const auto* expected = arrival_near(predicted, t_deg, tol);
    v.require(peak != nullptr, "no excess peak at 4.5");
    v.require(expected != nullptr, "rendered connector paths have no peak at 4.5");
    if (peak && expected)
        v.require(std::abs(peak->amplitude - expected->amplitude) <= kOracleAmplitudeTolerance * std::abs(expected->amplitude),
                  "excess peak differs from the connector-path sum");

    const auto i = static_cast<std::size_t>(std::lround(t_deg / in.sweep.dt()));
    const double total_env = envelope(total.time)[i], vivo_env = envelope(vivo.time)[i];
    v.require(total_env > 2 * vivo_env, "total is not enlarged over in vivo at 4.5");
    v.detail << " " << count << " paths at t = 4.5 (" << with_connector << " via connectors), excess peak "
             << (peak ? peak->amplitude : 0.0) << ", envelope total/in_vivo " << total_env / vivo_env;
}

void topology(Verdict& v) {
    const std::size_t table[] = {1, 4, 12, 32};
    for (int n = 1; n <= 4; ++n)
        v.require(edge_count(n) == table[n - 1], "edge_count(" + std::to_string(n) + ")");
    for (int n = 1; n <= 6; ++n) {
        const auto lat = generate(n, 2024);
        v.require(lat.edges.size() == edge_count(n), "generate(" + std::to_string(n) + ") edge total");
        v.require(validate(lat).empty(), "validate N=" + std::to_string(n));
    }
    v.detail << " edge counts 1 4 12 32, validate N = 1..6";
}

std::pair<int, double> random_point(const Lattice& lat, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, lat.edges.size() - 1);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const auto& e = lat.edges[pick(rng)];
    return {e.id, frac(rng) * e.length};
}

void physics(Verdict& v) {
    std::mt19937_64 rng(7);

    // Junction power: sum_p |S_pq|^2 z_q / z_p = 1 for every lossless junction.
    double power = 0.0;
    std::uniform_int_distribution<int> degree(1, 6), kind(0, 3);
    std::uniform_real_distribution<double> imp(0.05, 20.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Node node;
        std::vector<double> z(static_cast<std::size_t>(degree(rng)));
        for (std::size_t p = 0; p < z.size(); ++p) {
            z[p] = imp(rng);
            node.ports.push_back({static_cast<int>(p + 1), EdgeEnd::low});
        }
        node.termination = kind(rng) == 0 ? Termination::release() : Termination::none();
        const auto s = junction_matrix(node, z).s;
        for (Eigen::Index q = 0; q < s.cols(); ++q) {
            double out = 0.0;
            for (Eigen::Index p = 0; p < s.rows(); ++p)
                out += s(p, q) * s(p, q) / z[static_cast<std::size_t>(p)];
            power = std::max(power, std::abs(out * z[static_cast<std::size_t>(q)] - 1.0));
        }
    }
    v.require(power <= kPowerTolerance, "power " + format_number(power));

    // Reciprocity, in the form that holds for a pressure-normalized source:
    // psi(x | x') / z(x) = psi(x' | x) / z(x').
    double recip = 0.0;
    const FrequencyGrid grid{2 * pi / 10, 200};
    for (int trial = 0; trial < 20; ++trial) {
        const auto lat = generate(1 + trial % 4, 500 + static_cast<std::uint64_t>(trial));
        const auto [e1, x1] = random_point(lat, rng);
        const auto [e2, x2] = random_point(lat, rng);
        const auto fwd = frequency_response(lat, {e1, x1, 1.0}, {e2, x2}, grid);
        const auto rev = frequency_response(lat, {e2, x2, 1.0}, {e1, x1}, grid);
        const double z1 = lat.edge(e1).impedance(), z2 = lat.edge(e2).impedance();
        for (std::size_t m = 1; m < grid.count; ++m) {
            const complex lhs = fwd.values[m] / z2, rhs = rev.values[m] / z1;
            recip = std::max(recip, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    v.require(recip <= kReciprocityTolerance, "reciprocity " + format_number(recip));

    // Semigroup, measured in units of the phase: exp() of a phase p carries an
    // error of order one ulp of p, so the bound scales with |k| (d1 + d2).
    double semigroup = 0.0, semigroup_raw = 0.0;
    std::uniform_real_distribution<double> w(0.0, 60.0), eta(0.0, 0.05), d(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const auto k = wavenumber(w(rng), 1.0, eta(rng));
        const double d1 = d(rng), d2 = d(rng);
        const double err = std::abs(propagator(k, d1) * propagator(k, d2) - propagator(k, d1 + d2));
        semigroup_raw = std::max(semigroup_raw, err);
        semigroup = std::max(semigroup, err / std::max(1.0, std::abs(k.value) * (d1 + d2)));
    }
    v.require(semigroup <= kSemigroupTolerance, "semigroup " + format_number(semigroup));

    // Linearity: doubling the drive doubles every unknown exactly.
    bool linear = true;
    for (int n = 1; n <= 4; ++n) {
        const auto lat = generate(n, 31);
        for (double omega : {0.7, 5.55, 123.4}) {
            const auto one = solve_frequency(lat, {1, 0.2, 1.0}, omega);
            const auto two = solve_frequency(lat, {1, 0.2, 2.0}, omega);
            linear = linear && two.amplitudes == (2.0 * one.amplitudes).eval();
        }
    }
    v.require(linear, "linearity");
    v.detail << " power " << power << ", reciprocity " << recip << ", semigroup " << semigroup << " per unit phase ("
             << semigroup_raw << " absolute), linearity " << (linear ? "exact" : "inexact");
}

void in_vitro(Verdict& v) {
    const auto single = run_scenario(canonical_scenario(1, 0));
    std::size_t checked = 0;
    for (auto seed : kSeeds) {
        auto in = canonical_scenario(2, seed);
        in.lattice = in_vitro_variant(in.lattice, 2);
        const auto square = run_scenario(in, Variant::in_vitro);
        const std::string tag = "seed " + std::to_string(seed);
        const CompareTolerances tol{2 * in.sweep.dt(), kInVitroAmplitudeTolerance};
        const auto forward = compare_arrivals(square.arrivals, single.arrivals, tol);
        const auto backward = compare_arrivals(single.arrivals, square.arrivals, tol);
        v.require(forward.passed() && backward.passed(), tag + ": arrivals differ");
        checked += single.arrivals.size();
    }
    v.detail << " " << checked << " arrivals over 3 seeds";
}

std::string bundle(const std::string& name) {
    const auto c = preset(name);
    const auto in = scenario_inputs(c);
    const auto r = run_scenario(in);
    EnumerateOptions opts;
    opts.t_max = 4.0;
    return frequency_csv(r.frequency) + time_csv(r.time) + arrivals_csv(r.arrivals) +
           oracle_csv(enumerate_arrivals(in.lattice, in.drive, in.assess, opts)) +
           lattice_to_json(in.lattice).dump(2);
}

void determinism(Verdict& v) {
    for (const char* name : {"paper-1d", "paper-2d", "paper-3d"}) {
        const auto a = bundle(name), b = bundle(name);
        v.require(a == b, std::string(name) + " differs between runs");
    }
    const auto in = scenario_inputs(preset("paper-3d"));
    const auto serial = frequency_csv(frequency_response(in.lattice, in.drive, in.assess, in.sweep.grid(), 1));
    const auto parallel = frequency_csv(frequency_response(in.lattice, in.drive, in.assess, in.sweep.grid(), 4));
    v.require(serial == parallel, "thread count changes the sweep");
    v.detail << " paper-1d, paper-2d, paper-3d bundles repeated; 1 vs 4 threads";
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        Verdict verdict;
    };
    Criterion c[9] = {{1, "single-string arrival times", {}}, {2, "single-string sign pattern", {}},
                      {3, "oracle equivalence N = 2..4", {}},  {4, "in-vivo null before t*", {}},
                      {5, "degenerate arrival", {}},           {6, "topology", {}},
                      {7, "physics properties", {}},           {8, "in-vitro reduction", {}},
                      {9, "determinism", {}}};

    auto guarded = [](Verdict& v, const std::function<void()>& f) {
        try {
            f();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
    };
    guarded(c[0].verdict, [&] { single_string(c[0].verdict, c[1].verdict); });
    guarded(c[2].verdict, [&] { oracle_equivalence(c[2].verdict); });
    guarded(c[3].verdict, [&] { in_vivo_null(c[3].verdict); });
    guarded(c[4].verdict, [&] { degeneracy(c[4].verdict); });
    guarded(c[5].verdict, [&] { topology(c[5].verdict); });
    guarded(c[6].verdict, [&] { physics(c[6].verdict); });
    guarded(c[7].verdict, [&] { in_vitro(c[7].verdict); });
    guarded(c[8].verdict, [&] { determinism(c[8].verdict); });

    bool all = true;
    for (auto& k : c) {
        all = all && k.verdict.pass;
        std::printf("%s %d %s:%s\n", k.verdict.pass ? "PASS" : "FAIL", k.number, k.name, k.verdict.detail.str().c_str());
    }
    return all ? 0 : 1;
}
