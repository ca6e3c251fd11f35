// hyperlattice: generate lattices, run frequency sweeps, enumerate reverberation
// paths and compare the two.
//
// Exit codes: 0 success, 1 comparison failure, 2 configuration error,
// 3 numerical error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "hyperlattice/hyperlattice.hpp"

namespace fs = std::filesystem;
using namespace hyperlattice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompareFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

constexpr const char* kOutputRootVariable = "HYPERLATTICE_OUTPUT_ROOT";

struct CommonOptions {
    std::string config_path;
    std::string preset_name;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    auto* cfg = cmd->add_option("--config", o.config_path, "Run configuration document (JSON)");
    auto* pre = cmd->add_option("--preset", o.preset_name, "Named scenario")
                    ->check(CLI::IsMember(preset_names()));
    cfg->excludes(pre);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Override the randomization seed");
    cmd->add_option("--jobs", o.jobs, "Worker threads for the frequency sweep")->check(CLI::Range(1u, 256u));
}

RunConfig resolve_config(const CommonOptions& o) {
    RunConfig c = !o.config_path.empty() ? load_config(o.config_path)
                                         : preset(o.preset_name.empty() ? "paper-1d" : o.preset_name);
    if (o.seed) c.seed = *o.seed;
    return c;
}

fs::path output_dir(const CommonOptions& o, const RunConfig& c) {
    if (!o.out.empty()) return o.out;
    if (!c.output.directory.empty()) return c.output.directory;
    std::string name = "run";
    if (!o.preset_name.empty()) name = o.preset_name;
    else if (!o.config_path.empty()) name = fs::path(o.config_path).stem().string();
    const char* root = std::getenv(kOutputRootVariable);
    return fs::path(root && *root ? root : "out") / name;
}

void write_result(const fs::path& dir, const ScenarioResult& r, bool plot) {
    write_file_atomic(dir / "frequency.csv", frequency_csv(r.frequency));
    write_file_atomic(dir / "time.csv", time_csv(r.time));
    write_file_atomic(dir / "arrivals.csv", arrivals_csv(r.arrivals));
    if (r.variant != Variant::excess) write_file_atomic(dir / "lattice.json", lattice_to_json(r.lattice).dump(2) + "\n");
    if (plot) write_file_atomic(dir / "plot.svg", time_plot_svg(r.time, r.arrivals, to_string(r.variant)));
}

int cmd_generate(const CommonOptions& o) {
    const auto c = resolve_config(o);
    const auto in = scenario_inputs(c);
    const auto dir = output_dir(o, c);
    write_file_atomic(dir / "lattice.json", lattice_to_json(in.lattice).dump(2) + "\n");
    std::cout << "wrote " << (dir / "lattice.json").string() << " (" << in.lattice.edges.size() << " edges, "
              << in.lattice.nodes.size() << " nodes)\n";
    for (const auto& v : validate(in.lattice)) std::cout << "note: " << v << "\n";
    return kExitOk;
}

int cmd_run(const CommonOptions& o, double threshold) {
    const auto c = resolve_config(o);
    const auto in = scenario_inputs(c);
    const auto dir = output_dir(o, c);

    const auto total = run_scenario(in, Variant::total, threshold, o.jobs);
    write_result(dir / "total", total, c.output.emit_plot);
    std::cout << "total: " << total.arrivals.size() << " arrivals\n";

    const int level = c.variant.level.value_or(in.lattice.top_level());
    if (c.variant.in_vivo || c.variant.excess) {
        auto vivo_in = in;
        vivo_in.lattice = in_vivo_variant(in.lattice, level, in.sweep.period());
        const auto vivo = run_scenario(vivo_in, Variant::in_vivo, threshold, o.jobs);
        if (c.variant.in_vivo) write_result(dir / "in_vivo", vivo, c.output.emit_plot);
        if (c.variant.excess) {
            const auto excess = excess_result(total, vivo, threshold);
            write_result(dir / "excess", excess, c.output.emit_plot);
            const auto t_star = first_connector_arrival(in.lattice, in.drive, in.assess, level, in.sweep.period());
            std::cout << "excess: " << excess.arrivals.size() << " arrivals; first connector arrival "
                      << (t_star ? format_number(*t_star) : std::string("beyond horizon")) << "\n";
        }
    }
    if (c.variant.in_vitro) {
        auto vitro_in = in;
        vitro_in.lattice = in_vitro_variant(in.lattice, level);
        write_result(dir / "in_vitro", run_scenario(vitro_in, Variant::in_vitro, threshold, o.jobs),
                     c.output.emit_plot);
    }
    write_file_atomic(dir / "manifest.json", config_to_json(c).dump(2) + "\n");
    std::cout << "wrote bundle to " << dir.string() << "\n";
    return kExitOk;
}

double default_horizon(const RunConfig& c) {
    // Wrapped arrivals matter for the single string; the branching of N >= 2
    // makes anything beyond one window intractable and below threshold anyway.
    return c.sweep.period() * (c.dimension == 1 ? 3.0 : 1.0);
}

int cmd_oracle(const CommonOptions& o, std::optional<double> t_max, double floor) {
    const auto c = resolve_config(o);
    const auto in = scenario_inputs(c);
    const auto dir = output_dir(o, c);
    EnumerateOptions opts;
    opts.t_max = t_max.value_or(default_horizon(c));
    opts.amplitude_floor = floor;
    const auto paths = enumerate_arrivals(in.lattice, in.drive, in.assess, opts);
    write_file_atomic(dir / "oracle.csv", oracle_csv(paths));
    const auto groups = coalesce(paths, 0.25 * in.sweep.dt());
    std::cout << "wrote " << (dir / "oracle.csv").string() << " (" << paths.size() << " paths, " << groups.size()
              << " distinct times)\n";
    return kExitOk;
}

/// Peaks from either an arrivals CSV or an oracle path list rendered under the sweep.
std::vector<Arrival> load_peaks(const fs::path& path, const SweepConfig& sweep, double threshold) {
    const auto table = parse_csv(read_file(path));
    if (table.has_column("edge_sequence")) return rendered_arrivals(paths_from_csv(table), sweep, threshold);
    auto peaks = arrivals_from_csv(table);
    const double global = std::accumulate(peaks.begin(), peaks.end(), 0.0,
                                          [](double m, const Arrival& a) { return std::max(m, std::abs(a.amplitude)); });
    std::erase_if(peaks, [&](const Arrival& a) { return std::abs(a.amplitude) < threshold * global; });
    return peaks;
}

int cmd_compare(const CommonOptions& o, const std::string& solver_path, const std::string& oracle_path,
                double threshold, std::optional<double> time_tol, double amp_tol) {
    const auto c = resolve_config(o);
    const auto solver = load_peaks(solver_path, c.sweep, threshold);
    const auto oracle = load_peaks(oracle_path, c.sweep, threshold);
    const CompareTolerances tol{time_tol.value_or(2.0 * c.sweep.dt()), amp_tol};
    const auto report = compare_arrivals(solver, oracle, tol);

    std::cout << "compared " << solver.size() << " solver peaks against " << oracle.size()
              << " oracle peaks (time tolerance " << format_number(tol.time) << ", amplitude tolerance "
              << format_number(tol.amplitude_relative * 100.0) << "%)\n";
    for (const auto& m : report.matches)
        std::cout << "  match    t=" << format_number(solver[m.candidate].time)
                  << " dt=" << format_number(m.time_delta) << " da=" << format_number(m.amplitude_delta) << "\n";
    for (auto i : report.unmatched_candidate)
        std::cout << "  unmatched solver t=" << format_number(solver[i].time)
                  << " a=" << format_number(solver[i].amplitude) << "\n";
    for (auto j : report.unmatched_reference)
        std::cout << "  unmatched oracle t=" << format_number(oracle[j].time)
                  << " a=" << format_number(oracle[j].amplitude) << "\n";
    std::cout << (report.passed() ? "PASS" : "FAIL") << "\n";
    return report.passed() ? kExitOk : kExitCompareFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse propagation in hypercube lattices of 1-D waveguides"};
    app.require_subcommand(1);

    CommonOptions gen_opts, run_opts, oracle_opts, cmp_opts;
    auto* gen = app.add_subcommand("generate", "Write the lattice document");
    add_common(gen, gen_opts);

    double run_threshold = 1e-3;
    auto* run = app.add_subcommand("run", "Frequency sweep, time response and arrivals (plus variants)");
    add_common(run, run_opts);
    run->add_option("--threshold", run_threshold, "Relative envelope threshold for arrivals")
        ->check(CLI::Range(0.0, 1.0));

    std::optional<double> t_max;
    double floor = 1e-6;
    auto* orc = app.add_subcommand("oracle", "Enumerate reverberation paths to the assessment point");
    add_common(orc, oracle_opts);
    orc->add_option("--t-max", t_max, "Latest arrival time to enumerate");
    orc->add_option("--floor", floor, "Amplitude below which a path is dropped");

    std::string solver_csv, oracle_csv_path;
    double cmp_threshold = 1e-3, amp_tol = 0.1;
    std::optional<double> time_tol;
    auto* cmp = app.add_subcommand("compare", "Match solver peaks against oracle arrivals");
    add_common(cmp, cmp_opts);
    cmp->add_option("solver", solver_csv, "Solver arrivals CSV (or an oracle path list)")->required();
    cmp->add_option("oracle", oracle_csv_path, "Oracle path list CSV (or an arrivals CSV)")->required();
    cmp->add_option("--threshold", cmp_threshold, "Relative threshold for peaks")->check(CLI::Range(0.0, 1.0));
    cmp->add_option("--time-tol", time_tol, "Time tolerance (default 2 dt)");
    cmp->add_option("--amp-tol", amp_tol, "Relative amplitude tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_opts);
        if (run->parsed()) return cmd_run(run_opts, run_threshold);
        if (orc->parsed()) return cmd_oracle(oracle_opts, t_max, floor);
        if (cmp->parsed()) return cmd_compare(cmp_opts, solver_csv, oracle_csv_path, cmp_threshold, time_tol, amp_tol);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
