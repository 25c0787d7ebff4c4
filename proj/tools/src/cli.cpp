#include "outformation/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "outformation/experiments.hpp"
#include "outformation/timeline_svg.hpp"

namespace outformation::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw UsageError("cannot open config '" + file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("malformed JSON in '" + file + "': " + e.what());
    }
    auto s = scenario_from_json(j);
    validate_config(s.config, s.components);
    return s;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<Architecture> parse_archs(const std::vector<std::string>& names) {
    std::vector<Architecture> archs;
    for (const auto& n : names) {
        auto a = parse_architecture(n);
        if (!a) throw UsageError("unknown architecture '" + n + "' (expected in0, in_eps or out_eps)");
        if (std::find(archs.begin(), archs.end(), *a) == archs.end()) archs.push_back(*a);
    }
    if (archs.empty()) throw UsageError("--arch needs at least one architecture");
    return archs;
}

TimelinePlotSpec plot_spec(const ScenarioConfig& cfg, std::vector<TraceRecord> events, std::string title) {
    TimelinePlotSpec spec;
    spec.events = std::move(events);
    spec.dt_up = cfg.dt_up;
    spec.dt_down = cfg.dt_down;
    spec.x_max = cfg.t_sim;
    spec.title = std::move(title);
    return spec;
}

// ---------------------------------------------------------------- commands

struct ScenarioArgs {
    std::string preset;
    std::string emit;
    bool force = false;
};

int cmd_scenario(const ScenarioArgs& a, std::ostream& out, std::ostream& err) {
    Scenario s;
    try {
        s = experiments::preset(a.preset);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (fs::exists(a.emit) && !a.force) {
        err << "refusing to overwrite '" << a.emit << "' (use --force)\n";
        return kOverwrite;
    }
    write_file(a.emit, to_json(s).dump(2) + "\n");
    out << "wrote " << a.emit << '\n';
    return kOk;
}

struct SimulateArgs {
    std::string config;
    std::vector<std::string> archs{"in_eps", "out_eps"};
    std::optional<std::uint64_t> seed;
    long long reps = 1;
    std::string out_dir;
    bool svg = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    auto scenario = load_scenario(a.config);
    if (a.seed) scenario.config.seed = *a.seed;
    const auto archs = parse_archs(a.archs);
    if (a.reps < 1) throw UsageError("--reps must be at least 1");

    struct Chunk {
        std::string events;
        std::string metrics;
        bool coupled;
    };
    const auto chunks = experiments::parallel_map<Chunk>(static_cast<std::size_t>(a.reps), [&](std::size_t r) {
        const auto pr = experiments::paired_run(scenario, archs, r);
        std::ostringstream ev, me;
        for (const auto& run : pr.runs) {
            write_events_csv(ev, run.trace);
            write_metrics_row(me, r, run.trace.arch, run.metrics);
        }
        return Chunk{ev.str(), me.str(), pr.coupled()};
    });

    fs::create_directories(a.out_dir);
    std::ostringstream events, metrics;
    write_events_header(events);
    write_metrics_header(metrics, scenario.config.n);
    for (const auto& c : chunks) {
        if (!c.coupled) throw std::runtime_error("architectures did not consume identical random primitives");
        events << c.events;
        metrics << c.metrics;
    }
    write_file(fs::path(a.out_dir) / "events.csv", events.str());
    write_file(fs::path(a.out_dir) / "metrics.csv", metrics.str());

    if (a.svg) {
        const auto pr = experiments::paired_run(scenario, archs, 0);
        for (const auto& run : pr.runs) {
            const std::string name = std::string(to_string(run.trace.arch));
            const auto svg = render_timeline_svg(plot_spec(scenario.config, run.trace.events, name + ", replication 0"));
            write_file(fs::path(a.out_dir) / ("timeline_" + name + ".svg"), svg);
        }
    }
    out << "simulated " << a.reps << " replication(s) x " << archs.size() << " architecture(s) into " << a.out_dir
        << '\n';
    return kOk;
}

struct VerifyArgs {
    std::string theorem;
    std::string config;
    long long reps = 1000;
    std::string out_dir;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const auto id = experiments::parse_theorem(a.theorem);
    if (!id) throw UsageError("unknown theorem id '" + a.theorem + "'");
    const auto scenario = load_scenario(a.config);
    if (a.reps < 2) throw UsageError("--reps must be at least 2");

    const auto report = experiments::verify_theorem(*id, scenario, a.reps);
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / ("verify_" + a.theorem + ".json"), experiments::to_json(report).dump(2) + "\n");
    std::ostringstream csv;
    experiments::write_theory_csv_header(csv);
    experiments::write_theory_csv(csv, report);
    write_file(fs::path(a.out_dir) / "theory.csv", csv.str());
    experiments::print_verdict_table(out, report);
    return report.passed() ? kOk : kVerifyFailed;
}

struct RenderArgs {
    std::string events;
    std::string config;
    std::string arch = "out_eps";
    std::uint64_t replication = 0;
    std::string out_file;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
    const auto scenario = load_scenario(a.config);
    std::ifstream in(a.events, std::ios::binary);
    if (!in) throw UsageError("cannot open events file '" + a.events + "'");
    std::vector<TraceRecord> records;
    for (auto& row : read_events_csv(in))
        if (row.arch == a.arch && row.replication == a.replication) records.push_back(std::move(row.record));
    const auto svg = render_timeline_svg(
        plot_spec(scenario.config, std::move(records), a.arch + ", replication " + std::to_string(a.replication)));
    write_file(a.out_file, svg);
    out << "wrote " << a.out_file << '\n';
    return kOk;
}

struct SweepArgs {
    std::string config;
    std::vector<std::string> archs{"in0", "in_eps", "out_eps"};
    long long reps = 100;
    std::string out_dir;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const auto base = load_scenario(a.config);
    const auto archs = parse_archs(a.archs);
    if (a.reps < 2) throw UsageError("--reps must be at least 2");
    std::ostringstream csv;
    csv << "epsilon,sigma,statistic,mean,se,ci99_low,ci99_high,n\n";
    for (const auto& [eps, sigma] : experiments::sweep_grid()) {
        auto s = base;
        s.config.epsilon = eps;
        s.config.sigma = sigma;
        const auto summary = experiments::replicate(s, archs, a.reps);
        for (const auto& [name, e] : summary.stats) {
            csv << format_number(eps) << ',' << format_number(sigma) << ',' << name << ',' << format_number(e.mean)
                << ',' << format_number(e.se) << ',' << format_number(e.ci_low) << ',' << format_number(e.ci_high)
                << ',' << e.n << '\n';
        }
    }
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "sweep.csv", csv.str());
    nlohmann::json meta = {{"grid", experiments::sweep_grid()},
                           {"grid_origin", "tool-defined (epsilon, sigma) grid"},
                           {"config_digest", experiments::config_digest(base)},
                           {"replications", a.reps}};
    write_file(fs::path(a.out_dir) / "sweep_meta.json", meta.dump(2) + "\n");
    out << "wrote " << (fs::path(a.out_dir) / "sweep.csv").string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-triggered two-sensor estimation simulator (IN0 / IN(eps) / OUT(eps))", "outformation"};
    app.require_subcommand(1);

    ScenarioArgs sc;
    auto* scenario = app.add_subcommand("scenario", "Write a preset scenario as JSON");
    scenario->add_option("--preset", sc.preset, "Preset name")->required();
    scenario->add_option("--emit", sc.emit, "Output JSON file")->required();
    scenario->add_flag("--force", sc.force, "Overwrite an existing file");

    SimulateArgs sim;
    std::uint64_t seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Run paired simulations and write events.csv / metrics.csv");
    simulate->add_option("--config", sim.config, "Scenario JSON")->required();
    simulate->add_option("--arch", sim.archs, "Architectures: in0,in_eps,out_eps")->delimiter(',');
    auto* seed_opt = simulate->add_option("--seed", seed, "Root seed (defaults to the config's seed)");
    simulate->add_option("--reps", sim.reps, "Replications");
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_flag("--svg", sim.svg, "Also write timeline SVGs for replication 0");

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Compare Monte Carlo estimates with closed forms");
    verify->add_option("--theorem", ver.theorem, "power_unshared | mse_unshared | power_shared | mse_shared | mse_shared_gen")
        ->required();
    verify->add_option("--config", ver.config, "Scenario JSON")->required();
    verify->add_option("--reps", ver.reps, "Replications");
    verify->add_option("--out", ver.out_dir, "Output directory")->required();

    RenderArgs ren;
    auto* render = app.add_subcommand("render", "Render an SVG timeline from events.csv");
    render->add_option("--events", ren.events, "events.csv from simulate")->required();
    render->add_option("--config", ren.config, "Scenario JSON used for the run")->required();
    render->add_option("--arch", ren.arch, "Architecture to draw");
    render->add_option("--replication", ren.replication, "Replication to draw");
    render->add_option("--out", ren.out_file, "Output SVG file")->required();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Replicate a scenario over an (epsilon, sigma) grid");
    sweep->add_option("--config", sw.config, "Scenario JSON")->required();
    sweep->add_option("--arch", sw.archs, "Architectures")->delimiter(',');
    sweep->add_option("--reps", sw.reps, "Replications per grid point");
    sweep->add_option("--out", sw.out_dir, "Output directory")->required();

    std::vector<const char*> argv{"outformation"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    if (*seed_opt) sim.seed = seed;

    try {
        if (*scenario) return cmd_scenario(sc, out, err);
        if (*simulate) return cmd_simulate(sim, out);
        if (*verify) return cmd_verify(ver, out);
        if (*render) return cmd_render(ren, out);
        if (*sweep) return cmd_sweep(sw, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "invalid config:\n";
        for (const auto& v : e.violations()) err << "  - " << v << '\n';
        return kUsage;
    } catch (const ConditioningError& e) {
        err << "conditioning infeasible: " << e.what() << '\n';
        return kConditioning;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}

}  // namespace outformation::cli
