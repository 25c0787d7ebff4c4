#include "outformation/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "outformation/fusion_metrics.hpp"
#include "outformation/sensing.hpp"

namespace outformation::experiments {

namespace {

constexpr double kExactTolerance = 1e-12;
constexpr double kZ99 = 2.5758293035489004;

ComponentMap make_map(std::set<ComponentId> shared, std::set<ComponentId> u1, std::set<ComponentId> u2) {
    ComponentMap m;
    m.shared = std::move(shared);
    m.unshared_1 = std::move(u1);
    m.unshared_2 = std::move(u2);
    for (auto k : m.all()) m.full_index[k] = k;
    return m;
}

ScenarioConfig event_triggered(double delta_t, double tau) {
    ScenarioConfig c;
    c.delta_t = delta_t;
    c.tau_1 = c.tau_2 = tau;
    c.T_1 = c.T_2 = tau;
    const int h = static_cast<int>(std::lround(delta_t / tau));
    c.H = {h, h};
    return c;
}

Scenario finish(ScenarioConfig cfg, ComponentMap map) {
    validate_config(cfg, map);
    return {std::move(cfg), std::move(map)};
}

}  // namespace

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() {
    return {"setup1", "setup2", "fig_event", "fig_time", "sweep", "unshared", "unshared_power"};
}

Scenario preset(std::string_view name) {
    if (name == "setup1") {
        auto cfg = event_triggered(20.0, 20.0);
        cfg.t_sim = 40.0;
        return finish(cfg, make_map({1}, {2}, {3}));
    }
    if (name == "setup2") {
        ScenarioConfig cfg;
        cfg.delta_t = 5.0;
        cfg.tau_1 = cfg.tau_2 = 1.0;
        cfg.T_1 = 23.0;
        cfg.T_2 = 41.0;
        cfg.H = {5, 5};
        cfg.t_sim = 92.0;
        return finish(cfg, make_map({1}, {2}, {3}));
    }
    if (name == "fig_event") {
        auto cfg = event_triggered(20.0, 20.0);
        cfg.n = 6;
        cfg.sigma = 0.0;
        cfg.t_sim = 200.0;
        return finish(cfg, make_map({1, 2}, {3, 4}, {5, 6}));
    }
    if (name == "fig_time") {
        ScenarioConfig cfg;
        cfg.n = 12;
        cfg.delta_t = 5.0;
        cfg.tau_1 = cfg.tau_2 = 1.0;
        cfg.T_1 = 23.0;
        cfg.T_2 = 41.0;
        cfg.H = {5, 5};
        cfg.sigma = 0.5;
        cfg.p_change = 0.1;
        cfg.backoff = BackoffSpec::zero();
        cfg.t_sim = 200.0;
        return finish(cfg, make_map({7, 10}, {12}, {1}));
    }
    if (name == "sweep") {
        auto cfg = event_triggered(20.0, 10.0);
        cfg.n = 6;
        cfg.sigma = 0.5;
        cfg.t_sim = 400.0;
        return finish(cfg, make_map({1, 2}, {3, 4}, {5, 6}));
    }
    if (name == "unshared") {
        auto cfg = event_triggered(20.0, 10.0);
        cfg.n = 4;
        cfg.sigma = 0.1;
        cfg.change_mode = ChangeMode::Single;
        cfg.p_change = 0.5;
        cfg.t_sim = 200.0;
        return finish(cfg, make_map({1, 2}, {3}, {4}));
    }
    if (name == "unshared_power") {
        auto cfg = event_triggered(20.0, 5.0);
        cfg.n = 2;
        cfg.backoff = BackoffSpec::uniform(4.5);
        cfg.dt_up = 1.5;
        cfg.t_sim = 60.0;
        return finish(cfg, make_map({}, {1}, {2}));
    }
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::pair<double, double>> sweep_grid() {
    std::vector<std::pair<double, double>> grid;
    for (double eps : {0.5, 1.0, 2.0})
        for (double sigma : {0.0, 0.5, 1.0}) grid.emplace_back(eps, sigma);
    return grid;
}

// ---------------------------------------------------------------- parallelism

unsigned thread_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("OUTFORMATION_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (n == 0) n = std::thread::hardware_concurrency();
    return std::max(1u, n);
}

// ---------------------------------------------------------------- paired runs

bool PairedResult::coupled() const {
    return std::all_of(checksums.begin(), checksums.end(), [&](auto c) { return c == checksums.front(); });
}

const SimulationResult& PairedResult::run(Architecture arch) const {
    for (std::size_t i = 0; i < archs.size(); ++i)
        if (archs[i] == arch) return runs[i];
    throw std::invalid_argument("architecture not part of the paired run");
}

double PairedResult::power_diff(Architecture a, Architecture b) const {
    return run(a).metrics.power_total - run(b).metrics.power_total;
}

double PairedResult::mse_diff(Architecture a, Architecture b) const {
    return run(a).metrics.mse_total - run(b).metrics.mse_total;
}

double PairedResult::mse_index_diff(Architecture a, Architecture b, FullIndex i) const {
    return run(a).metrics.mse_per_index.at(i - 1) - run(b).metrics.mse_per_index.at(i - 1);
}

PairedResult paired_run(const Scenario& scenario, const std::vector<Architecture>& archs, std::uint64_t replication) {
    const auto& cfg = scenario.config;
    const RandomStreams streams(cfg.seed, replication);
    const auto path = sample_path(cfg, streams);
    PairedResult r;
    r.replication = replication;
    r.archs = archs;
    for (auto arch : archs) {
        r.runs.push_back(run_simulation(cfg, scenario.components, arch, path, streams));
        r.checksums.push_back(r.runs.back().trace.primitive_checksum);
    }
    return r;
}

Estimate estimate_mean(const std::vector<double>& samples) {
    Estimate e;
    e.n = static_cast<long long>(samples.size());
    if (samples.empty()) return e;
    double sum = 0.0;
    for (double v : samples) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    if (e.n >= 2) {
        double ss = 0.0;
        for (double v : samples) ss += (v - e.mean) * (v - e.mean);
        e.se = std::sqrt(ss / static_cast<double>(e.n - 1)) / std::sqrt(static_cast<double>(e.n));
    }
    e.ci_low = e.mean - kZ99 * e.se;
    e.ci_high = e.mean + kZ99 * e.se;
    return e;
}

const Estimate& ReplicationSummary::at(std::string_view name) const {
    for (const auto& [k, v] : stats)
        if (k == name) return v;
    throw std::out_of_range("no statistic named " + std::string(name));
}

ReplicationSummary replicate(const Scenario& scenario, const std::vector<Architecture>& archs, long long n) {
    if (n < 2) throw std::invalid_argument("replicate needs at least 2 replications");
    if (archs.empty()) throw std::invalid_argument("replicate needs at least one architecture");

    std::vector<std::string> names;
    for (auto a : archs) {
        names.push_back("power_total[" + std::string(to_string(a)) + "]");
        names.push_back("mse_total[" + std::string(to_string(a)) + "]");
    }
    for (std::size_t i = 0; i < archs.size(); ++i) {
        for (std::size_t j = i + 1; j < archs.size(); ++j) {
            const std::string pair = std::string(to_string(archs[i])) + "-" + std::string(to_string(archs[j]));
            names.push_back("power_diff[" + pair + "]");
            names.push_back("mse_diff[" + pair + "]");
            for (int idx = 1; idx <= scenario.config.n; ++idx)
                names.push_back("mse_idx_diff[" + pair + "][" + std::to_string(idx) + "]");
        }
    }

    const auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto pr = paired_run(scenario, archs, r);
        std::vector<double> row;
        row.reserve(names.size());
        for (const auto& run : pr.runs) {
            row.push_back(run.metrics.power_total);
            row.push_back(run.metrics.mse_total);
        }
        for (std::size_t i = 0; i < archs.size(); ++i) {
            for (std::size_t j = i + 1; j < archs.size(); ++j) {
                row.push_back(pr.power_diff(archs[i], archs[j]));
                row.push_back(pr.mse_diff(archs[i], archs[j]));
                for (int idx = 1; idx <= scenario.config.n; ++idx)
                    row.push_back(pr.mse_index_diff(archs[i], archs[j], idx));
            }
        }
        return row;
    });

    ReplicationSummary summary;
    summary.n = n;
    std::vector<double> column(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < names.size(); ++s) {
        for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][s];
        summary.stats.emplace_back(names[s], estimate_mean(column));
    }
    return summary;
}

// ---------------------------------------------------------------- conditioned runs

ScenarioAcceptor setup_acceptor(const Scenario& scenario, SetupKind kind) {
    const auto& cfg = scenario.config;
    const auto& map = scenario.components;
    if (kind == SetupKind::Two) {
        return [&cfg, &map](const ConditionedScenario& scn, const RandomStreams& streams) {
            return setup_two_pattern_holds(scn, map, cfg, streams);
        };
    }
    return [&cfg, &map](const ConditionedScenario& scn, const RandomStreams& streams) {
        if (!setup_one_pattern_holds(scn, map, cfg, streams)) return false;
        if (cfg.H[0] == 1 && cfg.H[1] == 1) return true;
        // With several verifications per interval a broadcast could move a
        // reference and cause an extra trigger under OUT(eps).
        SimOptions opts;
        opts.record_samples = false;
        const auto out = run_simulation(cfg, map, Architecture::OutEps, scn, streams, opts);
        const auto triggers = std::count_if(out.trace.events.begin(), out.trace.events.end(),
                                            [](const TraceRecord& r) { return r.kind == TraceKind::Trigger; });
        return triggers == 2 && out.trace.drift_triggers == 0;
    };
}

ConditionedScenario build_conditioned(const Scenario& scenario, SetupKind kind, std::uint64_t replication) {
    const RandomStreams streams(scenario.config.seed, replication);
    const auto accept = setup_acceptor(scenario, kind);
    if (kind == SetupKind::One) return build_setup_one(scenario.config, scenario.components, streams, accept);
    return build_setup_two(scenario.config, scenario.components, streams, accept);
}

ConditionedRun conditioned_run(const Scenario& scenario, SetupKind kind, std::uint64_t replication) {
    ConditionedRun r;
    r.scenario = build_conditioned(scenario, kind, replication);
    const RandomStreams streams(scenario.config.seed, replication);
    SimOptions opts;
    opts.record_samples = false;
    r.in = run_simulation(scenario.config, scenario.components, Architecture::InEps, r.scenario, streams, opts);
    r.out = run_simulation(scenario.config, scenario.components, Architecture::OutEps, r.scenario, streams, opts);
    return r;
}

// ---------------------------------------------------------------- helpers

std::vector<TraceRecord> unshared_uplinks(const SimulationTrace& trace, const ComponentMap& map) {
    std::vector<TraceRecord> out;
    for (const auto& rec : trace.events) {
        if (rec.kind != TraceKind::UplinkSend && rec.kind != TraceKind::UplinkArrive) continue;
        TraceRecord r = rec;
        r.components.clear();
        r.values.clear();
        for (std::size_t i = 0; i < rec.components.size(); ++i) {
            if (map.is_shared(rec.components[i])) continue;
            r.components.push_back(rec.components[i]);
            r.values.push_back(rec.values[i]);
        }
        if (!r.components.empty()) out.push_back(std::move(r));
    }
    return out;
}

std::vector<EstimateBreakpoint> unshared_estimates(const SimulationTrace& trace, const ComponentMap& map) {
    const auto indices = map.unshared_indices();
    std::vector<EstimateBreakpoint> out;
    for (const auto& bp : trace.estimates)
        if (indices.count(bp.index)) out.push_back(bp);
    return out;
}

double unshared_arrival_power(const SimulationTrace& trace, const ComponentMap& map, double p_up, double t1,
                              double t2) {
    double acc = 0.0;
    for (const auto& rec : trace.events) {
        if (rec.kind != TraceKind::UplinkArrive || rec.time < t1 || rec.time >= t2) continue;
        for (auto k : rec.components)
            if (!map.is_shared(k)) acc += p_up;
    }
    return acc;
}

// ---------------------------------------------------------------- verification

std::string_view to_string(TheoremId id) {
    switch (id) {
        case TheoremId::PowerUnshared: return "power_unshared";
        case TheoremId::MseUnshared: return "mse_unshared";
        case TheoremId::PowerShared: return "power_shared";
        case TheoremId::MseShared: return "mse_shared";
        case TheoremId::MseSharedGen: return "mse_shared_gen";
    }
    return "?";
}

std::optional<TheoremId> parse_theorem(std::string_view name) {
    for (auto id : {TheoremId::PowerUnshared, TheoremId::MseUnshared, TheoremId::PowerShared, TheoremId::MseShared,
                    TheoremId::MseSharedGen})
        if (to_string(id) == name) return id;
    return std::nullopt;
}

std::vector<std::string> theorem_names() {
    return {"power_unshared", "mse_unshared", "power_shared", "mse_shared", "mse_shared_gen"};
}

bool within_band(const Comparison& c) {
    const double gap = std::abs(c.mc_estimate - c.closed_form);
    if (c.band == "rel_2pct") return gap <= std::max(0.02 * std::abs(c.closed_form), kExactTolerance);
    if (c.band == "3se" && c.mc_stderr > 0.0) return gap <= 3.0 * c.mc_stderr;
    return gap <= kExactTolerance;
}

bool VerificationReport::passed() const {
    const bool any = std::any_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.pass; });
    const bool exact = std::all_of(exact_checks.begin(), exact_checks.end(), [](const ExactCheck& e) { return e.pass(); });
    return any && exact;
}

std::string config_digest(const Scenario& scenario) {
    const auto text = to_json(scenario).dump();
    std::uint64_t h = 0;
    for (unsigned char ch : text) h = hash_combine(h, ch);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using theory::Variant;
constexpr Variant kVariants[] = {Variant::Printed, Variant::ProofConsistent};

Comparison compare(std::string formula_id, Variant variant, std::string accounting, double closed,
                   const Estimate& mc, std::string band) {
    Comparison c{std::move(formula_id), variant, std::move(accounting), closed, mc.mean, mc.se, mc.n, std::move(band),
                 false};
    c.pass = within_band(c);
    return c;
}

void verify_power_unshared(const Scenario& s, long long n, VerificationReport& rep) {
    const auto& cfg = s.config;
    const int c = 1;
    const double t1 = c * cfg.delta_t;
    const double t2 = (c + 1) * cfg.delta_t;
    if (cfg.t_sim < t2) throw ConditioningError("power_unshared needs t_sim >= 2 delta_t");

    const auto samples = parallel_map<double>(static_cast<std::size_t>(n), [&](std::size_t r) {
        const RandomStreams streams(cfg.seed, r);
        const auto path = sample_path(cfg, streams);
        SimOptions opts;
        opts.record_samples = false;
        const auto res = run_simulation(cfg, s.components, Architecture::InEps, path, streams, opts);
        return unshared_arrival_power(res.trace, s.components, cfg.p_up, t1, t2);
    });
    // p_jk from an independent block of replications.
    const auto table = theory::estimate_p_jk(cfg, s.components, n, cfg.seed, static_cast<std::uint64_t>(n));
    double closed = 0.0;
    for (int j = 1; j <= kSensorCount; ++j) closed += theory::unshared_power_expected(cfg, s.components, j, c, table);

    const auto mc = estimate_mean(samples);
    for (auto v : kVariants) rep.comparisons.push_back(compare("power_unshared", v, "-", closed, mc, "rel_2pct"));
    rep.setup = {{"interval", c}, {"window", {t1, t2}}, {"p_table_replications", {n, 2 * n}}};
}

void verify_mse_unshared(const Scenario& s, long long n, VerificationReport& rep) {
    struct Row {
        bool coupled, uplinks_equal, mse_equal;
    };
    const auto rows = parallel_map<Row>(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto pr = paired_run(s, {Architecture::InEps, Architecture::OutEps}, r);
        const auto& in = pr.run(Architecture::InEps).trace;
        const auto& out = pr.run(Architecture::OutEps).trace;
        const bool uplinks = unshared_uplinks(in, s.components) == unshared_uplinks(out, s.components);
        bool mse = unshared_estimates(in, s.components) == unshared_estimates(out, s.components);
        for (auto idx : s.components.unshared_indices())
            mse = mse && pr.run(Architecture::InEps).metrics.mse_per_index[idx - 1] ==
                             pr.run(Architecture::OutEps).metrics.mse_per_index[idx - 1];
        return Row{pr.coupled(), uplinks, mse};
    });
    ExactCheck coupling{"coupling_checksums", 0, n};
    ExactCheck uplinks{"unshared_uplink_trace_equal", 0, n};
    ExactCheck mse{"unshared_mse_trajectory_equal", 0, n};
    std::vector<double> equal(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        coupling.violations += !rows[i].coupled;
        uplinks.violations += !rows[i].uplinks_equal;
        mse.violations += !rows[i].mse_equal;
        equal[i] = rows[i].uplinks_equal && rows[i].mse_equal ? 1.0 : 0.0;
    }
    const auto mc = estimate_mean(equal);
    for (auto v : kVariants) rep.comparisons.push_back(compare("mse_unshared.equal_fraction", v, "-", 1.0, mc, "exact"));
    rep.exact_checks = {coupling, uplinks, mse};
    rep.setup = {{"regime", s.config.change_mode == ChangeMode::Single ? "single" : "independent"}};
}

nlohmann::json describe(const ConditionedScenario& scn) {
    nlohmann::json j = {{"window", {scn.window_begin, scn.window_end}},
                        {"horizon", scn.horizon},
                        {"shared_component", scn.shared_component},
                        {"change_interval", scn.change_interval}};
    if (scn.setup == SetupKind::Two) {
        j["a1"] = scn.a1;
        j["a2"] = scn.a2;
        j["unshared_component"] = scn.unshared_component;
        j["unshared_change_interval"] = scn.unshared_change_interval;
    }
    return j;
}

void verify_setup_one(TheoremId id, const Scenario& s, long long n, VerificationReport& rep) {
    const auto& cfg = s.config;
    struct Row {
        bool coupled;
        double power_cond, power_always, mse_in, mse_out;
    };
    // Fail fast on infeasible conditioning before spawning the batch.
    rep.setup = describe(build_conditioned(s, SetupKind::One, 0));
    const auto rows = parallel_map<Row>(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto run = conditioned_run(s, SetupKind::One, r);
        const double t0 = run.scenario.window_begin;
        const double tf = run.scenario.window_end;
        const auto& in = run.in.trace;
        const auto& out = run.out.trace;
        return Row{in.primitive_checksum == out.primitive_checksum,
                   in.ledger.window(t0, tf, BroadcastAccounting::Conditional) -
                       out.ledger.window(t0, tf, BroadcastAccounting::Conditional),
                   in.ledger.window(t0, tf, BroadcastAccounting::Always) -
                       out.ledger.window(t0, tf, BroadcastAccounting::Always),
                   integrate_mse(run.scenario.path, in.estimates, t0, tf).integral,
                   integrate_mse(run.scenario.path, out.estimates, t0, tf).integral};
    });

    ExactCheck coupling{"coupling_checksums", 0, n};
    for (const auto& row : rows) coupling.violations += !row.coupled;
    rep.exact_checks.push_back(coupling);

    if (id == TheoremId::PowerShared) {
        std::vector<double> cond, always;
        for (const auto& row : rows) {
            cond.push_back(row.power_cond);
            always.push_back(row.power_always);
        }
        const auto mc_cond = estimate_mean(cond);
        const auto mc_always = estimate_mean(always);
        for (auto v : kVariants) {
            rep.comparisons.push_back(compare("power_shared", v, "conditional",
                                              theory::power_shared_expected_diff(cfg, v, BroadcastAccounting::Conditional),
                                              mc_cond, "3se"));
            rep.comparisons.push_back(compare("power_shared", v, "always",
                                              theory::power_shared_expected_diff(cfg, v, BroadcastAccounting::Always),
                                              mc_always, "3se"));
        }
        if (cfg.sigma == 0.0) {
            ExactCheck two_branch{"sigma0_difference_in_{0,P_U-P_D}", 0, n};
            for (const auto& row : rows)
                two_branch.violations += !(row.power_cond == 0.0 || row.power_cond == cfg.p_up - cfg.p_down);
            rep.exact_checks.push_back(two_branch);
        }
        return;
    }

    std::vector<double> improved;
    for (const auto& row : rows) improved.push_back(row.mse_out < row.mse_in ? 1.0 : 0.0);
    const auto mc = estimate_mean(improved);
    for (auto v : kVariants)
        rep.comparisons.push_back(compare("mse_shared", v, "-", theory::mse_shared_prob(cfg, v), mc, "3se"));
    if (cfg.sigma == 0.0) {
        ExactCheck zero{"sigma0_mse_difference_zero", 0, n};
        for (const auto& row : rows) zero.violations += row.mse_in != row.mse_out;
        rep.exact_checks.push_back(zero);
    }
}

void verify_setup_two(const Scenario& s, long long n, VerificationReport& rep) {
    const auto& cfg = s.config;
    const auto& map = s.components;
    struct Row {
        bool coupled, improved, cancelled, close;
    };
    const auto first = build_conditioned(s, SetupKind::Two, 0);
    rep.setup = describe(first);
    const auto rows = parallel_map<Row>(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto run = conditioned_run(s, SetupKind::Two, r);
        const auto& scn = run.scenario;
        const auto idx = static_cast<std::size_t>(scn.unshared_index - 1);
        const double t0 = scn.window_begin;
        const double in = integrate_mse(scn.path, run.in.trace.estimates, t0, scn.horizon).per_index[idx];
        const double out = integrate_mse(scn.path, run.out.trace.estimates, t0, scn.horizon).per_index[idx];

        const auto streams = RandomStreams(cfg.seed, r).with_epoch(scn.noise_epoch);
        const double t1 = scn.a1 * cfg.T_1;
        const double t2 = scn.a2 * cfg.T_2;
        const double w1 = observe(scn.path, map, cfg, 1, scn.shared_component, t1, streams).value -
                          scn.path.value(scn.shared_index, t1);
        const double w2 = observe(scn.path, map, cfg, 2, scn.shared_component, t2, streams).value -
                          scn.path.value(scn.shared_index, t2);
        const auto& cancels = run.out.trace.cancellations;
        const bool cancelled = std::any_of(cancels.begin(), cancels.end(), [&](const CancelRecord& c) {
            return c.sensor == 1 && c.component == scn.shared_component;
        });
        return Row{run.in.trace.primitive_checksum == run.out.trace.primitive_checksum, out < in, cancelled,
                   std::abs(w2 - w1) < cfg.epsilon};
    });

    ExactCheck coupling{"coupling_checksums", 0, n};
    std::vector<double> improved;
    for (const auto& row : rows) {
        coupling.violations += !row.coupled;
        improved.push_back(row.improved ? 1.0 : 0.0);
    }
    rep.exact_checks.push_back(coupling);
    if (cfg.backoff.kind == BackoffSpec::Kind::Zero) {
        ExactCheck zero{"zero_backoff_cancel_iff_within_eps", 0, n};
        for (const auto& row : rows) zero.violations += row.cancelled != row.close;
        rep.exact_checks.push_back(zero);
    }
    const auto mc = estimate_mean(improved);
    for (auto v : kVariants)
        rep.comparisons.push_back(
            compare("mse_shared_gen", v, "-", theory::mse_shared_gen_prob(cfg, first.a1, first.a2, v), mc, "3se"));
}

}  // namespace

VerificationReport verify_theorem(TheoremId id, const Scenario& scenario, long long n) {
    if (n < 2) throw std::invalid_argument("verification needs at least 2 replications");
    validate_config(scenario.config, scenario.components);
    VerificationReport rep;
    rep.theorem = id;
    rep.config_digest = config_digest(scenario);
    rep.seed = scenario.config.seed;
    rep.n = n;
    switch (id) {
        case TheoremId::PowerUnshared: verify_power_unshared(scenario, n, rep); break;
        case TheoremId::MseUnshared: verify_mse_unshared(scenario, n, rep); break;
        case TheoremId::PowerShared:
        case TheoremId::MseShared: verify_setup_one(id, scenario, n, rep); break;
        case TheoremId::MseSharedGen: verify_setup_two(scenario, n, rep); break;
    }
    return rep;
}

nlohmann::json to_json(const VerificationReport& report) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : report.comparisons) {
        comps.push_back({{"formula_id", c.formula_id},
                         {"variant", theory::to_string(c.variant)},
                         {"accounting", c.accounting},
                         {"closed_form_value", c.closed_form},
                         {"mc_estimate", c.mc_estimate},
                         {"mc_stderr", c.mc_stderr},
                         {"n_samples", c.n_samples},
                         {"band", c.band},
                         {"verdict", c.pass ? "PASS" : "FAIL"}});
    }
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& e : report.exact_checks)
        checks.push_back({{"name", e.name}, {"violations", e.violations}, {"n", e.n}, {"verdict", e.pass() ? "PASS" : "FAIL"}});
    return {{"theorem", to_string(report.theorem)},
            {"config_digest", report.config_digest},
            {"seed", report.seed},
            {"n_samples", report.n},
            {"setup", report.setup},
            {"comparisons", comps},
            {"exact_checks", checks},
            {"verdict", report.passed() ? "PASS" : "FAIL"}};
}

void write_theory_csv_header(std::ostream& os) {
    os << "formula_id,variant,closed_form_value,mc_estimate,mc_stderr,n_samples,verdict\n";
}

void write_theory_csv(std::ostream& os, const VerificationReport& report) {
    for (const auto& c : report.comparisons) {
        std::string id = c.formula_id;
        if (c.accounting != "-") id += "." + c.accounting;
        os << id << ',' << theory::to_string(c.variant) << ',' << format_number(c.closed_form) << ','
           << format_number(c.mc_estimate) << ',' << format_number(c.mc_stderr) << ',' << c.n_samples << ','
           << (c.pass ? "PASS" : "FAIL") << '\n';
    }
}

void print_verdict_table(std::ostream& os, const VerificationReport& report) {
    os << "theorem " << to_string(report.theorem) << "  n=" << report.n << "  config=" << report.config_digest << '\n';
    os << std::left << std::setw(30) << "formula" << std::setw(18) << "variant" << std::setw(13) << "accounting"
       << std::setw(16) << "closed_form" << std::setw(16) << "mc_estimate" << std::setw(18) << "mc_stderr"
       << "verdict\n";
    for (const auto& c : report.comparisons) {
        os << std::left << std::setw(30) << c.formula_id << std::setw(18) << theory::to_string(c.variant)
           << std::setw(13) << c.accounting << std::setw(16) << format_number(c.closed_form) << std::setw(16)
           << format_number(c.mc_estimate) << std::setw(18) << format_number(c.mc_stderr)
           << (c.pass ? "PASS" : "FAIL") << '\n';
    }
    for (const auto& e : report.exact_checks)
        os << "check " << e.name << ": " << e.violations << "/" << e.n << " violations  "
           << (e.pass() ? "PASS" : "FAIL") << '\n';
    os << "overall " << (report.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace outformation::experiments
