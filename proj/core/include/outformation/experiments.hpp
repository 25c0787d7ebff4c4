#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "outformation/engine.hpp"
#include "outformation/environment.hpp"
#include "outformation/model.hpp"
#include "outformation/theory.hpp"

namespace outformation::experiments {

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names();
/// Throws std::invalid_argument("unknown preset '<name>'").
Scenario preset(std::string_view name);
/// (epsilon, sigma) pairs enumerated by the sweep preset.
std::vector<std::pair<double, double>> sweep_grid();

// ---------------------------------------------------------------- parallelism

/// Worker count from OUTFORMATION_THREADS (unset or 0 means hardware concurrency).
unsigned thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. Results are
/// stored by index, so the output does not depend on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn);

// ---------------------------------------------------------------- paired runs

struct PairedResult {
    std::uint64_t replication = 0;
    std::vector<Architecture> archs;
    std::vector<SimulationResult> runs;  // same order as archs
    std::vector<std::uint64_t> checksums;

    bool coupled() const;
    const SimulationResult& run(Architecture arch) const;
    double power_diff(Architecture a, Architecture b) const;
    double mse_diff(Architecture a, Architecture b) const;
    double mse_index_diff(Architecture a, Architecture b, FullIndex i) const;
};

/// Simulates every architecture on one unconditioned sample path (seed = cfg.seed).
PairedResult paired_run(const Scenario& scenario, const std::vector<Architecture>& archs, std::uint64_t replication);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    double ci_low = 0.0;   // 99%
    double ci_high = 0.0;  // 99%
    long long n = 0;
};

/// Sample mean, SE = sample-std / sqrt(n) and a normal 99% interval.
Estimate estimate_mean(const std::vector<double>& samples);

struct ReplicationSummary {
    long long n = 0;
    std::vector<std::pair<std::string, Estimate>> stats;

    const Estimate& at(std::string_view name) const;
};

/// Replications [0, n) of paired_run. Statistics: per-architecture power_total and
/// mse_total, and for every ordered pair (a before b) power_diff, mse_diff and
/// per-index mse_idx_diff, named e.g. "power_diff[in_eps-out_eps]".
ReplicationSummary replicate(const Scenario& scenario, const std::vector<Architecture>& archs, long long n);

// ---------------------------------------------------------------- conditioned runs

ScenarioAcceptor setup_acceptor(const Scenario& scenario, SetupKind kind);
ConditionedScenario build_conditioned(const Scenario& scenario, SetupKind kind, std::uint64_t replication);

struct ConditionedRun {
    ConditionedScenario scenario;
    SimulationResult in;
    SimulationResult out;
};

/// IN(eps) and OUT(eps) on the conditioned scenario of one replication.
ConditionedRun conditioned_run(const Scenario& scenario, SetupKind kind, std::uint64_t replication);

// ---------------------------------------------------------------- verification

enum class TheoremId { PowerUnshared, MseUnshared, PowerShared, MseShared, MseSharedGen };
std::string_view to_string(TheoremId id);
std::optional<TheoremId> parse_theorem(std::string_view name);
std::vector<std::string> theorem_names();

struct Comparison {
    std::string formula_id;
    theory::Variant variant = theory::Variant::ProofConsistent;
    std::string accounting;  // "conditional", "always" or "-"
    double closed_form = 0.0;
    double mc_estimate = 0.0;
    double mc_stderr = 0.0;
    long long n_samples = 0;
    std::string band;  // "3se", "rel_2pct" or "exact"
    bool pass = false;
};

/// Recomputes a verdict from the stored numbers.
bool within_band(const Comparison& c);

struct ExactCheck {
    std::string name;
    long long violations = 0;
    long long n = 0;
    bool pass() const { return violations == 0; }
};

struct VerificationReport {
    TheoremId theorem = TheoremId::PowerShared;
    std::string config_digest;
    std::uint64_t seed = 0;
    long long n = 0;
    nlohmann::json setup;  // conditioning metadata
    std::vector<Comparison> comparisons;
    std::vector<ExactCheck> exact_checks;

    /// At least one comparison inside its band, and every exact check clean.
    bool passed() const;
};

std::string config_digest(const Scenario& scenario);

/// Runs n replications against every (variant x accounting) closed form.
/// Throws ConditioningError when the setup cannot be built.
VerificationReport verify_theorem(TheoremId id, const Scenario& scenario, long long n);

nlohmann::json to_json(const VerificationReport& report);
void write_theory_csv_header(std::ostream& os);
void write_theory_csv(std::ostream& os, const VerificationReport& report);
void print_verdict_table(std::ostream& os, const VerificationReport& report);

// ---------------------------------------------------------------- helpers shared with tests

/// Uplink send/arrive records of the trace restricted to unshared components.
std::vector<TraceRecord> unshared_uplinks(const SimulationTrace& trace, const ComponentMap& map);
/// Estimate breakpoints of unshared indices.
std::vector<EstimateBreakpoint> unshared_estimates(const SimulationTrace& trace, const ComponentMap& map);
/// Energy of unshared uplink components whose packet arrived in [t1, t2).
double unshared_arrival_power(const SimulationTrace& trace, const ComponentMap& map, double p_up, double t1, double t2);

}  // namespace outformation::experiments

#include "outformation/experiments_impl.hpp"
