#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "outformation/model.hpp"
#include "outformation/random.hpp"

namespace outformation {

/// Steps applied at the start of environment interval `interval` (time interval * delta_t).
struct ChangeRecord {
    int interval = 0;
    std::vector<std::pair<FullIndex, double>> steps;  // (index, signed step), index ascending

    bool operator==(const ChangeRecord&) const = default;
};

struct Breakpoint {
    double time;
    double value;

    bool operator==(const Breakpoint&) const = default;
};

/// Piecewise-constant realization of x(t). x is right-continuous: the value
/// at t = c * delta_t already includes the steps of interval c.
class EnvironmentPath {
public:
    EnvironmentPath() = default;
    EnvironmentPath(std::vector<double> initial, double delta_t, int interval_count,
                    std::vector<ChangeRecord> records);

    int dimension() const { return static_cast<int>(initial_.size()); }
    double delta_t() const { return delta_t_; }
    int interval_count() const { return interval_count_; }
    const std::vector<double>& initial() const { return initial_; }
    const std::vector<ChangeRecord>& records() const { return records_; }

    double value(FullIndex i, double t) const;
    std::vector<double> state(double t) const;
    /// Value changes of index i, starting with (0, x_i(0)).
    const std::vector<Breakpoint>& breakpoints(FullIndex i) const { return per_index_.at(i - 1); }

    /// CSV with columns interval,full_index,step_value.
    void write_csv(std::ostream& os) const;

    bool operator==(const EnvironmentPath& o) const {
        return initial_ == o.initial_ && delta_t_ == o.delta_t_ && interval_count_ == o.interval_count_ &&
               records_ == o.records_;
    }

private:
    std::vector<double> initial_;
    double delta_t_ = 1.0;
    int interval_count_ = 0;
    std::vector<ChangeRecord> records_;
    std::vector<std::vector<Breakpoint>> per_index_;
};

struct StepResult {
    std::vector<double> state;
    ChangeRecord record;
};

/// One random-walk step for interval c.
StepResult step_environment(const std::vector<double>& x, int c, const RandomStreams& streams,
                            const ScenarioConfig& cfg);
std::vector<double> apply_step(std::vector<double> x, const ChangeRecord& record);

/// Path over [0, t_sim) with ceil(t_sim / delta_t) intervals, starting from x(0) = 0.
EnvironmentPath sample_path(const ScenarioConfig& cfg, const RandomStreams& streams);

enum class SetupKind { One, Two };

struct BackoffOverride {
    int sensor;
    long long instant;  // verification instant index
    double value;
};

/// A sample path built to satisfy one of the two theorem setups, plus the
/// draw overrides and noise epoch the setup pins.
struct ConditionedScenario {
    SetupKind setup = SetupKind::One;
    EnvironmentPath path;
    double window_begin = 0.0;  // T_0
    double window_end = 0.0;    // T_f
    double horizon = 0.0;       // simulate [0, horizon)

    ComponentId shared_component = 0;    // k (Setup I) or k' (Setup II)
    FullIndex shared_index = 0;
    ComponentId unshared_component = 0;  // k_1 (Setup II only)
    FullIndex unshared_index = 0;
    int change_interval = 0;             // c (Setup I) / interval of the k' change (Setup II)
    int unshared_change_interval = 0;    // interval of the k_1 change (Setup II)
    double shared_step = 0.0;
    double unshared_step = 0.0;
    int a1 = 0;
    int a2 = 0;

    std::uint64_t noise_epoch = 0;
    int rejections = 0;
    std::vector<BackoffOverride> backoff_overrides;

    std::optional<double> backoff_override(int sensor, long long instant) const;
};

class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accepts or rejects a candidate (the noise epoch is already set on both arguments).
using ScenarioAcceptor = std::function<bool(const ConditionedScenario&, const RandomStreams&)>;

struct SetupOptions {
    int interval = 1;               // c for Setup I
    int rejection_budget = 10'000;  // attempts before giving up
};

ConditionedScenario build_setup_one(const ScenarioConfig& cfg, const ComponentMap& map,
                                    const RandomStreams& streams, const ScenarioAcceptor& accept,
                                    const SetupOptions& options = {});

/// Smallest a2 (then a1) with (a1 - 1) T_1 < a2 T_2 < a1 T_1, a1 T_1 < t_sim, and an
/// environment boundary inside each of the two sub-intervals.
std::optional<std::pair<int, int>> find_setup_two_pair(const ScenarioConfig& cfg);

ConditionedScenario build_setup_two(const ScenarioConfig& cfg, const ComponentMap& map,
                                    const RandomStreams& streams, const ScenarioAcceptor& accept,
                                    const SetupOptions& options = {});

}  // namespace outformation
