#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "outformation/environment.hpp"
#include "outformation/model.hpp"
#include "outformation/random.hpp"

namespace outformation {

struct Observation {
    int sensor = 0;
    ComponentId component = 0;
    double time = 0.0;
    long long sample_index = 0;  // time / tau_j
    double value = 0.0;

    bool operator==(const Observation&) const = default;
};

/// y_jk(t) = x_{i_k}(t) + sigma * z, z drawn from the (sensor, component, sample) noise stream.
/// Throws std::invalid_argument if sensor j does not observe k.
Observation observe(const EnvironmentPath& path, const ComponentMap& map, const ScenarioConfig& cfg, int sensor,
                    ComponentId k, double t, const RandomStreams& streams);

struct ScheduledTransmission {
    int sensor = 0;
    long long instant = 0;  // verification instant index that created it
    double created = 0.0;
    double fire_time = 0.0;
    std::vector<Observation> items;
};

struct UplinkPacket {
    int sensor = 0;
    double send_time = 0.0;
    std::vector<Observation> items;
};

struct BroadcastItem {
    ComponentId component;
    double value;
};

/// Per-sensor protocol state. `reference` is what the verification rule compares
/// against; `own_reference` is the last value this sensor itself committed to send.
/// The two differ only after a broadcast under OUT(eps).
class SensorState {
public:
    SensorState(int sensor, const ComponentMap& map, const std::vector<double>& initial_estimate);

    int sensor() const { return sensor_; }
    const std::vector<ComponentId>& components() const { return components_; }

    double reference(ComponentId k) const { return reference_.at(k); }
    double own_reference(ComponentId k) const { return own_reference_.at(k); }
    void set_reference(ComponentId k, double v) { reference_.at(k) = v; }
    void set_own_reference(ComponentId k, double v) { own_reference_.at(k) = v; }

    const std::vector<ScheduledTransmission>& pending() const { return pending_; }
    std::vector<ScheduledTransmission>& pending() { return pending_; }
    const ScheduledTransmission* find_pending(long long instant) const;
    bool has_pending(ComponentId k) const;

private:
    int sensor_;
    std::vector<ComponentId> components_;
    std::map<ComponentId, double> reference_;
    std::map<ComponentId, double> own_reference_;
    std::vector<ScheduledTransmission> pending_;
};

struct VerifyOutcome {
    std::vector<Observation> triggered;
    /// OUT(eps): would have triggered against the own reference, held back by a broadcast reference.
    std::vector<Observation> suppressed;
    /// OUT(eps): triggered only because a broadcast moved the reference.
    std::vector<Observation> drift;
};

/// Verification rule. IN0 triggers every observation; IN(eps)/OUT(eps) trigger
/// when |y - ref| >= eps.
VerifyOutcome verify(const SensorState& state, std::span<const Observation> observations, Architecture arch,
                     double epsilon);

/// Backoff draw for (sensor, verification instant), honoring scenario overrides.
double draw_backoff(const ScenarioConfig& cfg, const RandomStreams& streams, int sensor, long long instant,
                    const ConditionedScenario* scenario = nullptr);

/// Commits the triggered observations into one packet that fires at t + backoff.
/// Triggered components are removed from any older pending packet.
const ScheduledTransmission& schedule_backoff(SensorState& state, std::span<const Observation> triggers, double t,
                                              long long instant, double backoff);

/// Applies a downlink broadcast (OUT(eps) only). Pending components whose own
/// observation is within eps of the broadcast value are cancelled. Returns the
/// cancelled component ids.
std::vector<ComponentId> apply_broadcast(SensorState& state, std::span<const BroadcastItem> broadcast, double epsilon,
                                         Architecture arch);

/// Removes the schedule for `instant` and returns what is left of it, or nothing
/// when every component was cancelled.
std::optional<UplinkPacket> fire_transmission(SensorState& state, long long instant, double t);

struct TriggerRecord {
    int sensor;
    long long instant;
    double time;
    std::vector<ComponentId> components;

    bool operator==(const TriggerRecord&) const = default;
};

/// Trigger sequence of IN(eps) over [0, horizon). Under IN(eps) the references
/// depend only on the sensor's own triggers, so this needs no event simulation.
std::vector<TriggerRecord> replay_in_eps_triggers(const EnvironmentPath& path, const ComponentMap& map,
                                                  const ScenarioConfig& cfg, const RandomStreams& streams,
                                                  double horizon);

/// Setup I pattern under IN(eps): both sensors trigger exactly {k} at c * delta_t, nothing else.
bool setup_one_pattern_holds(const ConditionedScenario& scn, const ComponentMap& map, const ScenarioConfig& cfg,
                             const RandomStreams& streams);
/// Setup II pattern under IN(eps): sensor 2 triggers exactly {k'} at a2 T_2, sensor 1
/// exactly {k', k1} at a1 T_1, nothing else before the horizon.
bool setup_two_pattern_holds(const ConditionedScenario& scn, const ComponentMap& map, const ScenarioConfig& cfg,
                             const RandomStreams& streams);

}  // namespace outformation
