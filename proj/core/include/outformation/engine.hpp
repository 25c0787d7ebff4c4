#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "outformation/environment.hpp"
#include "outformation/fusion_metrics.hpp"
#include "outformation/model.hpp"
#include "outformation/random.hpp"
#include "outformation/trace.hpp"

namespace outformation {

struct Event {
    double time = 0.0;
    EventClass cls = EventClass::Sampling;
    int actor = 0;
    std::uint64_t seq = 0;
    long long payload = 0;

    auto key() const { return std::make_tuple(time, static_cast<int>(cls), actor, seq); }
    friend bool operator<(const Event& a, const Event& b) { return a.key() < b.key(); }
    friend bool operator>(const Event& a, const Event& b) { return b < a; }
};

/// Min-queue on (time, class, actor, seq).
class EventQueue {
public:
    void push(const Event& e) { heap_.push(e); }
    Event pop() {
        Event e = heap_.top();
        heap_.pop();
        return e;
    }
    const Event& top() const { return heap_.top(); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
};

class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimOptions {
    std::size_t max_events = 50'000'000;
    bool record_samples = true;
};

struct SimulationResult {
    SimulationTrace trace;
    MetricsReport metrics;
};

/// Arrival time of an m-component uplink packet sent at t.
inline double uplink_arrival_time(double t, int m, double dt_up) { return t + m * dt_up; }
/// Arrival time at the peer of a broadcast of m_s shared components started at t.
inline double broadcast_arrival_time(double t, int m_s, double dt_down) { return t + m_s * dt_down; }

/// Simulates [0, cfg.t_sim) on an unconditioned path.
SimulationResult run_simulation(const ScenarioConfig& cfg, const ComponentMap& map, Architecture arch,
                                const EnvironmentPath& path, const RandomStreams& streams,
                                const SimOptions& options = {});

/// Simulates [0, scenario.horizon) with the scenario's noise epoch and backoff overrides.
SimulationResult run_simulation(const ScenarioConfig& cfg, const ComponentMap& map, Architecture arch,
                                const ConditionedScenario& scenario, const RandomStreams& streams,
                                const SimOptions& options = {});

/// Digest of every random primitive source a run depends on (path, stream roots, overrides).
std::uint64_t primitive_checksum(const EnvironmentPath& path, const RandomStreams& streams,
                                 const ConditionedScenario* scenario);

}  // namespace outformation
