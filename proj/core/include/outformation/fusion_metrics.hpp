#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "outformation/environment.hpp"
#include "outformation/model.hpp"
#include "outformation/trace.hpp"

namespace outformation {

/// Central-processor estimate. Per component, the latest value from each sensor is
/// stored with its sample timestamp; the estimate is the mean of the stored values
/// that carry the newest timestamp, held constant between arrivals.
class EstimateState {
public:
    struct StoredValue {
        int sensor;
        double value;
        double timestamp;
    };

    /// `initial` is x_hat(0) by full index (0-based vector of length n).
    EstimateState(const ComponentMap& map, std::vector<double> initial);

    /// Returns the updated estimate of component k's full index.
    double fuse(double now, int sensor, ComponentId k, double value, double timestamp);

    double estimate(FullIndex i) const { return estimate_.at(i - 1); }
    const std::vector<double>& estimates() const { return estimate_; }
    /// (0, i, x_hat_i(0)) for every index, then one breakpoint per change.
    const std::vector<EstimateBreakpoint>& trajectory() const { return trajectory_; }

private:
    const ComponentMap* map_;
    std::vector<double> estimate_;
    std::map<ComponentId, std::vector<StoredValue>> stored_;
    std::vector<EstimateBreakpoint> trajectory_;
};

struct MseBreakdown {
    std::vector<double> per_index;  // integral of (x_i - x_hat_i)^2 over the window, un-normalized
    double integral = 0.0;          // sum of per_index
};

/// Exact piecewise-constant integral of (x_i(t) - x_hat_i(t))^2 over [t1, t2).
MseBreakdown integrate_mse(const EnvironmentPath& path, const std::vector<EstimateBreakpoint>& trajectory, double t1,
                           double t2);

struct MetricsReport {
    std::vector<double> mse_per_index;  // normalized by T_sim
    double mse_total = 0.0;
    double power_total = 0.0;
    long long uplink_components = 0;
    long long downlink_components = 0;
    long long cancellations = 0;
    long long drift_triggers = 0;
};

/// Metrics over [0, trace.horizon) with T_sim = trace.horizon.
MetricsReport summarize(const SimulationTrace& trace, const EnvironmentPath& path, const ScenarioConfig& cfg);

/// Recomputes the estimate trajectory from the uplink_arrive records of a trace.
std::vector<EstimateBreakpoint> replay_estimates(const SimulationTrace& trace, const ComponentMap& map);

void write_metrics_header(std::ostream& os, int n);
void write_metrics_row(std::ostream& os, std::uint64_t replication, Architecture arch, const MetricsReport& report);

}  // namespace outformation
