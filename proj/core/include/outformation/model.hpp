#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace outformation {

class KeyedStream;

/// Component ids are small positive integers; full-state indices are 1-based.
using ComponentId = int;
using FullIndex = int;

inline constexpr int kSensorCount = 2;

enum class Architecture { In0, InEps, OutEps };

std::string_view to_string(Architecture arch);
std::optional<Architecture> parse_architecture(std::string_view name);

/// Partition of the observed components into shared and per-sensor unshared
/// sets, plus the explicit component -> full-state index map.
struct ComponentMap {
    std::set<ComponentId> shared;
    std::set<ComponentId> unshared_1;
    std::set<ComponentId> unshared_2;
    std::map<ComponentId, FullIndex> full_index;

    const std::set<ComponentId>& unshared(int sensor) const;
    bool is_shared(ComponentId k) const { return shared.count(k) != 0; }
    bool observes(int sensor, ComponentId k) const;
    /// Sorted ids observed by `sensor` (shared then unshared, ascending).
    std::vector<ComponentId> observed_by(int sensor) const;
    std::vector<ComponentId> all() const;
    FullIndex index_of(ComponentId k) const;
    /// Full indices of the unshared components of both sensors.
    std::set<FullIndex> unshared_indices() const;
};

struct BackoffSpec {
    enum class Kind { Zero, Uniform, Empirical };

    Kind kind = Kind::Zero;
    double b = 0.0;               // uniform(0, b)
    std::vector<double> points;   // empirical support, ascending
    std::vector<double> probs;    // empirical masses, sum to 1

    static BackoffSpec zero() { return {}; }
    static BackoffSpec uniform(double b);
    static BackoffSpec empirical(std::vector<double> points, std::vector<double> probs);

    /// Supremum of the support.
    double upper_bound() const;
    bool operator==(const BackoffSpec&) const = default;
};

/// F_B(s) = P(B <= s).
double backoff_cdf(const BackoffSpec& spec, double s);
double sample_backoff(const BackoffSpec& spec, KeyedStream& stream);

enum class BroadcastAccounting { Always, Conditional };
enum class ChangeMode { Independent, Single };

struct ScenarioConfig {
    int n = 3;
    double delta_t = 20.0;
    double tau_1 = 20.0;
    double tau_2 = 20.0;
    double T_1 = 20.0;
    double T_2 = 20.0;
    double epsilon = 1.0;
    double sigma = 1.0;
    double d_low = 5.0;
    double d_up = 10.0;
    double p_change = 0.3;
    double dt_up = 1.0;
    double dt_down = 1.0;
    double p_up = 2.0;
    double p_down = 1.0;
    BackoffSpec backoff = BackoffSpec::uniform(10.0);
    double t_sim = 40.0;
    std::array<int, kSensorCount> H{1, 1};
    BroadcastAccounting broadcast_accounting = BroadcastAccounting::Conditional;
    ChangeMode change_mode = ChangeMode::Independent;
    std::uint64_t seed = 1;

    double tau(int sensor) const { return sensor == 1 ? tau_1 : tau_2; }
    double period(int sensor) const { return sensor == 1 ? T_1 : T_2; }
    /// Number of sampling periods per verification period (T_j / tau_j).
    int verification_stride(int sensor) const;
    int interval_count() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Config plus component map: the unit that is read from / written to disk.
struct Scenario {
    ScenarioConfig config;
    ComponentMap components;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// All invariant violations, empty when the pair is valid.
std::vector<std::string> config_violations(const ScenarioConfig& cfg, const ComponentMap& map);

/// Returns `cfg` unchanged when valid; throws ConfigError listing every violation otherwise.
ScenarioConfig validate_config(const ScenarioConfig& cfg, const ComponentMap& map);

// JSON. Unknown fields are rejected with ConfigError.
nlohmann::json to_json(const BackoffSpec& spec);
BackoffSpec backoff_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ComponentMap& map);
ComponentMap component_map_from_json(const nlohmann::json& j);
/// Config fields plus a "components" object.
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace outformation
