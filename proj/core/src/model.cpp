#include "outformation/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "outformation/random.hpp"

namespace outformation {

namespace {

constexpr double kMultipleTolerance = 1e-9;

/// Integer ratio a/b when a is a positive integer multiple of b.
std::optional<long long> integer_ratio(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
    const double r = a / b;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > kMultipleTolerance * std::max(1.0, r)) return std::nullopt;
    return static_cast<long long>(rounded);
}

}  // namespace

std::string_view to_string(Architecture arch) {
    switch (arch) {
        case Architecture::In0: return "in0";
        case Architecture::InEps: return "in_eps";
        case Architecture::OutEps: return "out_eps";
    }
    return "?";
}

std::optional<Architecture> parse_architecture(std::string_view name) {
    if (name == "in0") return Architecture::In0;
    if (name == "in_eps") return Architecture::InEps;
    if (name == "out_eps") return Architecture::OutEps;
    return std::nullopt;
}

const std::set<ComponentId>& ComponentMap::unshared(int sensor) const {
    return sensor == 1 ? unshared_1 : unshared_2;
}

bool ComponentMap::observes(int sensor, ComponentId k) const {
    return is_shared(k) || unshared(sensor).count(k) != 0;
}

std::vector<ComponentId> ComponentMap::observed_by(int sensor) const {
    std::vector<ComponentId> out(shared.begin(), shared.end());
    const auto& own = unshared(sensor);
    out.insert(out.end(), own.begin(), own.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ComponentId> ComponentMap::all() const {
    std::vector<ComponentId> out(shared.begin(), shared.end());
    out.insert(out.end(), unshared_1.begin(), unshared_1.end());
    out.insert(out.end(), unshared_2.begin(), unshared_2.end());
    std::sort(out.begin(), out.end());
    return out;
}

FullIndex ComponentMap::index_of(ComponentId k) const {
    auto it = full_index.find(k);
    if (it == full_index.end()) throw std::out_of_range("component " + std::to_string(k) + " has no full index");
    return it->second;
}

std::set<FullIndex> ComponentMap::unshared_indices() const {
    std::set<FullIndex> out;
    for (auto k : unshared_1) out.insert(index_of(k));
    for (auto k : unshared_2) out.insert(index_of(k));
    return out;
}

BackoffSpec BackoffSpec::uniform(double b) {
    BackoffSpec s;
    s.kind = Kind::Uniform;
    s.b = b;
    return s;
}

BackoffSpec BackoffSpec::empirical(std::vector<double> points, std::vector<double> probs) {
    BackoffSpec s;
    s.kind = Kind::Empirical;
    s.points = std::move(points);
    s.probs = std::move(probs);
    return s;
}

double BackoffSpec::upper_bound() const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Uniform: return b;
        case Kind::Empirical: return points.empty() ? 0.0 : *std::max_element(points.begin(), points.end());
    }
    return 0.0;
}

double backoff_cdf(const BackoffSpec& spec, double s) {
    if (s < 0.0) return 0.0;
    switch (spec.kind) {
        case BackoffSpec::Kind::Zero: return 1.0;
        case BackoffSpec::Kind::Uniform:
            if (spec.b <= 0.0) return 1.0;
            return std::min(1.0, s / spec.b);
        case BackoffSpec::Kind::Empirical: {
            double acc = 0.0;
            for (std::size_t i = 0; i < spec.points.size(); ++i)
                if (spec.points[i] <= s) acc += spec.probs[i];
            return std::min(1.0, acc);
        }
    }
    return 1.0;
}

double sample_backoff(const BackoffSpec& spec, KeyedStream& stream) {
    switch (spec.kind) {
        case BackoffSpec::Kind::Zero: return 0.0;
        case BackoffSpec::Kind::Uniform: return spec.b * stream.uniform01();
        case BackoffSpec::Kind::Empirical: {
            const double u = stream.uniform01();
            double acc = 0.0;
            for (std::size_t i = 0; i < spec.points.size(); ++i) {
                acc += spec.probs[i];
                if (u < acc) return spec.points[i];
            }
            return spec.points.empty() ? 0.0 : spec.points.back();
        }
    }
    return 0.0;
}

int ScenarioConfig::verification_stride(int sensor) const {
    auto r = integer_ratio(period(sensor), tau(sensor));
    return r ? static_cast<int>(*r) : 1;
}

int ScenarioConfig::interval_count() const {
    if (!(delta_t > 0.0) || !(t_sim > 0.0)) return 0;
    return static_cast<int>(std::ceil(t_sim / delta_t - kMultipleTolerance));
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> config_violations(const ScenarioConfig& cfg, const ComponentMap& map) {
    std::vector<std::string> errs;
    if (cfg.n < 1) errs.push_back("n must be at least 1");
    if (!(cfg.delta_t > 0.0)) errs.push_back("delta_t must be positive");
    for (int j = 1; j <= kSensorCount; ++j) {
        const std::string tj = "T_" + std::to_string(j);
        const std::string tauj = "tau_" + std::to_string(j);
        if (!(cfg.tau(j) > 0.0)) {
            errs.push_back(tauj + " must be positive");
            continue;
        }
        if (!integer_ratio(cfg.period(j), cfg.tau(j))) errs.push_back(tj + " not a multiple of " + tauj);
        auto h = integer_ratio(cfg.delta_t, cfg.tau(j));
        if (!h) {
            errs.push_back("delta_t not a multiple of " + tauj);
        } else if (cfg.H[j - 1] != *h) {
            errs.push_back("H_" + std::to_string(j) + " must equal delta_t/" + tauj + " (" + std::to_string(*h) + ")");
        }
    }
    if (!(cfg.epsilon >= 0.0)) errs.push_back("epsilon must be nonnegative");
    if (!(cfg.sigma >= 0.0)) errs.push_back("sigma must be nonnegative");
    if (!(cfg.d_low > 0.0)) errs.push_back("d_low must be positive");
    if (!(cfg.d_up >= cfg.d_low)) errs.push_back("d_up must be at least d_low");
    if (!(cfg.p_change >= 0.0 && cfg.p_change <= 1.0)) errs.push_back("p_change must lie in [0, 1]");
    if (!(cfg.dt_up > 0.0)) errs.push_back("dt_up must be positive");
    if (!(cfg.dt_down > 0.0)) errs.push_back("dt_down must be positive");
    if (!(cfg.p_down > 0.0)) errs.push_back("P_D must be positive");
    if (!(cfg.p_up > cfg.p_down)) errs.push_back("P_U must exceed P_D");
    if (!(cfg.t_sim > 0.0)) errs.push_back("t_sim must be positive");

    switch (cfg.backoff.kind) {
        case BackoffSpec::Kind::Zero: break;
        case BackoffSpec::Kind::Uniform:
            if (!(cfg.backoff.b > 0.0)) errs.push_back("backoff.b must be positive for uniform backoff");
            break;
        case BackoffSpec::Kind::Empirical: {
            const auto& pts = cfg.backoff.points;
            const auto& ps = cfg.backoff.probs;
            if (pts.empty() || pts.size() != ps.size()) {
                errs.push_back("backoff.points and backoff.probs must be nonempty and of equal length");
                break;
            }
            if (!std::is_sorted(pts.begin(), pts.end()) || pts.front() < 0.0)
                errs.push_back("backoff.points must be nonnegative and ascending");
            if (std::any_of(ps.begin(), ps.end(), [](double p) { return !(p >= 0.0); }))
                errs.push_back("backoff.probs must be nonnegative");
            if (std::abs(std::accumulate(ps.begin(), ps.end(), 0.0) - 1.0) > 1e-9)
                errs.push_back("backoff.probs must sum to 1");
            break;
        }
    }

    // Component map.
    auto disjoint = [](const std::set<ComponentId>& a, const std::set<ComponentId>& b) {
        return std::none_of(a.begin(), a.end(), [&](ComponentId k) { return b.count(k) != 0; });
    };
    if (!disjoint(map.shared, map.unshared_1)) errs.push_back("shared and unshared_1 overlap");
    if (!disjoint(map.shared, map.unshared_2)) errs.push_back("shared and unshared_2 overlap");
    if (!disjoint(map.unshared_1, map.unshared_2)) errs.push_back("unshared_1 and unshared_2 overlap");
    std::set<FullIndex> seen;
    for (auto k : map.all()) {
        if (k < 1) errs.push_back("component id " + std::to_string(k) + " must be positive");
        auto it = map.full_index.find(k);
        if (it == map.full_index.end()) {
            errs.push_back("component " + std::to_string(k) + " has no full_index entry");
            continue;
        }
        if (it->second < 1 || it->second > cfg.n)
            errs.push_back("full_index of component " + std::to_string(k) + " outside [1, n]");
        if (!seen.insert(it->second).second)
            errs.push_back("full_index not injective at index " + std::to_string(it->second));
    }
    for (const auto& [k, i] : map.full_index) {
        if (!map.observes(1, k) && !map.observes(2, k))
            errs.push_back("full_index names unknown component " + std::to_string(k));
    }
    return errs;
}

ScenarioConfig validate_config(const ScenarioConfig& cfg, const ComponentMap& map) {
    auto errs = config_violations(cfg, map);
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string_view>& allowed, std::string_view where,
                    std::vector<std::string>& errs) {
    if (!j.is_object()) {
        errs.push_back(std::string(where) + " must be a JSON object");
        return;
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            errs.push_back("unknown field '" + key + "' in " + std::string(where));
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, std::vector<std::string>& errs) {
    auto it = j.find(key);
    if (it == j.end()) {
        errs.push_back(std::string("missing field '") + key + "'");
        return;
    }
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        errs.push_back(std::string("field '") + key + "': " + e.what());
    }
}

const std::vector<std::string_view> kConfigFields = {
    "n", "delta_t", "tau_1", "tau_2", "T_1", "T_2", "epsilon", "sigma", "d_low", "d_up",
    "p_change", "dt_up", "dt_down", "p_up", "p_down", "backoff", "t_sim", "H",
    "broadcast_accounting", "change_mode", "seed"};

ScenarioConfig parse_config(const json& j, std::vector<std::string>& errs) {
    ScenarioConfig cfg;
    read_field(j, "n", cfg.n, errs);
    read_field(j, "delta_t", cfg.delta_t, errs);
    read_field(j, "tau_1", cfg.tau_1, errs);
    read_field(j, "tau_2", cfg.tau_2, errs);
    read_field(j, "T_1", cfg.T_1, errs);
    read_field(j, "T_2", cfg.T_2, errs);
    read_field(j, "epsilon", cfg.epsilon, errs);
    read_field(j, "sigma", cfg.sigma, errs);
    read_field(j, "d_low", cfg.d_low, errs);
    read_field(j, "d_up", cfg.d_up, errs);
    read_field(j, "p_change", cfg.p_change, errs);
    read_field(j, "dt_up", cfg.dt_up, errs);
    read_field(j, "dt_down", cfg.dt_down, errs);
    read_field(j, "p_up", cfg.p_up, errs);
    read_field(j, "p_down", cfg.p_down, errs);
    read_field(j, "t_sim", cfg.t_sim, errs);
    read_field(j, "seed", cfg.seed, errs);

    if (auto it = j.find("H"); it == j.end()) {
        errs.push_back("missing field 'H'");
    } else if (!it->is_array() || it->size() != kSensorCount) {
        errs.push_back("field 'H' must be an array [H_1, H_2]");
    } else {
        try {
            cfg.H = {(*it)[0].get<int>(), (*it)[1].get<int>()};
        } catch (const json::exception& e) {
            errs.push_back(std::string("field 'H': ") + e.what());
        }
    }

    if (auto it = j.find("backoff"); it == j.end()) {
        errs.push_back("missing field 'backoff'");
    } else {
        try {
            cfg.backoff = backoff_from_json(*it);
        } catch (const ConfigError& e) {
            errs.insert(errs.end(), e.violations().begin(), e.violations().end());
        }
    }

    std::string accounting;
    read_field(j, "broadcast_accounting", accounting, errs);
    if (accounting == "always") cfg.broadcast_accounting = BroadcastAccounting::Always;
    else if (accounting == "conditional") cfg.broadcast_accounting = BroadcastAccounting::Conditional;
    else if (j.contains("broadcast_accounting")) errs.push_back("broadcast_accounting must be 'always' or 'conditional'");

    if (auto it = j.find("change_mode"); it != j.end()) {
        const auto mode = it->is_string() ? it->get<std::string>() : std::string();
        if (mode == "independent") cfg.change_mode = ChangeMode::Independent;
        else if (mode == "single") cfg.change_mode = ChangeMode::Single;
        else errs.push_back("change_mode must be 'independent' or 'single'");
    }
    return cfg;
}

}  // namespace

json to_json(const BackoffSpec& spec) {
    switch (spec.kind) {
        case BackoffSpec::Kind::Zero: return json{{"kind", "zero"}};
        case BackoffSpec::Kind::Uniform: return json{{"kind", "uniform"}, {"b", spec.b}};
        case BackoffSpec::Kind::Empirical:
            return json{{"kind", "empirical"}, {"points", spec.points}, {"probs", spec.probs}};
    }
    return {};
}

BackoffSpec backoff_from_json(const json& j) {
    std::vector<std::string> errs;
    reject_unknown(j, {"kind", "b", "points", "probs"}, "backoff", errs);
    if (!errs.empty()) throw ConfigError(errs);
    std::string kind;
    read_field(j, "kind", kind, errs);
    BackoffSpec spec;
    if (kind == "zero") {
        spec = BackoffSpec::zero();
    } else if (kind == "uniform") {
        double b = 0.0;
        read_field(j, "b", b, errs);
        spec = BackoffSpec::uniform(b);
    } else if (kind == "empirical") {
        std::vector<double> pts, ps;
        read_field(j, "points", pts, errs);
        read_field(j, "probs", ps, errs);
        spec = BackoffSpec::empirical(std::move(pts), std::move(ps));
    } else if (errs.empty()) {
        errs.push_back("backoff.kind must be 'zero', 'uniform' or 'empirical'");
    }
    if (!errs.empty()) throw ConfigError(errs);
    return spec;
}

json to_json(const ScenarioConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["delta_t"] = cfg.delta_t;
    j["tau_1"] = cfg.tau_1;
    j["tau_2"] = cfg.tau_2;
    j["T_1"] = cfg.T_1;
    j["T_2"] = cfg.T_2;
    j["epsilon"] = cfg.epsilon;
    j["sigma"] = cfg.sigma;
    j["d_low"] = cfg.d_low;
    j["d_up"] = cfg.d_up;
    j["p_change"] = cfg.p_change;
    j["dt_up"] = cfg.dt_up;
    j["dt_down"] = cfg.dt_down;
    j["p_up"] = cfg.p_up;
    j["p_down"] = cfg.p_down;
    j["backoff"] = to_json(cfg.backoff);
    j["t_sim"] = cfg.t_sim;
    j["H"] = {cfg.H[0], cfg.H[1]};
    j["broadcast_accounting"] = cfg.broadcast_accounting == BroadcastAccounting::Always ? "always" : "conditional";
    j["change_mode"] = cfg.change_mode == ChangeMode::Single ? "single" : "independent";
    j["seed"] = cfg.seed;
    return j;
}

ScenarioConfig config_from_json(const json& j) {
    std::vector<std::string> errs;
    reject_unknown(j, kConfigFields, "config", errs);
    if (!j.is_object()) throw ConfigError(errs);
    auto cfg = parse_config(j, errs);
    if (!errs.empty()) throw ConfigError(errs);
    return cfg;
}

json to_json(const ComponentMap& map) {
    json fi = json::object();
    for (const auto& [k, i] : map.full_index) fi[std::to_string(k)] = i;
    return json{{"shared", map.shared}, {"unshared_1", map.unshared_1}, {"unshared_2", map.unshared_2},
                {"full_index", fi}};
}

ComponentMap component_map_from_json(const json& j) {
    std::vector<std::string> errs;
    reject_unknown(j, {"shared", "unshared_1", "unshared_2", "full_index"}, "components", errs);
    if (!errs.empty()) throw ConfigError(errs);
    ComponentMap map;
    read_field(j, "shared", map.shared, errs);
    read_field(j, "unshared_1", map.unshared_1, errs);
    read_field(j, "unshared_2", map.unshared_2, errs);
    if (auto it = j.find("full_index"); it == j.end() || !it->is_object()) {
        errs.push_back("components.full_index must be an object mapping component id to index");
    } else {
        for (const auto& [key, value] : it->items()) {
            try {
                map.full_index[std::stoi(key)] = value.get<int>();
            } catch (const std::exception&) {
                errs.push_back("components.full_index entry '" + key + "' is not an integer pair");
            }
        }
    }
    if (!errs.empty()) throw ConfigError(errs);
    return map;
}

json to_json(const Scenario& scenario) {
    json j = to_json(scenario.config);
    j["components"] = to_json(scenario.components);
    return j;
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError({"scenario document must be a JSON object"});
    std::vector<std::string> errs;
    for (const auto& [key, _] : j.items()) {
        if (key != "components" && std::find(kConfigFields.begin(), kConfigFields.end(), key) == kConfigFields.end())
            errs.push_back("unknown field '" + key + "' in config");
    }
    Scenario s;
    s.config = parse_config(j, errs);
    if (auto it = j.find("components"); it == j.end()) {
        errs.push_back("missing field 'components'");
    } else {
        try {
            s.components = component_map_from_json(*it);
        } catch (const ConfigError& e) {
            errs.insert(errs.end(), e.violations().begin(), e.violations().end());
        }
    }
    if (!errs.empty()) throw ConfigError(errs);
    return s;
}

}  // namespace outformation
