#pragma once

#include <map>
#include <string_view>
#include <tuple>

#include "outformation/model.hpp"

namespace outformation::theory {

/// Two readings of each shared-component closed form. The simulator follows
/// PROOF_CONSISTENT; PRINTED is kept for comparison.
enum class Variant { Printed, ProofConsistent };
std::string_view to_string(Variant v);

enum class Side { Geq, Lt };

double normal_cdf(double z);

/// P(|W1 - W2| >= eps) (Geq) or P(|W1 - W2| < eps) (Lt) for W1, W2 iid N(0, sigma^2).
double gauss_abs_diff_prob(double epsilon, double sigma, Side side);

/// G(s) = P(B1 - B2 <= s) for B1, B2 iid with CDF F_B.
double backoff_diff_cdf(const BackoffSpec& spec, double s);

/// Expected R_IN - R_OUT over the Setup I interval.
///   Conditional accounting: (P_U - P_D)(1 - F_B(dt_up + dt_down)) q_side
///   Always accounting:      (P_U + P_D)(1 - F_B(dt_up + dt_down)) q_side - 2 P_D
/// with q_side = P(|W1-W2| >= eps) for PRINTED and P(|W1-W2| < eps) for PROOF_CONSISTENT.
/// The always-mode form counts the return broadcast of sensor 2's report when it is not cancelled.
double power_shared_expected_diff(const ScenarioConfig& cfg, Variant variant,
                                  BroadcastAccounting accounting = BroadcastAccounting::Conditional);

/// P(Q(W1, W2) > 0, |W1 - W2| < eps) with
///   PRINTED:          Q = W1 W2 / 2 + W2^2 - 3 W1^2 / 4
///   PROOF_CONSISTENT: Q = (W1 + W2)^2 / 4 - W1^2
/// In u = W1 - W2, v = W1 + W2 (independent) the v-probability is closed form and
/// the u-integral over the strip is done by composite Gauss-Legendre.
double mse_shared_joint(double epsilon, double sigma, Variant variant);

/// (1 - F_B(dt_up + dt_down)) * mse_shared_joint(eps, sigma, variant).
double mse_shared_prob(const ScenarioConfig& cfg, Variant variant);

/// PRINTED:          P(|d1| > 0) P(|W2' - W1'| < eps) (1 - G(a1 T1 - a2 T2 + dt_up + dt_down))
/// PROOF_CONSISTENT: P(|d1| > 0) P(|W2' - W1'| < eps) G(a1 T1 - a2 T2 - dt_up - dt_down)
/// Throws std::invalid_argument("invalid setup-2 geometry") unless (a1-1) T1 < a2 T2 < a1 T1.
double mse_shared_gen_prob(const ScenarioConfig& cfg, int a1, int a2, Variant variant);

struct PEntry {
    double p = 0.0;
    double se = 0.0;
    long long n = 0;
};

/// Trigger probabilities keyed by (sensor, component, sample index).
using PTable = std::map<std::tuple<int, ComponentId, long long>, PEntry>;

/// Expected uplink power of sensor j's unshared components received during
/// environment interval c (c >= 1), from trigger probabilities on the sample grid.
/// Throws std::invalid_argument listing any missing grid points.
double unshared_power_expected(const ScenarioConfig& cfg, const ComponentMap& map, int sensor, int interval,
                               const PTable& table);

/// Empirical IN(eps) trigger frequencies over replications [first_replication,
/// first_replication + reps) of unconditioned paths with the given seed.
PTable estimate_p_jk(const ScenarioConfig& cfg, const ComponentMap& map, long long reps, std::uint64_t seed,
                     std::uint64_t first_replication = 0);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace outformation::theory
