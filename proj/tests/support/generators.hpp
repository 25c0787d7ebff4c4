#pragma once

// Hand-rolled generators for property tests.

#include <cstdint>
#include <random>

#include "outformation/model.hpp"

namespace gen {

inline outformation::BackoffSpec backoff(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    switch (kind(rng)) {
        case 0: return outformation::BackoffSpec::zero();
        case 1: return outformation::BackoffSpec::uniform(std::uniform_real_distribution<double>(0.5, 15.0)(rng));
        default: {
            const int m = std::uniform_int_distribution<int>(1, 5)(rng);
            std::vector<double> pts, probs;
            double t = 0.0, total = 0.0;
            for (int i = 0; i < m; ++i) {
                t += std::uniform_real_distribution<double>(0.1, 3.0)(rng);
                pts.push_back(t);
                probs.push_back(std::uniform_real_distribution<double>(0.1, 1.0)(rng));
                total += probs.back();
            }
            for (auto& p : probs) p /= total;
            // Renormalize the last entry so the masses sum to 1 exactly enough for validation.
            double head = 0.0;
            for (int i = 0; i + 1 < m; ++i) head += probs[static_cast<std::size_t>(i)];
            probs.back() = 1.0 - head;
            return outformation::BackoffSpec::empirical(pts, probs);
        }
    }
}

/// Random but valid event-triggered scenario with both shared and unshared components.
inline outformation::Scenario scenario(std::mt19937_64& rng) {
    using namespace outformation;
    Scenario s;
    auto& c = s.config;
    const double tau = std::uniform_int_distribution<int>(1, 4)(rng) * 5.0;
    const int h = std::uniform_int_distribution<int>(1, 3)(rng);
    c.delta_t = tau * h;
    c.tau_1 = c.tau_2 = c.T_1 = c.T_2 = tau;
    c.H = {h, h};
    c.n = 5;
    c.sigma = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    c.epsilon = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
    c.p_change = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    c.backoff = BackoffSpec::uniform(std::uniform_real_distribution<double>(0.5, tau)(rng));
    c.t_sim = c.delta_t * std::uniform_int_distribution<int>(2, 6)(rng);
    c.seed = rng();
    s.components.shared = {1, 2};
    s.components.unshared_1 = {3, 4};
    s.components.unshared_2 = {5};
    for (int k = 1; k <= 5; ++k) s.components.full_index[k] = k;
    return s;
}

}  // namespace gen
