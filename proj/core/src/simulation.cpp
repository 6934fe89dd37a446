#include "fairbench/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "fairbench/rng.hpp"

namespace fairbench {

Dataset generate_simulation(const SimConfig& cfg, int replicate_index) {
    if (cfg.n < 10) throw std::invalid_argument("simulation: n must be >= 10");
    if (cfg.replicates < 1) throw std::invalid_argument("simulation: replicates must be >= 1");
    if (replicate_index < 0) throw std::invalid_argument("simulation: replicate index must be >= 0");

    const std::uint64_t base = rng::mix_key(cfg.seed, 0x73696d75ULL, static_cast<std::uint64_t>(replicate_index));
    const std::size_t n = static_cast<std::size_t>(cfg.n);

    std::vector<double> feats(n * 3);
    std::vector<int> label(n);
    std::vector<int> a1(n), a2(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t row = rng::mix_key(base, j);
        const int b1 = rng::counter_bit(rng::mix_key(row, 0));
        const int b2 = rng::counter_bit(rng::mix_key(row, 1));
        const double v1 = rng::counter_normal(rng::mix_key(row, 2), static_cast<double>(b1), 1.0);
        const double v2 = rng::counter_normal(rng::mix_key(row, 3), static_cast<double>(b2), 1.0);
        const double e1 = rng::counter_normal(rng::mix_key(row, 4), 0.5, 1.0);
        const double e2 = rng::counter_normal(rng::mix_key(row, 5), 0.5, 1.0);
        const double v = (v1 + v2 + e1 + e2) / 4.0;
        const double u = rng::counter_normal(rng::mix_key(row, 6), v, 1.0);
        const double w = rng::counter_normal(rng::mix_key(row, 7), v, 1.0);
        feats[j * 3 + 0] = static_cast<double>(b1);
        feats[j * 3 + 1] = static_cast<double>(b2);
        feats[j * 3 + 2] = u;
        label[j] = w > 0.0 ? 1 : 0;
        a1[j] = b1;
        a2[j] = b2;
    }
    return Dataset(std::move(feats), 3, {"a1", "a2", "u"}, std::move(label),
                   {"a1", "a2"}, {std::move(a1), std::move(a2)});
}

double simulation_default_rate() {
    // Conditional on (a1, a2), w ~ N((a1 + a2 + 1)/4, 1 + 4/16).
    const auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    const double sd = std::sqrt(1.25);
    return 0.25 * phi(-0.25 / sd) + 0.5 * phi(-0.5 / sd) + 0.25 * phi(-0.75 / sd);
}

}  // namespace fairbench
