#pragma once

#include <cstdint>

#include "fairbench/dataset.hpp"

namespace fairbench {

struct SimConfig {
    int n = 5000;
    std::uint64_t seed = 1;
    int replicates = 50;
};

// Synthetic credit-scoring sample. Per row: two fair coin sensitive bits
// a1, a2; noisy measurements v_i ~ N(a_i, 1); two unrelated attributes
// e_i ~ N(0.5, 1); their mean v; two independent N(v, 1) draws u (a feature)
// and w (whose sign sets the label). Features are (a1, a2, u); sensitive
// columns are (a1, a2). Draws are counter-based on
// (seed, replicate, row, variable), so replicates are independent streams
// and generation order does not matter.
Dataset generate_simulation(const SimConfig& cfg, int replicate_index);

// Exact P(Y=0) of the generative chain, via the normal CDF. Both label
// variance components (the averaged measurement noise and the final draw)
// are integrated out analytically.
double simulation_default_rate();

}  // namespace fairbench
