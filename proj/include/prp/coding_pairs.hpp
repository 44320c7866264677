// Finitary coding of 1D pair intensities: level decomposition by tail
// thresholds, per-level gated monotone coupling with exact residual
// kernels, and coding-radius instrumentation.
//
// Per level k the block at base site i holds the pairs {i, i+n} for n in
// I_k. Gates are W_{i,0} ~ Bern(min(1, 2/k^2)) and W_{i,n} ~ Bern(k^2 p_n).
// The coupling with the block's pair variables is explicit: given
// W_{i,0} = 0 the block is all-zero; given W_{i,0} = 1 the block law is
// the product law with the all-zero atom reduced by (1 - q0), exposed
// span by span with conditional
//     c_n = p_n                          if an earlier span fired,
//     c_n = p_n R_n / (R_n - 1 + q0)     otherwise,
// where R_n is the prefix product of (1 - p_m). c_n <= k^2 p_n always,
// so the gate W_{i,n} = 0 forces the span to zero and mixing over the
// gates reproduces independent Bern(p_n) spans exactly.
#pragma once

#include <cstdint>
#include <vector>

#include "prp/intensity.hpp"

namespace prp {

struct PairLevel {
    int32_t k = 0;
    int32_t N_k = 0;
    int32_t N_next = 0;
    std::vector<std::pair<int32_t, double>> spans; // (n, p_n) with p_n > 0 in [N_k, N_next)
    double q0 = 1.0;                // own-site gate density min(1, 2/k^2)
    std::vector<double> qn;         // span gate densities min(1, k^2 p_n)
    double gate_budget = 1.0;       // min(1, 3/k^2)
};

struct LevelPlan {
    std::vector<PairLevel> levels;                     // k = 1..k_max
    std::vector<std::pair<int32_t, double>> base_spans; // n < N_1 (nonempty only when sum p_n > 1)
    int32_t correction_from = 1;                       // spans >= this are the correction layer
    double residual_mass = 0.0;                        // sum of p_n over the correction layer
};

LevelPlan build_levels(const IntensitySpec& spec, int32_t k_max, double budget = 1e-9);

struct LevelField {
    std::vector<uint8_t> bits;   // barX^k on the window
    std::vector<uint8_t> gate;   // per-site gate flag
    std::vector<int32_t> radius; // per-site max inspected offset (0 on gate flag 0)
};

LevelField code_level(const LevelPlan& plan, size_t level_index, const Box& window,
                      uint64_t seed);

struct CodingReport {
    Box window;
    std::vector<int32_t> radius;      // per-site max over gated levels (and base block)
    std::vector<uint8_t> correction;  // per-site: a correction-layer pair covered it
    std::vector<int64_t> gate_open;   // per level: sites with open gates
    std::vector<double> gate_budgets; // per level: min(1, 3/k^2)
    int64_t sites = 0;
    int32_t base_radius = 0;          // deterministic block radius of spans below N_1
    double borel_cantelli_budget = 0.0;
    double residual_mass = 0.0;
    double tail_truncation = 0.0;     // neglected mass beyond the correction horizon
};

struct PairsCodingResult {
    std::vector<uint8_t> bits; // coded barX on the window
    LevelPlan plan;
    CodingReport report;
};

// Pointwise OR over the base block, the gated levels 1..k_max, and a
// directly sampled correction layer for spans beyond N_{k_max+1} (so the
// output law is exact up to the reported tail truncation).
PairsCodingResult code_pairs(const IntensitySpec& spec, const Box& window,
                             uint64_t seed, int32_t k_max, double budget = 1e-9);

// Brute-force Bayes check helper: the exact joint probability that a
// block with the given spans produces gate vector w and span vector x
// under the implemented coupling. Exposed for tests.
double block_joint_probability(const PairLevel& level, uint32_t w_gates, bool w0,
                               uint32_t x_spans);

} // namespace prp
