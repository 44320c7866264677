// Direct Monte Carlo sampling of the included-set configuration and the
// derived fields barX / hatX / tildeX / Y on finite windows, plus the
// decoupled-by-zeros test. Inclusion decisions are keyed per concrete
// set, so samples do not depend on enumeration order.
#pragma once

#include <cstdint>
#include <vector>

#include "prp/exact_oracle.hpp"
#include "prp/intensity.hpp"
#include "prp/rng.hpp"

namespace prp {

struct FieldSample {
    Box window;
    int dimension = 1;
    std::vector<Site> sites; // sorted window sites; all per-site vectors use this order

    std::vector<ConcreteSet> included;
    std::vector<uint8_t> barX;
    std::vector<std::vector<int32_t>> hatX; // indices into `included` containing the site

    // Filled by sample_tilde:
    int32_t split_N = 0;
    double eps = 0.0;
    std::vector<uint8_t> barX_low;  // union over included sets with diam < N
    std::vector<uint8_t> barX_high; // union over included sets with diam >= N
    std::vector<uint8_t> tildeX;    // union of hulls of included sets with diam >= N
    std::vector<uint8_t> xi;
    std::vector<uint8_t> Y;

    uint64_t seed = 0;
    int32_t truncation_radius = 0;  // largest tail span enumerated
    double neglected_per_site = 0.0;

    int index_of(Site s) const;
    // Throws std::runtime_error if a derived-field invariant fails.
    void check_invariants() const;
};

FieldSample sample_field(const IntensitySpec& spec, const Box& window,
                         uint64_t seed, double budget);

// tildeX from hulls of included sets with diameter >= N; Y = tildeX or an
// independent Bernoulli(eps) field.
FieldSample sample_tilde(const IntensitySpec& spec, const Box& window,
                         int32_t N, double eps, uint64_t seed, double budget);

struct DecouplingReport {
    bool exact = false;
    double tv = 0.0;
    double ci = 0.0;       // conservative radius (Monte Carlo mode)
    int64_t hits = 0;      // samples with an all-zero boundary
    int64_t samples = 0;
    std::vector<Site> boundary;
    std::vector<Site> inside_probes;
    std::vector<Site> outside_probes;
};

// Conditionally on {field == 0 on the boundary of U}, measures the
// dependence between inside and outside probe sites as the TV distance
// between the conditional joint and the product of its marginals.
// Exact mode enumerates the relevant sets; Monte Carlo mode samples.
DecouplingReport decoupling_test(const IntensitySpec& spec, const Box& window,
                                 int32_t N, double eps,
                                 const std::vector<Site>& U,
                                 const std::vector<Site>& outside_probes,
                                 bool condition_on_Y, bool exact,
                                 int64_t n_samples, uint64_t seed, double budget);

} // namespace prp
