// Stochastic-domination machinery: delta profiles, the sequential
// monotone coupling realizing Y <= Z pathwise, the two-piece dominating
// IID density, and the probabilistic witness search for the streak
// lower bound.
#pragma once

#include <cstdint>
#include <vector>

#include "prp/exact_oracle.hpp"
#include "prp/intensity.hpp"

namespace prp {

struct DeltaProfile {
    std::vector<Site> sites; // exposure order
    std::vector<double> epsilon;
    std::vector<double> delta;
    std::vector<uint8_t> vacuous; // delta >= 1
    bool sequential = false;
};

// delta_v = eps_v + (1-eps_v) * sum over A containing v of
//           p_A * prod over u in A\{v} (simultaneous) or u in A, u
//           preceding v (sequential) of eps_u^-1.
// Sites outside `sites` use eps = default_eps. Truncated tail mass is
// added as an upper bound so the profile stays a valid bound.
DeltaProfile delta_bound(const IntensitySpec& spec, const std::vector<Site>& sites,
                         const std::vector<double>& epsilon, double default_eps,
                         bool sequential, double budget);

DeltaProfile delta_bound_uniform(const IntensitySpec& spec, const std::vector<Site>& sites,
                                 double eps, bool sequential, double budget);

struct CouplingRun {
    DeltaProfile profile;
    int64_t n_samples = 0;
    int64_t exposures = 0;
    int64_t violations = 0;          // samples with y > z somewhere (must be 0)
    double max_cond_minus_delta = 0; // max over exposures of q_v - delta_v
    std::vector<int64_t> y_config_counts; // little-endian over profile.sites
    std::vector<int64_t> y_site_counts;
    std::vector<int64_t> z_site_counts;
};

// Exposes the sites of `window` in lexicographic order (Y = barX or xi);
// one shared uniform per site sets z from delta and y from the exact
// conditional P(Y_v = 1 | exposed past). The conditional is computed
// from the exact joint law of Y on the window, so the window is capped
// at 20 sites. Throws std::runtime_error if the conditional ever
// exceeds delta (a formula bug) or if y > z is ever observed.
CouplingRun sample_monotone_coupling(const IntensitySpec& spec, const Box& window,
                                     double eps, bool sequential_delta,
                                     uint64_t seed, int64_t n_samples, double budget);

struct DominatingDensity {
    int32_t N = 0;       // diameter split
    double tail = 0.0;   // sum over A containing 0 with diam >= N of p_A e^(lambda |A|)
    double q1 = 0.0;     // bounded-piece density
    double q2 = 0.0;     // unbounded-piece density
    double density = 0.0; // combined, < 1
};

DominatingDensity dominating_iid_density(const IntensitySpec& spec, double lambda);

struct WitnessReport {
    int32_t n = 0;
    double beta = 0.0;
    int32_t N = 0;
    std::vector<Site> B;
    std::vector<Site> D;
    double coverage = 0.0;       // certified lower bound on P([N]^d \ Y_B subset D)
    bool coverage_exact = false; // exact inclusion-exclusion vs Monte Carlo lower bound
    double pz = 0.0;             // P(Z_0 != emptyset), exact
    double pz_paley_zygmund = 0.0; // p_n / (n + p_n)
    double p_n = 0.0;            // sum over A containing 0 with |A| = n of p_A
    double bound = 0.0;          // certified lower bound on P(barX_{[N]^d \ D} == 1)
    double per_site_bound = 0.0; // bound^(1/|S|)
};

// Samples B in [N]^d at density min(1, 2 beta / n), retrying until the
// cardinality and exclusion-mass constraints hold, picks D greedily by
// exclusion probability, and certifies the product-form lower bound.
WitnessReport witness_search(const IntensitySpec& spec, int32_t n, double beta,
                             int32_t N, uint64_t seed, int32_t n_trials);

} // namespace prp
