// Ground-truth probability computations on small windows: all-zero /
// all-one probabilities (with rigorous truncation intervals), exact joint
// laws, stochastic-dominance certification by two independent decision
// procedures, and streak-density reports.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "prp/intensity.hpp"

namespace prp {

struct ProbInterval {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

// Joint law of (barX_v) for v in `sites`. Configuration index is
// little-endian over the ordered site list: bit j of the index is the
// value at sites[j].
struct ExactLaw {
    std::vector<Site> sites;
    std::vector<double> weights;
    double trunc_error = 0.0; // TV bound to the untruncated law

    size_t n_sites() const { return sites.size(); }
};

// P(barX_S == 0) = prod over A meeting S of (1 - p_A).
ProbInterval prob_all_zero(const IntensitySpec& spec, const std::vector<Site>& S,
                           double budget);

// P(barX_S == 1) by inclusion-exclusion over subsets of S; |S| <= 20.
ProbInterval prob_all_one(const IntensitySpec& spec, const std::vector<Site>& S,
                          double budget);

// Exact joint law; |S| <= 4 and at most 24 distinct coverage groups.
ExactLaw exact_law(const IntensitySpec& spec, const std::vector<Site>& S,
                   double budget);

// Law of the coordinatewise OR with an independent Bernoulli(eps) field.
ExactLaw law_or_iid(const ExactLaw& law, double eps);
// Law of the coordinatewise OR of two independent fields on the same sites.
ExactLaw law_or(const ExactLaw& a, const ExactLaw& b);
// Product law with per-site densities.
ExactLaw product_law(const std::vector<Site>& sites, const std::vector<double>& densities);

double tv_distance(const ExactLaw& a, const ExactLaw& b);

struct DominanceResult {
    bool dominated = false;
    // On failure: the configurations of a violating up-set.
    std::optional<std::vector<uint32_t>> witness;
};

// mu dominated by nu iff mu(U) <= nu(U) for every up-set U of {0,1}^S.
// Decided by enumerating all up-sets; |S| <= 4.
DominanceResult check_dominance(const ExactLaw& mu, const ExactLaw& nu);

// Independent second oracle: Strassen monotone-coupling feasibility via
// max-flow on the coupling polytope.
bool check_dominance_flow(const ExactLaw& mu, const ExactLaw& nu);

struct StreakCandidate {
    Shape sites;
    ProbInterval all_one;
    double per_site = 0.0; // P(barX_S == 1)^(1/|S|)
};

struct StreakReport {
    Shape best_set;
    double delta_hat = 0.0;
    double gamma = kInf;
    double lambda_c = kInf;
    std::vector<StreakCandidate> candidates;
};

StreakReport streak_density(const IntensitySpec& spec,
                            const std::vector<Shape>& candidate_sets, double budget);

void export_law_csv(const ExactLaw& law, std::ostream& os);

} // namespace prp
