// Translation-invariant intensity specifications: orbit families (p_A),
// optional 1D pair tails, moment sums with analytic divergence detection,
// level thresholds, connected hulls, and intensity scaling.
#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prp/lattice.hpp"

namespace prp {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One translation orbit: canonical cells (lex minimum at the origin) and
// the common inclusion probability of its translates.
struct ShapeOrbit {
    Shape cells;
    double probability = 0.0;

    int32_t diameter() const { return shape_diameter(cells); }
};

// Parametric family p_n := p_{{0,n}} for n >= first (d = 1 only).
// Geometric kind: p_n = coef * ratio^n, optionally rescaled by
// p |-> 1-(1-p)^scale (the image of a geometric tail under intensity
// scaling). Finite-list kind: explicit (n, p) entries.
struct PairTail {
    enum class Kind { Geometric, FiniteList };
    Kind kind = Kind::Geometric;

    double coef = 0.0;
    double ratio = 0.5;
    int32_t first = 1;
    double scale = 1.0;

    std::vector<std::pair<int32_t, double>> values; // FiniteList, sorted by n

    double value(int32_t n) const;
    int32_t max_finite_n() const; // largest n with p_n > 0 for FiniteList, else -1

    // Sum over n >= from of p_n * e^(lambda*n). Exact closed form for
    // unscaled geometric tails; rigorously truncated summation (relative
    // error < 1e-14) otherwise; +inf when the series diverges, decided
    // analytically from ratio * e^lambda.
    double weighted_tail_sum(int32_t from, double lambda) const;
    double tail_sum(int32_t from) const { return weighted_tail_sum(from, 0.0); }

    // Smallest M >= from-1 such that the tail beyond M is <= bound;
    // the enumeration horizon for a given error budget.
    int32_t horizon(double budget) const;
};

struct IntensitySpec {
    int dimension = 1;
    std::vector<ShapeOrbit> orbits;
    std::optional<PairTail> pair_tail;

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;

    double mass_through_origin() const; // sum over A containing 0 of p_A
    bool has_tail() const { return pair_tail.has_value() && pair_tail->tail_sum(pair_tail->first) > 0; }
};

enum class Weight { Size, Diam, ConnectedSize };

struct MomentQuery {
    double lambda = 0.0;
    Weight weight = Weight::Size;
};

struct MomentReport {
    double lambda_c = kInf; // limsup -log(p_n)/n over set sizes
    double gamma = kInf;    // inf over n of (1/n) log(1 + n/p_n)
    std::vector<std::pair<MomentQuery, double>> sums;
};

// A concrete set: a translate of an orbit shape or a tail pair.
// source_orbit >= 0 identifies the orbit (source_n = 0); source_orbit = -1
// marks a tail pair of span source_n. offset is the translation applied
// to the canonical cells. (source, offset) keys the set's RNG stream.
struct ConcreteSet {
    Shape cells;
    double p = 0.0;
    int32_t source_orbit = -1;
    int32_t source_n = 0;
    Site offset{};
};

struct Enumeration {
    std::vector<ConcreteSet> sets;
    // Upper bound on the neglected tail mass through any single target
    // site (0 when the spec has no tail or the tail was exhausted).
    double neglected_per_site = 0.0;
    int32_t tail_horizon = 0; // largest tail span enumerated
};

Shape canonical_shape(const Shape& cells); // lexmin translated to origin

// Every concrete set containing v with diameter <= diam_cap, tail pairs
// enumerated until the per-site neglected mass is <= error_budget.
Enumeration translates_through(const IntensitySpec& spec, Site v,
                               int32_t diam_cap, double error_budget);

// Every concrete set meeting the target list (same truncation contract).
Enumeration enumerate_meeting(const IntensitySpec& spec,
                              const std::vector<Site>& targets,
                              double error_budget);

// sum over A containing 0 of p_A * e^(lambda * weight(A)); +inf when the
// series diverges (decided analytically, never by numeric overflow).
double moment_sum(const IntensitySpec& spec, double lambda, Weight weight);

MomentReport moment_report(const IntensitySpec& spec,
                           const std::vector<MomentQuery>& queries);

enum class ThresholdVariant { Pairs, General };

// Pairs: smallest positive N with sum_{n>=N} p_n <= k^-4.
// General: smallest non-negative N with
//          sum_{A contains 0, diam A >= N} p_A k^(2|A|) <= 1.
int32_t tail_threshold(const IntensitySpec& spec, int32_t k, ThresholdVariant variant);

// p_n profile of a pure pair spec (pair orbits + tail); throws if the
// spec has orbits that are not pairs.
std::map<int32_t, double> pair_profile(const IntensitySpec& spec, double budget);

struct Hull {
    Shape cells;
    int32_t size = 0;
};

// Minimum-cardinality connected superset. 1D: the spanning interval.
// 2D: exhaustive search over supersets inside the bounding box (the
// clamping argument in the README justifies the restriction), smallest
// size first, lexicographically least among optima. Throws when
// |cells| > hull_cap or the bounding box exceeds 25 cells.
Hull connected_hull(const Shape& cells, int dimension, int hull_cap = 6);

// p |-> 1-(1-p)^c applied to every orbit and tail value.
IntensitySpec scale_intensity(const IntensitySpec& spec, double c);

// log(3*Delta - 1); 0 with the 1D override.
double lambda_star(int delta, bool one_dim_override = false);

} // namespace prp
