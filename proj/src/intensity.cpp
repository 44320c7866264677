#include "prp/intensity.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace prp {

namespace {

double scale_prob(double p, double c) {
    if (c == 1.0) return p;
    return 1.0 - std::pow(1.0 - p, c);
}

} // namespace

double PairTail::value(int32_t n) const {
    if (kind == Kind::FiniteList) {
        for (const auto& [m, p] : values)
            if (m == n) return p;
        return 0.0;
    }
    if (n < first) return 0.0;
    return scale_prob(coef * std::pow(ratio, n), scale);
}

int32_t PairTail::max_finite_n() const {
    if (kind != Kind::FiniteList) return -1;
    int32_t m = 0;
    for (const auto& [n, p] : values)
        if (p > 0) m = std::max(m, n);
    return m;
}

double PairTail::weighted_tail_sum(int32_t from, double lambda) const {
    if (kind == Kind::FiniteList) {
        double s = 0.0;
        for (const auto& [n, p] : values)
            if (n >= from) s += p * std::exp(lambda * n);
        return s;
    }
    const int32_t n0 = std::max(from, first);
    if (coef <= 0.0) return 0.0;
    const double g = ratio * std::exp(lambda);
    // Divergence is decided from the term ratio, not by summing: the
    // scaled term 1-(1-p_n)^scale is comparable to scale*p_n for small
    // p_n, so the threshold g >= 1 is the same for every scale.
    if (g >= 1.0) return kInf;
    if (scale == 1.0)
        return coef * std::exp(lambda * n0) * std::pow(ratio, n0) / (1.0 - g);
    // Truncated sum with a closed-form bound on the remainder:
    // 1-(1-p)^s <= max(1,s) * p.
    const double slack = std::max(1.0, scale) * coef;
    double s = 0.0;
    for (int32_t n = n0;; ++n) {
        const double term = scale_prob(coef * std::pow(ratio, n), scale) * std::exp(lambda * n);
        s += term;
        const double rem = slack * std::exp(lambda * (n + 1)) * std::pow(ratio, n + 1) / (1.0 - g);
        if (rem <= 1e-14 * std::max(s, 1e-300) || rem < 1e-300) break;
        if (n - n0 > 100000) throw std::runtime_error("pair tail summation did not settle");
    }
    return s;
}

int32_t PairTail::horizon(double budget) const {
    if (kind == Kind::FiniteList) return std::max(first, max_finite_n());
    if (coef <= 0.0) return first;
    if (budget <= 0.0) throw std::invalid_argument("zero error budget with infinite tail");
    int32_t m = first - 1;
    while (tail_sum(m + 1) > budget) {
        ++m;
        if (m > 1000000) throw std::runtime_error("tail horizon too large for budget");
    }
    return std::max(m, first - 1);
}

void IntensitySpec::validate() const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("dimension must be 1 or 2");
    std::set<Shape> seen;
    for (const auto& orbit : orbits) {
        if (orbit.cells.empty()) throw std::invalid_argument("empty shape");
        Shape c = orbit.cells;
        normalize_shape(c);
        if (c != orbit.cells || c.front() != Site{0, 0})
            throw std::invalid_argument("orbit cells must be canonical (sorted, lex minimum at origin)");
        if (dimension == 1)
            for (const Site& s : c)
                if (s.y != 0) throw std::invalid_argument("1D orbit with non-zero y coordinate");
        if (!(orbit.probability >= 0.0 && orbit.probability < 1.0))
            throw std::invalid_argument("orbit probability must lie in [0,1)");
        if (!seen.insert(c).second)
            throw std::invalid_argument("duplicate orbit cells");
    }
    if (pair_tail) {
        if (dimension != 1) throw std::invalid_argument("pair tail requires dimension 1");
        const PairTail& t = *pair_tail;
        if (t.kind == PairTail::Kind::Geometric) {
            if (!(t.ratio > 0.0 && t.ratio < 1.0))
                throw std::invalid_argument("geometric tail ratio must lie in (0,1)");
            if (t.coef < 0.0) throw std::invalid_argument("geometric tail coefficient must be >= 0");
            if (t.first < 1) throw std::invalid_argument("geometric tail must start at n >= 1");
            if (t.scale <= 0.0) throw std::invalid_argument("tail scale must be positive");
            if (t.value(t.first) >= 1.0)
                throw std::invalid_argument("tail value at first index must be < 1");
        } else {
            std::set<int32_t> ns;
            for (const auto& [n, p] : t.values) {
                if (n < 1) throw std::invalid_argument("tail index must be >= 1");
                if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("tail value must lie in [0,1)");
                if (!ns.insert(n).second) throw std::invalid_argument("duplicate tail index");
            }
        }
    }
}

double IntensitySpec::mass_through_origin() const {
    double s = 0.0;
    for (const auto& orbit : orbits) s += double(orbit.cells.size()) * orbit.probability;
    if (pair_tail) s += 2.0 * pair_tail->tail_sum(pair_tail->first);
    return s;
}

Shape canonical_shape(const Shape& cells) { return canonicalize_shape(cells); }

namespace {

void append_tail_pairs(const IntensitySpec& spec, const std::vector<Site>& targets,
                       int32_t diam_cap, double budget, Enumeration& out) {
    if (!spec.pair_tail) return;
    const PairTail& t = *spec.pair_tail;
    int32_t horizon = t.horizon(budget);
    if (diam_cap >= 0) horizon = std::min(horizon, diam_cap);
    std::set<int32_t> starts;
    for (int32_t n = t.first; n <= horizon; ++n) {
        const double p = t.value(n);
        if (p <= 0.0) continue;
        starts.clear();
        for (const Site& s : targets) {
            starts.insert(s.x);
            starts.insert(s.x - n);
        }
        for (int32_t i : starts)
            out.sets.push_back(ConcreteSet{Shape{{i, 0}, {i + n, 0}}, p, -1, n, Site{i, 0}});
    }
    out.tail_horizon = horizon;
    out.neglected_per_site = 2.0 * t.tail_sum(horizon + 1);
}

} // namespace

Enumeration translates_through(const IntensitySpec& spec, Site v,
                               int32_t diam_cap, double error_budget) {
    const bool unbounded = diam_cap < 0;
    if (unbounded && spec.has_tail() && error_budget <= 0.0)
        throw std::invalid_argument("unbounded enumeration with zero error budget");
    Enumeration out;
    for (size_t oi = 0; oi < spec.orbits.size(); ++oi) {
        const ShapeOrbit& orbit = spec.orbits[oi];
        if (orbit.probability <= 0.0) continue;
        if (!unbounded && orbit.diameter() > diam_cap) continue;
        for (const Site& c : orbit.cells) {
            const Site t = v - c;
            out.sets.push_back(ConcreteSet{translate(orbit.cells, t), orbit.probability,
                                           int32_t(oi), 0, t});
        }
    }
    append_tail_pairs(spec, {v}, unbounded ? -1 : diam_cap, error_budget, out);
    return out;
}

Enumeration enumerate_meeting(const IntensitySpec& spec,
                              const std::vector<Site>& targets,
                              double error_budget) {
    if (spec.has_tail() && error_budget <= 0.0)
        throw std::invalid_argument("enumeration over a tail spec needs a positive error budget");
    Enumeration out;
    std::set<Site> translates;
    for (size_t oi = 0; oi < spec.orbits.size(); ++oi) {
        const ShapeOrbit& orbit = spec.orbits[oi];
        if (orbit.probability <= 0.0) continue;
        translates.clear();
        for (const Site& s : targets)
            for (const Site& c : orbit.cells)
                translates.insert(s - c);
        for (const Site& t : translates)
            out.sets.push_back(ConcreteSet{translate(orbit.cells, t), orbit.probability,
                                           int32_t(oi), 0, t});
    }
    append_tail_pairs(spec, targets, -1, error_budget, out);
    return out;
}

namespace {

double weight_of(const Shape& cells, int dimension, Weight w, int hull_cap) {
    switch (w) {
        case Weight::Size: return double(cells.size());
        case Weight::Diam: return double(shape_diameter(cells));
        case Weight::ConnectedSize: return double(connected_hull(cells, dimension, hull_cap).size);
    }
    return 0.0;
}

} // namespace

double moment_sum(const IntensitySpec& spec, double lambda, Weight weight) {
    double s = 0.0;
    for (const auto& orbit : spec.orbits) {
        if (orbit.probability <= 0.0) continue;
        const double w = weight_of(orbit.cells, spec.dimension, weight, 6);
        s += double(orbit.cells.size()) * orbit.probability * std::exp(lambda * w);
    }
    if (spec.pair_tail) {
        const PairTail& t = *spec.pair_tail;
        double tail = 0.0;
        switch (weight) {
            case Weight::Size:
                tail = std::exp(2.0 * lambda) * t.weighted_tail_sum(t.first, 0.0);
                break;
            case Weight::Diam:
                tail = t.weighted_tail_sum(t.first, lambda);
                break;
            case Weight::ConnectedSize: // |c({0,n})| = n+1
                tail = std::exp(lambda) * t.weighted_tail_sum(t.first, lambda);
                break;
        }
        if (std::isinf(tail)) return kInf;
        s += 2.0 * tail;
    }
    return s;
}

MomentReport moment_report(const IntensitySpec& spec,
                           const std::vector<MomentQuery>& queries) {
    MomentReport rep;
    // Size profile p_n := sum over A containing 0 with |A| = n of p_A.
    std::map<int32_t, double> size_mass;
    for (const auto& orbit : spec.orbits)
        if (orbit.probability > 0.0)
            size_mass[int32_t(orbit.cells.size())] += double(orbit.cells.size()) * orbit.probability;
    if (spec.pair_tail) {
        const double m = 2.0 * spec.pair_tail->tail_sum(spec.pair_tail->first);
        if (m > 0.0) size_mass[2] += m;
    }
    // Supported families carry finitely many set sizes, so every
    // sufficiently large size has p_n = 0 and lambda_c = +inf.
    rep.lambda_c = kInf;
    rep.gamma = kInf;
    for (const auto& [n, pn] : size_mass)
        if (pn > 0.0)
            rep.gamma = std::min(rep.gamma, std::log1p(double(n) / pn) / double(n));
    for (const MomentQuery& q : queries)
        rep.sums.emplace_back(q, moment_sum(spec, q.lambda, q.weight));
    return rep;
}

std::map<int32_t, double> pair_profile(const IntensitySpec& spec, double budget) {
    if (spec.dimension != 1) throw std::invalid_argument("pair profile requires dimension 1");
    std::map<int32_t, double> prof;
    for (const auto& orbit : spec.orbits) {
        if (orbit.probability <= 0.0) continue;
        if (orbit.cells.size() != 2)
            throw std::invalid_argument("pair profile requires a pure pair spec");
        prof[orbit.cells[1].x] = 1.0 - (1.0 - prof[orbit.cells[1].x]) * (1.0 - orbit.probability);
    }
    if (spec.pair_tail) {
        const PairTail& t = *spec.pair_tail;
        for (int32_t n = t.first; n <= t.horizon(budget); ++n) {
            const double p = t.value(n);
            if (p > 0.0) prof[n] = 1.0 - (1.0 - prof[n]) * (1.0 - p);
        }
    }
    return prof;
}

int32_t tail_threshold(const IntensitySpec& spec, int32_t k, ThresholdVariant variant) {
    if (k < 1) throw std::invalid_argument("level index must be >= 1");
    if (variant == ThresholdVariant::Pairs) {
        const double target = std::pow(double(k), -4.0);
        auto prof = pair_profile(spec, target * 1e-9);
        // Finite part is exact; the geometric remainder beyond the horizon
        // is closed form.
        auto tail_from = [&](int32_t N) {
            double s = 0.0;
            for (const auto& [n, p] : prof)
                if (n >= N) s += p;
            if (spec.pair_tail && spec.pair_tail->kind == PairTail::Kind::Geometric) {
                int32_t h = prof.empty() ? spec.pair_tail->first - 1 : prof.rbegin()->first;
                s += spec.pair_tail->tail_sum(std::max(N, h + 1));
            }
            return s;
        };
        if (std::isinf(tail_from(1))) throw std::invalid_argument("threshold undefined at level k");
        int32_t N = 1;
        while (tail_from(N) > target) ++N;
        return N;
    }
    // General variant: weighted by k^(2|A|), cut by diameter.
    const double logk2 = 2.0 * std::log(double(k));
    auto sum_from = [&](int32_t N) {
        double s = 0.0;
        for (const auto& orbit : spec.orbits) {
            if (orbit.probability <= 0.0 || orbit.diameter() < N) continue;
            s += double(orbit.cells.size()) * orbit.probability *
                 std::exp(logk2 * double(orbit.cells.size()));
        }
        if (spec.pair_tail)
            s += 2.0 * std::exp(logk2 * 2.0) *
                 spec.pair_tail->weighted_tail_sum(std::max(N, spec.pair_tail->first), 0.0);
        return s;
    };
    const double total = sum_from(0);
    if (std::isinf(total)) throw std::invalid_argument("threshold undefined at level k");
    int32_t N = 0;
    while (sum_from(N) > 1.0) {
        ++N;
        if (N > 10000000) throw std::runtime_error("threshold search did not settle");
    }
    return N;
}

namespace {

// Bitmask flood fill on a w*h grid, 4-adjacency, index = x*h + y.
bool mask_connected(uint32_t mask, int w, int h) {
    if (mask == 0) return false;
    uint32_t colmask_lo = 0, full = 0;
    for (int x = 0; x < w; ++x) {
        colmask_lo |= 1u << (x * h);
        for (int y = 0; y < h; ++y) full |= 1u << (x * h + y);
    }
    (void)full;
    const uint32_t not_bottom = ~colmask_lo;        // bits with y > 0
    uint32_t colmask_hi = 0;
    for (int x = 0; x < w; ++x) colmask_hi |= 1u << (x * h + (h - 1));
    const uint32_t not_top = ~colmask_hi;
    uint32_t reach = mask & (~mask + 1); // lowest set bit
    for (;;) {
        uint32_t next = reach;
        next |= (reach & not_top) << 1;
        next |= (reach & not_bottom) >> 1;
        next |= reach << h;
        next |= reach >> h;
        next &= mask;
        if (next == reach) break;
        reach = next;
    }
    return reach == mask;
}

} // namespace

Hull connected_hull(const Shape& cells_in, int dimension, int hull_cap) {
    if (cells_in.empty()) throw std::invalid_argument("empty shape");
    Shape cells = cells_in;
    normalize_shape(cells);
    if (dimension == 1) {
        Hull h;
        const int32_t a = cells.front().x, b = cells.back().x;
        for (int32_t x = a; x <= b; ++x) h.cells.push_back({x, 0});
        h.size = b - a + 1;
        return h;
    }
    if (int(cells.size()) > hull_cap) throw std::invalid_argument("hull search too large");
    Site lo = cells.front(), hi = cells.front();
    for (const Site& c : cells) {
        lo.x = std::min(lo.x, c.x); lo.y = std::min(lo.y, c.y);
        hi.x = std::max(hi.x, c.x); hi.y = std::max(hi.y, c.y);
    }
    const int w = hi.x - lo.x + 1, h = hi.y - lo.y + 1;
    if (w * h > 25) throw std::invalid_argument("hull search too large");
    auto idx = [&](Site s) { return (s.x - lo.x) * h + (s.y - lo.y); };
    uint32_t base = 0;
    for (const Site& c : cells) base |= 1u << idx(c);
    std::vector<int> free_bits;
    for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y)
            if (!(base & (1u << (x * h + y)))) free_bits.push_back(x * h + y);

    auto to_shape = [&](uint32_t mask) {
        Shape s;
        for (int x = 0; x < w; ++x)
            for (int y = 0; y < h; ++y)
                if (mask & (1u << (x * h + y))) s.push_back({lo.x + x, lo.y + y});
        normalize_shape(s);
        return s;
    };

    const int nfree = int(free_bits.size());
    for (int add = 0; add + int(cells.size()) <= w * h; ++add) {
        bool found = false;
        Shape best;
        if (add > nfree) break;
        // Gosper iteration over add-subsets of the free cells.
        uint32_t comb = add == 0 ? 0 : (1u << add) - 1;
        for (;;) {
            uint32_t mask = base;
            for (int b = 0; b < nfree; ++b)
                if (comb & (1u << b)) mask |= 1u << free_bits[b];
            if (mask_connected(mask, w, h)) {
                Shape cand = to_shape(mask);
                if (!found || cand < best) { found = true; best = cand; }
            }
            if (add == 0) break;
            const uint32_t c = comb & (~comb + 1), r = comb + c;
            comb = (((r ^ comb) >> 2) / c) | r;
            if (comb >= (1u << nfree)) break;
        }
        if (found) return Hull{best, int32_t(best.size())};
    }
    throw std::runtime_error("hull search failed"); // unreachable: the full box is connected
}

IntensitySpec scale_intensity(const IntensitySpec& spec, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("scale must be positive");
    IntensitySpec out = spec;
    for (auto& orbit : out.orbits) orbit.probability = scale_prob(orbit.probability, c);
    if (out.pair_tail) {
        if (out.pair_tail->kind == PairTail::Kind::Geometric)
            out.pair_tail->scale *= c;
        else
            for (auto& [n, p] : out.pair_tail->values) p = scale_prob(p, c);
    }
    out.validate();
    return out;
}

double lambda_star(int delta, bool one_dim_override) {
    if (delta < 2) throw std::invalid_argument("degree must be >= 2");
    if (one_dim_override) return 0.0;
    return std::log(3.0 * delta - 1.0);
}

} // namespace prp
