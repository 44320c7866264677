#include "prp/domination.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "prp/rng.hpp"

namespace prp {

namespace {

double eps_at(const std::vector<Site>& sites, const std::vector<double>& eps,
              double default_eps, Site v) {
    auto it = std::lower_bound(sites.begin(), sites.end(), v);
    if (it != sites.end() && *it == v) return eps[size_t(it - sites.begin())];
    return default_eps;
}

} // namespace

DeltaProfile delta_bound(const IntensitySpec& spec, const std::vector<Site>& sites_in,
                         const std::vector<double>& epsilon, double default_eps,
                         bool sequential, double budget) {
    spec.validate();
    if (sites_in.size() != epsilon.size())
        throw std::invalid_argument("epsilon must match the site list");
    for (double e : epsilon)
        if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon outside (0,1]");
    if (!(default_eps > 0.0 && default_eps <= 1.0))
        throw std::invalid_argument("epsilon outside (0,1]");

    DeltaProfile prof;
    prof.sites = sites_in;
    std::vector<size_t> order(sites_in.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return sites_in[a] < sites_in[b]; });
    std::vector<Site> sorted;
    std::vector<double> eps_sorted;
    for (size_t i : order) {
        sorted.push_back(sites_in[i]);
        eps_sorted.push_back(epsilon[i]);
    }
    prof.sites = sorted;
    prof.epsilon = eps_sorted;
    prof.sequential = sequential;

    // Divergence check: uniform-eps sums relate to the size-weighted
    // exponential moment.
    const double eps_min = *std::min_element(
        eps_sorted.empty() ? &default_eps : eps_sorted.data(),
        eps_sorted.empty() ? &default_eps + 1 : eps_sorted.data() + eps_sorted.size());
    const double lam = std::log(1.0 / std::min(eps_min, default_eps));
    if (std::isinf(moment_sum(spec, lam, Weight::Size)))
        throw std::invalid_argument("divergent delta sum at weight exp(lambda |A|)");

    for (size_t i = 0; i < sorted.size(); ++i) {
        const Site v = sorted[i];
        Enumeration en = translates_through(spec, v, -1, budget);
        double sum = 0.0;
        for (const ConcreteSet& cs : en.sets) {
            double prod = 1.0;
            for (const Site& u : cs.cells) {
                if (u == v) continue;
                if (sequential && !(u < v)) continue;
                prod /= eps_at(sorted, eps_sorted, default_eps, u);
            }
            sum += cs.p * prod;
        }
        // Truncated tail pairs contribute at most neglected mass times
        // the worst inverse-eps factor; add it so delta stays an upper
        // bound. (Sequential: only the left partner carries the factor.)
        const double worst = 1.0 / std::min(eps_min, default_eps);
        sum += en.neglected_per_site * (sequential ? 0.5 * (worst + 1.0) : worst);
        const double e = eps_sorted[i];
        const double d = e + (1.0 - e) * sum;
        prof.delta.push_back(d);
        prof.vacuous.push_back(d >= 1.0);
    }
    return prof;
}

DeltaProfile delta_bound_uniform(const IntensitySpec& spec, const std::vector<Site>& sites,
                                 double eps, bool sequential, double budget) {
    return delta_bound(spec, sites, std::vector<double>(sites.size(), eps), eps,
                       sequential, budget);
}

CouplingRun sample_monotone_coupling(const IntensitySpec& spec, const Box& window,
                                     double eps, bool sequential_delta,
                                     uint64_t seed, int64_t n_samples, double budget) {
    spec.validate();
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon outside (0,1]");
    std::vector<Site> sites = window.sites();
    const size_t n = sites.size();
    if (n > 20) throw std::invalid_argument("coupling window capped at 20 sites");

    CouplingRun run;
    run.profile = delta_bound_uniform(spec, sites, eps, sequential_delta, budget);
    run.n_samples = n_samples;
    run.y_config_counts.assign(size_t(1) << n, 0);
    run.y_site_counts.assign(n, 0);
    run.z_site_counts.assign(n, 0);

    // Exact joint law of barX on the window via coverage groups, then OR
    // with the Bernoulli(eps) sprinkle.
    Enumeration en = enumerate_meeting(spec, sites, budget);
    std::map<uint32_t, double> groups;
    for (const ConcreteSet& cs : en.sets) {
        uint32_t m = 0;
        for (size_t j = 0; j < n; ++j)
            if (std::binary_search(cs.cells.begin(), cs.cells.end(), sites[j])) m |= 1u << j;
        if (m) groups[m] = (groups.count(m) ? groups[m] : 1.0) * (1.0 - cs.p);
    }
    if (groups.size() > 24) throw std::invalid_argument("coupling enumeration cap exceeded");
    ExactLaw barx;
    barx.sites = sites;
    barx.weights.assign(size_t(1) << n, 0.0);
    {
        std::vector<uint32_t> masks;
        std::vector<double> q;
        for (auto& [m, qq] : groups) { masks.push_back(m); q.push_back(qq); }
        for (uint64_t active = 0; active < (uint64_t(1) << masks.size()); ++active) {
            double w = 1.0;
            uint32_t cfg = 0;
            for (size_t i = 0; i < masks.size(); ++i) {
                if (active & (uint64_t(1) << i)) { w *= 1.0 - q[i]; cfg |= masks[i]; }
                else w *= q[i];
            }
            barx.weights[cfg] += w;
        }
    }
    ExactLaw ylaw = law_or_iid(barx, eps);

    // Prefix tables: T[j][prefix] = P(Y on first j sites == prefix).
    std::vector<std::vector<double>> T(n + 1);
    T[n] = ylaw.weights;
    for (size_t j = n; j-- > 0;) {
        T[j].assign(size_t(1) << j, 0.0);
        for (uint32_t p = 0; p < (1u << j); ++p)
            T[j][p] = T[j + 1][p] + T[j + 1][p | (1u << j)];
    }

    RngKey base(seed);
    for (int64_t s = 0; s < n_samples; ++s) {
        RngKey skey = base.with(Stream::CouplingU).with(s);
        uint32_t prefix = 0;
        bool violated = false;
        for (size_t j = 0; j < n; ++j) {
            const double denom = T[j][prefix];
            const double q = denom > 0.0 ? T[j + 1][prefix | (1u << j)] / denom : 0.0;
            const double d = run.profile.delta[j];
            if (q > d + 1e-9)
                throw std::runtime_error("coupling bound violated: conditional exceeds delta");
            run.max_cond_minus_delta = std::max(run.max_cond_minus_delta, q - d);
            const double u = skey.uniform(j);
            const bool y = u < q;
            const bool z = u < std::min(d, 1.0);
            if (y && !z) violated = true;
            if (y) {
                prefix |= 1u << j;
                ++run.y_site_counts[j];
            }
            if (z) ++run.z_site_counts[j];
            ++run.exposures;
        }
        if (violated) ++run.violations;
        ++run.y_config_counts[prefix];
    }
    if (run.violations > 0)
        throw std::runtime_error("monotone coupling violated y <= z");
    return run;
}

DominatingDensity dominating_iid_density(const IntensitySpec& spec, double lambda) {
    spec.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (std::isinf(moment_sum(spec, lambda, Weight::Size)))
        throw std::invalid_argument("no finite exponential moment at this lambda");

    auto size_tail = [&](int32_t N) {
        double s = 0.0;
        for (const auto& orbit : spec.orbits) {
            if (orbit.probability <= 0.0 || orbit.diameter() < N) continue;
            s += double(orbit.cells.size()) * orbit.probability *
                 std::exp(lambda * double(orbit.cells.size()));
        }
        if (spec.pair_tail)
            s += 2.0 * std::exp(2.0 * lambda) *
                 spec.pair_tail->weighted_tail_sum(std::max(N, spec.pair_tail->first), 0.0);
        return s;
    };

    DominatingDensity out;
    int32_t N = 0;
    while (size_tail(N) > 1.0) {
        ++N;
        if (N > 10000000) throw std::runtime_error("density split search did not settle");
    }
    out.N = N;
    out.tail = size_tail(N);

    double prod = 1.0;
    for (const auto& orbit : spec.orbits) {
        if (orbit.probability <= 0.0 || orbit.diameter() >= N) continue;
        prod *= std::pow(1.0 - std::pow(orbit.probability, 1.0 / double(orbit.cells.size())),
                         double(orbit.cells.size()));
    }
    if (spec.pair_tail)
        for (int32_t m = spec.pair_tail->first; m < N; ++m) {
            const double p = spec.pair_tail->value(m);
            if (p > 0.0) prod *= (1.0 - std::sqrt(p)) * (1.0 - std::sqrt(p));
        }
    out.q1 = 1.0 - prod;

    const double e = std::exp(-lambda);
    out.q2 = e + e * (1.0 - e) * out.tail;
    out.density = 1.0 - (1.0 - out.q1) * (1.0 - out.q2);
    if (!(out.density < 1.0))
        throw std::runtime_error("dominating density not strictly below 1");
    return out;
}

WitnessReport witness_search(const IntensitySpec& spec, int32_t n, double beta,
                             int32_t N, uint64_t seed, int32_t n_trials) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("set size must be >= 1");
    if (!(beta >= 10.0)) throw std::invalid_argument("beta must be >= 10");
    if (N < 1) throw std::invalid_argument("box side must be >= 1");

    // Canonical choices of Y_b: size-n shapes shifted to coordinate-wise
    // minimum at the origin, weighted by the orbit probability.
    std::vector<Shape> choices;
    std::vector<double> weights;
    for (const auto& orbit : spec.orbits) {
        if (orbit.probability <= 0.0 || int32_t(orbit.cells.size()) != n) continue;
        const Site m = coordwise_min(orbit.cells);
        choices.push_back(translate(orbit.cells, Site{-m.x, -m.y}));
        weights.push_back(orbit.probability);
    }
    if (n == 2 && spec.pair_tail) {
        const PairTail& t = *spec.pair_tail;
        for (int32_t m = t.first; m <= t.horizon(1e-9); ++m) {
            const double p = t.value(m);
            if (p <= 0.0) continue;
            choices.push_back(Shape{{0, 0}, {m, 0}});
            weights.push_back(p);
        }
    }
    if (choices.empty()) throw std::invalid_argument("no orbit of the requested size");

    WitnessReport rep;
    rep.n = n;
    rep.beta = beta;
    rep.N = N;
    double s_n = 0.0;
    for (double w : weights) s_n += w;
    rep.p_n = double(n) * s_n;
    rep.pz_paley_zygmund = rep.p_n / (double(n) + rep.p_n);
    double pz = 1.0;
    for (double w : weights) pz *= 1.0 - w;
    rep.pz = 1.0 - pz;

    const int d = spec.dimension;
    Box box = d == 1 ? interval(0, N - 1) : Box{{0, 0}, {N - 1, N - 1}};
    const std::vector<Site> box_sites = box.sites();
    const double Nd = double(box_sites.size());

    // P(v in Y_b) depends only on v - b.
    auto p_cover = [&](Site diff) {
        double s = 0.0;
        for (size_t i = 0; i < choices.size(); ++i)
            if (std::binary_search(choices[i].begin(), choices[i].end(), diff))
                s += weights[i] / s_n;
        return s;
    };

    const double density = std::min(1.0, 2.0 * beta / double(n));
    const double b_cap = 8.0 * beta * Nd / double(n);
    const double d_cap = 8.0 * std::exp(-beta) * Nd;

    RngKey base(seed);
    std::vector<Site> B;
    std::vector<double> excl(box_sites.size());
    bool ok = false;
    for (int32_t trial = 0; trial < std::max(1, n_trials) && !ok; ++trial) {
        B.clear();
        for (const Site& b : box_sites)
            if (base.with(Stream::Generic).with(trial).with(b.x).with(b.y).uniform() < density)
                B.push_back(b);
        if (double(B.size()) > b_cap) continue;
        double mass = 0.0;
        for (size_t i = 0; i < box_sites.size(); ++i) {
            double prod = 1.0;
            for (const Site& b : B) prod *= 1.0 - p_cover(box_sites[i] - b);
            excl[i] = prod;
            mass += prod;
        }
        if (mass <= 4.0 * std::exp(-beta) * Nd) ok = true;
    }
    if (!ok) throw std::runtime_error("witness search could not realize the B constraints");
    rep.B = B;

    // D: the allowed number of sites with the largest exclusion
    // probability, ties broken by site order.
    std::vector<size_t> idx(box_sites.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return excl[a] > excl[b]; });
    const size_t allowance = size_t(std::floor(d_cap));
    std::vector<uint8_t> in_d(box_sites.size(), 0);
    for (size_t i = 0; i < std::min(allowance, idx.size()); ++i) {
        if (excl[idx[i]] <= 0.0) break;
        in_d[idx[i]] = 1;
        rep.D.push_back(box_sites[idx[i]]);
    }
    std::sort(rep.D.begin(), rep.D.end());

    std::vector<Site> S;
    for (size_t i = 0; i < box_sites.size(); ++i)
        if (!in_d[i]) S.push_back(box_sites[i]);

    // P([N]^d \ Y_B subset D) = P(S subset Y_B): inclusion-exclusion over
    // subsets of S factorizes over the independent Y_b. Exact for |S|
    // up to 20; otherwise a 99% Clopper-Pearson lower bound from
    // Monte Carlo.
    if (S.size() <= 20) {
        double cov = 0.0;
        for (uint32_t T = 0; T < (1u << S.size()); ++T) {
            double prod = 1.0;
            for (const Site& b : B) {
                double avoid = 0.0;
                for (size_t i = 0; i < choices.size(); ++i) {
                    bool hits = false;
                    for (size_t j = 0; j < S.size() && !hits; ++j)
                        if (T & (1u << j))
                            hits = std::binary_search(choices[i].begin(), choices[i].end(),
                                                      S[j] - b);
                    if (!hits) avoid += weights[i] / s_n;
                }
                prod *= avoid;
                if (prod == 0.0) break;
            }
            cov += (std::popcount(T) % 2 == 0 ? prod : -prod);
        }
        rep.coverage = std::clamp(cov, 0.0, 1.0);
        rep.coverage_exact = true;
    } else {
        const int64_t n_mc = 100000;
        int64_t hits = 0;
        std::vector<double> cum(weights);
        for (size_t i = 1; i < cum.size(); ++i) cum[i] += cum[i - 1];
        for (int64_t r = 0; r < n_mc; ++r) {
            std::vector<uint8_t> cover(S.size(), 0);
            for (size_t bi = 0; bi < B.size(); ++bi) {
                const double u =
                    base.with(Stream::Generic).with(int64_t(1) << 40).with(r).with(int64_t(bi)).uniform() *
                    s_n;
                size_t c = size_t(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
                if (c >= choices.size()) c = choices.size() - 1;
                for (size_t j = 0; j < S.size(); ++j)
                    if (std::binary_search(choices[c].begin(), choices[c].end(), S[j] - B[bi]))
                        cover[j] = 1;
            }
            bool all = true;
            for (uint8_t cv : cover)
                if (!cv) { all = false; break; }
            if (all) ++hits;
        }
        // Conservative lower confidence bound at 99%:
        // p_lo = hits/n - sqrt(log(1/0.01)/(2n)).
        rep.coverage = std::max(0.0, double(hits) / double(n_mc) -
                                         std::sqrt(std::log(100.0) / (2.0 * double(n_mc))));
        rep.coverage_exact = false;
    }

    rep.bound = rep.coverage * std::pow(rep.pz, double(B.size()));
    rep.per_site_bound = S.empty() ? 0.0 : std::pow(rep.bound, 1.0 / double(S.size()));
    return rep;
}

} // namespace prp
