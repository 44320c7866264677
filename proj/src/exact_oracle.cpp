#include "prp/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace prp {

namespace {

// Group the concrete sets meeting S by their coverage mask on S; the law
// of barX_S only depends on which masks are "active" (some set with that
// mask included). q[m] = P(no set with mask m included).
struct MaskGroups {
    std::vector<uint32_t> masks;
    std::vector<double> q;
    double neglected = 0.0; // sum of p over truncated tail sets meeting S
};

MaskGroups mask_groups(const IntensitySpec& spec, const std::vector<Site>& S,
                       double enum_budget) {
    MaskGroups g;
    if (S.empty()) return g;
    Enumeration en = enumerate_meeting(spec, S, enum_budget);
    std::map<uint32_t, double> acc;
    for (const ConcreteSet& cs : en.sets) {
        uint32_t m = 0;
        for (size_t j = 0; j < S.size(); ++j)
            if (std::binary_search(cs.cells.begin(), cs.cells.end(), S[j])) m |= 1u << j;
        if (m == 0) continue;
        acc[m] = (acc.count(m) ? acc[m] : 1.0) * (1.0 - cs.p);
    }
    for (const auto& [m, q] : acc) {
        g.masks.push_back(m);
        g.q.push_back(q);
    }
    // Each neglected tail pair meets S in at least one site.
    g.neglected = double(S.size()) * en.neglected_per_site;
    return g;
}

} // namespace

ProbInterval prob_all_zero(const IntensitySpec& spec, const std::vector<Site>& S,
                           double budget) {
    if (S.empty()) return {1.0, 1.0};
    const double enum_budget = std::max(budget / double(S.size()), 1e-300);
    MaskGroups g = mask_groups(spec, S, enum_budget);
    double hi = 1.0;
    for (double q : g.q) hi *= q;
    const double lo = hi * std::max(0.0, 1.0 - g.neglected);
    return {lo, hi};
}

ProbInterval prob_all_one(const IntensitySpec& spec, const std::vector<Site>& S,
                          double budget) {
    const size_t n = S.size();
    if (n == 0) return {1.0, 1.0};
    if (n > 20) throw std::invalid_argument("prob_all_one window too large");
    std::vector<Site> sorted = S;
    std::sort(sorted.begin(), sorted.end());
    const double enum_budget =
        std::max(budget / (std::ldexp(1.0, int(n)) * double(n)), 1e-300);
    MaskGroups g = mask_groups(spec, sorted, enum_budget);
    double lo = 0.0, hi = 0.0;
    for (uint32_t T = 0; T < (1u << n); ++T) {
        double prod = 1.0;
        for (size_t i = 0; i < g.masks.size(); ++i)
            if (g.masks[i] & T) prod *= g.q[i];
        const double term_lo = prod * std::max(0.0, 1.0 - g.neglected);
        if (std::popcount(T) % 2 == 0) {
            lo += term_lo;
            hi += prod;
        } else {
            lo -= prod;
            hi -= term_lo;
        }
    }
    return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

ExactLaw exact_law(const IntensitySpec& spec, const std::vector<Site>& S,
                   double budget) {
    const size_t n = S.size();
    if (n > 4) throw std::invalid_argument("exact_law window too large");
    ExactLaw law;
    law.sites = S;
    std::sort(law.sites.begin(), law.sites.end());
    law.weights.assign(size_t(1) << n, 0.0);
    if (n == 0) {
        law.weights = {1.0};
        return law;
    }
    const double enum_budget = std::max(budget, 1e-300);
    MaskGroups g = mask_groups(spec, law.sites, enum_budget);
    const size_t k = g.masks.size();
    if (k > 24) throw std::invalid_argument("exact_law enumeration cap exceeded");
    for (uint64_t active = 0; active < (uint64_t(1) << k); ++active) {
        double w = 1.0;
        uint32_t cfg = 0;
        for (size_t i = 0; i < k; ++i) {
            if (active & (uint64_t(1) << i)) {
                w *= 1.0 - g.q[i];
                cfg |= g.masks[i];
            } else {
                w *= g.q[i];
            }
        }
        law.weights[cfg] += w;
    }
    law.trunc_error = g.neglected;
    return law;
}

ExactLaw law_or_iid(const ExactLaw& law, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("eps outside [0,1]");
    ExactLaw out = law;
    // Per-site convolution: OR with an independent Bernoulli(eps) bit.
    for (size_t j = 0; j < law.n_sites(); ++j) {
        const uint32_t bit = 1u << j;
        for (uint32_t c = 0; c < out.weights.size(); ++c) {
            if (c & bit) continue;
            const double move = out.weights[c] * eps;
            out.weights[c] -= move;
            out.weights[c | bit] += move;
        }
    }
    return out;
}

ExactLaw law_or(const ExactLaw& a, const ExactLaw& b) {
    if (a.sites != b.sites) throw std::invalid_argument("mismatched site lists");
    ExactLaw out;
    out.sites = a.sites;
    out.weights.assign(a.weights.size(), 0.0);
    out.trunc_error = a.trunc_error + b.trunc_error;
    for (uint32_t x = 0; x < a.weights.size(); ++x)
        for (uint32_t y = 0; y < b.weights.size(); ++y)
            out.weights[x | y] += a.weights[x] * b.weights[y];
    return out;
}

ExactLaw product_law(const std::vector<Site>& sites, const std::vector<double>& densities) {
    if (sites.size() != densities.size())
        throw std::invalid_argument("product_law size mismatch");
    ExactLaw law;
    law.sites = sites;
    law.weights.assign(size_t(1) << sites.size(), 0.0);
    for (uint32_t c = 0; c < law.weights.size(); ++c) {
        double w = 1.0;
        for (size_t j = 0; j < sites.size(); ++j)
            w *= (c & (1u << j)) ? densities[j] : 1.0 - densities[j];
        law.weights[c] = w;
    }
    return law;
}

double tv_distance(const ExactLaw& a, const ExactLaw& b) {
    if (a.weights.size() != b.weights.size())
        throw std::invalid_argument("mismatched laws");
    double s = 0.0;
    for (size_t i = 0; i < a.weights.size(); ++i)
        s += std::abs(a.weights[i] - b.weights[i]);
    return 0.5 * s;
}

DominanceResult check_dominance(const ExactLaw& mu, const ExactLaw& nu) {
    if (mu.sites != nu.sites) throw std::invalid_argument("mismatched site lists");
    const size_t n = mu.n_sites();
    if (n > 4) throw std::invalid_argument("check_dominance window too large");
    const uint32_t m = 1u << n;
    // up_nb[c]: configurations covering c with one extra bit.
    std::vector<std::vector<uint32_t>> up_nb(m);
    for (uint32_t c = 0; c < m; ++c)
        for (size_t j = 0; j < n; ++j)
            if (!(c & (1u << j))) up_nb[c].push_back(c | (1u << j));
    for (uint32_t F = 1; F < (1u << m); ++F) {
        bool up_closed = true;
        for (uint32_t c = 0; c < m && up_closed; ++c)
            if (F & (1u << c))
                for (uint32_t d : up_nb[c])
                    if (!(F & (1u << d))) { up_closed = false; break; }
        if (!up_closed) continue;
        double mu_f = 0.0, nu_f = 0.0;
        for (uint32_t c = 0; c < m; ++c)
            if (F & (1u << c)) {
                mu_f += mu.weights[c];
                nu_f += nu.weights[c];
            }
        if (mu_f > nu_f + 1e-12) {
            std::vector<uint32_t> witness;
            for (uint32_t c = 0; c < m; ++c)
                if (F & (1u << c)) witness.push_back(c);
            return {false, witness};
        }
    }
    return {true, std::nullopt};
}

bool check_dominance_flow(const ExactLaw& mu, const ExactLaw& nu) {
    if (mu.sites != nu.sites) throw std::invalid_argument("mismatched site lists");
    const int m = int(mu.weights.size());
    const int source = 0, sink = 2 * m + 1, nodes = 2 * m + 2;
    std::vector<std::vector<double>> cap(nodes, std::vector<double>(nodes, 0.0));
    for (int x = 0; x < m; ++x) cap[source][1 + x] = mu.weights[x];
    for (int y = 0; y < m; ++y) cap[1 + m + y][sink] = nu.weights[y];
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < m; ++y)
            if ((uint32_t(x) & ~uint32_t(y)) == 0) cap[1 + x][1 + m + y] = 2.0;
    double flow = 0.0;
    for (;;) {
        std::vector<int> prev(nodes, -1);
        prev[source] = source;
        std::queue<int> q;
        q.push(source);
        while (!q.empty() && prev[sink] < 0) {
            const int u = q.front();
            q.pop();
            for (int v = 0; v < nodes; ++v)
                if (prev[v] < 0 && cap[u][v] > 1e-14) {
                    prev[v] = u;
                    q.push(v);
                }
        }
        if (prev[sink] < 0) break;
        double aug = 2.0;
        for (int v = sink; v != source; v = prev[v]) aug = std::min(aug, cap[prev[v]][v]);
        for (int v = sink; v != source; v = prev[v]) {
            cap[prev[v]][v] -= aug;
            cap[v][prev[v]] += aug;
        }
        flow += aug;
    }
    return flow >= 1.0 - 1e-9;
}

StreakReport streak_density(const IntensitySpec& spec,
                            const std::vector<Shape>& candidate_sets, double budget) {
    if (candidate_sets.empty()) throw std::invalid_argument("empty candidate list");
    StreakReport rep;
    MomentReport mr = moment_report(spec, {});
    rep.gamma = mr.gamma;
    rep.lambda_c = mr.lambda_c;
    for (const Shape& S : candidate_sets) {
        if (S.empty()) throw std::invalid_argument("empty candidate set");
        StreakCandidate c;
        c.sites = S;
        c.all_one = prob_all_one(spec, S, budget);
        c.per_site = std::pow(c.all_one.mid(), 1.0 / double(S.size()));
        if (c.per_site >= rep.delta_hat) {
            rep.delta_hat = c.per_site;
            rep.best_set = S;
        }
        rep.candidates.push_back(std::move(c));
    }
    return rep;
}

void export_law_csv(const ExactLaw& law, std::ostream& os) {
    os << "config,probability\n";
    char buf[64];
    for (uint32_t c = 0; c < law.weights.size(); ++c) {
        std::string bits;
        for (size_t j = 0; j < law.n_sites(); ++j) bits += (c & (1u << j)) ? '1' : '0';
        std::snprintf(buf, sizeof buf, "%.17g", law.weights[c]);
        os << bits << "," << buf << "\n";
    }
}

} // namespace prp
