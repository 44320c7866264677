#include "prp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace prp {

namespace {

RngKey set_key(const RngKey& base, const ConcreteSet& cs) {
    return base.with(Stream::SetInclusion)
        .with(cs.source_orbit)
        .with(cs.source_n)
        .with(cs.offset.x)
        .with(cs.offset.y);
}

int32_t max_orbit_diam(const IntensitySpec& spec) {
    int32_t d = 0;
    for (const auto& o : spec.orbits)
        if (o.probability > 0.0) d = std::max(d, o.diameter());
    return d;
}

} // namespace

int FieldSample::index_of(Site s) const {
    auto it = std::lower_bound(sites.begin(), sites.end(), s);
    if (it == sites.end() || !(*it == s)) return -1;
    return int(it - sites.begin());
}

void FieldSample::check_invariants() const {
    for (size_t i = 0; i < sites.size(); ++i) {
        if ((barX[i] != 0) != !hatX[i].empty())
            throw std::runtime_error("field invariant violated: barX vs hatX");
        for (int32_t idx : hatX[i])
            if (!std::binary_search(included[idx].cells.begin(), included[idx].cells.end(), sites[i]))
                throw std::runtime_error("field invariant violated: hatX membership");
    }
    if (!tildeX.empty()) {
        for (size_t i = 0; i < sites.size(); ++i) {
            if (barX_high[i] && !tildeX[i])
                throw std::runtime_error("field invariant violated: barX_high <= tildeX");
            if (tildeX[i] && !Y[i])
                throw std::runtime_error("field invariant violated: tildeX <= Y");
            if ((barX_low[i] || barX_high[i]) != (barX[i] != 0))
                throw std::runtime_error("field invariant violated: barX split");
        }
    }
}

namespace {

FieldSample sample_core(const IntensitySpec& spec, const Box& window, uint64_t seed,
                        double budget, bool with_tilde, int32_t N, double eps) {
    spec.validate();
    FieldSample fs;
    fs.window = window;
    fs.dimension = spec.dimension;
    fs.sites = window.sites();
    fs.seed = seed;
    const size_t n = fs.sites.size();
    fs.barX.assign(n, 0);
    fs.hatX.assign(n, {});

    // For tildeX a set outside the window can still paint it through its
    // hull, so enumerate against a dilated window.
    std::vector<Site> targets;
    if (with_tilde) {
        if (spec.has_tail() && budget <= 0.0)
            throw std::invalid_argument("zero error budget with infinite tail");
        const int32_t dil = std::max(max_orbit_diam(spec),
                                     spec.has_tail() ? spec.pair_tail->horizon(budget) : 0);
        targets = window.dilated(dil, spec.dimension).sites();
    } else {
        targets = fs.sites;
    }
    Enumeration en = enumerate_meeting(spec, targets, budget);
    fs.truncation_radius = en.tail_horizon;
    fs.neglected_per_site = en.neglected_per_site;

    RngKey base(seed);
    for (const ConcreteSet& cs : en.sets) {
        if (set_key(base, cs).uniform() < cs.p) fs.included.push_back(cs);
    }
    // Stable order so identical inputs give identical samples.
    std::sort(fs.included.begin(), fs.included.end(),
              [](const ConcreteSet& a, const ConcreteSet& b) {
                  return std::tie(a.source_orbit, a.source_n, a.offset) <
                         std::tie(b.source_orbit, b.source_n, b.offset);
              });
    for (size_t idx = 0; idx < fs.included.size(); ++idx)
        for (const Site& c : fs.included[idx].cells) {
            const int i = fs.index_of(c);
            if (i >= 0) {
                fs.barX[i] = 1;
                fs.hatX[i].push_back(int32_t(idx));
            }
        }
    if (!with_tilde) return fs;

    fs.split_N = N;
    fs.eps = eps;
    fs.barX_low.assign(n, 0);
    fs.barX_high.assign(n, 0);
    fs.tildeX.assign(n, 0);
    for (const ConcreteSet& cs : fs.included) {
        const bool high = shape_diameter(cs.cells) >= N;
        for (const Site& c : cs.cells) {
            const int i = fs.index_of(c);
            if (i >= 0) (high ? fs.barX_high : fs.barX_low)[i] = 1;
        }
        if (high) {
            Hull hull = connected_hull(cs.cells, spec.dimension);
            for (const Site& c : hull.cells) {
                const int i = fs.index_of(c);
                if (i >= 0) fs.tildeX[i] = 1;
            }
        }
    }
    fs.xi.assign(n, 0);
    fs.Y.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        fs.xi[i] =
            base.with(Stream::XiField).with(fs.sites[i].x).with(fs.sites[i].y).uniform() < eps;
        fs.Y[i] = fs.tildeX[i] | fs.xi[i];
    }
    fs.check_invariants();
    return fs;
}

} // namespace

FieldSample sample_field(const IntensitySpec& spec, const Box& window,
                         uint64_t seed, double budget) {
    return sample_core(spec, window, seed, budget, false, 0, 0.0);
}

FieldSample sample_tilde(const IntensitySpec& spec, const Box& window,
                         int32_t N, double eps, uint64_t seed, double budget) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("eps outside [0,1]");
    return sample_core(spec, window, seed, budget, true, N, eps);
}

namespace {

std::vector<Site> external_boundary(const std::vector<Site>& U, int dimension) {
    std::set<Site> in(U.begin(), U.end()), out;
    const std::vector<Site> nbrs1 = {{-1, 0}, {1, 0}};
    const std::vector<Site> nbrs2 = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (const Site& u : U)
        for (const Site& d : (dimension == 2 ? nbrs2 : nbrs1)) {
            const Site v = u + d;
            if (!in.count(v)) out.insert(v);
        }
    return {out.begin(), out.end()};
}

} // namespace

DecouplingReport decoupling_test(const IntensitySpec& spec, const Box& window,
                                 int32_t N, double eps,
                                 const std::vector<Site>& U,
                                 const std::vector<Site>& outside_probes,
                                 bool condition_on_Y, bool exact,
                                 int64_t n_samples, uint64_t seed, double budget) {
    spec.validate();
    if (U.empty()) throw std::invalid_argument("empty conditioning region");
    DecouplingReport rep;
    rep.exact = exact;
    rep.boundary = external_boundary(U, spec.dimension);
    rep.inside_probes.assign(U.begin(), U.begin() + std::min<size_t>(2, U.size()));
    rep.outside_probes = outside_probes;
    if (rep.outside_probes.size() > 2) rep.outside_probes.resize(2);
    for (const Site& s : rep.outside_probes)
        for (const Site& u : U)
            if (s == u) throw std::invalid_argument("outside probe inside U");

    std::vector<Site> probes = rep.inside_probes;
    probes.insert(probes.end(), rep.outside_probes.begin(), rep.outside_probes.end());
    const size_t ni = rep.inside_probes.size(), no = rep.outside_probes.size();
    const size_t ncfg = size_t(1) << (ni + no);
    std::vector<double> joint(ncfg, 0.0);

    for (const Site& s : rep.boundary)
        if (!window.contains(s)) throw std::invalid_argument("boundary outside window");
    for (const Site& s : probes)
        if (!window.contains(s)) throw std::invalid_argument("probe outside window");

    if (exact) {
        // Group the relevant sets by (hull coverage on boundary+probes);
        // only sets with diameter >= N contribute to tildeX.
        std::vector<Site> involved = rep.boundary;
        involved.insert(involved.end(), probes.begin(), probes.end());
        std::sort(involved.begin(), involved.end());
        involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
        const int32_t dil = std::max(max_orbit_diam(spec),
                                     spec.has_tail() ? spec.pair_tail->horizon(budget) : 0);
        Box probe_box{involved.front(), involved.back()};
        Enumeration en = enumerate_meeting(spec, probe_box.dilated(dil, spec.dimension).sites(), budget);
        std::map<uint64_t, double> groups; // hull-coverage mask -> P(no such set on)
        const size_t nb = rep.boundary.size();
        auto mask_of = [&](const Shape& cells) {
            uint64_t m = 0;
            for (size_t j = 0; j < nb; ++j)
                if (std::binary_search(cells.begin(), cells.end(), rep.boundary[j])) m |= uint64_t(1) << j;
            for (size_t j = 0; j < probes.size(); ++j)
                if (std::binary_search(cells.begin(), cells.end(), probes[j]))
                    m |= uint64_t(1) << (nb + j);
            return m;
        };
        for (const ConcreteSet& cs : en.sets) {
            if (shape_diameter(cs.cells) < N) continue;
            Hull h = connected_hull(cs.cells, spec.dimension);
            const uint64_t m = mask_of(h.cells);
            if (m == 0) continue;
            groups[m] = (groups.count(m) ? groups[m] : 1.0) * (1.0 - cs.p);
        }
        if (groups.size() > 24) throw std::invalid_argument("decoupling enumeration cap exceeded");
        std::vector<uint64_t> masks;
        std::vector<double> q;
        for (auto& [m, qq] : groups) { masks.push_back(m); q.push_back(qq); }
        // xi contributes on boundary and probes when conditioning on Y.
        const double x = condition_on_Y ? eps : 0.0;
        double norm = 0.0;
        for (uint64_t active = 0; active < (uint64_t(1) << masks.size()); ++active) {
            double w = 1.0;
            uint64_t cover = 0;
            for (size_t i = 0; i < masks.size(); ++i) {
                if (active & (uint64_t(1) << i)) { w *= 1.0 - q[i]; cover |= masks[i]; }
                else w *= q[i];
            }
            // Boundary must be zero: no covering hull and no xi.
            bool bzero = true;
            for (size_t j = 0; j < nb; ++j)
                if (cover & (uint64_t(1) << j)) { bzero = false; break; }
            if (!bzero) continue;
            w *= std::pow(1.0 - x, double(nb));
            // Probe sites: covered ones are 1; uncovered get xi.
            uint32_t base_cfg = 0;
            std::vector<size_t> free_probes;
            for (size_t j = 0; j < probes.size(); ++j) {
                if (cover & (uint64_t(1) << (nb + j))) base_cfg |= 1u << j;
                else free_probes.push_back(j);
            }
            for (uint32_t fc = 0; fc < (1u << free_probes.size()); ++fc) {
                double wf = w;
                uint32_t cfg = base_cfg;
                for (size_t b = 0; b < free_probes.size(); ++b) {
                    if (fc & (1u << b)) { wf *= x; cfg |= 1u << free_probes[b]; }
                    else wf *= 1.0 - x;
                }
                joint[cfg] += wf;
                norm += wf;
            }
        }
        if (norm <= 0.0) throw std::invalid_argument("boundary event has probability zero");
        for (double& w : joint) w /= norm;
        rep.hits = -1;
        rep.samples = 0;
    } else {
        RngKey base(seed);
        for (int64_t r = 0; r < n_samples; ++r) {
            FieldSample fs = sample_tilde(spec, window, N, eps,
                                          base.with(Stream::Replica).with(r).bits(), budget);
            const auto& field = condition_on_Y ? fs.Y : fs.tildeX;
            bool bzero = true;
            for (const Site& s : rep.boundary)
                if (field[fs.index_of(s)]) { bzero = false; break; }
            if (!bzero) continue;
            uint32_t cfg = 0;
            for (size_t j = 0; j < probes.size(); ++j)
                if (field[fs.index_of(probes[j])]) cfg |= 1u << j;
            joint[cfg] += 1.0;
            ++rep.hits;
        }
        rep.samples = n_samples;
        if (rep.hits < 100) throw std::runtime_error("insufficient conditional sample");
        for (double& w : joint) w /= double(rep.hits);
    }

    // TV between the conditional joint and the product of its marginals.
    std::vector<double> pin(size_t(1) << ni, 0.0), pout(size_t(1) << no, 0.0);
    for (uint32_t c = 0; c < ncfg; ++c) {
        pin[c & ((1u << ni) - 1)] += joint[c];
        pout[c >> ni] += joint[c];
    }
    double tv = 0.0;
    for (uint32_t c = 0; c < ncfg; ++c)
        tv += std::abs(joint[c] - pin[c & ((1u << ni) - 1)] * pout[c >> ni]);
    rep.tv = 0.5 * tv;
    if (!exact && rep.hits > 0) {
        const double cells = double(ncfg);
        rep.ci = cells * std::sqrt(std::log(4.0 * cells / 0.01) / (2.0 * double(rep.hits)));
    }
    return rep;
}

} // namespace prp
