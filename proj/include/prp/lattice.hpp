// Lattice primitives shared by all modules: sites of Z^d (d = 1 or 2),
// boxes, shapes (finite site sets), and the l-infinity geometry used
// throughout. A 1D site is stored with y == 0 so both dimensions share
// one representation.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prp {

struct Site {
    int32_t x = 0;
    int32_t y = 0;

    friend bool operator==(const Site&, const Site&) = default;
    // Lexicographic order (x first). "min" of a shape always means this.
    friend bool operator<(const Site& a, const Site& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

inline Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y}; }
inline Site operator-(Site a, Site b) { return {a.x - b.x, a.y - b.y}; }

// Chebyshev distance; coincides with |a-b| in 1D.
inline int32_t dist_linf(Site a, Site b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

struct SiteHash {
    size_t operator()(const Site& s) const {
        uint64_t v = (uint64_t(uint32_t(s.x)) << 32) | uint32_t(s.y);
        v ^= v >> 33;
        v *= 0xff51afd7ed558ccdULL;
        v ^= v >> 33;
        return size_t(v);
    }
};

// A shape is a sorted, duplicate-free list of sites.
using Shape = std::vector<Site>;

inline void normalize_shape(Shape& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

inline Shape translate(const Shape& s, Site t) {
    Shape out;
    out.reserve(s.size());
    for (const Site& c : s) out.push_back(c + t);
    return out;
}

inline int32_t shape_diameter(const Shape& s) {
    int32_t d = 0;
    for (size_t i = 0; i < s.size(); ++i)
        for (size_t j = i + 1; j < s.size(); ++j)
            d = std::max(d, dist_linf(s[i], s[j]));
    return d;
}

// Translate so the lexicographic minimum lands at the origin.
inline Shape canonicalize_shape(Shape cells) {
    if (cells.empty()) throw std::invalid_argument("empty shape");
    normalize_shape(cells);
    const Site m = cells.front();
    return translate(cells, Site{-m.x, -m.y});
}

// Coordinate-wise minimum (may not belong to the shape); used by the
// witness construction in 2D, equal to the lex minimum in 1D.
inline Site coordwise_min(const Shape& s) {
    Site m = s.front();
    for (const Site& c : s) {
        m.x = std::min(m.x, c.x);
        m.y = std::min(m.y, c.y);
    }
    return m;
}

// Axis-aligned box [lo.x..hi.x] x [lo.y..hi.y]; in 1D lo.y == hi.y == 0.
struct Box {
    Site lo;
    Site hi;

    bool contains(Site s) const {
        return s.x >= lo.x && s.x <= hi.x && s.y >= lo.y && s.y <= hi.y;
    }
    int64_t size() const {
        return int64_t(hi.x - lo.x + 1) * int64_t(hi.y - lo.y + 1);
    }
    Box dilated(int32_t r, int dimension) const {
        Box b = *this;
        b.lo.x -= r; b.hi.x += r;
        if (dimension == 2) { b.lo.y -= r; b.hi.y += r; }
        return b;
    }
    std::vector<Site> sites() const {
        std::vector<Site> out;
        out.reserve(size_t(size()));
        for (int32_t x = lo.x; x <= hi.x; ++x)
            for (int32_t y = lo.y; y <= hi.y; ++y)
                out.push_back({x, y});
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline Box interval(int32_t a, int32_t b) { return Box{{a, 0}, {b, 0}}; }

inline std::string site_str(Site s, int dimension) {
    if (dimension == 1) return std::to_string(s.x);
    return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

} // namespace prp
