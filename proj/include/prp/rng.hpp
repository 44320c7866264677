// Counter-based RNG. Every random decision is keyed by what it decides
// (stream tag + integer coordinates), never by draw order, so samples are
// reproducible regardless of enumeration order and streams are disjoint
// by construction.
#pragma once

#include <cstdint>

namespace prp {

enum class Stream : uint64_t {
    SetInclusion = 1,  // concrete-set inclusion decisions
    XiField      = 2,  // independent sprinkling fields
    CouplingU    = 3,  // shared uniforms of sequential couplings
    PairGate     = 4,  // pairs-coding gate variables
    PairBlockU   = 5,  // pairs-coding per-block draws
    NetW         = 6,  // greedy-net weights
    VoronoiU     = 7,  // Voronoi tie-break uniforms
    ClassGate    = 8,  // general-coding gate variables
    ClassU       = 9,  // general-coding per-class draws
    CensorU      = 10, // censoring uniforms U_v
    RefineU      = 11, // refinement merge draws
    MarkovFresh  = 12, // crossing-chain fresh-set draws
    Replica      = 13, // per-replica key derivation
    Direct       = 14, // direct/correction-layer inclusion decisions
    Generic      = 15,
};

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable key: fold words one at a time through the mixer.
class RngKey {
public:
    explicit RngKey(uint64_t seed) : h_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    RngKey with(uint64_t w) const {
        RngKey k = *this;
        k.h_ = mix64(k.h_ ^ mix64(w));
        return k;
    }
    RngKey with(Stream s) const { return with(static_cast<uint64_t>(s) ^ 0xa5a5a5a5a5a5a5a5ULL); }
    RngKey with(int64_t w) const { return with(uint64_t(w)); }
    RngKey with(int32_t w) const { return with(uint64_t(int64_t(w))); }

    uint64_t bits() const { return h_; }
    // Uniform in [0,1) with 53 random bits.
    double uniform() const { return double(h_ >> 11) * 0x1.0p-53; }
    double uniform(uint64_t counter) const {
        return double(mix64(h_ ^ mix64(counter ^ 0xd1b54a32d192ed03ULL)) >> 11) * 0x1.0p-53;
    }

private:
    uint64_t h_;
};

} // namespace prp
