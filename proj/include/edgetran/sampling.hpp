#pragma once

// Low-discrepancy and random samplers over the design space, plus the model
// diversity diagnostics (pairwise embedding distances and the
// deep/shallow x wide/narrow census).

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "design_space.hpp"
#include "rng.hpp"
#include "sobol_joe_kuo.hpp"

namespace edgetran {

enum class SamplerKind { Sobol, LHS, Halton, Hammersly, Random };

inline const char* sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::Sobol: return "sobol";
        case SamplerKind::LHS: return "lhs";
        case SamplerKind::Halton: return "halton";
        case SamplerKind::Hammersly: return "hammersly";
        case SamplerKind::Random: return "random";
    }
    return "?";
}

inline SamplerKind parse_sampler(const std::string& s) {
    if (s == "sobol") return SamplerKind::Sobol;
    if (s == "lhs") return SamplerKind::LHS;
    if (s == "halton") return SamplerKind::Halton;
    if (s == "hammersly" || s == "hammersley") return SamplerKind::Hammersly;
    if (s == "random") return SamplerKind::Random;
    throw InvalidConfig("unknown sampler '" + s + "'");
}

inline constexpr std::array<SamplerKind, 5> kAllSamplers = {
    SamplerKind::Sobol, SamplerKind::LHS, SamplerKind::Halton,
    SamplerKind::Hammersly, SamplerKind::Random};

namespace detail {

inline constexpr int kSobolMaxBit = 30;

// Gray-code Sobol generator over the Joe-Kuo direction numbers.
class SobolSequence {
public:
    explicit SobolSequence(int dim, std::uint32_t skip = 0) : dim_(dim), state_(dim, 0) {
        if (dim < 1 || dim > kSobolMaxDim)
            throw InvalidConfig("sobol dimension must be 1..37");
        dirs_.assign(dim, {});
        for (int k = 0; k < kSobolMaxBit; ++k)
            dirs_[0][k] = 1u << (kSobolMaxBit - 1 - k);
        for (int j = 1; j < dim; ++j) {
            const std::uint32_t p = kSobolPoly[j];
            const int s = std::bit_width(p) - 1;
            std::array<std::uint32_t, kSobolMaxBit> mm{};
            for (int i = 0; i < s; ++i) mm[i] = kSobolVinit[j][i];
            for (int k = s; k < kSobolMaxBit; ++k) {
                std::uint32_t m = mm[k - s] ^ (mm[k - s] << s);
                for (int i = 1; i < s; ++i)
                    if ((p >> (s - i)) & 1u) m ^= mm[k - i] << i;
                mm[k] = m;
            }
            for (int k = 0; k < kSobolMaxBit; ++k)
                dirs_[j][k] = mm[k] << (kSobolMaxBit - 1 - k);
        }
        for (std::uint32_t i = 0; i < skip; ++i) advance();
    }

    void next(double* out) {
        constexpr double scale = 1.0 / static_cast<double>(1u << kSobolMaxBit);
        for (int j = 0; j < dim_; ++j) out[j] = state_[j] * scale;
        advance();
    }

private:
    void advance() {
        const int bit = std::countr_zero(index_ + 1);
        for (int j = 0; j < dim_; ++j) state_[j] ^= dirs_[j][bit];
        ++index_;
    }

    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> state_;
    std::vector<std::array<std::uint32_t, kSobolMaxBit>> dirs_;
};

inline constexpr std::array<int, 37> kPrimes = {
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137,
    139, 149, 151, 157};

inline double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0 / base, r = 0.0;
    while (i) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f /= base;
    }
    return r;
}

}  // namespace detail

// Seeds larger than the QMC skip range wrap; low-discrepancy structure is
// preserved for any skip.
inline constexpr std::uint32_t kQmcSkipModulus = 65536;

// Raw points on the unit hypercube, exposed so the sequence values can be
// checked against published references independently of grid snapping.
inline std::vector<std::vector<double>> unit_points(SamplerKind kind, int n, int dim,
                                                    std::uint64_t seed) {
    if (n < 1) throw InvalidConfig("sample count must be >= 1");
    if (dim < 1) throw InvalidConfig("dimension must be >= 1");
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim, 0.0));
    const auto skip = static_cast<std::uint32_t>(seed % kQmcSkipModulus);
    switch (kind) {
        case SamplerKind::Sobol: {
            detail::SobolSequence seq(dim, skip);
            for (int i = 0; i < n; ++i) seq.next(pts[i].data());
            break;
        }
        case SamplerKind::Halton: {
            if (dim > static_cast<int>(detail::kPrimes.size()))
                throw InvalidConfig("halton supports up to 37 dimensions");
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < dim; ++j)
                    pts[i][j] = detail::radical_inverse(skip + 1 + i, detail::kPrimes[j]);
            break;
        }
        case SamplerKind::Hammersly: {
            if (dim - 1 > static_cast<int>(detail::kPrimes.size()))
                throw InvalidConfig("hammersly supports up to 38 dimensions");
            for (int i = 0; i < n; ++i) {
                pts[i][0] = static_cast<double>(i) / static_cast<double>(n);
                for (int j = 1; j < dim; ++j)
                    pts[i][j] = detail::radical_inverse(skip + i, detail::kPrimes[j - 1]);
            }
            break;
        }
        case SamplerKind::LHS: {
            Rng rng(derive_seed(seed, 0x1b5));
            for (int j = 0; j < dim; ++j) {
                const auto perm = rng.permutation(n);
                for (int i = 0; i < n; ++i)
                    pts[i][j] = (static_cast<double>(perm[i]) + rng.uniform()) /
                                static_cast<double>(n);
            }
            break;
        }
        case SamplerKind::Random: {
            Rng rng(derive_seed(seed, 0x7a2));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < dim; ++j) pts[i][j] = rng.uniform();
            break;
        }
    }
    return pts;
}

// Snap a unit coordinate to one of K equal-width bins.
inline int snap_index(double u, int k) {
    int i = static_cast<int>(u * k);
    if (i < 0) i = 0;
    if (i >= k) i = k - 1;
    return i;
}

// The mha slot snaps hierarchically: the head-count block first (4 equal
// bins), then the rank within that block. Flat index snapping would make
// 12-head operations dominate (18564 of the 21805 indices), collapsing the
// wide/narrow model-type balance the samplers are expected to exhibit.
inline int snap_mha_index(double u) {
    static const std::array<int, 4> bases = {0, 28, 238, 3241};
    const int b = snap_index(u, 4);
    const double within = u * 4.0 - b;
    const auto block =
        static_cast<int>(multiset_count(kHeadCounts[b], kNumHeadTypes));
    return bases[b] + 1 + snap_index(within, block);
}

inline ArchEmbedding embedding_from_unit(const std::vector<double>& u) {
    if (u.size() != kEmbeddingDim)
        throw MalformedEmbedding("unit point must have 37 coordinates");
    ArchEmbedding e{};
    const int l = kLayerChoices[snap_index(u[0], 6)];
    e[0] = l;
    for (int j = 0; j < l; ++j) {
        e[1 + 3 * j] = kHiddenChoices[snap_index(u[1 + 3 * j], 4)];
        e[2 + 3 * j] = 1 + snap_index(u[2 + 3 * j], kFfOpCount);
        e[3 + 3 * j] = snap_mha_index(u[3 + 3 * j]);
    }
    return e;
}

inline std::vector<ArchEmbedding> sample_embeddings(SamplerKind kind, int n,
                                                    std::uint64_t seed) {
    const auto pts = unit_points(kind, n, kEmbeddingDim, seed);
    std::vector<ArchEmbedding> out;
    out.reserve(n);
    for (const auto& u : pts) out.push_back(embedding_from_unit(u));
    return out;
}

inline std::vector<ArchitectureConfig> sample(SamplerKind kind, int n, std::uint64_t seed) {
    std::vector<ArchitectureConfig> out;
    out.reserve(n);
    for (const auto& e : sample_embeddings(kind, n, seed)) out.push_back(decode(e));
    return out;
}

// ---------------------------------------------------------------------------
// Diversity diagnostics.

enum class ArchCategory : int { DeepWide = 0, DeepNarrow = 1, ShallowWide = 2, ShallowNarrow = 3 };

inline const char* category_name(ArchCategory c) {
    static const char* names[] = {"deep-wide", "deep-narrow", "shallow-wide",
                                  "shallow-narrow"};
    return names[static_cast<int>(c)];
}

// Deep iff at least 8 encoder layers; wide iff the median per-layer head
// count is at least 8.
inline ArchCategory categorize(const ArchitectureConfig& arch) {
    const bool deep = static_cast<int>(arch.layers.size()) >= 8;
    std::vector<double> counts;
    counts.reserve(arch.layers.size());
    for (const auto& layer : arch.layers)
        counts.push_back(static_cast<double>(layer.heads.size()));
    const bool wide = median_of(counts) >= 8.0;
    if (deep) return wide ? ArchCategory::DeepWide : ArchCategory::DeepNarrow;
    return wide ? ArchCategory::ShallowWide : ArchCategory::ShallowNarrow;
}

// Per-slot scale used to place all 37 embedding coordinates on [0,1]; zero
// (absent layer) anchors the bottom of every slot's range.
inline std::array<double, kEmbeddingDim> embedding_scales() {
    std::array<double, kEmbeddingDim> s{};
    s[0] = 12.0;
    for (int j = 0; j < kMaxLayers; ++j) {
        s[1 + 3 * j] = 768.0;
        s[2 + 3 * j] = static_cast<double>(kFfOpCount);
        s[3 + 3 * j] = static_cast<double>(kMhaOpCount);
    }
    return s;
}

inline std::vector<double> normalized_embedding(const ArchEmbedding& e) {
    static const auto scales = embedding_scales();
    std::vector<double> v(kEmbeddingDim);
    for (int i = 0; i < kEmbeddingDim; ++i) v[i] = e[i] / scales[i];
    return v;
}

struct DiversityReport {
    std::vector<double> pairwise_distances;  // i<j order, n(n-1)/2 entries
    std::array<double, 3> quartiles{};       // q1, q2, q3 (linear interpolation)
    std::array<int, 4> category_counts{};    // indexed by ArchCategory
};

inline DiversityReport diversity_report(const std::vector<ArchitectureConfig>& configs) {
    if (configs.empty()) throw InvalidConfig("diversity report needs >= 1 config");
    DiversityReport rep;
    std::vector<std::vector<double>> pts;
    pts.reserve(configs.size());
    for (const auto& c : configs) {
        rep.category_counts[static_cast<int>(categorize(c))]++;
        pts.push_back(normalized_embedding(encode(c)));
    }
    const std::size_t n = pts.size();
    rep.pairwise_distances.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (int k = 0; k < kEmbeddingDim; ++k) {
                const double d = pts[i][k] - pts[j][k];
                d2 += d * d;
            }
            rep.pairwise_distances.push_back(std::sqrt(d2));
        }
    }
    auto sorted = rep.pairwise_distances;
    std::sort(sorted.begin(), sorted.end());
    rep.quartiles = {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.50),
                     quantile_sorted(sorted, 0.75)};
    return rep;
}

}  // namespace edgetran
