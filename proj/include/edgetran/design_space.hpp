#pragma once

// FlexiBERT-2.0-style heterogeneous transformer design space: per-layer head
// multisets over 7 operation types, feed-forward stacks of depth 1-3, and
// per-layer hidden sizes, with a fixed-length 37-integer embedding codec.
//
// Grid-valid configs live on the Table-I grid; grow-and-prune search may
// produce off-grid configs (free-form hidden/ff widths, ragged head dims),
// so validation has a structural level and a grid level.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "common.hpp"

namespace edgetran {

enum class HeadType : int {
    SA_SDP = 0,  // self-attention, scaled dot-product
    SA_WMA = 1,  // self-attention, weighted multiplicative attention
    LT_DFT = 2,  // linear transform, discrete Fourier
    LT_DCT = 3,  // linear transform, discrete cosine
    DSC_5 = 4,   // dynamic-span convolution, kernel 5
    DSC_9 = 5,   // kernel 9
    DSC_13 = 6,  // kernel 13
};

inline constexpr int kNumHeadTypes = 7;
inline constexpr std::array<int, 6> kLayerChoices = {2, 4, 6, 8, 10, 12};
inline constexpr std::array<int, 4> kHiddenChoices = {128, 256, 512, 768};
inline constexpr std::array<int, 6> kFfWidths = {256, 512, 1024, 2048, 3072, 4096};
inline constexpr std::array<int, 4> kHeadCounts = {2, 4, 8, 12};
inline constexpr int kMaxLayers = 12;
inline constexpr int kMaxHeads = 12;
inline constexpr int kMaxFfDepth = 3;
inline constexpr int kEmbeddingDim = 1 + 3 * kMaxLayers;  // 37

inline const char* head_type_name(HeadType t) {
    static const char* names[] = {"sa-sdp", "sa-wma", "lt-dft", "lt-dct",
                                  "dsc-5", "dsc-9", "dsc-13"};
    return names[static_cast<int>(t)];
}

inline HeadType parse_head_type(const std::string& s) {
    for (int i = 0; i < kNumHeadTypes; ++i)
        if (s == head_type_name(static_cast<HeadType>(i))) return static_cast<HeadType>(i);
    throw InvalidConfig("unknown head type '" + s + "'");
}

inline int dsc_kernel(HeadType t) {
    switch (t) {
        case HeadType::DSC_5: return 5;
        case HeadType::DSC_9: return 9;
        case HeadType::DSC_13: return 13;
        default: return 0;
    }
}

struct HeadConfig {
    HeadType type = HeadType::SA_SDP;
    int dim = 64;
    bool operator==(const HeadConfig&) const = default;
};

struct LayerConfig {
    int hidden = 128;
    std::vector<int> ff_stack;       // widths, depth 1..3
    std::vector<HeadConfig> heads;   // grid: non-decreasing types, equal-allocation dims
    bool operator==(const LayerConfig&) const = default;
};

struct ArchitectureConfig {
    std::vector<LayerConfig> layers;
    bool operator==(const ArchitectureConfig&) const = default;
};

using ArchEmbedding = std::array<int, kEmbeddingDim>;

// ---------------------------------------------------------------------------
// Small combinatorics helpers (all intermediate values fit in 64 bits).

inline std::uint64_t comb(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Number of multisets of a given size over m types.
inline std::uint64_t multiset_count(std::uint64_t size, std::uint64_t m) {
    return comb(m + size - 1, size);
}

inline std::uint64_t ff_op_count() {
    std::uint64_t n = kFfWidths.size(), total = 0, p = 1;
    for (int d = 1; d <= kMaxFfDepth; ++d) { p *= n; total += p; }
    return total;  // 6 + 36 + 216 = 258
}

inline std::uint64_t mha_op_count() {
    std::uint64_t total = 0;
    for (int c : kHeadCounts) total += multiset_count(c, kNumHeadTypes);
    return total;  // 28 + 210 + 3003 + 18564 = 21805
}

inline constexpr int kFfOpCount = 258;
inline constexpr int kMhaOpCount = 21805;

inline std::uint64_t per_layer_choices() {
    return ff_op_count() * kHiddenChoices.size() * mha_op_count();  // 22,502,760
}

// ---------------------------------------------------------------------------
// Minimal unsigned big integer (base 1e9 limbs) — only what the cardinality
// computation needs: multiply by a 32-bit factor, add, and print.

class BigUInt {
public:
    BigUInt() : limbs_{0} {}
    explicit BigUInt(std::uint64_t v) {
        do { limbs_.push_back(static_cast<std::uint32_t>(v % kBase)); v /= kBase; } while (v);
    }

    BigUInt& operator*=(std::uint32_t f) {
        std::uint64_t carry = 0;
        for (auto& limb : limbs_) {
            const std::uint64_t cur = static_cast<std::uint64_t>(limb) * f + carry;
            limb = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        while (carry) { limbs_.push_back(static_cast<std::uint32_t>(carry % kBase)); carry /= kBase; }
        return *this;
    }

    BigUInt& operator+=(const BigUInt& o) {
        if (o.limbs_.size() > limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            std::uint64_t cur = carry + limbs_[i];
            if (i < o.limbs_.size()) cur += o.limbs_[i];
            limbs_[i] = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
        return *this;
    }

    std::string to_string() const {
        std::string s = std::to_string(limbs_.back());
        char buf[10];
        for (auto it = limbs_.rbegin() + 1; it != limbs_.rend(); ++it) {
            std::snprintf(buf, sizeof buf, "%09u", *it);
            s += buf;
        }
        return s;
    }

    // Scientific notation with `sig` significant digits, round-half-up on the
    // decimal expansion (e.g. "1.69e+88").
    std::string to_scientific(int sig = 3) const {
        std::string d = to_string();
        int exp = static_cast<int>(d.size()) - 1;
        std::string digits = d.substr(0, static_cast<std::size_t>(sig) + 1);
        while (static_cast<int>(digits.size()) < sig + 1) digits += '0';
        int head = 0;
        for (int i = 0; i < sig; ++i) head = head * 10 + (digits[i] - '0');
        if (digits[sig] >= '5') ++head;
        std::string hs = std::to_string(head);
        if (static_cast<int>(hs.size()) > sig) { hs.pop_back(); ++exp; }  // 999 -> 1000 carry
        std::string out;
        out += hs[0];
        out += '.';
        out += hs.substr(1);
        char buf[16];
        std::snprintf(buf, sizeof buf, "e+%02d", exp);
        return out + buf;
    }

private:
    static constexpr std::uint32_t kBase = 1000000000u;
    std::vector<std::uint32_t> limbs_;  // little-endian base-1e9
};

// Exact design-space cardinality: sum over admissible layer counts of
// (per-layer choices)^l.
inline BigUInt space_cardinality() {
    const auto per = static_cast<std::uint32_t>(per_layer_choices());
    BigUInt total(0), power(1);
    int depth = 0;
    for (int l : kLayerChoices) {
        while (depth < l) { power *= per; ++depth; }
        total += power;
    }
    return total;
}

inline std::string space_cardinality_str() { return space_cardinality().to_scientific(3); }

// ---------------------------------------------------------------------------
// Feed-forward stack codec: 1-based index, ordered by stack depth ascending,
// then lexicographically by width indices.

inline int ff_width_index(int w) {
    for (std::size_t i = 0; i < kFfWidths.size(); ++i)
        if (kFfWidths[i] == w) return static_cast<int>(i);
    throw InvalidConfig("feed-forward width " + std::to_string(w) + " is off-grid");
}

inline int ff_op_index(const std::vector<int>& stack) {
    if (stack.empty() || stack.size() > kMaxFfDepth)
        throw InvalidConfig("ff stack depth must be 1..3");
    int base = 0, block = 6;
    for (std::size_t d = 1; d < stack.size(); ++d) { base += block; block *= 6; }
    int r = 0;
    for (int w : stack) r = r * 6 + ff_width_index(w);
    return 1 + base + r;
}

inline std::vector<int> ff_op_decode(int idx) {
    if (idx < 1 || idx > kFfOpCount) throw MalformedEmbedding("ff index out of range");
    int r = idx - 1;
    int depth = 1, block = 6;
    while (r >= block) { r -= block; block *= 6; ++depth; }
    std::vector<int> stack(depth);
    for (int d = depth - 1; d >= 0; --d) { stack[d] = kFfWidths[r % 6]; r /= 6; }
    return stack;
}

// ---------------------------------------------------------------------------
// Multi-head operation codec: 1-based index over blocks by head count
// (2, 4, 8, 12), each block ranking non-decreasing type sequences
// lexicographically.

inline int mha_op_index(const std::vector<HeadType>& heads) {
    const int n = static_cast<int>(heads.size());
    int block_base = 0;
    bool size_ok = false;
    for (int c : kHeadCounts) {
        if (c == n) { size_ok = true; break; }
        block_base += static_cast<int>(multiset_count(c, kNumHeadTypes));
    }
    if (!size_ok) throw InvalidConfig("head count must be one of 2/4/8/12");
    for (int i = 1; i < n; ++i)
        if (heads[i] < heads[i - 1]) throw InvalidConfig("head types must be non-decreasing");
    std::uint64_t rank = 0;
    int lo = 0, rem = n;
    for (int i = 0; i < n; ++i) {
        --rem;
        const int t = static_cast<int>(heads[i]);
        for (int s = lo; s < t; ++s) rank += multiset_count(rem, kNumHeadTypes - s);
        lo = t;
    }
    return 1 + block_base + static_cast<int>(rank);
}

inline std::vector<HeadType> mha_op_decode(int idx) {
    if (idx < 1 || idx > kMhaOpCount) throw MalformedEmbedding("mha index out of range");
    std::uint64_t r = static_cast<std::uint64_t>(idx - 1);
    for (int c : kHeadCounts) {
        const std::uint64_t block = multiset_count(c, kNumHeadTypes);
        if (r >= block) { r -= block; continue; }
        std::vector<HeadType> heads(c);
        int lo = 0, rem = c;
        for (int i = 0; i < c; ++i) {
            --rem;
            int t = lo;
            for (;;) {
                const std::uint64_t cnt = multiset_count(rem, kNumHeadTypes - t);
                if (r < cnt) break;
                r -= cnt;
                ++t;
            }
            heads[i] = static_cast<HeadType>(t);
            lo = t;
        }
        return heads;
    }
    throw MalformedEmbedding("mha index out of range");  // unreachable
}

// Head dimensions under equal allocation: hidden split across n heads, the
// first (hidden mod n) heads taking one extra unit.
inline std::vector<int> head_dims(int hidden, int n_heads) {
    std::vector<int> dims(n_heads, hidden / n_heads);
    for (int i = 0; i < hidden % n_heads; ++i) ++dims[i];
    return dims;
}

inline std::vector<HeadConfig> make_heads(const std::vector<HeadType>& types, int hidden) {
    const auto dims = head_dims(hidden, static_cast<int>(types.size()));
    std::vector<HeadConfig> heads(types.size());
    for (std::size_t i = 0; i < types.size(); ++i) heads[i] = {types[i], dims[i]};
    return heads;
}

inline std::vector<HeadType> head_types(const LayerConfig& layer) {
    std::vector<HeadType> types;
    types.reserve(layer.heads.size());
    for (const auto& head : layer.heads) types.push_back(head.type);
    return types;
}

// ---------------------------------------------------------------------------
// Validation. grid=false checks only the structural invariants that
// grow-and-prune outputs must keep; grid=true additionally pins every value
// to the Table-I grid and the canonical head ordering/allocation.

inline void validate(const ArchitectureConfig& arch, bool grid = true) {
    const int l = static_cast<int>(arch.layers.size());
    if (l < 1 || l > kMaxLayers)
        throw InvalidConfig("layer count must be 1..12, got " + std::to_string(l));
    if (grid && std::find(kLayerChoices.begin(), kLayerChoices.end(), l) == kLayerChoices.end())
        throw InvalidConfig("layer count must be one of 2/4/6/8/10/12, got " +
                            std::to_string(l));
    for (std::size_t j = 0; j < arch.layers.size(); ++j) {
        const auto& layer = arch.layers[j];
        const std::string where = "layer " + std::to_string(j + 1) + ": ";
        if (layer.hidden <= 0) throw InvalidConfig(where + "hidden size must be positive");
        if (layer.ff_stack.empty() || layer.ff_stack.size() > kMaxFfDepth)
            throw InvalidConfig(where + "ff stack depth must be 1..3");
        for (int w : layer.ff_stack)
            if (w <= 0) throw InvalidConfig(where + "ff width must be positive");
        const int n = static_cast<int>(layer.heads.size());
        if (n < 1 || n > kMaxHeads)
            throw InvalidConfig(where + "head count must be 1..12, got " + std::to_string(n));
        int dim_sum = 0;
        for (const auto& head : layer.heads) {
            if (head.dim <= 0) throw InvalidConfig(where + "head dim must be positive");
            dim_sum += head.dim;
        }
        if (dim_sum != layer.hidden)
            throw InvalidConfig(where + "hidden-size mismatch: sum of head dims " +
                                std::to_string(dim_sum) + " != hidden " +
                                std::to_string(layer.hidden));
        if (!grid) continue;
        if (std::find(kHiddenChoices.begin(), kHiddenChoices.end(), layer.hidden) ==
            kHiddenChoices.end())
            throw InvalidConfig(where + "hidden size " + std::to_string(layer.hidden) +
                                " is off-grid");
        ff_op_index(layer.ff_stack);
        mha_op_index(head_types(layer));  // checks count and canonical order
        const auto dims = head_dims(layer.hidden, n);
        for (int i = 0; i < n; ++i)
            if (layer.heads[i].dim != dims[i])
                throw InvalidConfig(where + "head dims must follow equal allocation");
    }
}

// ---------------------------------------------------------------------------
// Architecture <-> 37-integer embedding.

inline ArchEmbedding encode(const ArchitectureConfig& arch) {
    validate(arch, /*grid=*/true);
    ArchEmbedding e{};
    e[0] = static_cast<int>(arch.layers.size());
    for (std::size_t j = 0; j < arch.layers.size(); ++j) {
        e[1 + 3 * j] = arch.layers[j].hidden;
        e[2 + 3 * j] = ff_op_index(arch.layers[j].ff_stack);
        e[3 + 3 * j] = mha_op_index(head_types(arch.layers[j]));
    }
    return e;
}

inline ArchitectureConfig decode(const ArchEmbedding& e) {
    const int l = e[0];
    if (std::find(kLayerChoices.begin(), kLayerChoices.end(), l) == kLayerChoices.end())
        throw MalformedEmbedding("embedding[0]=" + std::to_string(l) +
                                 " is not a valid layer count");
    ArchitectureConfig arch;
    arch.layers.resize(l);
    for (int j = 0; j < kMaxLayers; ++j) {
        const int h = e[1 + 3 * j], ff = e[2 + 3 * j], mha = e[3 + 3 * j];
        if (j >= l) {
            if (h != 0 || ff != 0 || mha != 0)
                throw MalformedEmbedding("nonzero entries beyond layer count");
            continue;
        }
        if (h == 0 && ff == 0 && mha == 0)
            throw MalformedEmbedding("zero triple before layer count");
        if (std::find(kHiddenChoices.begin(), kHiddenChoices.end(), h) == kHiddenChoices.end())
            throw MalformedEmbedding("invalid hidden size in embedding");
        arch.layers[j].hidden = h;
        arch.layers[j].ff_stack = ff_op_decode(ff);
        arch.layers[j].heads = make_heads(mha_op_decode(mha), h);
    }
    return arch;
}

inline bool is_valid_embedding(const ArchEmbedding& e) {
    try {
        decode(e);
        return true;
    } catch (const EdgeTranError&) {
        return false;
    }
}

// The BERT-Tiny-shaped calibration config: 2 layers, hidden 128, two SDP
// self-attention heads per layer, single 512-wide feed-forward layer.
inline ArchitectureConfig bert_tiny() {
    ArchitectureConfig arch;
    arch.layers.resize(2);
    for (auto& layer : arch.layers) {
        layer.hidden = 128;
        layer.ff_stack = {512};
        layer.heads = make_heads({HeadType::SA_SDP, HeadType::SA_SDP}, 128);
    }
    return arch;
}

}  // namespace edgetran
