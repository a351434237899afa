#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgetran {

struct EdgeTranError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct MalformedEmbedding : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct FitError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct StateError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct NormalizeError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct AggregateError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct BudgetExhausted : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct DomainError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct TrainError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct QueryExhausted : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct BuildError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct ScanError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct ReportError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct MeasureError : EdgeTranError { using EdgeTranError::EdgeTranError; };
struct DuplicateError : EdgeTranError { using EdgeTranError::EdgeTranError; };

// FNV-1a, used for content digests in run manifests and store keys.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Quantile with linear interpolation between order statistics (the numpy
// default). `sorted_values` must be ascending; empty input yields 0.
inline double quantile_sorted(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty()) return 0.0;
    if (sorted_values.size() == 1) return sorted_values.front();
    p = std::clamp(p, 0.0, 1.0);
    const double pos = p * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted_values.size()) return sorted_values.back();
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace edgetran
