#pragma once

// Synthetic device backends returning (latency, energy, peak power) for an
// architecture. The cost model is roofline-flavored: a per-layer latency
// term, a compute term FLOPs/min(parallel_width, op_width), a memory term
// proportional to parameter bytes, and a bandwidth knee that ramps in as
// the parameter working set approaches the device's capacity; energy is
// static power x latency plus per-FLOP energy; peak power saturates with
// the widest layer. Parameters were calibrated once against the published
// measurement ratios and are shipped both as the builtin table below and
// as configs/devices.json.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"
#include "design_space.hpp"
#include "rng.hpp"

namespace edgetran {

enum class DeviceId : int {
    A100 = 0,
    M1_CPU = 1,
    M1_GPU = 2,
    RPi_CPU = 3,
    NCS_NPU = 4,
    Nano_CPU = 5,
    Nano_GPU = 6,
};

inline constexpr int kNumDevices = 7;

inline constexpr std::array<DeviceId, kNumDevices> kAllDevices = {
    DeviceId::A100,    DeviceId::M1_CPU,   DeviceId::M1_GPU, DeviceId::RPi_CPU,
    DeviceId::NCS_NPU, DeviceId::Nano_CPU, DeviceId::Nano_GPU};

inline const char* device_name(DeviceId id) {
    switch (id) {
        case DeviceId::A100: return "A100";
        case DeviceId::M1_CPU: return "M1-CPU";
        case DeviceId::M1_GPU: return "M1-GPU";
        case DeviceId::RPi_CPU: return "RPi-CPU";
        case DeviceId::NCS_NPU: return "NCS-NPU";
        case DeviceId::Nano_CPU: return "Nano-CPU";
        default: return "Nano-GPU";
    }
}

inline DeviceId parse_device(const std::string& s) {
    for (DeviceId id : kAllDevices)
        if (s == device_name(id)) return id;
    // Lowercase aliases for CLI ergonomics.
    std::string low;
    for (char c : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (DeviceId id : kAllDevices) {
        std::string name = device_name(id);
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (low == name) return id;
    }
    throw InvalidConfig("unknown device '" + s + "'");
}

// One-hot device encoding for the co-design surrogate inputs.
using DeviceEncoding = std::array<double, kNumDevices>;

inline DeviceEncoding device_encoding(DeviceId id) {
    DeviceEncoding e{};
    e[static_cast<int>(id)] = 1.0;
    return e;
}

inline DeviceId device_from_encoding(const DeviceEncoding& e) {
    int hot = -1;
    for (int i = 0; i < kNumDevices; ++i) {
        if (e[i] == 0.0) continue;
        if (e[i] != 1.0 || hot >= 0)
            throw InvalidConfig("device encoding must be one-hot");
        hot = i;
    }
    if (hot < 0) throw InvalidConfig("device encoding must have one nonzero entry");
    return static_cast<DeviceId>(hot);
}

struct MeasureVector {
    double latency_s_per_seq = 0.0;
    double energy_j_per_seq = 0.0;
    double peak_power_w = 0.0;
    double accuracy_proxy = 0.0;  // always 0 from devices; set by the accuracy oracle
};

struct DeviceProfile {
    DeviceId id = DeviceId::A100;
    int batch_size = 1;
    std::map<std::string, double> cost_params;

    double param(const std::string& name) const {
        const auto it = cost_params.find(name);
        if (it == cost_params.end())
            throw InvalidConfig(std::string(device_name(id)) + ": missing cost param '" +
                                name + "'");
        return it->second;
    }
};

// ---------------------------------------------------------------------------
// Cost kernel: per-operation (flops, width) pairs and parameter bytes.

inline constexpr int kSeqLen = 128;

struct ArchTerms {
    int layers = 0;
    double amdahl = 0.0;     // sum of flops / min(parallel_width, op_width)
    double flops = 0.0;      // total flops
    double bytes = 0.0;      // total parameter bytes
    double width_max = 0.0;  // widest op (hidden or ff width)
};

inline ArchTerms arch_terms(const ArchitectureConfig& arch, double w_par) {
    constexpr double S = kSeqLen;
    ArchTerms t;
    t.layers = static_cast<int>(arch.layers.size());
    auto add_op = [&](double f, double w) {
        t.amdahl += f / std::min(w_par, std::max(w, 1.0));
        t.flops += f;
    };
    for (const auto& layer : arch.layers) {
        const double h = layer.hidden;
        for (const auto& head : layer.heads) {
            const double d = head.dim;
            double f = 0.0, w_bytes = 0.0;
            switch (head.type) {
                case HeadType::SA_SDP:
                    f = 6 * S * h * d + 4 * S * S * d + 2 * S * h * d;
                    w_bytes = 4 * h * d;
                    break;
                case HeadType::SA_WMA:
                    f = 6 * S * h * d + 4 * S * S * d + 2 * S * d * d + 2 * S * h * d;
                    w_bytes = 4 * h * d + d * d;
                    break;
                case HeadType::LT_DFT:
                case HeadType::LT_DCT:
                    f = 2 * S * h * d + 2 * S * S * d + 2 * S * h * d;
                    w_bytes = 2 * h * d;
                    break;
                default: {  // depth-wise separable convolutions
                    const double k = dsc_kernel(head.type);
                    f = 2 * S * h * d + 2 * k * S * d + 2 * S * h * d;
                    w_bytes = 2 * h * d + k * d;
                    break;
                }
            }
            add_op(f, d);
            t.bytes += 4 * w_bytes;
        }
        double prev = h;
        for (int fw : layer.ff_stack) {
            add_op(2 * S * prev * fw, fw);
            t.bytes += 4 * prev * fw;
            prev = fw;
        }
        add_op(2 * S * prev * h, h);
        t.bytes += 4 * prev * h;

        double ff_max = 0.0;
        for (int fw : layer.ff_stack) ff_max = std::max(ff_max, static_cast<double>(fw));
        t.width_max = std::max({t.width_max, h, ff_max});
    }
    return t;
}

// Smooth bandwidth-knee activation: 0 for small working sets, 1 once the
// parameter bytes are well past the device capacity midpoint b0.
inline double knee_activation(double bytes, double b0, double sb) {
    return 1.0 / (1.0 + std::exp(-(bytes - b0) / sb));
}

// ---------------------------------------------------------------------------
// Synthetic evaluation.

namespace detail {

inline std::uint64_t arch_fingerprint(DeviceId id, const ArchitectureConfig& arch,
                                      std::uint64_t task_seed) {
    std::vector<std::int64_t> stream;
    stream.push_back(static_cast<std::int64_t>(id));
    stream.push_back(static_cast<std::int64_t>(task_seed));
    stream.push_back(static_cast<std::int64_t>(arch.layers.size()));
    for (const auto& layer : arch.layers) {
        stream.push_back(layer.hidden);
        stream.push_back(static_cast<std::int64_t>(layer.ff_stack.size()));
        for (int w : layer.ff_stack) stream.push_back(w);
        stream.push_back(static_cast<std::int64_t>(layer.heads.size()));
        for (const auto& head : layer.heads) {
            stream.push_back(static_cast<std::int64_t>(head.type));
            stream.push_back(head.dim);
        }
    }
    return fnv1a64(stream.data(), stream.size() * sizeof(std::int64_t));
}

}  // namespace detail

// Deterministic at fixed (device, arch, task_seed); ±2% multiplicative noise
// models run-to-run variation.
inline MeasureVector evaluate(const DeviceProfile& device, const ArchitectureConfig& arch,
                              std::uint64_t task_seed = 0) {
    validate(arch, /*grid=*/false);
    const auto t = arch_terms(arch, device.param("w_par"));

    const double lat =
        device.param("t_fixed") / device.batch_size +
        device.param("t_layer") * t.layers + device.param("c_flop") * t.amdahl +
        device.param("c_mem") * t.bytes +
        device.param("knee_c") *
            knee_activation(t.bytes, device.param("knee_b0"), device.param("knee_sb"));
    const double en = device.param("p_stat") * lat + device.param("e_flop") * t.flops;
    const double pk = device.param("p_stat") +
                      device.param("p_dyn") *
                          (1.0 - std::exp(-t.width_max / device.param("w_sat")));

    Rng rng(detail::arch_fingerprint(device.id, arch, task_seed));
    MeasureVector m;
    m.latency_s_per_seq = lat * (1.0 + 0.04 * (rng.uniform() - 0.5));
    m.energy_j_per_seq = en * (1.0 + 0.04 * (rng.uniform() - 0.5));
    m.peak_power_w = pk * (1.0 + 0.04 * (rng.uniform() - 0.5));
    m.accuracy_proxy = 0.0;
    return m;
}

inline MeasureVector evaluate(const DeviceProfile& device, const ArchEmbedding& e,
                              std::uint64_t task_seed = 0) {
    return evaluate(device, decode(e), task_seed);
}

// Componentwise geometric mean across task measures.
inline MeasureVector aggregate(const std::vector<MeasureVector>& measures) {
    if (measures.empty()) throw AggregateError("cannot aggregate an empty measure list");
    const double n = static_cast<double>(measures.size());
    auto geo = [&](double MeasureVector::* field) {
        double log_sum = 0.0;
        for (const auto& m : measures) {
            const double v = m.*field;
            if (v <= 0.0) return 0.0;
            log_sum += std::log(v);
        }
        return std::exp(log_sum / n);
    };
    MeasureVector out;
    out.latency_s_per_seq = geo(&MeasureVector::latency_s_per_seq);
    out.energy_j_per_seq = geo(&MeasureVector::energy_j_per_seq);
    out.peak_power_w = geo(&MeasureVector::peak_power_w);
    out.accuracy_proxy = geo(&MeasureVector::accuracy_proxy);
    return out;
}

// ---------------------------------------------------------------------------
// Builtin calibrated profiles. Values are frozen outputs of the calibration
// solve in tools/devtune.cpp; configs/devices.json carries the same table.

namespace detail {

struct DeviceSpec {
    DeviceId id;
    int batch;
    double t_fixed, t_layer, c_flop, c_mem, knee_c, knee_b0, knee_sb;
    double p_stat, p_dyn, e_flop, w_par, w_sat;
};

inline constexpr std::array<DeviceSpec, kNumDevices> kDeviceSpecs = {{
    {DeviceId::A100, 128, 0.05, 2.486647758e-03, 2.797778386e-10, 9.139784274e-12,
     0.000000000e+00, 1.000000000e+00, 1.000000000e+00, 3.500000000e+01,
     7.701608457e+01, 5.402719519e-12, 4096, 300},
    {DeviceId::M1_CPU, 32, 0.02, 7.396365979e-02, 8.977580574e-09, 4.285912981e-10,
     2.853161172e-01, 2.228552544e+08, 3.337414575e+07, 1.200000000e+01,
     1.373192878e+01, 5.796443131e-11, 512, 300},
    {DeviceId::M1_GPU, 32, 0.02, 2.674782686e-03, 2.757269506e-10, 7.237703251e-12,
     0.000000000e+00, 1.000000000e+00, 1.000000000e+00, 1.796789209e+00,
     1.595268495e+01, 3.741970879e-13, 2048, 300},
    {DeviceId::RPi_CPU, 1, 0.02, 1.002506315e+00, 6.191922607e-08, 6.601747759e-09,
     3.662356667e+00, 2.228552544e+08, 3.337414575e+07, 3.200000000e+00,
     1.563778367e+00, 1.984104962e-10, 256, 300},
    {DeviceId::NCS_NPU, 1, 0.02, 5.340528761e-02, 3.419860452e-11, 8.691195499e-12,
     0.000000000e+00, 1.000000000e+00, 1.000000000e+00, 2.000000000e+00,
     1.156517643e-01, 1.102401232e-12, 64, 256},
    {DeviceId::Nano_CPU, 1, 0.01, 2.780735256e+00, 8.398510640e-07, 2.644108294e-08,
     1.248768088e+01, 1.874400090e+08, 2.669931660e+07, 2.500000000e+00,
     1.930288922e+00, 6.208332743e-10, 1024, 300},
    {DeviceId::Nano_GPU, 1, 0.05, 2.066299555e+01, 3.649085024e-08, 3.223173168e-09,
     0.000000000e+00, 1.000000000e+00, 1.000000000e+00, 2.000000000e+00,
     2.614441957e+00, 1.054353609e-09, 128, 300},
}};

}  // namespace detail

inline DeviceProfile make_profile(const detail::DeviceSpec& s) {
    DeviceProfile p;
    p.id = s.id;
    p.batch_size = s.batch;
    p.cost_params = {{"t_fixed", s.t_fixed}, {"t_layer", s.t_layer},
                     {"c_flop", s.c_flop},   {"c_mem", s.c_mem},
                     {"knee_c", s.knee_c},   {"knee_b0", s.knee_b0},
                     {"knee_sb", s.knee_sb}, {"p_stat", s.p_stat},
                     {"p_dyn", s.p_dyn},     {"e_flop", s.e_flop},
                     {"w_par", s.w_par},     {"w_sat", s.w_sat}};
    return p;
}

inline DeviceProfile builtin_device(DeviceId id) {
    for (const auto& spec : detail::kDeviceSpecs)
        if (spec.id == id) return make_profile(spec);
    throw InvalidConfig("unknown device id");
}

inline std::vector<DeviceProfile> builtin_devices() {
    std::vector<DeviceProfile> out;
    for (DeviceId id : kAllDevices) out.push_back(builtin_device(id));
    return out;
}

}  // namespace edgetran
