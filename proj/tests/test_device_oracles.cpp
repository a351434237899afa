#include <catch2/catch_amalgamated.hpp>

#include <edgetran/design_space.hpp>
#include <edgetran/device_oracle.hpp>
#include <edgetran/sampling.hpp>
#include <edgetran/serial.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

using namespace edgetran;

namespace {

double ratio_at(std::uint64_t seed, double MeasureVector::* field, DeviceId num,
                DeviceId den) {
    const auto arch = bert_tiny();
    const auto a = evaluate(builtin_device(num), arch, seed);
    const auto b = evaluate(builtin_device(den), arch, seed);
    return a.*field / (b.*field);
}

}  // namespace

TEST_CASE("device names round-trip through the parser", "[device]") {
    for (DeviceId id : kAllDevices) CHECK(parse_device(device_name(id)) == id);
    CHECK(parse_device("m1-gpu") == DeviceId::M1_GPU);
    CHECK(parse_device("nano-cpu") == DeviceId::Nano_CPU);
    CHECK_THROWS_AS(parse_device("TPUv4"), InvalidConfig);
}

TEST_CASE("device encoding is one-hot with validation", "[device]") {
    for (DeviceId id : kAllDevices) {
        const auto e = device_encoding(id);
        CHECK(std::count(e.begin(), e.end(), 1.0) == 1);
        CHECK(device_from_encoding(e) == id);
    }
    DeviceEncoding two{};
    two[0] = two[3] = 1.0;
    CHECK_THROWS_AS(device_from_encoding(two), InvalidConfig);
    DeviceEncoding frac{};
    frac[2] = 0.5;
    CHECK_THROWS_AS(device_from_encoding(frac), InvalidConfig);
    CHECK_THROWS_AS(device_from_encoding(DeviceEncoding{}), InvalidConfig);
}

TEST_CASE("calibration reproduces the published measurement ratios", "[device]") {
    // BERT-Tiny on the builtin fleet; the run-to-run noise is +/-2% per
    // measure, so each ratio stays within ~4% of its calibrated value.
    for (std::uint64_t seed : {0u, 1u, 2u, 3u, 4u}) {
        CHECK(ratio_at(seed, &MeasureVector::energy_j_per_seq, DeviceId::A100,
                       DeviceId::M1_GPU) == Catch::Approx(17.6).epsilon(0.05));
        CHECK(ratio_at(seed, &MeasureVector::peak_power_w, DeviceId::A100,
                       DeviceId::M1_GPU) == Catch::Approx(6.6).epsilon(0.05));
        CHECK(ratio_at(seed, &MeasureVector::latency_s_per_seq, DeviceId::NCS_NPU,
                       DeviceId::A100) == Catch::Approx(22.3).epsilon(0.05));
    }
}

TEST_CASE("BERT-Tiny absolute measures sit at the calibrated scale", "[device]") {
    const auto arch = bert_tiny();
    const auto a100 = evaluate(builtin_device(DeviceId::A100), arch, 0);
    CHECK(a100.latency_s_per_seq == Catch::Approx(5.69e-3).epsilon(0.03));
    CHECK(a100.peak_power_w == Catch::Approx(98.04).epsilon(0.03));
    CHECK(a100.accuracy_proxy == 0.0);

    const auto ncs = evaluate(builtin_device(DeviceId::NCS_NPU), arch, 0);
    CHECK(ncs.peak_power_w > 2.0 * 0.97);
    CHECK(ncs.peak_power_w < 2.2 * 1.03);
}

TEST_CASE("latency grows with depth and feed-forward width", "[device]") {
    const auto device = builtin_device(DeviceId::RPi_CPU);
    auto shallow = bert_tiny();
    auto deep = shallow;
    deep.layers.insert(deep.layers.end(), shallow.layers.begin(), shallow.layers.end());
    // Doubling the depth roughly doubles latency; +/-2% noise cannot mask it.
    CHECK(evaluate(device, deep, 0).latency_s_per_seq >
          1.5 * evaluate(device, shallow, 0).latency_s_per_seq);

    auto wide = shallow;
    for (auto& layer : wide.layers) layer.ff_stack = {3072};
    const auto thin_m = evaluate(device, shallow, 0);
    const auto wide_m = evaluate(device, wide, 0);
    CHECK(wide_m.latency_s_per_seq > thin_m.latency_s_per_seq);
    CHECK(wide_m.energy_j_per_seq > thin_m.energy_j_per_seq);
    CHECK(wide_m.peak_power_w > thin_m.peak_power_w);
}

TEST_CASE("evaluation is deterministic at a fixed task seed", "[device]") {
    const auto device = builtin_device(DeviceId::M1_CPU);
    const auto arch = bert_tiny();
    const auto a = evaluate(device, arch, 42);
    const auto b = evaluate(device, arch, 42);
    CHECK(a.latency_s_per_seq == b.latency_s_per_seq);
    CHECK(a.energy_j_per_seq == b.energy_j_per_seq);
    CHECK(a.peak_power_w == b.peak_power_w);
    const auto c = evaluate(device, arch, 43);
    CHECK(c.latency_s_per_seq != a.latency_s_per_seq);
}

TEST_CASE("run-to-run noise stays within the +/-2% band", "[device]") {
    const auto device = builtin_device(DeviceId::Nano_GPU);
    const auto arch = bert_tiny();
    double lo = 1e300, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const double lat = evaluate(device, arch, seed).latency_s_per_seq;
        lo = std::min(lo, lat);
        hi = std::max(hi, lat);
    }
    // Worst case: (1.02 / 0.98) = 1.0408 between the extremes.
    CHECK(hi / lo > 1.0);
    CHECK(hi / lo < 1.0409);
}

TEST_CASE("aggregate takes the componentwise geometric mean", "[device]") {
    MeasureVector a{1.0, 9.0, 2.0, 0.5};
    MeasureVector b{4.0, 1.0, 2.0, 2.0};
    const auto g = aggregate({a, b});
    CHECK(g.latency_s_per_seq == Catch::Approx(2.0));
    CHECK(g.energy_j_per_seq == Catch::Approx(3.0));
    CHECK(g.peak_power_w == Catch::Approx(2.0));
    CHECK(g.accuracy_proxy == Catch::Approx(1.0));

    const auto swapped = aggregate({b, a});
    CHECK(swapped.latency_s_per_seq == Catch::Approx(g.latency_s_per_seq));

    // A zero component (e.g. unset accuracy) aggregates to zero, not -inf.
    MeasureVector c{1.0, 1.0, 1.0, 0.0};
    CHECK(aggregate({a, c}).accuracy_proxy == 0.0);

    CHECK_THROWS_AS(aggregate({}), AggregateError);
}

TEST_CASE("profiles reject missing cost parameters", "[device]") {
    DeviceProfile p = builtin_device(DeviceId::A100);
    p.cost_params.erase("t_layer");
    CHECK_THROWS_AS(evaluate(p, bert_tiny(), 0), InvalidConfig);
}

TEST_CASE("embedding and config evaluations agree", "[device]") {
    const auto device = builtin_device(DeviceId::M1_GPU);
    const auto e = sample_embeddings(SamplerKind::LHS, 4, 11);
    for (const auto& emb : e) {
        const auto via_embedding = evaluate(device, emb, 5);
        const auto via_config = evaluate(device, decode(emb), 5);
        CHECK(via_embedding.latency_s_per_seq == via_config.latency_s_per_seq);
    }
}

TEST_CASE("device table round-trips through JSON", "[device][serial]") {
    const auto fleet = builtin_devices();
    const std::string path = "devices_roundtrip_test.json";
    save_devices(fleet, path);
    const auto loaded = load_devices(path);
    std::remove(path.c_str());

    REQUIRE(loaded.size() == fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        CHECK(loaded[i].id == fleet[i].id);
        CHECK(loaded[i].batch_size == fleet[i].batch_size);
        REQUIRE(loaded[i].cost_params.size() == fleet[i].cost_params.size());
        for (const auto& [key, value] : fleet[i].cost_params)
            CHECK(loaded[i].cost_params.at(key) == value);
    }
}

TEST_CASE("shipped devices.json matches the builtin table", "[device][serial]") {
    const auto shipped = load_devices(std::string(EDGETRAN_REPO_DIR) +
                                      "/configs/devices.json");
    const auto fleet = builtin_devices();
    REQUIRE(shipped.size() == fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        CHECK(shipped[i].id == fleet[i].id);
        CHECK(shipped[i].batch_size == fleet[i].batch_size);
        for (const auto& [key, value] : fleet[i].cost_params)
            CHECK(shipped[i].cost_params.at(key) == Catch::Approx(value).epsilon(1e-12));
    }
}

TEST_CASE("malformed device files raise ScanError", "[device][serial]") {
    const std::string path = "devices_malformed_test.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_devices(path), ScanError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_devices("no_such_file.json"), ScanError);
}
