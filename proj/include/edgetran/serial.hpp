#pragma once

// Versioned structured-text (JSON) serialization for fitted regressors.
// The tree layout mirrors the in-memory struct-of-arrays form: feature
// index, threshold, children, leaf value.

#include <fstream>
#include <string>

#include <json.hpp>

#include "common.hpp"
#include "device_oracle.hpp"
#include "regressors.hpp"

namespace edgetran {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kDeviceSchemaVersion = 1;

inline nlohmann::json tree_to_json(const Tree& tree) {
    return {{"feature", tree.feature},
            {"threshold", tree.threshold},
            {"left", tree.left},
            {"right", tree.right},
            {"value", tree.value}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    tree.feature = j.at("feature").get<std::vector<int>>();
    tree.threshold = j.at("threshold").get<std::vector<double>>();
    tree.left = j.at("left").get<std::vector<int>>();
    tree.right = j.at("right").get<std::vector<int>>();
    tree.value = j.at("value").get<std::vector<double>>();
    const auto n = tree.feature.size();
    if (tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
        tree.value.size() != n)
        throw ScanError("tree arrays have inconsistent lengths");
    return tree;
}

inline nlohmann::json model_to_json(const Regressor& model) {
    if (!model.is_fitted) throw StateError("cannot serialize an unfitted regressor");
    nlohmann::json j{{"schema_version", kModelSchemaVersion},
                     {"kind", regressor_name(model.kind)},
                     {"dim", model.dim},
                     {"report",
                      {{"train_mse", model.fit_report.train_mse},
                       {"val_mse", model.fit_report.val_mse},
                       {"n_samples", model.fit_report.n_samples}}}};
    switch (model.kind) {
        case RegressorKind::Linear:
            j["weights"] = model.weights;
            break;
        case RegressorKind::DecisionTree:
            j["tree"] = tree_to_json(model.trees[0]);
            break;
        case RegressorKind::GBDT: {
            j["base"] = model.base;
            j["shrinkage"] = model.shrinkage;
            j["sigma_scale"] = model.sigma_scale;
            j["stage_train_mse"] = model.stage_train_mse;
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
            j["trees"] = std::move(trees);
            break;
        }
    }
    return j;
}

inline Regressor model_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != kModelSchemaVersion)
        throw ScanError("unsupported model schema version");
    Regressor model;
    model.kind = parse_regressor(j.at("kind").get<std::string>());
    model.dim = j.at("dim").get<int>();
    model.is_fitted = true;
    const auto& rep = j.at("report");
    model.fit_report.train_mse = rep.at("train_mse").get<double>();
    model.fit_report.val_mse = rep.at("val_mse").get<double>();
    model.fit_report.n_samples = rep.at("n_samples").get<int>();
    switch (model.kind) {
        case RegressorKind::Linear:
            model.weights = j.at("weights").get<std::vector<double>>();
            break;
        case RegressorKind::DecisionTree:
            model.trees.push_back(tree_from_json(j.at("tree")));
            break;
        case RegressorKind::GBDT: {
            model.base = j.at("base").get<double>();
            model.shrinkage = j.at("shrinkage").get<double>();
            model.sigma_scale = j.at("sigma_scale").get<double>();
            model.stage_train_mse = j.at("stage_train_mse").get<std::vector<double>>();
            for (const auto& t : j.at("trees")) model.trees.push_back(tree_from_json(t));
            break;
        }
    }
    return model;
}

inline nlohmann::json device_to_json(const DeviceProfile& p) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : p.cost_params) params[key] = value;
    return {{"name", device_name(p.id)},
            {"batch_size", p.batch_size},
            {"cost_params", std::move(params)}};
}

inline DeviceProfile device_from_json(const nlohmann::json& j) {
    DeviceProfile p;
    p.id = parse_device(j.at("name").get<std::string>());
    p.batch_size = j.at("batch_size").get<int>();
    for (const auto& [key, value] : j.at("cost_params").items())
        p.cost_params[key] = value.get<double>();
    return p;
}

inline void save_devices(const std::vector<DeviceProfile>& devices, const std::string& path) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : devices) list.push_back(device_to_json(d));
    nlohmann::json j{{"schema_version", kDeviceSchemaVersion}, {"devices", std::move(list)}};
    std::ofstream out(path);
    if (!out) throw ReportError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

inline std::vector<DeviceProfile> load_devices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScanError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScanError(std::string("malformed device file: ") + e.what());
    }
    if (j.at("schema_version").get<int>() != kDeviceSchemaVersion)
        throw ScanError("unsupported device schema version");
    std::vector<DeviceProfile> devices;
    for (const auto& d : j.at("devices")) devices.push_back(device_from_json(d));
    return devices;
}

inline void save_model(const Regressor& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot open '" + path + "' for writing");
    out << model_to_json(model).dump(2) << '\n';
}

inline Regressor load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScanError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScanError(std::string("malformed model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace edgetran
