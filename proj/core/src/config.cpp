#include "actrec/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actrec/errors.hpp"

namespace actrec {

namespace {

using nlohmann::ordered_json;

void require_keys(const ordered_json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (ok.count(key) == 0) {
            throw DataError(std::string("config: unknown key \"") + key + "\" in " + where);
        }
    }
}

template <typename T>
void read(const ordered_json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(std::string("config: bad value for \"") + key + "\"");
    }
}

void apply_quantizer(const ordered_json& obj, QuantizerSpec& spec) {
    require_keys(obj, "quantizer",
                 {"kind", "cell_width_m", "cell_height_m", "voronoi_k", "radius_m"});
    if (obj.contains("kind")) {
        const std::string name = obj.at("kind").get<std::string>();
        const auto kind = quantizer_kind_from_name(name);
        if (!kind) throw DataError("config: unknown quantizer kind \"" + name + "\"");
        spec.kind = *kind;
    }
    read(obj, "cell_width_m", spec.cell_width);
    read(obj, "cell_height_m", spec.cell_height);
    read(obj, "voronoi_k", spec.voronoi_k);
    read(obj, "radius_m", spec.radius);
}

void apply_forest(const ordered_json& obj, ForestConfig& forest) {
    require_keys(obj, "forest",
                 {"method", "n_trees", "min_leaf", "subspace_features", "per_node_sampling"});
    if (obj.contains("method")) {
        const std::string name = obj.at("method").get<std::string>();
        const auto method = ensemble_method_from_name(name);
        if (!method) throw DataError("config: unknown ensemble method \"" + name + "\"");
        forest.method = *method;
    }
    read(obj, "n_trees", forest.n_trees);
    read(obj, "min_leaf", forest.min_leaf);
    read(obj, "subspace_features", forest.subspace_features);
    read(obj, "per_node_sampling", forest.per_node_sampling);
}

void apply_fusion(const ordered_json& obj, ModelConfig& model) {
    require_keys(obj, "fusion", {"strategy", "wmv_weights"});
    if (obj.contains("strategy")) {
        const std::string name = obj.at("strategy").get<std::string>();
        const auto strategy = fusion_strategy_from_name(name);
        if (!strategy) throw DataError("config: unknown fusion strategy \"" + name + "\"");
        model.strategy = *strategy;
    }
    if (obj.contains("wmv_weights")) {
        const auto weights = obj.at("wmv_weights").get<std::vector<double>>();
        if (weights.size() != model.wmv_weights.size()) {
            throw DataError("config: wmv_weights needs exactly 4 entries");
        }
        std::copy(weights.begin(), weights.end(), model.wmv_weights.begin());
    }
}

void apply_cleaning(const ordered_json& obj, CleaningParams& cleaning) {
    require_keys(obj, "cleaning",
                 {"home_match_radius_m", "near_home_min_m", "max_duration_hours", "bounds"});
    read(obj, "home_match_radius_m", cleaning.home_match_radius_m);
    read(obj, "near_home_min_m", cleaning.near_home_min_m);
    read(obj, "max_duration_hours", cleaning.max_duration_hours);
    if (obj.contains("bounds")) {
        const ordered_json& b = obj.at("bounds");
        require_keys(b, "cleaning.bounds", {"min_x", "min_y", "max_x", "max_y"});
        read(b, "min_x", cleaning.study_bounds.min_x);
        read(b, "min_y", cleaning.study_bounds.min_y);
        read(b, "max_x", cleaning.study_bounds.max_x);
        read(b, "max_y", cleaning.study_bounds.max_y);
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw DataError("config: document must be a JSON object");
    require_keys(doc, "top level",
                 {"start_date", "num_days", "projection", "cleaning", "quantizer", "features",
                  "forest", "fusion", "age_breaks", "seed", "k_train_days", "warmup_days"});

    RunConfig config;
    read(doc, "start_date", config.start_date);
    read(doc, "num_days", config.num_days);
    if (doc.contains("projection")) {
        const ordered_json& p = doc.at("projection");
        require_keys(p, "projection", {"ref_lon", "ref_lat"});
        read(p, "ref_lon", config.ref_lon);
        read(p, "ref_lat", config.ref_lat);
    }
    if (doc.contains("cleaning")) apply_cleaning(doc.at("cleaning"), config.cleaning);
    if (doc.contains("quantizer")) apply_quantizer(doc.at("quantizer"), config.model.quantizer);
    if (doc.contains("features")) {
        const ordered_json& f = doc.at("features");
        require_keys(f, "features", {"slot_width_minutes", "study_diameter_km"});
        read(f, "slot_width_minutes", config.model.features.slot_width_minutes);
        read(f, "study_diameter_km", config.model.features.study_diameter_km);
    }
    if (doc.contains("forest")) apply_forest(doc.at("forest"), config.model.forest);
    if (doc.contains("fusion")) apply_fusion(doc.at("fusion"), config.model);
    read(doc, "age_breaks", config.model.age_breaks);
    read(doc, "seed", config.model.seed);
    read(doc, "k_train_days", config.k_train_days);
    read(doc, "warmup_days", config.warmup_days);

    validate_run_config(config);
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

void validate_run_config(const RunConfig& config) {
    if (!parse_date(config.start_date)) {
        throw DataError("config: start_date must be YYYY-MM-DD");
    }
    if (config.num_days < 1) throw DataError("config: num_days must be positive");
    if (config.ref_lon < -180.0 || config.ref_lon > 180.0 || config.ref_lat < -90.0 ||
        config.ref_lat > 90.0) {
        throw DataError("config: projection reference out of range");
    }
    const CleaningParams& c = config.cleaning;
    if (c.home_match_radius_m <= 0.0 || c.near_home_min_m < 0.0 || c.max_duration_hours <= 0.0) {
        throw DataError("config: cleaning thresholds must be positive");
    }
    if (c.study_bounds.min_x >= c.study_bounds.max_x ||
        c.study_bounds.min_y >= c.study_bounds.max_y) {
        throw DataError("config: study bounds are empty");
    }
    const ModelConfig& m = config.model;
    if (m.quantizer.cell_width <= 0.0 || m.quantizer.cell_height <= 0.0 ||
        m.quantizer.voronoi_k < 1 || m.quantizer.radius <= 0.0) {
        throw DataError("config: quantizer parameters must be positive");
    }
    if (m.features.slot_width_minutes < 1 || m.features.slot_width_minutes > 1440 ||
        1440 % m.features.slot_width_minutes != 0) {
        throw DataError("config: slot width must divide the 1440-minute day");
    }
    if (m.features.study_diameter_km <= 0.0) {
        throw DataError("config: study diameter must be positive");
    }
    if (m.forest.n_trees < 1) throw DataError("config: n_trees must be positive");
    if (m.forest.min_leaf < 1) throw DataError("config: min_leaf must be positive");
    if (m.forest.subspace_features < 0 || m.forest.subspace_features > kFeatureDim) {
        throw DataError("config: subspace_features out of range");
    }
    for (const double w : m.wmv_weights) {
        if (!(w > 0.0)) throw DataError("config: wmv weights must be positive");
    }
    if (m.age_breaks.empty()) throw DataError("config: age_breaks must be non-empty");
    for (std::size_t i = 1; i < m.age_breaks.size(); ++i) {
        if (m.age_breaks[i] <= m.age_breaks[i - 1]) {
            throw DataError("config: age_breaks must be strictly increasing");
        }
    }
    if (config.k_train_days < 1) throw DataError("config: k_train_days must be positive");
    if (config.warmup_days < 1) throw DataError("config: warmup_days must be positive");
}

std::string run_config_json(const RunConfig& config) {
    ordered_json doc;
    doc["start_date"] = config.start_date;
    doc["num_days"] = config.num_days;
    doc["projection"] = {{"ref_lon", config.ref_lon}, {"ref_lat", config.ref_lat}};
    doc["cleaning"] = {
        {"home_match_radius_m", config.cleaning.home_match_radius_m},
        {"near_home_min_m", config.cleaning.near_home_min_m},
        {"max_duration_hours", config.cleaning.max_duration_hours},
        {"bounds",
         {{"min_x", config.cleaning.study_bounds.min_x},
          {"min_y", config.cleaning.study_bounds.min_y},
          {"max_x", config.cleaning.study_bounds.max_x},
          {"max_y", config.cleaning.study_bounds.max_y}}},
    };
    const QuantizerSpec& q = config.model.quantizer;
    doc["quantizer"] = {{"kind", std::string(quantizer_kind_name(q.kind))},
                        {"cell_width_m", q.cell_width},
                        {"cell_height_m", q.cell_height},
                        {"voronoi_k", q.voronoi_k},
                        {"radius_m", q.radius}};
    doc["features"] = {{"slot_width_minutes", config.model.features.slot_width_minutes},
                       {"study_diameter_km", config.model.features.study_diameter_km}};
    const ForestConfig& f = config.model.forest;
    doc["forest"] = {{"method", std::string(ensemble_method_name(f.method))},
                     {"n_trees", f.n_trees},
                     {"min_leaf", f.min_leaf},
                     {"subspace_features", f.subspace_features},
                     {"per_node_sampling", f.per_node_sampling}};
    doc["fusion"] = {
        {"strategy", std::string(fusion_strategy_name(config.model.strategy))},
        {"wmv_weights", std::vector<double>(config.model.wmv_weights.begin(),
                                            config.model.wmv_weights.end())}};
    doc["age_breaks"] = config.model.age_breaks;
    doc["seed"] = config.model.seed;
    doc["k_train_days"] = config.k_train_days;
    doc["warmup_days"] = config.warmup_days;
    return doc.dump(2);
}

StudyCalendar calendar_of(const RunConfig& config) {
    return StudyCalendar(config.start_date, config.num_days);
}

Projection projection_of(const RunConfig& config) {
    return Projection(config.ref_lon, config.ref_lat);
}

}  // namespace actrec
