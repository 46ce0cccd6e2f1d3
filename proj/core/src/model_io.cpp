#include "actrec/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actrec/errors.hpp"

namespace actrec {

namespace {

using nlohmann::ordered_json;

ordered_json label_or_null(const std::optional<ActivityLabel>& label) {
    if (!label) return nullptr;
    return std::string(label_name(*label));
}

std::optional<ActivityLabel> label_from_json(const ordered_json& j, const char* where) {
    if (j.is_null()) return std::nullopt;
    const auto label = label_from_name(j.get<std::string>());
    if (!label) throw DataError(std::string("bundle: unknown label in ") + where);
    return label;
}

ordered_json stop_to_json(const StopPoint& stop) {
    ordered_json j;
    j["user_id"] = stop.user_id;
    j["x"] = stop.x;
    j["y"] = stop.y;
    j["lon"] = stop.lon;
    j["lat"] = stop.lat;
    j["t_start"] = stop.t_start;
    j["t_end"] = stop.t_end;
    j["label"] = label_or_null(stop.label);
    return j;
}

StopPoint stop_from_json(const ordered_json& j) {
    StopPoint stop;
    stop.user_id = j.at("user_id").get<std::string>();
    stop.x = j.at("x").get<double>();
    stop.y = j.at("y").get<double>();
    stop.lon = j.at("lon").get<double>();
    stop.lat = j.at("lat").get<double>();
    stop.t_start = j.at("t_start").get<std::int64_t>();
    stop.t_end = j.at("t_end").get<std::int64_t>();
    stop.label = label_from_json(j.at("label"), "stop");
    return stop;
}

ordered_json table_to_json(const FrequencyTable& table) {
    ordered_json rows = ordered_json::array();
    for (const auto& [bin, counts] : table.rows()) {
        rows.push_back({bin, std::vector<std::int64_t>(counts.begin(), counts.end())});
    }
    return rows;
}

void table_from_json(const ordered_json& rows, FrequencyTable& table) {
    for (const ordered_json& entry : rows) {
        if (!entry.is_array() || entry.size() != 2) throw DataError("bundle: bad count row");
        const auto counts = entry.at(1).get<std::vector<std::int64_t>>();
        if (counts.size() != kNumLabels) throw DataError("bundle: bad count row width");
        FrequencyTable::CountRow row{};
        std::copy(counts.begin(), counts.end(), row.begin());
        table.set_row(entry.at(0).get<std::int64_t>(), row);
    }
}

ordered_json transitions_to_json(const TransitionMatrices& transitions) {
    ordered_json out = ordered_json::array();
    for (const DayType dt : {DayType::Weekday, DayType::Weekend}) {
        ordered_json matrix = ordered_json::array();
        for (int prev = 0; prev < kNumLabels; ++prev) {
            std::vector<std::int64_t> row(kNumLabels);
            for (int cur = 0; cur < kNumLabels; ++cur) {
                row[static_cast<std::size_t>(cur)] =
                    transitions.count(dt, label_from_index(prev), label_from_index(cur));
            }
            matrix.push_back(row);
        }
        out.push_back(matrix);
    }
    return out;
}

TransitionMatrices transitions_from_json(const ordered_json& j) {
    TransitionMatrices transitions;
    if (!j.is_array() || j.size() != 2) throw DataError("bundle: bad transition matrices");
    int dt_index = 0;
    for (const DayType dt : {DayType::Weekday, DayType::Weekend}) {
        const ordered_json& matrix = j.at(dt_index++);
        if (!matrix.is_array() || matrix.size() != kNumLabels) {
            throw DataError("bundle: bad transition matrix shape");
        }
        for (int prev = 0; prev < kNumLabels; ++prev) {
            const auto row = matrix.at(prev).get<std::vector<std::int64_t>>();
            if (row.size() != kNumLabels) throw DataError("bundle: bad transition row width");
            for (int cur = 0; cur < kNumLabels; ++cur) {
                transitions.set_count(dt, label_from_index(prev), label_from_index(cur),
                                      row[static_cast<std::size_t>(cur)]);
            }
        }
    }
    return transitions;
}

ordered_json forest_to_json(const Forest& forest) {
    ordered_json trees = ordered_json::array();
    for (const DecisionTree& tree : forest.trees()) {
        ordered_json nodes = ordered_json::array();
        for (const TreeNode& n : tree.nodes()) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_label});
        }
        trees.push_back(nodes);
    }
    return trees;
}

Forest forest_from_json(const ordered_json& j) {
    std::vector<DecisionTree> trees;
    for (const ordered_json& tree_json : j) {
        std::vector<TreeNode> nodes;
        for (const ordered_json& n : tree_json) {
            if (!n.is_array() || n.size() != 5) throw DataError("bundle: bad tree node");
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.leaf_label = n.at(4).get<int>();
            nodes.push_back(node);
        }
        DecisionTree tree;
        tree.set_nodes(std::move(nodes));
        trees.push_back(std::move(tree));
    }
    return Forest::from_trees(std::move(trees));
}

ordered_json model_config_to_json(const ModelConfig& m) {
    ordered_json j;
    j["quantizer"] = {{"kind", std::string(quantizer_kind_name(m.quantizer.kind))},
                      {"cell_width_m", m.quantizer.cell_width},
                      {"cell_height_m", m.quantizer.cell_height},
                      {"voronoi_k", m.quantizer.voronoi_k},
                      {"radius_m", m.quantizer.radius}};
    j["features"] = {{"slot_width_minutes", m.features.slot_width_minutes},
                     {"study_diameter_km", m.features.study_diameter_km}};
    j["forest"] = {{"method", std::string(ensemble_method_name(m.forest.method))},
                   {"n_trees", m.forest.n_trees},
                   {"min_leaf", m.forest.min_leaf},
                   {"subspace_features", m.forest.subspace_features},
                   {"per_node_sampling", m.forest.per_node_sampling}};
    j["strategy"] = std::string(fusion_strategy_name(m.strategy));
    j["wmv_weights"] = std::vector<double>(m.wmv_weights.begin(), m.wmv_weights.end());
    j["age_breaks"] = m.age_breaks;
    j["seed"] = m.seed;
    return j;
}

ModelConfig model_config_from_json(const ordered_json& j) {
    ModelConfig m;
    const ordered_json& q = j.at("quantizer");
    const auto kind = quantizer_kind_from_name(q.at("kind").get<std::string>());
    if (!kind) throw DataError("bundle: unknown quantizer kind");
    m.quantizer.kind = *kind;
    m.quantizer.cell_width = q.at("cell_width_m").get<double>();
    m.quantizer.cell_height = q.at("cell_height_m").get<double>();
    m.quantizer.voronoi_k = q.at("voronoi_k").get<int>();
    m.quantizer.radius = q.at("radius_m").get<double>();
    m.features.slot_width_minutes = j.at("features").at("slot_width_minutes").get<int>();
    m.features.study_diameter_km = j.at("features").at("study_diameter_km").get<double>();
    const ordered_json& f = j.at("forest");
    const auto method = ensemble_method_from_name(f.at("method").get<std::string>());
    if (!method) throw DataError("bundle: unknown ensemble method");
    m.forest.method = *method;
    m.forest.n_trees = f.at("n_trees").get<int>();
    m.forest.min_leaf = f.at("min_leaf").get<int>();
    m.forest.subspace_features = f.at("subspace_features").get<int>();
    m.forest.per_node_sampling = f.at("per_node_sampling").get<bool>();
    const auto strategy = fusion_strategy_from_name(j.at("strategy").get<std::string>());
    if (!strategy) throw DataError("bundle: unknown fusion strategy");
    m.strategy = *strategy;
    const auto weights = j.at("wmv_weights").get<std::vector<double>>();
    if (weights.size() != m.wmv_weights.size()) throw DataError("bundle: bad wmv_weights");
    std::copy(weights.begin(), weights.end(), m.wmv_weights.begin());
    m.age_breaks = j.at("age_breaks").get<std::vector<int>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
}

ordered_json quantizer_to_json(const Quantizer& quantizer) {
    ordered_json j;
    j["kind"] = std::string(quantizer_kind_name(quantizer.kind()));
    switch (quantizer.kind()) {
        case QuantizerKind::Grid: {
            const GridQuantizer& g = quantizer.grid_params();
            j["grid"] = {{"origin_x", g.origin_x},
                         {"origin_y", g.origin_y},
                         {"cell_width", g.cell_width},
                         {"cell_height", g.cell_height}};
            break;
        }
        case QuantizerKind::Voronoi: {
            ordered_json centroids = ordered_json::array();
            for (const PlanePoint& c : quantizer.voronoi_params().centroids) {
                centroids.push_back({c.x, c.y});
            }
            j["centroids"] = centroids;
            break;
        }
        case QuantizerKind::Circular:
            j["radius"] = quantizer.circular_params().radius;
            break;
    }
    return j;
}

Quantizer quantizer_from_json(const ordered_json& j) {
    const auto kind = quantizer_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw DataError("bundle: unknown quantizer kind");
    switch (*kind) {
        case QuantizerKind::Grid: {
            const ordered_json& g = j.at("grid");
            GridQuantizer grid;
            grid.origin_x = g.at("origin_x").get<double>();
            grid.origin_y = g.at("origin_y").get<double>();
            grid.cell_width = g.at("cell_width").get<double>();
            grid.cell_height = g.at("cell_height").get<double>();
            return Quantizer::grid(grid);
        }
        case QuantizerKind::Voronoi: {
            VoronoiQuantizer voronoi;
            for (const ordered_json& c : j.at("centroids")) {
                if (!c.is_array() || c.size() != 2) throw DataError("bundle: bad centroid");
                voronoi.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            }
            if (voronoi.centroids.empty()) throw DataError("bundle: empty centroid list");
            return Quantizer::voronoi(voronoi);
        }
        case QuantizerKind::Circular: {
            CircularQuantizer circular;
            circular.radius = j.at("radius").get<double>();
            return Quantizer::circular(circular);
        }
    }
    throw InternalError("unreachable quantizer kind");
}

ordered_json profile_to_json(const UserProfile& p) {
    ordered_json j;
    j["user_id"] = p.user_id;
    j["gender"] = std::string(gender_name(p.gender));
    j["age"] = p.age;
    j["home_x"] = p.home_x;
    j["home_y"] = p.home_y;
    j["home_lon"] = p.home_lon;
    j["home_lat"] = p.home_lat;
    if (p.has_work()) {
        j["work"] = {{"x", *p.work_x},
                     {"y", *p.work_y},
                     {"lon", p.work_lon ? *p.work_lon : 0.0},
                     {"lat", p.work_lat ? *p.work_lat : 0.0}};
    } else {
        j["work"] = nullptr;
    }
    return j;
}

UserProfile profile_from_json(const ordered_json& j) {
    UserProfile p;
    p.user_id = j.at("user_id").get<std::string>();
    const auto gender = gender_from_name(j.at("gender").get<std::string>());
    if (!gender) throw DataError("bundle: unknown gender");
    p.gender = *gender;
    p.age = j.at("age").get<int>();
    p.home_x = j.at("home_x").get<double>();
    p.home_y = j.at("home_y").get<double>();
    p.home_lon = j.at("home_lon").get<double>();
    p.home_lat = j.at("home_lat").get<double>();
    if (!j.at("work").is_null()) {
        const ordered_json& w = j.at("work");
        p.work_x = w.at("x").get<double>();
        p.work_y = w.at("y").get<double>();
        p.work_lon = w.at("lon").get<double>();
        p.work_lat = w.at("lat").get<double>();
    }
    return p;
}

PopulationKind population_kind_from_name(const std::string& name) {
    for (int k = 0; k < kNumPopulationKinds; ++k) {
        if (name == population_kind_name(static_cast<PopulationKind>(k))) {
            return static_cast<PopulationKind>(k);
        }
    }
    throw DataError("bundle: unknown population kind \"" + name + "\"");
}

}  // namespace

std::string model_bundle_json(const FusionModel& model, const std::string& resolved_config_json) {
    ordered_json doc;
    doc["format_version"] = kBundleFormatVersion;
    doc["run_config"] = resolved_config_json;
    doc["model_config"] = model_config_to_json(model.config);
    doc["calendar"] = {{"start_date", model.calendar.date_of(0)},
                       {"num_days", model.calendar.num_days()}};
    doc["quantizer"] = quantizer_to_json(*model.quantizer);

    ordered_json profiles = ordered_json::array();
    for (const auto& [id, profile] : model.profiles) {
        (void)id;
        profiles.push_back(profile_to_json(profile));
    }
    doc["profiles"] = profiles;

    ordered_json pois = ordered_json::array();
    for (const PoiRecord& poi : model.pois) {
        ordered_json j;
        j["x"] = poi.x;
        j["y"] = poi.y;
        j["lon"] = poi.lon;
        j["lat"] = poi.lat;
        j["category"] = poi.raw_category;
        j["label"] = label_or_null(poi.mapped_label);
        pois.push_back(j);
    }
    doc["pois"] = pois;

    ordered_json populations = ordered_json::array();
    for (const PopulationModel& population : model.populations) {
        ordered_json j;
        j["kind"] = std::string(population_kind_name(population.kind));
        j["key"] = population.key;
        j["training_stops"] = population.training_stops;
        ordered_json points = ordered_json::array();
        for (const ActivityPoint& point : population.stats->points()) {
            points.push_back(stop_to_json(point.origin));
        }
        j["points"] = points;
        j["spatial"] = table_to_json(population.stats->spatial_table());
        j["temporal"] = table_to_json(population.stats->temporal_table());
        j["contextual"] = table_to_json(population.stats->contextual_table());
        j["transitions"] = transitions_to_json(population.stats->transitions());
        j["forest"] = forest_to_json(population.forest);
        populations.push_back(std::move(j));
    }
    doc["populations"] = populations;
    doc["score_meta"] = forest_to_json(model.score_meta);
    doc["decision_meta"] = forest_to_json(model.decision_meta);
    return doc.dump(2);
}

void save_model_bundle(const std::string& path, const FusionModel& model,
                       const std::string& resolved_config_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write bundle: " + path);
    out << model_bundle_json(model, resolved_config_json) << '\n';
    if (!out) throw DataError("short write on bundle: " + path);
}

ModelBundle parse_model_bundle(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bundle: ") + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kBundleFormatVersion) {
            throw DataError("bundle: unsupported format_version " + std::to_string(version));
        }

        ModelBundle bundle;
        bundle.resolved_config_json = doc.at("run_config").get<std::string>();
        FusionModel& model = bundle.model;
        model.config = model_config_from_json(doc.at("model_config"));
        model.calendar = StudyCalendar(doc.at("calendar").at("start_date").get<std::string>(),
                                       doc.at("calendar").at("num_days").get<int>());
        model.quantizer = std::make_shared<const Quantizer>(quantizer_from_json(doc.at("quantizer")));
        model.age_banding = AgeBanding(model.config.age_breaks);
        for (const ordered_json& j : doc.at("profiles")) {
            UserProfile profile = profile_from_json(j);
            model.profiles.emplace(profile.user_id, std::move(profile));
        }
        for (const ordered_json& j : doc.at("pois")) {
            PoiRecord poi;
            poi.x = j.at("x").get<double>();
            poi.y = j.at("y").get<double>();
            poi.lon = j.at("lon").get<double>();
            poi.lat = j.at("lat").get<double>();
            poi.raw_category = j.at("category").get<std::string>();
            poi.mapped_label = label_from_json(j.at("label"), "poi");
            model.pois.push_back(std::move(poi));
        }
        for (const ordered_json& j : doc.at("populations")) {
            PopulationModel population;
            population.kind = population_kind_from_name(j.at("kind").get<std::string>());
            population.key = j.at("key").get<std::string>();
            population.training_stops = j.at("training_stops").get<int>();

            std::vector<ActivityPoint> points;
            for (const ordered_json& pj : j.at("points")) {
                points.push_back(make_activity_point(stop_from_json(pj), *model.quantizer,
                                                     model.calendar,
                                                     model.config.features.slot_width_minutes));
            }
            FrequencyTable spatial(BinKind::SpatialCell);
            FrequencyTable temporal(BinKind::TimeSlotSet);
            FrequencyTable contextual(BinKind::ContextualCell);
            table_from_json(j.at("spatial"), spatial);
            table_from_json(j.at("temporal"), temporal);
            table_from_json(j.at("contextual"), contextual);
            population.stats = std::make_unique<PopulationStats>(
                std::move(points), std::move(spatial), std::move(temporal), std::move(contextual),
                transitions_from_json(j.at("transitions")), model.pois, model.quantizer,
                model.calendar, model.config.features);
            population.forest = forest_from_json(j.at("forest"));
            model.populations.push_back(std::move(population));
        }
        model.score_meta = forest_from_json(doc.at("score_meta"));
        model.decision_meta = forest_from_json(doc.at("decision_meta"));
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bundle: ") + e.what());
    }
}

ModelBundle load_model_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bundle: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model_bundle(buffer.str());
}

}  // namespace actrec
