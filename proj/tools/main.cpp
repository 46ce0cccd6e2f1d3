#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "actrec/config.hpp"
#include "actrec/errors.hpp"
#include "actrec/eval.hpp"
#include "actrec/ingest.hpp"
#include "actrec/model_io.hpp"
#include "actrec/parallel.hpp"
#include "actrec/synth.hpp"

namespace {

using namespace actrec;
using nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Every config key as an optional CLI override; only values actually given
// on the command line replace the config-file (or default) values.
struct ModelFlags {
    std::string config_path;
    std::optional<std::string> start_date;
    std::optional<int> num_days;
    std::optional<double> ref_lon, ref_lat;
    std::optional<double> home_match_radius, near_home_min, max_duration_hours;
    std::vector<double> bounds;  // min_x,min_y,max_x,max_y
    std::optional<std::string> quantizer;
    std::optional<double> cell_width, cell_height, radius;
    std::optional<int> voronoi_k;
    std::optional<int> slot_minutes;
    std::optional<double> study_diameter_km;
    std::optional<std::string> method;
    std::optional<int> n_trees, min_leaf, subspace_features;
    bool per_node = false;
    bool no_per_node = false;
    std::optional<std::string> strategy;
    std::vector<double> wmv_weights;
    std::vector<int> age_breaks;
    std::optional<std::uint64_t> seed;
    std::optional<int> k, warmup;
    int jobs = 1;
};

void register_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags below override it");
    cmd->add_option("--start-date", f.start_date, "study start date (YYYY-MM-DD)");
    cmd->add_option("--num-days", f.num_days, "study length in days");
    cmd->add_option("--ref-lon", f.ref_lon, "projection reference longitude");
    cmd->add_option("--ref-lat", f.ref_lat, "projection reference latitude");
    cmd->add_option("--home-match-radius", f.home_match_radius,
                    "cleaning: home stop match radius (m)");
    cmd->add_option("--near-home-min", f.near_home_min,
                    "cleaning: min distance of non-home activities from home (m)");
    cmd->add_option("--max-duration-hours", f.max_duration_hours,
                    "cleaning: max stop duration (h)");
    cmd->add_option("--bounds", f.bounds, "cleaning: study bounds min_x,min_y,max_x,max_y (m)")
        ->delimiter(',');
    cmd->add_option("--quantizer", f.quantizer, "spatial quantizer: grid, voronoi or circular");
    cmd->add_option("--cell-width", f.cell_width, "grid cell width (m)");
    cmd->add_option("--cell-height", f.cell_height, "grid cell height (m)");
    cmd->add_option("--voronoi-k", f.voronoi_k, "number of Voronoi centroids");
    cmd->add_option("--radius", f.radius, "circular neighbourhood radius (m)");
    cmd->add_option("--slot-minutes", f.slot_minutes, "time slot width (min)");
    cmd->add_option("--study-diameter-km", f.study_diameter_km,
                    "work-distance sentinel for users without a work place (km)");
    cmd->add_option("--method", f.method, "ensemble method: bagging or random_subspace");
    cmd->add_option("--n-trees", f.n_trees, "trees per ensemble");
    cmd->add_option("--min-leaf", f.min_leaf, "minimum samples per leaf");
    cmd->add_option("--subspace-features", f.subspace_features,
                    "random-subspace size (0 = sqrt of feature count)");
    cmd->add_flag("--per-node-sampling", f.per_node, "resample the subspace at every node");
    cmd->add_flag("--no-per-node-sampling", f.no_per_node, "fixed per-tree subspace");
    cmd->add_option("--strategy", f.strategy, "fusion: wmv, score_stack or decision_stack");
    cmd->add_option("--wmv-weights", f.wmv_weights, "tier weights cross,gender,age,user")
        ->delimiter(',');
    cmd->add_option("--age-breaks", f.age_breaks, "age band breakpoints, e.g. 25,41,61")
        ->delimiter(',');
    cmd->add_option("--seed", f.seed, "master random seed");
    cmd->add_option("--k", f.k, "training days per user");
    cmd->add_option("--warmup", f.warmup, "streaming evaluation warm-up days");
    cmd->add_option("--jobs", f.jobs, "worker threads for training and grid evaluation")
        ->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const ModelFlags& f) {
    RunConfig cfg = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
    if (f.start_date) cfg.start_date = *f.start_date;
    if (f.num_days) cfg.num_days = *f.num_days;
    if (f.ref_lon) cfg.ref_lon = *f.ref_lon;
    if (f.ref_lat) cfg.ref_lat = *f.ref_lat;
    if (f.home_match_radius) cfg.cleaning.home_match_radius_m = *f.home_match_radius;
    if (f.near_home_min) cfg.cleaning.near_home_min_m = *f.near_home_min;
    if (f.max_duration_hours) cfg.cleaning.max_duration_hours = *f.max_duration_hours;
    if (!f.bounds.empty()) {
        if (f.bounds.size() != 4) throw DataError("--bounds needs min_x,min_y,max_x,max_y");
        cfg.cleaning.study_bounds = {f.bounds[0], f.bounds[1], f.bounds[2], f.bounds[3]};
    }
    if (f.quantizer) {
        const auto kind = quantizer_kind_from_name(*f.quantizer);
        if (!kind) throw DataError("unknown quantizer kind \"" + *f.quantizer + "\"");
        cfg.model.quantizer.kind = *kind;
    }
    if (f.cell_width) cfg.model.quantizer.cell_width = *f.cell_width;
    if (f.cell_height) cfg.model.quantizer.cell_height = *f.cell_height;
    if (f.voronoi_k) cfg.model.quantizer.voronoi_k = *f.voronoi_k;
    if (f.radius) cfg.model.quantizer.radius = *f.radius;
    if (f.slot_minutes) cfg.model.features.slot_width_minutes = *f.slot_minutes;
    if (f.study_diameter_km) cfg.model.features.study_diameter_km = *f.study_diameter_km;
    if (f.method) {
        const auto method = ensemble_method_from_name(*f.method);
        if (!method) throw DataError("unknown ensemble method \"" + *f.method + "\"");
        cfg.model.forest.method = *method;
    }
    if (f.n_trees) cfg.model.forest.n_trees = *f.n_trees;
    if (f.min_leaf) cfg.model.forest.min_leaf = *f.min_leaf;
    if (f.subspace_features) cfg.model.forest.subspace_features = *f.subspace_features;
    if (f.per_node) cfg.model.forest.per_node_sampling = true;
    if (f.no_per_node) cfg.model.forest.per_node_sampling = false;
    if (f.strategy) {
        const auto strategy = fusion_strategy_from_name(*f.strategy);
        if (!strategy) throw DataError("unknown fusion strategy \"" + *f.strategy + "\"");
        cfg.model.strategy = *strategy;
    }
    if (!f.wmv_weights.empty()) {
        if (f.wmv_weights.size() != 4) throw DataError("--wmv-weights needs exactly 4 values");
        std::copy(f.wmv_weights.begin(), f.wmv_weights.end(), cfg.model.wmv_weights.begin());
    }
    if (!f.age_breaks.empty()) cfg.model.age_breaks = f.age_breaks;
    if (f.seed) cfg.model.seed = *f.seed;
    if (f.k) cfg.k_train_days = *f.k;
    if (f.warmup) cfg.warmup_days = *f.warmup;
    cfg.model.jobs = f.jobs;
    cfg.model.forest.jobs = f.jobs;
    validate_run_config(cfg);
    return cfg;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    if (!out) throw DataError("short write on " + path);
}

std::string fmt_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", v);
    return buffer;
}

struct LoadedData {
    std::vector<ActivityDay> days;
    std::map<std::string, UserProfile> profiles;
    std::vector<PoiRecord> pois;
    CleaningReport cleaning;
};

LoadedData load_and_clean(const RunConfig& cfg, const std::string& stops_path,
                          const std::string& profiles_path, const std::string& pois_path,
                          const std::string& mapping_path) {
    const ParseOptions options{projection_of(cfg), calendar_of(cfg)};
    ParsedStops parsed = parse_stops(stops_path, options);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << '\n';

    LoadedData data;
    data.profiles = parse_profiles(profiles_path, options);
    if (!pois_path.empty()) data.pois = parse_pois(pois_path, mapping_path, options);

    CleanResult cleaned =
        clean(group_into_days(parsed.stops, options.calendar), data.profiles, cfg.cleaning);
    if (!cleaned.report.reconciles()) throw InternalError("cleaning report does not reconcile");
    data.days = std::move(cleaned.days);
    data.cleaning = cleaned.report;
    return data;
}

// First k validated days per user; users with fewer days are excluded.
std::vector<ActivityDay> first_k_days(const std::vector<ActivityDay>& days, int k,
                                      std::vector<std::string>& excluded) {
    std::vector<ActivityDay> out;
    std::size_t i = 0;
    while (i < days.size()) {
        std::size_t j = i;
        while (j < days.size() && days[j].user_id == days[i].user_id) ++j;
        if (j - i >= static_cast<std::size_t>(k)) {
            out.insert(out.end(), days.begin() + static_cast<std::ptrdiff_t>(i),
                       days.begin() + static_cast<std::ptrdiff_t>(i) + k);
        } else {
            excluded.push_back(days[i].user_id);
        }
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int run_synth(const SynthConfig& synth_cfg, double ref_lon, double ref_lat,
              const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const Projection projection(ref_lon, ref_lat);
    const SynthResult city = generate_city(synth_cfg, projection);

    const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    write_stops_csv(path("stops.csv"), city.stops);
    write_profiles_csv(path("profiles.csv"), city.profiles);
    write_pois_csv(path("pois.csv"), city.pois);
    write_poi_mapping_json(path("poi_mapping.json"), city.poi_mapping);
    write_text(path("truth.json"), city.truth_json);

    std::cout << "synth: " << city.stops.size() << " stops, " << city.profiles.size()
              << " users, " << city.pois.size() << " pois -> " << out_dir << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// clean
// ---------------------------------------------------------------------------

int run_clean(const ModelFlags& flags, const std::string& stops_path,
              const std::string& profiles_path, const std::string& out_path,
              const std::string& report_path) {
    const RunConfig cfg = resolve_config(flags);
    const ParseOptions options{projection_of(cfg), calendar_of(cfg)};
    ParsedStops parsed = parse_stops(stops_path, options);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
    const auto profiles = parse_profiles(profiles_path, options);

    CleanResult cleaned =
        clean(group_into_days(parsed.stops, options.calendar), profiles, cfg.cleaning);
    if (!cleaned.report.reconciles()) throw InternalError("cleaning report does not reconcile");
    write_stops_csv(out_path, cleaned.days);

    if (!report_path.empty()) {
        ordered_json doc;
        doc["config"] = ordered_json::parse(run_config_json(cfg));
        doc["parse"] = {{"rows", parsed.total_rows},
                        {"skipped_rows", parsed.skipped_rows},
                        {"other_label_rows", parsed.other_dropped}};
        doc["cleaning"] = ordered_json::parse(cleaned.report.to_json());
        write_text(report_path, doc.dump(2));
    }
    std::cout << "clean: kept " << cleaned.report.kept_points << "/" << cleaned.report.input_points
              << " points, " << cleaned.report.kept_days << "/" << cleaned.report.input_days
              << " days, " << cleaned.report.kept_users << "/" << cleaned.report.input_users
              << " users -> " << out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int run_train(const ModelFlags& flags, const std::string& stops_path,
              const std::string& profiles_path, const std::string& pois_path,
              const std::string& mapping_path, const std::string& bundle_path,
              const std::string& report_path) {
    const RunConfig cfg = resolve_config(flags);
    LoadedData data = load_and_clean(cfg, stops_path, profiles_path, pois_path, mapping_path);

    std::vector<std::string> excluded;
    const std::vector<ActivityDay> train_days = first_k_days(data.days, cfg.k_train_days, excluded);
    for (const std::string& user : excluded) {
        std::cerr << "warning: user " << user << " has fewer than " << cfg.k_train_days
                  << " clean days, excluded from training\n";
    }
    if (train_days.empty()) {
        throw DataError("no user has " + std::to_string(cfg.k_train_days) +
                        " clean training days");
    }

    TrainReport report;
    const FusionModel model = train_fusion_model(train_days, data.profiles, data.pois,
                                                 calendar_of(cfg), cfg.model, &report);
    const std::string resolved = run_config_json(cfg);
    save_model_bundle(bundle_path, model, resolved);

    if (!report_path.empty()) {
        ordered_json doc;
        doc["config"] = ordered_json::parse(resolved);
        doc["cleaning"] = ordered_json::parse(data.cleaning.to_json());
        doc["excluded_users"] = excluded;
        doc["train"] = ordered_json::parse(report.to_json());
        write_text(report_path, doc.dump(2));
    }
    std::cout << "train: " << report.training_stops << " stops over " << report.training_days
              << " user-days (" << report.training_users << " users) -> " << bundle_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int run_predict(const std::string& bundle_path, const std::string& stops_path,
                const std::string& profiles_path, const std::string& out_path) {
    const ModelBundle bundle = load_model_bundle(bundle_path);
    const FusionModel& model = bundle.model;
    const RunConfig cfg = parse_run_config(bundle.resolved_config_json);
    const ParseOptions options{projection_of(cfg), model.calendar};

    ParsedStops parsed = parse_stops(stops_path, options);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << '\n';

    FusionModel patched;  // only used when extra profiles are supplied
    const FusionModel* active = &model;
    if (!profiles_path.empty()) {
        // extra profiles cover users absent from the training roster
        auto extra = parse_profiles(profiles_path, options);
        patched = FusionModel{model.config,       model.calendar,      model.quantizer,
                              model.age_banding,  model.profiles,      model.pois,
                              {},                 Forest(model.score_meta),
                              Forest(model.decision_meta)};
        for (auto& [id, profile] : extra) patched.profiles.emplace(id, std::move(profile));
        for (const PopulationModel& p : model.populations) {
            PopulationModel copy;
            copy.kind = p.kind;
            copy.key = p.key;
            copy.training_stops = p.training_stops;
            copy.stats = std::make_unique<PopulationStats>(
                p.stats->points(), p.stats->spatial_table(), p.stats->temporal_table(),
                p.stats->contextual_table(), p.stats->transitions(), model.pois, model.quantizer,
                model.calendar, model.config.features);
            copy.forest = p.forest;
            patched.populations.push_back(std::move(copy));
        }
        active = &patched;
    }

    const UserHistory history = active->training_history();

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << "user_id,t_start,t_end,predicted";
    for (const std::string& name : fine_class_names()) out << ",score_" << name;
    out << ",strategy,seen_user\n";

    for (const StopPoint& original : parsed.stops) {
        StopPoint stop = original;
        stop.label.reset();  // predictions must never see the input label
        const StopPrediction pred = predict_stop(*active, stop, history);
        out << stop.user_id << ',' << format_timestamp(stop.t_start) << ','
            << format_timestamp(stop.t_end) << ',' << label_name(pred.label);
        for (const double score : pred.fused_scores) out << ',' << fmt_double(score);
        out << ',' << fusion_strategy_name(active->config.strategy) << ','
            << (pred.seen_user ? 1 : 0) << '\n';
    }
    if (!out) throw DataError("short write on " + out_path);
    std::cout << "predict: " << parsed.stops.size() << " stops -> " << out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

ordered_json grid_entry_json(const ModelConfig& m, const EvalResult& result) {
    ordered_json j;
    j["quantizer_kind"] = std::string(quantizer_kind_name(m.quantizer.kind));
    j["cell_width_m"] = m.quantizer.cell_width;
    j["voronoi_k"] = m.quantizer.voronoi_k;
    j["radius_m"] = m.quantizer.radius;
    j["slot_width_minutes"] = m.features.slot_width_minutes;
    j["fine_accuracy"] = result.fine.overall_accuracy();
    j["coarse_accuracy"] = result.coarse.overall_accuracy();
    j["majority_baseline"] = result.majority_baseline_accuracy;
    j["test_stops"] = result.test_stops;
    return j;
}

int run_eval(const ModelFlags& flags, const std::string& stops_path,
             const std::string& profiles_path, const std::string& pois_path,
             const std::string& mapping_path, const std::string& mode, bool grid,
             const std::string& out_dir) {
    if (mode != "chrono" && mode != "stream") {
        std::cerr << "error: --mode must be chrono or stream\n";
        return kExitUsage;
    }
    if (grid && mode != "chrono") {
        std::cerr << "error: --grid requires --mode chrono\n";
        return kExitUsage;
    }
    const RunConfig cfg = resolve_config(flags);
    LoadedData data = load_and_clean(cfg, stops_path, profiles_path, pois_path, mapping_path);
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    const std::string resolved = run_config_json(cfg);
    const StudyCalendar calendar = calendar_of(cfg);

    if (mode == "stream") {
        const StreamReport report = stream_evaluate(data.days, data.profiles, data.pois, calendar,
                                                    cfg.model, cfg.warmup_days);
        write_text(path("eval_stream.json"), stream_report_json(report, resolved));
        write_text(path("eval_stream_curves.csv"), stream_curves_csv(report));
        std::cout << "stream: " << report.days.size() << " evaluated days";
        if (report.final_seen_accuracy) {
            std::cout << ", seen accuracy " << fmt_double(*report.final_seen_accuracy);
        }
        if (report.final_unseen_accuracy) {
            std::cout << ", unseen accuracy " << fmt_double(*report.final_unseen_accuracy);
        }
        std::cout << " -> " << out_dir << '\n';
        return 0;
    }

    if (grid) {
        std::vector<ModelConfig> entries = grid_configs(cfg.model);
        for (ModelConfig& m : entries) {
            m.jobs = 1;  // the grid loop is the parallel axis
            m.forest.jobs = 1;
        }
        const ChronoSplit split = chrono_split(data.days, cfg.k_train_days);
        std::vector<ordered_json> rows(entries.size());
        parallel_for(entries.size(), cfg.model.jobs, [&](std::size_t i) {
            const EvalResult result =
                evaluate(split, data.profiles, data.pois, calendar, entries[i]);
            rows[i] = grid_entry_json(entries[i], result);
        });

        ordered_json doc;
        doc["config"] = ordered_json::parse(resolved);
        doc["entries"] = rows;
        write_text(path("eval_grid.json"), doc.dump(2));

        std::string csv =
            "quantizer_kind,cell_width_m,voronoi_k,radius_m,slot_width_minutes,"
            "fine_accuracy,coarse_accuracy,majority_baseline,test_stops\n";
        for (const ordered_json& r : rows) {
            csv += r["quantizer_kind"].get<std::string>();
            csv += ',' + fmt_double(r["cell_width_m"].get<double>());
            csv += ',' + std::to_string(r["voronoi_k"].get<int>());
            csv += ',' + fmt_double(r["radius_m"].get<double>());
            csv += ',' + std::to_string(r["slot_width_minutes"].get<int>());
            csv += ',' + fmt_double(r["fine_accuracy"].get<double>());
            csv += ',' + fmt_double(r["coarse_accuracy"].get<double>());
            csv += ',' + fmt_double(r["majority_baseline"].get<double>());
            csv += ',' + std::to_string(r["test_stops"].get<int>()) + '\n';
        }
        write_text(path("eval_grid.csv"), csv);
        std::cout << "grid: " << rows.size() << " configurations -> " << out_dir << '\n';
        return 0;
    }

    const ChronoSplit split = chrono_split(data.days, cfg.k_train_days);
    const EvalResult result = evaluate(split, data.profiles, data.pois, calendar, cfg.model);
    write_text(path("eval_chrono.json"), eval_report_json(result, resolved));
    write_text(path("eval_chrono.txt"), eval_report_text(result));
    std::cout << "chrono k=" << cfg.k_train_days << ": 16-class "
              << fmt_double(result.fine.overall_accuracy()) << ", 4-class "
              << fmt_double(result.coarse.overall_accuracy()) << ", baseline "
              << fmt_double(result.majority_baseline_accuracy) << ", " << result.test_stops
              << " test stops";
    if (!split.excluded_users.empty()) {
        std::cout << " (" << split.excluded_users.size() << " users excluded)";
    }
    std::cout << " -> " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"activity recognition from stop points, POIs and demographics"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labelled city");
    SynthConfig synth_cfg;
    double synth_ref_lon = 103.8198, synth_ref_lat = 1.3521;
    std::string synth_out_dir;
    synth->add_option("--out-dir", synth_out_dir, "output directory")->required();
    synth->add_option("--users", synth_cfg.num_users, "number of users")
        ->check(CLI::PositiveNumber);
    synth->add_option("--days", synth_cfg.num_days, "number of study days")
        ->check(CLI::PositiveNumber);
    synth->add_option("--start-date", synth_cfg.start_date, "study start date (YYYY-MM-DD)");
    synth->add_option("--seed", synth_cfg.seed, "generator seed");
    synth->add_option("--unseen-fraction", synth_cfg.unseen_fraction,
                      "fraction of users entering after day 1");
    synth->add_option("--ref-lon", synth_ref_lon, "projection reference longitude");
    synth->add_option("--ref-lat", synth_ref_lat, "projection reference latitude");

    // clean
    auto* clean_cmd = app.add_subcommand("clean", "apply the survey cleaning rules");
    ModelFlags clean_flags;
    std::string clean_stops, clean_profiles, clean_out, clean_report;
    clean_cmd->add_option("--stops", clean_stops, "raw stops CSV")->required();
    clean_cmd->add_option("--profiles", clean_profiles, "user profiles CSV")->required();
    clean_cmd->add_option("--out", clean_out, "cleaned stops CSV")->required();
    clean_cmd->add_option("--report", clean_report, "cleaning report JSON");
    register_model_flags(clean_cmd, clean_flags);

    // train
    auto* train = app.add_subcommand("train", "train a fusion model bundle");
    ModelFlags train_flags;
    std::string train_stops, train_profiles, train_pois, train_mapping, train_out, train_report;
    train->add_option("--stops", train_stops, "stops CSV (labelled)")->required();
    train->add_option("--profiles", train_profiles, "user profiles CSV")->required();
    train->add_option("--pois", train_pois, "POI CSV")->required();
    train->add_option("--mapping", train_mapping, "POI category mapping JSON")->required();
    train->add_option("--out", train_out, "model bundle path")->required();
    train->add_option("--report", train_report, "training report JSON");
    register_model_flags(train, train_flags);

    // predict
    auto* predict = app.add_subcommand("predict", "predict stops with a trained bundle");
    std::string predict_bundle, predict_stops, predict_profiles, predict_out;
    predict->add_option("--bundle", predict_bundle, "model bundle path")->required();
    predict->add_option("--stops", predict_stops, "stops CSV to predict")->required();
    predict->add_option("--profiles", predict_profiles,
                        "extra profiles CSV for users unknown to the bundle");
    predict->add_option("--out", predict_out, "predictions CSV")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "chronological or streaming evaluation");
    ModelFlags eval_flags;
    std::string eval_stops, eval_profiles, eval_pois, eval_mapping, eval_mode = "chrono";
    std::string eval_out_dir = ".";
    bool eval_grid = false;
    eval_cmd->add_option("--stops", eval_stops, "stops CSV (labelled)")->required();
    eval_cmd->add_option("--profiles", eval_profiles, "user profiles CSV")->required();
    eval_cmd->add_option("--pois", eval_pois, "POI CSV")->required();
    eval_cmd->add_option("--mapping", eval_mapping, "POI category mapping JSON")->required();
    eval_cmd->add_option("--mode", eval_mode, "chrono or stream");
    eval_cmd->add_flag("--grid", eval_grid, "sweep the quantizer/slot parameter grid");
    eval_cmd->add_option("--out-dir", eval_out_dir, "report output directory");
    register_model_flags(eval_cmd, eval_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            return run_synth(synth_cfg, synth_ref_lon, synth_ref_lat, synth_out_dir);
        }
        if (clean_cmd->parsed()) {
            return run_clean(clean_flags, clean_stops, clean_profiles, clean_out, clean_report);
        }
        if (train->parsed()) {
            return run_train(train_flags, train_stops, train_profiles, train_pois, train_mapping,
                             train_out, train_report);
        }
        if (predict->parsed()) {
            return run_predict(predict_bundle, predict_stops, predict_profiles, predict_out);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_flags, eval_stops, eval_profiles, eval_pois, eval_mapping,
                            eval_mode, eval_grid, eval_out_dir);
        }
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
