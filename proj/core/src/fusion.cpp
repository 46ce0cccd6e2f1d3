#include "actrec/fusion.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "actrec/errors.hpp"
#include "actrec/parallel.hpp"
#include "actrec/rng.hpp"

namespace actrec {

std::string_view fusion_strategy_name(FusionStrategy s) {
    switch (s) {
        case FusionStrategy::Wmv: return "wmv";
        case FusionStrategy::ScoreStack: return "score_stack";
        case FusionStrategy::DecisionStack: return "decision_stack";
    }
    throw InternalError("unknown fusion strategy");
}

std::optional<FusionStrategy> fusion_strategy_from_name(std::string_view name) {
    if (name == "wmv") return FusionStrategy::Wmv;
    if (name == "score_stack") return FusionStrategy::ScoreStack;
    if (name == "decision_stack") return FusionStrategy::DecisionStack;
    return std::nullopt;
}

std::string_view population_kind_name(PopulationKind k) {
    switch (k) {
        case PopulationKind::Cross: return "cross";
        case PopulationKind::Gender: return "gender";
        case PopulationKind::Age: return "age";
        case PopulationKind::User: return "user";
    }
    throw InternalError("unknown population kind");
}

// ---------------------------------------------------------------------------
// Fusion primitives
// ---------------------------------------------------------------------------

ActivityLabel wmv(const std::array<int, kNumPopulationKinds>& decisions,
                  const std::array<double, kNumPopulationKinds>& weights) {
    LabelVector votes{};
    bool any = false;
    for (int t = 0; t < kNumPopulationKinds; ++t) {
        if (decisions[t] < 0) continue;
        if (decisions[t] >= kNumLabels) throw InternalError("decision index out of range");
        if (weights[t] <= 0.0) throw DataError("wmv weights must be positive");
        votes[decisions[t]] += weights[t];
        any = true;
    }
    if (!any) throw DataError("wmv requires at least one model decision");
    return label_from_index(argmax_label(votes));
}

std::vector<double> stack_scores(const std::array<TierOutput, kNumPopulationKinds>& tiers) {
    std::vector<double> stacked(static_cast<std::size_t>(kNumPopulationKinds) * kNumLabels, 0.0);
    for (int t = 0; t < kNumPopulationKinds; ++t) {
        if (!tiers[t].present) continue;
        for (int l = 0; l < kNumLabels; ++l) {
            stacked[static_cast<std::size_t>(t) * kNumLabels + l] = tiers[t].scores[l];
        }
    }
    return stacked;
}

std::vector<double> stack_decisions(const std::array<TierOutput, kNumPopulationKinds>& tiers) {
    std::vector<double> stacked(static_cast<std::size_t>(kNumPopulationKinds) * kNumLabels, 0.0);
    for (int t = 0; t < kNumPopulationKinds; ++t) {
        if (!tiers[t].present) continue;
        stacked[static_cast<std::size_t>(t) * kNumLabels + tiers[t].decision] = 1.0;
    }
    return stacked;
}

ActivityLabel score_stack(const std::array<TierOutput, kNumPopulationKinds>& tiers,
                          const Forest& meta) {
    if (!meta.trained()) throw InternalError("score_stack requires a trained meta-ensemble");
    return label_from_index(meta.predict_label(stack_scores(tiers)));
}

ActivityLabel decision_stack(const std::array<TierOutput, kNumPopulationKinds>& tiers,
                             const Forest& meta) {
    if (!meta.trained()) throw InternalError("decision_stack requires a trained meta-ensemble");
    return label_from_index(meta.predict_label(stack_decisions(tiers)));
}

// ---------------------------------------------------------------------------
// Model accessors
// ---------------------------------------------------------------------------

const PopulationModel* FusionModel::find(PopulationKind kind, const std::string& key) const {
    for (const PopulationModel& p : populations) {
        if (p.kind == kind && p.key == key) return &p;
    }
    return nullptr;
}

const PopulationModel* FusionModel::tier_for(const UserProfile& profile,
                                             PopulationKind kind) const {
    switch (kind) {
        case PopulationKind::Cross: return find(kind, "");
        case PopulationKind::Gender: return find(kind, std::string(gender_name(profile.gender)));
        case PopulationKind::Age:
            return find(kind, age_banding.band_name(age_banding.band_of(profile.age)));
        case PopulationKind::User: return find(kind, profile.user_id);
    }
    throw InternalError("unknown population kind");
}

bool FusionModel::seen_user(const std::string& user_id) const {
    return find(PopulationKind::User, user_id) != nullptr;
}

const UserProfile& FusionModel::profile_for(const std::string& user_id) const {
    auto it = profiles.find(user_id);
    if (it == profiles.end()) {
        throw DataError("no profile for user '" + user_id + "'");
    }
    return it->second;
}

UserHistory FusionModel::training_history() const {
    const PopulationModel* cross = find(PopulationKind::Cross, "");
    if (cross == nullptr) throw InternalError("model has no cross-population tier");
    UserHistory history;
    for (const ActivityPoint& p : cross->stats->points()) {
        if (p.label) history.add(p.origin.user_id, p.origin.t_end, *p.label);
    }
    return history;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

Quantizer build_quantizer(const QuantizerSpec& spec, const std::vector<ActivityDay>& days,
                          std::uint64_t seed) {
    switch (spec.kind) {
        case QuantizerKind::Grid: {
            GridQuantizer g;
            g.origin_x = 0.0;
            g.origin_y = 0.0;
            g.cell_width = spec.cell_width;
            g.cell_height = spec.cell_height;
            if (g.cell_width <= 0.0 || g.cell_height <= 0.0) {
                throw DataError("grid cell dimensions must be positive");
            }
            return Quantizer::grid(g);
        }
        case QuantizerKind::Voronoi: {
            std::vector<PlanePoint> coords;
            for (const ActivityDay& day : days) {
                for (const StopPoint& stop : day.stops) coords.push_back({stop.x, stop.y});
            }
            return Quantizer::voronoi(fit_voronoi(coords, spec.voronoi_k, seed));
        }
        case QuantizerKind::Circular: {
            if (spec.radius <= 0.0) throw DataError("circle radius must be positive");
            return Quantizer::circular(CircularQuantizer{spec.radius});
        }
    }
    throw InternalError("unknown quantizer kind");
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 0x5e21aa11ULL));
}

struct Subset {
    PopulationKind kind;
    std::string key;
    std::vector<ActivityDay> days;
};

// Enumerates all candidate tiers in the canonical order (cross, gender
// values, age bands, users). Empty subsets are returned too so the caller
// can record the omission.
std::vector<Subset> partition_days(const std::vector<ActivityDay>& days,
                                   const std::map<std::string, UserProfile>& profiles,
                                   const AgeBanding& banding) {
    std::vector<Subset> subsets;
    subsets.push_back({PopulationKind::Cross, "", days});

    auto filtered = [&](auto&& keep) {
        std::vector<ActivityDay> out;
        for (const ActivityDay& day : days) {
            if (keep(profiles.at(day.user_id))) out.push_back(day);
        }
        return out;
    };

    for (Gender g : {Gender::Female, Gender::Male}) {
        subsets.push_back({PopulationKind::Gender, std::string(gender_name(g)),
                           filtered([&](const UserProfile& p) { return p.gender == g; })});
    }
    for (int band = 0; band < banding.num_bands(); ++band) {
        subsets.push_back(
            {PopulationKind::Age, banding.band_name(band),
             filtered([&](const UserProfile& p) { return banding.band_of(p.age) == band; })});
    }

    std::set<std::string> users;
    for (const ActivityDay& day : days) users.insert(day.user_id);
    for (const std::string& user : users) {
        subsets.push_back({PopulationKind::User, user,
                           filtered([&](const UserProfile& p) { return p.user_id == user; })});
    }
    return subsets;
}

Dataset build_population_dataset(const PopulationStats& stats,
                                 const std::vector<ActivityDay>& subset_days,
                                 const std::map<std::string, UserProfile>& profiles,
                                 const UserHistory& history, int jobs) {
    struct Entry {
        const StopPoint* stop;
        const UserProfile* profile;
        std::optional<ActivityLabel> prev;
    };
    std::vector<Entry> entries;
    for (const ActivityDay& day : subset_days) {
        const UserProfile& profile = profiles.at(day.user_id);
        for (const StopPoint& stop : day.stops) {
            if (!stop.label) continue;
            entries.push_back(
                {&stop, &profile, history.previous_label(day.user_id, stop.t_start)});
        }
    }

    std::vector<std::vector<double>> rows(entries.size());
    parallel_for(static_cast<int>(entries.size()), jobs, [&](int i) {
        const Entry& e = entries[static_cast<std::size_t>(i)];
        rows[static_cast<std::size_t>(i)] = stats.assemble(*e.stop, *e.profile, e.prev);
    });

    Dataset data(kFeatureDim);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        data.add(rows[i], label_index(*entries[i].stop->label));
    }
    return data;
}

int count_labeled_stops(const std::vector<ActivityDay>& days) {
    int n = 0;
    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (stop.label) ++n;
        }
    }
    return n;
}

// Meta-ensemble fitting data: every user's last training day, predicted by an
// inner model trained without those days (users with a single day stay in the
// inner training set, so their rows are generated in-sample).
void train_meta(FusionModel& model, const std::vector<ActivityDay>& days,
                const std::map<std::string, UserProfile>& profiles,
                const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                const ModelConfig& config) {
    std::map<std::string, int> last_day;
    std::map<std::string, int> day_count;
    for (const ActivityDay& day : days) {
        auto [it, inserted] = last_day.try_emplace(day.user_id, day.day_index);
        if (!inserted) it->second = std::max(it->second, day.day_index);
        ++day_count[day.user_id];
    }

    std::vector<ActivityDay> inner_days;
    std::vector<ActivityDay> held_days;
    for (const ActivityDay& day : days) {
        const bool last = day.day_index == last_day[day.user_id];
        if (last) held_days.push_back(day);
        if (!last || day_count[day.user_id] == 1) inner_days.push_back(day);
    }
    std::sort(held_days.begin(), held_days.end(), [](const ActivityDay& a, const ActivityDay& b) {
        return std::tie(a.day_index, a.user_id) < std::tie(b.day_index, b.user_id);
    });

    ModelConfig inner_config = config;
    inner_config.strategy = FusionStrategy::Wmv;  // tiers only, no meta recursion
    FusionModel inner =
        train_fusion_model(inner_days, profiles, pois, calendar, inner_config, nullptr);

    Dataset meta_data(kNumPopulationKinds * kNumLabels);
    UserHistory history = inner.training_history();
    for (const ActivityDay& day : held_days) {
        std::vector<StopPrediction> predictions = predict_day(inner, day, history);
        for (std::size_t i = 0; i < day.stops.size(); ++i) {
            const StopPoint& stop = day.stops[i];
            if (!stop.label) continue;
            const auto& tiers = predictions[i].tiers;
            std::vector<double> input = config.strategy == FusionStrategy::ScoreStack
                                            ? stack_scores(tiers)
                                            : stack_decisions(tiers);
            meta_data.add(input, label_index(*stop.label));
        }
    }
    if (meta_data.size() == 0) throw DataError("no meta-training rows for the stacking strategy");

    Forest meta;
    meta.fit(meta_data, model.config.forest, derive_seed(config.seed, 0x4d455441ULL));
    if (config.strategy == FusionStrategy::ScoreStack) {
        model.score_meta = std::move(meta);
    } else {
        model.decision_meta = std::move(meta);
    }
}

}  // namespace

FusionModel train_fusion_model(const std::vector<ActivityDay>& training_days,
                               const std::map<std::string, UserProfile>& profiles,
                               const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                               const ModelConfig& config, TrainReport* report) {
    if (training_days.empty()) throw DataError("cannot train on zero activity days");
    for (const ActivityDay& day : training_days) {
        if (profiles.count(day.user_id) == 0) {
            throw DataError("training data references user '" + day.user_id +
                            "' with no profile");
        }
    }

    FusionModel model;
    model.config = config;
    model.calendar = calendar;
    model.age_banding = AgeBanding(config.age_breaks);
    model.profiles = profiles;
    model.pois = pois;
    model.quantizer = std::make_shared<const Quantizer>(
        build_quantizer(config.quantizer, training_days, config.seed));

    UserHistory history;
    history.add_days(training_days);

    TrainReport local_report;
    local_report.training_days = static_cast<int>(training_days.size());
    local_report.training_stops = count_labeled_stops(training_days);
    {
        std::set<std::string> users;
        for (const ActivityDay& day : training_days) users.insert(day.user_id);
        local_report.training_users = static_cast<int>(users.size());
    }

    std::vector<Subset> subsets = partition_days(training_days, profiles, model.age_banding);
    std::uint64_t population_index = 0;
    for (Subset& subset : subsets) {
        std::string name =
            std::string(population_kind_name(subset.kind)) + ":" + (subset.key.empty() ? "*" : subset.key);
        if (subset.days.empty()) {
            local_report.omitted_populations.push_back(name);
            ++population_index;
            continue;
        }

        PopulationModel pop;
        pop.kind = subset.kind;
        pop.key = subset.key;
        pop.stats = std::make_unique<PopulationStats>(subset.days, pois, model.quantizer,
                                                      calendar, config.features);
        Dataset data =
            build_population_dataset(*pop.stats, subset.days, profiles, history, config.jobs);
        ForestConfig forest_config = config.forest;
        forest_config.jobs = config.jobs;
        pop.forest.fit(data, forest_config, derive_seed(config.seed, population_index));
        pop.training_stops = data.size();

        local_report.population_sizes.emplace_back(name, data.size());
        model.populations.push_back(std::move(pop));
        ++population_index;
    }

    if (config.strategy != FusionStrategy::Wmv) {
        train_meta(model, training_days, profiles, pois, calendar, config);
    }

    if (report != nullptr) *report = std::move(local_report);
    return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

StopPrediction predict_stop(const FusionModel& model, const StopPoint& stop,
                            const UserHistory& history) {
    const UserProfile& profile = model.profile_for(stop.user_id);
    const std::optional<ActivityLabel> prev =
        history.previous_label(stop.user_id, stop.t_start);

    StopPrediction out;
    for (int t = 0; t < kNumPopulationKinds; ++t) {
        const PopulationModel* tier = model.tier_for(profile, static_cast<PopulationKind>(t));
        if (tier == nullptr) continue;
        std::vector<double> features = tier->stats->assemble(stop, profile, prev);
        out.tiers[t].present = true;
        out.tiers[t].scores = tier->forest.predict_scores(features);
        out.tiers[t].decision = argmax_label(out.tiers[t].scores);
    }
    out.seen_user = out.tiers[static_cast<int>(PopulationKind::User)].present;

    switch (model.config.strategy) {
        case FusionStrategy::Wmv: {
            std::array<int, kNumPopulationKinds> decisions;
            double weight_total = 0.0;
            for (int t = 0; t < kNumPopulationKinds; ++t) {
                decisions[t] = out.tiers[t].present ? out.tiers[t].decision : -1;
                if (out.tiers[t].present) weight_total += model.config.wmv_weights[t];
            }
            out.label = wmv(decisions, model.config.wmv_weights);
            for (int t = 0; t < kNumPopulationKinds; ++t) {
                if (decisions[t] >= 0) {
                    out.fused_scores[decisions[t]] +=
                        model.config.wmv_weights[t] / weight_total;
                }
            }
            break;
        }
        case FusionStrategy::ScoreStack:
            out.label = score_stack(out.tiers, model.score_meta);
            out.fused_scores = model.score_meta.predict_scores(stack_scores(out.tiers));
            break;
        case FusionStrategy::DecisionStack:
            out.label = decision_stack(out.tiers, model.decision_meta);
            out.fused_scores = model.decision_meta.predict_scores(stack_decisions(out.tiers));
            break;
    }
    return out;
}

std::vector<StopPrediction> predict_day(const FusionModel& model, const ActivityDay& day,
                                        UserHistory& history) {
    std::vector<StopPrediction> out;
    out.reserve(day.stops.size());
    for (const StopPoint& stop : day.stops) {
        out.push_back(predict_stop(model, stop, history));
        if (stop.label) history.add(day.user_id, stop.t_end, *stop.label);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

std::string TrainReport::to_json() const {
    nlohmann::ordered_json j;
    j["training_days"] = training_days;
    j["training_stops"] = training_stops;
    j["training_users"] = training_users;
    nlohmann::ordered_json sizes = nlohmann::ordered_json::object();
    for (const auto& [name, size] : population_sizes) sizes[name] = size;
    j["population_sizes"] = sizes;
    j["omitted_populations"] = omitted_populations;
    return j.dump(2);
}

}  // namespace actrec
