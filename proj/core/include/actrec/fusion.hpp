#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/features.hpp"
#include "actrec/forest.hpp"
#include "actrec/ingest.hpp"
#include "actrec/quantize.hpp"

namespace actrec {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct QuantizerSpec {
    QuantizerKind kind = QuantizerKind::Grid;
    double cell_width = 400.0;   // metres, grid
    double cell_height = 400.0;  // metres, grid
    int voronoi_k = 200;
    double radius = 300.0;  // metres, circular
};

enum class FusionStrategy : std::uint8_t { Wmv = 0, ScoreStack = 1, DecisionStack = 2 };

std::string_view fusion_strategy_name(FusionStrategy s);
std::optional<FusionStrategy> fusion_strategy_from_name(std::string_view name);

struct ModelConfig {
    QuantizerSpec quantizer;
    FeatureConfig features;
    ForestConfig forest;
    FusionStrategy strategy = FusionStrategy::Wmv;
    // tier order: cross, gender, age, user
    std::array<double, 4> wmv_weights{4.0, 3.0, 2.0, 1.0};
    std::vector<int> age_breaks{25, 41, 61};
    std::uint64_t seed = 20130311;
    int jobs = 1;
};

// ---------------------------------------------------------------------------
// Population tiers
// ---------------------------------------------------------------------------

// Tier order also fixes the WMV weight order and the stacking block order.
enum class PopulationKind : std::uint8_t { Cross = 0, Gender = 1, Age = 2, User = 3 };

inline constexpr int kNumPopulationKinds = 4;

std::string_view population_kind_name(PopulationKind k);

// One user subset: its feature statistics and its tree ensemble. Statistics
// and trees derive only from stops of users in the subset.
struct PopulationModel {
    PopulationKind kind = PopulationKind::Cross;
    std::string key;  // "" for cross, gender name, age band name, or user id
    std::unique_ptr<PopulationStats> stats;
    Forest forest;
    int training_stops = 0;
};

// Output of one tier for one query stop.
struct TierOutput {
    bool present = false;
    LabelVector scores{};  // zero-filled when absent
    int decision = -1;     // -1 when absent
};

// ---------------------------------------------------------------------------
// Fusion primitives
// ---------------------------------------------------------------------------

// argmax_l sum_t w_t [d_t = l]; decisions use -1 for an absent model, which
// contributes nothing. Ties resolve to the lowest label index.
ActivityLabel wmv(const std::array<int, kNumPopulationKinds>& decisions,
                  const std::array<double, kNumPopulationKinds>& weights);

// stacked meta inputs, always 4L long, zero-filled for absent tiers
std::vector<double> stack_scores(const std::array<TierOutput, kNumPopulationKinds>& tiers);
std::vector<double> stack_decisions(const std::array<TierOutput, kNumPopulationKinds>& tiers);

ActivityLabel score_stack(const std::array<TierOutput, kNumPopulationKinds>& tiers,
                          const Forest& meta);
ActivityLabel decision_stack(const std::array<TierOutput, kNumPopulationKinds>& tiers,
                             const Forest& meta);

// ---------------------------------------------------------------------------
// Trained model
// ---------------------------------------------------------------------------

struct TrainReport {
    int training_days = 0;
    int training_stops = 0;
    int training_users = 0;
    std::vector<std::pair<std::string, int>> population_sizes;  // "kind:key" -> stops
    std::vector<std::string> omitted_populations;               // empty subsets
    std::string to_json() const;
};

struct FusionModel {
    ModelConfig config;
    StudyCalendar calendar;
    std::shared_ptr<const Quantizer> quantizer;
    AgeBanding age_banding;
    std::map<std::string, UserProfile> profiles;
    std::vector<PoiRecord> pois;
    std::vector<PopulationModel> populations;  // cross, genders, age bands, users
    Forest score_meta;     // trained only for the score_stack strategy
    Forest decision_meta;  // trained only for the decision_stack strategy

    const PopulationModel* find(PopulationKind kind, const std::string& key) const;
    // the tier serving a given profile; null when that subset was empty
    const PopulationModel* tier_for(const UserProfile& profile, PopulationKind kind) const;
    bool seen_user(const std::string& user_id) const;
    const UserProfile& profile_for(const std::string& user_id) const;  // throws DataError

    // validated per-user history of all training stops, for transition context
    UserHistory training_history() const;
};

// Quantizer geometry is fit once on the full training set and shared by all
// population tiers; only the counted statistics are population-specific.
Quantizer build_quantizer(const QuantizerSpec& spec, const std::vector<ActivityDay>& days,
                          std::uint64_t seed);

FusionModel train_fusion_model(const std::vector<ActivityDay>& training_days,
                               const std::map<std::string, UserProfile>& profiles,
                               const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                               const ModelConfig& config, TrainReport* report = nullptr);

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct StopPrediction {
    ActivityLabel label = ActivityLabel::Home;
    // normalized fused scores (sums to 1): weight-normalized votes for wmv,
    // meta-ensemble scores for the stacking strategies
    LabelVector fused_scores{};
    std::array<TierOutput, kNumPopulationKinds> tiers;
    bool seen_user = false;
};

// Predicts one stop. `history` supplies the user's previous validated
// activity (24 h rule); the stop's own label is never read.
StopPrediction predict_stop(const FusionModel& model, const StopPoint& stop,
                            const UserHistory& history);

// Predicts a day's stops in timestamp order. After each prediction the stop's
// true label (when present) is folded into `history`, so later stops of the
// same day see earlier validated activities.
std::vector<StopPrediction> predict_day(const FusionModel& model, const ActivityDay& day,
                                        UserHistory& history);

}  // namespace actrec
