#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/fusion.hpp"
#include "actrec/ingest.hpp"

namespace actrec {

// ---------------------------------------------------------------------------
// Chronological split
// ---------------------------------------------------------------------------

// Per user: first k validated days train, the (k+1)-th day tests. Users with
// fewer than k+1 days are excluded and reported.
struct ChronoSplit {
    int k = 0;
    std::vector<ActivityDay> train_days;
    std::vector<ActivityDay> test_days;  // exactly one per included user
    std::vector<std::string> excluded_users;
};

ChronoSplit chrono_split(const std::vector<ActivityDay>& days, int k);

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void add(int truth, int predicted);

    int num_classes() const { return num_classes_; }
    std::int64_t count(int truth, int predicted) const;
    std::int64_t row_total(int truth) const;
    std::int64_t total() const { return total_; }
    std::int64_t trace() const;

    double overall_accuracy() const;  // trace / total; throws DataError when empty
    // diagonal / row sum; nullopt for classes never observed as truth
    std::optional<double> class_accuracy(int truth) const;

    // truth rows by predicted columns, plus a per-class accuracy column
    // ("-" for undefined rows)
    std::string to_text(const std::vector<std::string>& class_names) const;

private:
    int num_classes_;
    std::vector<std::int64_t> counts_;  // row-major truth x predicted
    std::int64_t total_ = 0;
};

std::vector<std::string> fine_class_names();
std::vector<std::string> coarse_class_names();

// ---------------------------------------------------------------------------
// One-shot evaluation
// ---------------------------------------------------------------------------

struct EvalResult {
    int k = 0;
    ConfusionMatrix fine{kNumLabels};
    // same decisions collapsed through the 4-class mapping, never retrained
    ConfusionMatrix coarse{kNumCoarseLabels};
    double majority_baseline_accuracy = 0.0;  // predict the training majority label
    int test_stops = 0;
    TrainReport train_report;
};

EvalResult evaluate(const ChronoSplit& split, const std::map<std::string, UserProfile>& profiles,
                    const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                    const ModelConfig& config);

// JSON report; `resolved_config_json` is embedded verbatim under "config"
std::string eval_report_json(const EvalResult& result, const std::string& resolved_config_json);
std::string eval_report_text(const EvalResult& result);

// ---------------------------------------------------------------------------
// Streaming evaluation
// ---------------------------------------------------------------------------

struct StreamDayRecord {
    int day_index = 0;
    std::string date;
    int seen_cases = 0, seen_correct = 0;
    int unseen_cases = 0, unseen_correct = 0;
    // running "from day 1 through this day" averages
    std::optional<double> cumulative_seen_accuracy;
    std::optional<double> cumulative_unseen_accuracy;
    std::optional<double> cumulative_accuracy;
};

// Test outcomes grouped by how many of the query user's own days were in
// training at prediction time. Buckets backed by 30 or fewer users are
// suppressed in rendered reports.
struct StreamBucket {
    int user_training_days = 0;
    int users = 0;
    int cases = 0;
    int correct = 0;
    bool suppressed = false;
};

inline constexpr int kBucketSuppressionUsers = 30;
inline constexpr int kDefaultWarmupDays = 3;

struct StreamReport {
    int warmup_days = 0;
    std::vector<StreamDayRecord> days;
    std::vector<StreamBucket> buckets;  // all buckets; suppression is a flag
    std::optional<double> final_seen_accuracy;
    std::optional<double> final_unseen_accuracy;
};

// Day-by-day simulation: predict each post-warmup calendar day with models
// retrained from scratch on all strictly earlier days, then fold the day's
// true labels into the training pool.
StreamReport stream_evaluate(const std::vector<ActivityDay>& days,
                             const std::map<std::string, UserProfile>& profiles,
                             const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                             const ModelConfig& config, int warmup_days = kDefaultWarmupDays);

std::string stream_report_json(const StreamReport& report,
                               const std::string& resolved_config_json);
std::string stream_curves_csv(const StreamReport& report);

// ---------------------------------------------------------------------------
// Parameter grids
// ---------------------------------------------------------------------------

// One config per parameter combination for the base config's quantizer kind:
// its size parameter crossed with the slot-width grid.
std::vector<ModelConfig> grid_configs(const ModelConfig& base);

}  // namespace actrec
