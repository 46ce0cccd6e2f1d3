#include "actrec/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "actrec/errors.hpp"

namespace actrec {

// ---------------------------------------------------------------------------
// Chronological split
// ---------------------------------------------------------------------------

ChronoSplit chrono_split(const std::vector<ActivityDay>& days, int k) {
    if (k < 1) throw DataError("chronological split requires k >= 1");

    std::map<std::string, std::vector<const ActivityDay*>> by_user;
    for (const ActivityDay& day : days) by_user[day.user_id].push_back(&day);

    ChronoSplit split;
    split.k = k;
    for (auto& [user, user_days] : by_user) {
        std::sort(user_days.begin(), user_days.end(),
                  [](const ActivityDay* a, const ActivityDay* b) {
                      return a->day_index < b->day_index;
                  });
        if (static_cast<int>(user_days.size()) < k + 1) {
            split.excluded_users.push_back(user);
            continue;
        }
        for (int i = 0; i < k; ++i) split.train_days.push_back(*user_days[i]);
        split.test_days.push_back(*user_days[k]);
    }
    return split;
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
    if (num_classes < 1) throw InternalError("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth < 0 || truth >= num_classes_ || predicted < 0 || predicted >= num_classes_) {
        throw InternalError("confusion matrix index out of range");
    }
    ++counts_[static_cast<std::size_t>(truth) * num_classes_ + predicted];
    ++total_;
}

std::int64_t ConfusionMatrix::count(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * num_classes_ + predicted];
}

std::int64_t ConfusionMatrix::row_total(int truth) const {
    std::int64_t sum = 0;
    for (int p = 0; p < num_classes_; ++p) sum += count(truth, p);
    return sum;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t sum = 0;
    for (int c = 0; c < num_classes_; ++c) sum += count(c, c);
    return sum;
}

double ConfusionMatrix::overall_accuracy() const {
    if (total_ == 0) throw DataError("accuracy of an empty confusion matrix");
    return static_cast<double>(trace()) / static_cast<double>(total_);
}

std::optional<double> ConfusionMatrix::class_accuracy(int truth) const {
    const std::int64_t row = row_total(truth);
    if (row == 0) return std::nullopt;
    return static_cast<double>(count(truth, truth)) / static_cast<double>(row);
}

std::string ConfusionMatrix::to_text(const std::vector<std::string>& class_names) const {
    if (static_cast<int>(class_names.size()) != num_classes_) {
        throw InternalError("class name count does not match the matrix");
    }
    std::size_t name_width = 5;
    for (const std::string& n : class_names) name_width = std::max(name_width, n.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << "truth" << std::right;
    for (int p = 0; p < num_classes_; ++p) out << std::setw(7) << ("p" + std::to_string(p));
    out << std::setw(9) << "acc%" << "\n";

    for (int t = 0; t < num_classes_; ++t) {
        out << std::left << std::setw(static_cast<int>(name_width) + 2) << class_names[t]
            << std::right;
        for (int p = 0; p < num_classes_; ++p) out << std::setw(7) << count(t, p);
        const auto acc = class_accuracy(t);
        if (acc) {
            out << std::setw(8) << std::fixed << std::setprecision(2) << (*acc * 100.0) << "%";
        } else {
            out << std::setw(9) << "-";
        }
        out << "\n";
    }
    if (total_ > 0) {
        out << "overall: " << std::fixed << std::setprecision(2) << (overall_accuracy() * 100.0)
            << "% (" << trace() << "/" << total_ << ")\n";
    }
    return out.str();
}

std::vector<std::string> fine_class_names() {
    std::vector<std::string> names;
    names.reserve(kNumLabels);
    for (int l = 0; l < kNumLabels; ++l) {
        names.emplace_back(label_name(label_from_index(l)));
    }
    return names;
}

std::vector<std::string> coarse_class_names() {
    std::vector<std::string> names;
    names.reserve(kNumCoarseLabels);
    for (int c = 0; c < kNumCoarseLabels; ++c) {
        names.emplace_back(coarse_label_name(static_cast<CoarseLabel>(c)));
    }
    return names;
}

// ---------------------------------------------------------------------------
// One-shot evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<ActivityDay> sorted_by_day_then_user(std::vector<ActivityDay> days) {
    std::sort(days.begin(), days.end(), [](const ActivityDay& a, const ActivityDay& b) {
        return std::tie(a.day_index, a.user_id) < std::tie(b.day_index, b.user_id);
    });
    return days;
}

int training_majority_label(const std::vector<ActivityDay>& days) {
    std::array<std::int64_t, kNumLabels> counts{};
    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (stop.label) ++counts[label_index(*stop.label)];
        }
    }
    int best = 0;
    for (int l = 1; l < kNumLabels; ++l) {
        if (counts[l] > counts[best]) best = l;
    }
    return best;
}

nlohmann::ordered_json confusion_json(const ConfusionMatrix& m,
                                      const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["classes"] = names;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int t = 0; t < m.num_classes(); ++t) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int p = 0; p < m.num_classes(); ++p) row.push_back(m.count(t, p));
        rows.push_back(row);
    }
    j["counts"] = rows;
    nlohmann::ordered_json accs = nlohmann::ordered_json::array();
    for (int t = 0; t < m.num_classes(); ++t) {
        const auto acc = m.class_accuracy(t);
        if (acc) {
            accs.push_back(*acc);
        } else {
            accs.push_back(nullptr);
        }
    }
    j["class_accuracy"] = accs;
    j["overall_accuracy"] = m.total() > 0 ? nlohmann::ordered_json(m.overall_accuracy())
                                          : nlohmann::ordered_json(nullptr);
    j["total"] = m.total();
    return j;
}

nlohmann::ordered_json parse_config_blob(const std::string& resolved_config_json) {
    if (resolved_config_json.empty()) return nlohmann::ordered_json::object();
    return nlohmann::ordered_json::parse(resolved_config_json);
}

}  // namespace

EvalResult evaluate(const ChronoSplit& split, const std::map<std::string, UserProfile>& profiles,
                    const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                    const ModelConfig& config) {
    if (split.test_days.empty()) throw DataError("chronological split has an empty test set");
    if (split.train_days.empty()) throw DataError("chronological split has an empty training set");

    EvalResult result;
    result.k = split.k;

    FusionModel model = train_fusion_model(split.train_days, profiles, pois, calendar, config,
                                           &result.train_report);
    UserHistory history = model.training_history();
    const int majority = training_majority_label(split.train_days);

    std::int64_t baseline_correct = 0;
    for (const ActivityDay& day : sorted_by_day_then_user(split.test_days)) {
        std::vector<StopPrediction> predictions = predict_day(model, day, history);
        for (std::size_t i = 0; i < day.stops.size(); ++i) {
            const StopPoint& stop = day.stops[i];
            if (!stop.label) continue;
            const int truth = label_index(*stop.label);
            const int predicted = label_index(predictions[i].label);
            result.fine.add(truth, predicted);
            result.coarse.add(static_cast<int>(collapse_to_4(*stop.label)),
                              static_cast<int>(collapse_to_4(predictions[i].label)));
            if (truth == majority) ++baseline_correct;
            ++result.test_stops;
        }
    }
    if (result.test_stops == 0) throw DataError("no labelled stops in the test set");
    result.majority_baseline_accuracy =
        static_cast<double>(baseline_correct) / static_cast<double>(result.test_stops);
    return result;
}

std::string eval_report_json(const EvalResult& result, const std::string& resolved_config_json) {
    nlohmann::ordered_json j;
    j["config"] = parse_config_blob(resolved_config_json);
    j["k"] = result.k;
    j["test_stops"] = result.test_stops;
    j["majority_baseline_accuracy"] = result.majority_baseline_accuracy;
    j["confusion_16"] = confusion_json(result.fine, fine_class_names());
    j["confusion_4"] = confusion_json(result.coarse, coarse_class_names());
    j["training"] = nlohmann::ordered_json::parse(result.train_report.to_json());
    return j.dump(2);
}

std::string eval_report_text(const EvalResult& result) {
    std::ostringstream out;
    out << "chronological evaluation, k = " << result.k << ", test stops = " << result.test_stops
        << "\n\n16-class confusion matrix\n"
        << result.fine.to_text(fine_class_names()) << "\n4-class confusion matrix\n"
        << result.coarse.to_text(coarse_class_names()) << "\nmajority-class baseline: "
        << std::fixed << std::setprecision(2) << (result.majority_baseline_accuracy * 100.0)
        << "%\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Streaming evaluation
// ---------------------------------------------------------------------------

StreamReport stream_evaluate(const std::vector<ActivityDay>& days,
                             const std::map<std::string, UserProfile>& profiles,
                             const std::vector<PoiRecord>& pois, const StudyCalendar& calendar,
                             const ModelConfig& config, int warmup_days) {
    if (warmup_days < 1) throw DataError("streaming evaluation needs at least one warmup day");

    std::map<int, std::vector<ActivityDay>> by_day;
    for (const ActivityDay& day : days) by_day[day.day_index].push_back(day);
    for (auto& [index, group] : by_day) {
        std::sort(group.begin(), group.end(), [](const ActivityDay& a, const ActivityDay& b) {
            return a.user_id < b.user_id;
        });
    }
    if (static_cast<int>(by_day.size()) < warmup_days + 1) {
        throw DataError("streaming evaluation needs more distinct days than the warmup");
    }

    StreamReport report;
    report.warmup_days = warmup_days;

    std::vector<ActivityDay> pool;
    std::map<std::string, int> user_training_days;
    auto fold = [&](const std::vector<ActivityDay>& group) {
        for (const ActivityDay& day : group) {
            pool.push_back(day);
            ++user_training_days[day.user_id];
        }
    };

    int distinct_seen = 0;
    std::int64_t cum_seen_cases = 0, cum_seen_correct = 0;
    std::int64_t cum_unseen_cases = 0, cum_unseen_correct = 0;
    std::map<int, std::pair<std::set<std::string>, std::pair<int, int>>> buckets;

    for (const auto& [day_index, group] : by_day) {
        if (distinct_seen < warmup_days) {
            fold(group);
            ++distinct_seen;
            continue;
        }

        FusionModel model = train_fusion_model(pool, profiles, pois, calendar, config, nullptr);
        UserHistory history = model.training_history();

        StreamDayRecord record;
        record.day_index = day_index;
        record.date = calendar.date_of(day_index);

        for (const ActivityDay& day : group) {
            const bool seen = model.seen_user(day.user_id);
            const int own_days = seen ? user_training_days.at(day.user_id) : 0;
            std::vector<StopPrediction> predictions = predict_day(model, day, history);
            for (std::size_t i = 0; i < day.stops.size(); ++i) {
                const StopPoint& stop = day.stops[i];
                if (!stop.label) continue;
                const bool correct = predictions[i].label == *stop.label;
                if (seen) {
                    ++record.seen_cases;
                    record.seen_correct += correct ? 1 : 0;
                } else {
                    ++record.unseen_cases;
                    record.unseen_correct += correct ? 1 : 0;
                }
                auto& bucket = buckets[own_days];
                bucket.first.insert(day.user_id);
                ++bucket.second.first;
                bucket.second.second += correct ? 1 : 0;
            }
        }

        cum_seen_cases += record.seen_cases;
        cum_seen_correct += record.seen_correct;
        cum_unseen_cases += record.unseen_cases;
        cum_unseen_correct += record.unseen_correct;
        if (cum_seen_cases > 0) {
            record.cumulative_seen_accuracy =
                static_cast<double>(cum_seen_correct) / static_cast<double>(cum_seen_cases);
        }
        if (cum_unseen_cases > 0) {
            record.cumulative_unseen_accuracy =
                static_cast<double>(cum_unseen_correct) / static_cast<double>(cum_unseen_cases);
        }
        if (cum_seen_cases + cum_unseen_cases > 0) {
            record.cumulative_accuracy =
                static_cast<double>(cum_seen_correct + cum_unseen_correct) /
                static_cast<double>(cum_seen_cases + cum_unseen_cases);
        }
        report.days.push_back(std::move(record));

        fold(group);
        ++distinct_seen;
    }

    for (const auto& [own_days, bucket] : buckets) {
        StreamBucket b;
        b.user_training_days = own_days;
        b.users = static_cast<int>(bucket.first.size());
        b.cases = bucket.second.first;
        b.correct = bucket.second.second;
        b.suppressed = b.users <= kBucketSuppressionUsers;
        report.buckets.push_back(b);
    }
    if (!report.days.empty()) {
        report.final_seen_accuracy = report.days.back().cumulative_seen_accuracy;
        report.final_unseen_accuracy = report.days.back().cumulative_unseen_accuracy;
    }
    return report;
}

std::string stream_report_json(const StreamReport& report,
                               const std::string& resolved_config_json) {
    nlohmann::ordered_json j;
    j["config"] = parse_config_blob(resolved_config_json);
    j["warmup_days"] = report.warmup_days;

    nlohmann::ordered_json days = nlohmann::ordered_json::array();
    for (const StreamDayRecord& d : report.days) {
        nlohmann::ordered_json e;
        e["day_index"] = d.day_index;
        e["date"] = d.date;
        e["seen_cases"] = d.seen_cases;
        e["seen_correct"] = d.seen_correct;
        e["unseen_cases"] = d.unseen_cases;
        e["unseen_correct"] = d.unseen_correct;
        e["cumulative_seen_accuracy"] =
            d.cumulative_seen_accuracy ? nlohmann::ordered_json(*d.cumulative_seen_accuracy)
                                       : nlohmann::ordered_json(nullptr);
        e["cumulative_unseen_accuracy"] =
            d.cumulative_unseen_accuracy ? nlohmann::ordered_json(*d.cumulative_unseen_accuracy)
                                         : nlohmann::ordered_json(nullptr);
        e["cumulative_accuracy"] = d.cumulative_accuracy
                                       ? nlohmann::ordered_json(*d.cumulative_accuracy)
                                       : nlohmann::ordered_json(nullptr);
        days.push_back(e);
    }
    j["days"] = days;

    // buckets backed by too few users stay out of the report
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    int suppressed = 0;
    for (const StreamBucket& b : report.buckets) {
        if (b.suppressed) {
            ++suppressed;
            continue;
        }
        nlohmann::ordered_json e;
        e["user_training_days"] = b.user_training_days;
        e["users"] = b.users;
        e["cases"] = b.cases;
        e["correct"] = b.correct;
        e["accuracy"] = b.cases > 0
                            ? nlohmann::ordered_json(static_cast<double>(b.correct) / b.cases)
                            : nlohmann::ordered_json(nullptr);
        buckets.push_back(e);
    }
    j["buckets"] = buckets;
    j["suppressed_buckets"] = suppressed;
    j["final_seen_accuracy"] = report.final_seen_accuracy
                                   ? nlohmann::ordered_json(*report.final_seen_accuracy)
                                   : nlohmann::ordered_json(nullptr);
    j["final_unseen_accuracy"] = report.final_unseen_accuracy
                                     ? nlohmann::ordered_json(*report.final_unseen_accuracy)
                                     : nlohmann::ordered_json(nullptr);
    return j.dump(2);
}

std::string stream_curves_csv(const StreamReport& report) {
    std::ostringstream out;
    out << "day_index,date,seen_cases,seen_correct,unseen_cases,unseen_correct,"
           "cumulative_seen_accuracy,cumulative_unseen_accuracy,cumulative_accuracy\n";
    out << std::setprecision(10);
    for (const StreamDayRecord& d : report.days) {
        out << d.day_index << "," << d.date << "," << d.seen_cases << "," << d.seen_correct << ","
            << d.unseen_cases << "," << d.unseen_correct << ",";
        if (d.cumulative_seen_accuracy) out << *d.cumulative_seen_accuracy;
        out << ",";
        if (d.cumulative_unseen_accuracy) out << *d.cumulative_unseen_accuracy;
        out << ",";
        if (d.cumulative_accuracy) out << *d.cumulative_accuracy;
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Parameter grids
// ---------------------------------------------------------------------------

std::vector<ModelConfig> grid_configs(const ModelConfig& base) {
    static const int kSlotWidths[] = {10, 20, 40, 60, 90, 120};
    std::vector<ModelConfig> out;
    auto push = [&](auto&& mutate) {
        for (int slot : kSlotWidths) {
            ModelConfig c = base;
            c.features.slot_width_minutes = slot;
            mutate(c);
            out.push_back(std::move(c));
        }
    };
    switch (base.quantizer.kind) {
        case QuantizerKind::Grid:
            for (double size : {200.0, 400.0, 600.0, 800.0, 1000.0}) {
                push([size](ModelConfig& c) {
                    c.quantizer.cell_width = size;
                    c.quantizer.cell_height = size;
                });
            }
            break;
        case QuantizerKind::Voronoi:
            for (int k : {100, 200, 400, 600, 800, 1000}) {
                push([k](ModelConfig& c) { c.quantizer.voronoi_k = k; });
            }
            break;
        case QuantizerKind::Circular:
            for (double radius : {100.0, 150.0, 200.0, 300.0, 400.0, 500.0}) {
                push([radius](ModelConfig& c) { c.quantizer.radius = radius; });
            }
            break;
    }
    return out;
}

}  // namespace actrec
