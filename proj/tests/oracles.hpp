// Independent brute-force recomputations of every feature statistic. These
// deliberately share no code with PopulationStats: everything is a flat scan
// over the raw inputs, so agreement is meaningful evidence.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/features.hpp"
#include "actrec/fusion.hpp"
#include "actrec/ingest.hpp"
#include "actrec/quantize.hpp"

namespace oracle {

using namespace actrec;

struct Candidate {
    double x = 0.0;
    double y = 0.0;
    int label = -1;
};

inline std::vector<Candidate> labelled_stops(const std::vector<ActivityDay>& days) {
    std::vector<Candidate> out;
    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (stop.label) out.push_back({stop.x, stop.y, label_index(*stop.label)});
        }
    }
    return out;
}

inline std::vector<Candidate> mapped_pois(const std::vector<PoiRecord>& pois) {
    std::vector<Candidate> out;
    for (const PoiRecord& poi : pois) {
        if (poi.mapped_label) out.push_back({poi.x, poi.y, label_index(*poi.mapped_label)});
    }
    return out;
}

// members of the query's bin: same fixed cell, or within the circular radius
inline std::vector<Candidate> bin_members(const std::vector<Candidate>& candidates,
                                          const Quantizer& quantizer, double qx, double qy) {
    std::vector<Candidate> members;
    if (quantizer.is_fixed()) {
        const std::int64_t cell = quantizer.cell_of(qx, qy);
        for (const Candidate& c : candidates) {
            if (quantizer.cell_of(c.x, c.y) == cell) members.push_back(c);
        }
    } else {
        const double radius = quantizer.circular_params().radius;
        for (const Candidate& c : candidates) {
            if (euclidean_distance(qx, qy, c.x, c.y) <= radius) members.push_back(c);
        }
    }
    return members;
}

inline LabelVector normalized_histogram(const std::vector<Candidate>& members) {
    std::array<std::int64_t, kNumLabels> counts{};
    for (const Candidate& c : members) ++counts[c.label];
    LabelVector out{};
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    if (total == 0) return out;
    for (int l = 0; l < kNumLabels; ++l) {
        out[l] = static_cast<double>(counts[l]) / static_cast<double>(total);
    }
    return out;
}

// empirical label frequency of a spatial bin
inline LabelVector spatial_frequency(const std::vector<ActivityDay>& days,
                                     const Quantizer& quantizer, double qx, double qy) {
    return normalized_histogram(bin_members(labelled_stops(days), quantizer, qx, qy));
}

// empirical label frequency of the POI context bin
inline LabelVector contextual_frequency(const std::vector<PoiRecord>& pois,
                                        const Quantizer& quantizer, double qx, double qy) {
    return normalized_histogram(bin_members(mapped_pois(pois), quantizer, qx, qy));
}

// empirical label frequency over the canonical (day type, slot-of-day) keys
// covered by a stop;
// a training stop contributes once to every canonical key it covers
inline LabelVector temporal_frequency(const std::vector<ActivityDay>& days,
                                      const StudyCalendar& calendar, int slot_width_minutes,
                                      std::int64_t q_start, std::int64_t q_end) {
    const auto canon = [&](std::int64_t t0, std::int64_t t1) {
        std::set<std::pair<int, int>> keys;  // (day type, slot-of-day)
        for (const TimeSlot& s : time_slots(t0, t1, slot_width_minutes, calendar)) {
            if (s.day_index < 0 || s.day_index >= calendar.num_days()) continue;
            keys.emplace(static_cast<int>(calendar.day_type(s.day_index)), s.slot_index);
        }
        return keys;
    };
    const auto query_keys = canon(q_start, q_end);

    std::array<std::int64_t, kNumLabels> counts{};
    std::int64_t total = 0;
    for (const auto& key : query_keys) {
        for (const ActivityDay& day : days) {
            for (const StopPoint& stop : day.stops) {
                if (!stop.label) continue;
                if (canon(stop.t_start, stop.t_end).count(key) > 0) {
                    ++counts[label_index(*stop.label)];
                    ++total;
                }
            }
        }
    }
    LabelVector out{};
    if (total == 0) return out;
    for (int l = 0; l < kNumLabels; ++l) {
        out[l] = static_cast<double>(counts[l]) / static_cast<double>(total);
    }
    return out;
}

// neighbor confidence: per label, phi of the min query-to-candidate distance
// normalized by the max pairwise candidate distance in the bin
inline LabelVector neighbor_confidence(const std::vector<Candidate>& candidates,
                                       const Quantizer& quantizer, double qx, double qy) {
    LabelVector out{};
    std::vector<Candidate> members = bin_members(candidates, quantizer, qx, qy);
    if (quantizer.is_fixed() && members.empty()) return out;

    double normalizer = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            normalizer = std::max(normalizer, euclidean_distance(members[i].x, members[i].y,
                                                                 members[j].x, members[j].y));
        }
    }
    for (int l = 0; l < kNumLabels; ++l) {
        double dmin = std::numeric_limits<double>::infinity();
        for (const Candidate& c : members) {
            if (c.label == l) {
                dmin = std::min(dmin, euclidean_distance(qx, qy, c.x, c.y));
            }
        }
        if (!std::isfinite(dmin)) {
            out[l] = 0.0;
        } else {
            const double d = normalizer > 0.0 ? dmin / normalizer : 0.0;
            out[l] = 1.0 / (1.0 + d * d);
        }
    }
    return out;
}

inline LabelVector historical_confidence(const std::vector<ActivityDay>& days,
                                         const Quantizer& quantizer, double qx, double qy) {
    return neighbor_confidence(labelled_stops(days), quantizer, qx, qy);
}

inline LabelVector contextual_confidence(const std::vector<PoiRecord>& pois,
                                         const Quantizer& quantizer, double qx, double qy) {
    return neighbor_confidence(mapped_pois(pois), quantizer, qx, qy);
}

// validated previous activity: latest t_end <= t_query within 24 h; ties on
// t_end resolve to the latest-scanned stop, matching insertion order
inline std::optional<ActivityLabel> previous_label(const std::vector<ActivityDay>& days,
                                                   const std::string& user_id,
                                                   std::int64_t t_query) {
    std::optional<ActivityLabel> best;
    std::int64_t best_end = std::numeric_limits<std::int64_t>::min();
    for (const ActivityDay& day : days) {
        if (day.user_id != user_id) continue;
        for (const StopPoint& stop : day.stops) {
            if (!stop.label) continue;
            if (stop.t_end <= t_query && t_query - stop.t_end <= 24 * 3600 &&
                stop.t_end >= best_end) {
                best_end = stop.t_end;
                best = stop.label;
            }
        }
    }
    return best;
}

// first-order transition counts per day type, sources found with the
// same validated-history rule used at query time
inline TransitionMatrices transition_counts(const std::vector<ActivityDay>& days,
                                            const StudyCalendar& calendar) {
    TransitionMatrices matrices;
    for (const ActivityDay& day : days) {
        for (const StopPoint& stop : day.stops) {
            if (!stop.label) continue;
            const auto prev = previous_label(days, day.user_id, stop.t_start);
            if (!prev) continue;
            const DayType dt = calendar.day_type(calendar.day_index_of(stop.t_start));
            matrices.add(dt, *prev, *stop.label);
        }
    }
    return matrices;
}

inline LabelVector transition_feature(const std::vector<ActivityDay>& days,
                                      const StudyCalendar& calendar,
                                      std::optional<ActivityLabel> prev, DayType day_type) {
    if (!prev) return TransitionMatrices::uniform_row();
    return transition_counts(days, calendar).row(day_type, *prev);
}

inline std::array<double, 2> core_distances(const std::vector<ActivityDay>& days,
                                            const UserProfile& profile, double study_diameter_km,
                                            double qx, double qy) {
    const double home_km =
        euclidean_distance(qx, qy, profile.home_x, profile.home_y) / 1000.0;
    if (profile.has_work()) {
        return {home_km,
                euclidean_distance(qx, qy, *profile.work_x, *profile.work_y) / 1000.0};
    }
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (const ActivityDay& day : days) {
        if (day.user_id != profile.user_id) continue;
        for (const StopPoint& stop : day.stops) {
            if (stop.label && *stop.label == ActivityLabel::Work) {
                sx += stop.x;
                sy += stop.y;
                ++n;
            }
        }
    }
    if (n == 0) return {home_km, study_diameter_km};
    return {home_km, euclidean_distance(qx, qy, sx / n, sy / n) / 1000.0};
}

// the full 6L+3 vector, assembled from the oracle pieces above
inline std::vector<double> assemble(const std::vector<ActivityDay>& days,
                                    const std::vector<PoiRecord>& pois,
                                    const Quantizer& quantizer, const StudyCalendar& calendar,
                                    const FeatureConfig& config, const StopPoint& stop,
                                    const UserProfile& profile,
                                    std::optional<ActivityLabel> prev) {
    std::vector<double> features(kFeatureDim, 0.0);
    const auto put = [&](int offset, const LabelVector& block) {
        for (int l = 0; l < kNumLabels; ++l) features[offset + l] = block[l];
    };
    put(kTemporalOffset, temporal_frequency(days, calendar, config.slot_width_minutes,
                                            stop.t_start, stop.t_end));
    put(kSpatialOffset, spatial_frequency(days, quantizer, stop.x, stop.y));
    put(kContextualOffset, contextual_frequency(pois, quantizer, stop.x, stop.y));
    const DayType dt = calendar.day_type(calendar.day_index_of(stop.t_start));
    put(kTransitionOffset, transition_feature(days, calendar, prev, dt));
    put(kHistoricalConfOffset, historical_confidence(days, quantizer, stop.x, stop.y));
    put(kContextualConfOffset, contextual_confidence(pois, quantizer, stop.x, stop.y));
    const auto core = core_distances(days, profile, config.study_diameter_km, stop.x, stop.y);
    features[kCoreDistanceOffset] = core[0];
    features[kCoreDistanceOffset + 1] = core[1];
    features[kDurationOffset] = stop.duration_hours();
    return features;
}

// weighted majority voting by explicit weighted one-hot sum
inline ActivityLabel wmv(const std::array<int, kNumPopulationKinds>& decisions,
                         const std::array<double, kNumPopulationKinds>& weights) {
    std::array<double, kNumLabels> score{};
    for (int t = 0; t < kNumPopulationKinds; ++t) {
        if (decisions[t] >= 0) score[decisions[t]] += weights[t];
    }
    int best = 0;
    for (int l = 1; l < kNumLabels; ++l) {
        if (score[l] > score[best]) best = l;
    }
    return label_from_index(best);
}

}  // namespace oracle
