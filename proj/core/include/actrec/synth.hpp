#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "actrec/domain.hpp"

namespace actrec {

struct SynthConfig {
    int num_users = 50;
    int num_days = 10;
    std::string start_date = "2013-03-11";  // a Monday
    std::uint64_t seed = 1;
    // share of users whose first recorded day falls after the study start, so
    // that streaming evaluation keeps meeting unseen users
    double unseen_fraction = 0.2;
};

struct SynthResult {
    StudyCalendar calendar;
    std::vector<StopPoint> stops;  // ordered by (user, day, start time)
    std::vector<UserProfile> profiles;
    std::vector<PoiRecord> pois;
    // raw category -> canonical activity name; unmapped categories absent
    std::map<std::string, std::string> poi_mapping;
    // generative parameters + roster-conditional expectations, including
    // "bayes_rate" and "label_marginal" used by the benchmark oracles
    std::string truth_json;
};

// Synthetic travel-survey city. Venues sit on a jittered super-grid at least
// 700 m apart; every stop's label is drawn from an emission table keyed by
// (venue type, gender, age band) and is conditionally independent of time,
// duration, and history given that key, which makes the Bayes-optimal
// accuracy an analytic function of the emitted parameters. Every generated
// day satisfies the cleaning rules by construction. Output is byte-stable
// for a given config.
SynthResult generate_city(const SynthConfig& config, const Projection& projection);

}  // namespace actrec
