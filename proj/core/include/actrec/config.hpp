#pragma once

#include <string>

#include "actrec/domain.hpp"
#include "actrec/fusion.hpp"
#include "actrec/ingest.hpp"

namespace actrec {

// Everything a run needs beyond the input files. Defaults reproduce the
// reference study setup: a 204-day calendar starting Monday 2013-03-11,
// an equirectangular plane centred on Singapore, and the model defaults
// from ModelConfig.
struct RunConfig {
    std::string start_date = "2013-03-11";
    int num_days = 204;
    double ref_lon = 103.8198;
    double ref_lat = 1.3521;
    CleaningParams cleaning = default_cleaning_params();
    ModelConfig model;
    int k_train_days = 4;
    int warmup_days = 3;

    static CleaningParams default_cleaning_params() {
        CleaningParams p;
        p.study_bounds = {-60000.0, -60000.0, 60000.0, 60000.0};
        return p;
    }
};

// Parse a config document. Every key is optional and overrides the default;
// unknown keys are rejected so typos cannot silently fall back to defaults.
// Throws DataError on malformed JSON, unknown keys, or out-of-range values.
RunConfig parse_run_config(const std::string& json_text);

// parse_run_config over the contents of `path`.
RunConfig load_run_config(const std::string& path);

// Range checks shared by file loading and CLI flag overrides.
void validate_run_config(const RunConfig& config);

// The fully resolved config as a stable, indented JSON document. Reports and
// model bundles embed this string for provenance; parse_run_config round-trips
// it.
std::string run_config_json(const RunConfig& config);

StudyCalendar calendar_of(const RunConfig& config);
Projection projection_of(const RunConfig& config);

}  // namespace actrec
