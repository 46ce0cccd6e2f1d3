#pragma once

#include <string>

#include "actrec/fusion.hpp"

namespace actrec {

inline constexpr int kBundleFormatVersion = 1;

struct ModelBundle {
    FusionModel model;
    std::string resolved_config_json;  // run config echoed for provenance
};

// One JSON document holding everything prediction needs: config, calendar,
// quantizer geometry, profiles, POIs, per-population count tables and
// forests, and the stacking meta-ensembles. Count tables serialize raw
// counts; derived spatial indexes are rebuilt on load. Serialization is
// byte-deterministic for a given model.
std::string model_bundle_json(const FusionModel& model, const std::string& resolved_config_json);

void save_model_bundle(const std::string& path, const FusionModel& model,
                       const std::string& resolved_config_json);

// Throws DataError on malformed documents or an unsupported format_version.
ModelBundle parse_model_bundle(const std::string& json_text);
ModelBundle load_model_bundle(const std::string& path);

}  // namespace actrec
