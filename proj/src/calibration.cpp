#include "worldmark/calibration.hpp"

#include <cmath>

#include "json.hpp"

namespace worldmark::synth {

void CalibrationProfile::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (model_id.empty())
        throw ValidationError("calibration profile needs a model id");
    if (!positive(linear_speed) || !positive(yaw_rate) || !positive(frame_rate))
        throw ValidationError("calibration values for '" + model_id +
                              "' must be positive and finite");
}

CalibrationRegistry CalibrationRegistry::with_defaults() {
    CalibrationRegistry reg;
    // Frame rates are per-model placeholders; speed and yaw rate must be
    // re-measured against the actual checkpoints before real runs.
    const struct {
        const char* id;
        double fps;
    } defaults[] = {
        {"mock", 16.0},      {"yume", 16.0},        {"matrix-game", 25.0},
        {"hy-world", 25.0},  {"hy-gamecraft", 25.0}, {"open-oasis", 20.0},
        {"genie3", 24.0},
    };
    for (const auto& d : defaults)
        reg.set({d.id, 1.0, 9.0, d.fps});
    return reg;
}

const CalibrationProfile& CalibrationRegistry::profile_for(
    const std::string& model_id) const {
    auto it = profiles_.find(model_id);
    if (it == profiles_.end()) {
        std::string known;
        for (const auto& [id, _] : profiles_) {
            if (!known.empty()) known += ", ";
            known += id;
        }
        throw LookupError("unknown model id '" + model_id +
                          "' (known profiles: " + known + ")");
    }
    return it->second;
}

bool CalibrationRegistry::has(const std::string& model_id) const {
    return profiles_.count(model_id) > 0;
}

void CalibrationRegistry::set(const CalibrationProfile& profile) {
    profile.validate();
    profiles_[profile.model_id] = profile;
}

std::vector<std::string> CalibrationRegistry::model_ids() const {
    std::vector<std::string> ids;
    ids.reserve(profiles_.size());
    for (const auto& [id, _] : profiles_) ids.push_back(id);
    return ids;
}

void CalibrationRegistry::apply_json_overrides(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("calibration overrides: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("calibration overrides must be a JSON object");
    for (const auto& [model_id, entry] : doc.items()) {
        CalibrationProfile profile =
            has(model_id) ? profile_for(model_id)
                          : CalibrationProfile{model_id, 1.0, 9.0, 16.0};
        profile.model_id = model_id;
        if (entry.contains("linear_speed"))
            profile.linear_speed = entry.at("linear_speed").get<double>();
        if (entry.contains("yaw_rate"))
            profile.yaw_rate = entry.at("yaw_rate").get<double>();
        if (entry.contains("frame_rate"))
            profile.frame_rate = entry.at("frame_rate").get<double>();
        set(profile);
    }
}

}  // namespace worldmark::synth
