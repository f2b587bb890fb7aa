#pragma once

// Per-model calibration: linear speed, yaw rate and frame rate. These make
// the time-based canonical actions semantically equivalent across models.

#include <map>
#include <string>
#include <vector>

#include "worldmark/common.hpp"

namespace worldmark::synth {

struct CalibrationProfile {
    std::string model_id;
    double linear_speed = 1.0;  // m/s, > 0
    double yaw_rate = 9.0;      // deg/s, > 0
    double frame_rate = 16.0;   // Hz, > 0

    void validate() const;  // throws ValidationError
};

class CalibrationRegistry {
public:
    /// Registry preloaded with the six supported models plus "mock".
    /// Speeds and yaw rates are uncalibrated defaults (1 m/s, 9 deg/s);
    /// users measuring real checkpoints should override them via the
    /// config file.
    static CalibrationRegistry with_defaults();

    /// Throws LookupError listing the known ids.
    const CalibrationProfile& profile_for(const std::string& model_id) const;

    bool has(const std::string& model_id) const;
    void set(const CalibrationProfile& profile);  // insert or replace
    std::vector<std::string> model_ids() const;

    /// Merge overrides from a JSON object:
    ///   { "model": {"linear_speed": .., "yaw_rate": .., "frame_rate": ..} }
    /// Missing fields keep the registered (or default) value.
    void apply_json_overrides(const std::string& json_text);

private:
    std::map<std::string, CalibrationProfile> profiles_;
};

}  // namespace worldmark::synth
