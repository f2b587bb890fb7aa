#pragma once

// Unified action interface: translates canonical action sequences into each
// model's native control payload. One adapter per supported model; adding a
// model means adding one adapter.
//
// The concrete caption wording, button names, action-call names and vector
// index assignments are documented constants verified against the mock
// interpreter; deployments against real checkpoints are expected to adjust
// them per model.

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "worldmark/actions.hpp"
#include "worldmark/calibration.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::adapters {

// ── Payload variants ─────────────────────────────────────────────────────────

struct CaptionPrompt {
    std::string text;
};

/// Per-frame 6-DoF poses, optionally strided to the model's latent timescale.
struct PoseStream {
    geom::Trajectory poses;
    size_t stride = 1;
};

/// Deferred Plucker ray stream: poses + intrinsics, expanded to per-pixel
/// (direction, moment) maps on demand (see plucker.hpp). A fully expanded
/// 60 s 480p stream is gigabytes; the deferred form is the wire format.
struct PluckerStream {
    geom::Trajectory poses;
    geom::CameraIntrinsics intrinsics;
};

struct GamepadEvent {
    std::string button;
    bool press = true;  // false = release
    double time = 0.0;  // seconds
};

struct GamepadScript {
    std::vector<GamepadEvent> events;  // time-sorted, non-overlapping per button
};

struct ActionCall {
    std::string name;  // move_forward|move_back|move_left|move_right|rotate_left|rotate_right
    size_t start_frame = 0;
    size_t end_frame = 0;  // exclusive
};

struct ActionCallScript {
    std::vector<ActionCall> calls;
    double frame_rate = 0.0;
};

constexpr size_t kActionVectorDim = 25;

/// Index assignments within the 25-dim vector; everything else stays 0.
enum VectorIndex : size_t {
    kVecForward = 0,
    kVecBackward = 1,
    kVecStrafeLeft = 2,
    kVecStrafeRight = 3,
    kVecYawLeft = 4,
    kVecYawRight = 5,
};

struct ActionVectorStream {
    std::vector<std::array<double, kActionVectorDim>> vectors;  // one per step
    double frame_rate = 0.0;
};

struct NativeActionPayload {
    std::string model_id;
    std::variant<CaptionPrompt, PoseStream, PluckerStream, GamepadScript,
                 ActionCallScript, ActionVectorStream>
        value;

    /// Stable format tag used in serialized envelopes.
    std::string format() const;
};

// ── Adapters ─────────────────────────────────────────────────────────────────

/// Deterministic English template, one sentence per segment
/// ("Move forward for 20 seconds. Then turn the camera to the right for
/// 20 seconds."). Invertible by parse_caption.
CaptionPrompt to_caption(const actions::ActionSequence& seq);

/// Inverse of to_caption; throws ParseError on text that does not match the
/// templates.
actions::ActionSequence parse_caption(const std::string& text);

/// Ground-truth trajectory re-expressed as per-frame poses, subsampled by
/// `stride` (first pose always included). Throws ValidationError when
/// stride >= trajectory length.
PoseStream to_pose_stream(const actions::ActionSequence& seq,
                          const synth::CalibrationProfile& calib,
                          size_t stride = 1);

PluckerStream to_plucker(const PoseStream& stream,
                         const geom::CameraIntrinsics& intrinsics);

/// One press at segment start, one release at segment end, per primitive.
GamepadScript to_gamepad(const actions::ActionSequence& seq,
                         const synth::CalibrationProfile& calib);

/// One call descriptor per segment over contiguous frame ranges at the
/// profile frame rate.
ActionCallScript to_action_calls(const actions::ActionSequence& seq,
                                 const synth::CalibrationProfile& calib);

/// One 25-dim vector per motion step; the active component set to 1.
ActionVectorStream to_action_vectors(const actions::ActionSequence& seq,
                                     const synth::CalibrationProfile& calib);

/// Gamepad button for a primitive (movement on the left stick, camera on
/// the right stick).
std::string gamepad_button(actions::Kind kind);
actions::Kind kind_from_button(const std::string& button);

std::string action_call_name(actions::Kind kind);
actions::Kind kind_from_call_name(const std::string& name);

size_t vector_index(actions::Kind kind);

// ── Registry / dispatch ──────────────────────────────────────────────────────

class AdapterRegistry {
public:
    /// The six supported models plus the built-in mock (PoseStream).
    static AdapterRegistry with_defaults();

    using AdapterFn = NativeActionPayload (*)(const actions::ActionSequence&,
                                              const synth::CalibrationProfile&,
                                              const geom::CameraIntrinsics&);

    /// Throws ValidationError when `model_id` is already registered.
    void register_adapter(const std::string& model_id, AdapterFn fn);
    bool has(const std::string& model_id) const;
    std::vector<std::string> model_ids() const;

    NativeActionPayload map(const std::string& model_id,
                            const actions::ActionSequence& seq,
                            const synth::CalibrationProfile& calib,
                            const geom::CameraIntrinsics& intrinsics) const;

private:
    std::vector<std::pair<std::string, AdapterFn>> adapters_;
};

// ── Serialization ────────────────────────────────────────────────────────────

/// File name for a case-directory payload: "action.<model>.traj" for pose
/// streams, "action.<model>.json" otherwise.
std::string payload_filename(const NativeActionPayload& payload);

/// Deterministic bytes (golden-file stable).
std::string serialize_payload(const NativeActionPayload& payload);

/// Inverse of serialize_payload. `filename` selects the container format.
NativeActionPayload parse_payload(const std::string& bytes,
                                  const std::string& filename,
                                  double frame_rate_hint);

}  // namespace worldmark::adapters
