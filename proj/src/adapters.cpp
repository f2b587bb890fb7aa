#include "worldmark/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "worldmark/synthesis.hpp"
#include "worldmark/trajectory_io.hpp"

namespace worldmark::adapters {

using actions::ActionSequence;
using actions::Kind;
using nlohmann::json;
using synth::CalibrationProfile;

std::string NativeActionPayload::format() const {
    struct Visitor {
        std::string operator()(const CaptionPrompt&) { return "caption_prompt"; }
        std::string operator()(const PoseStream&) { return "pose_stream"; }
        std::string operator()(const PluckerStream&) { return "plucker_stream"; }
        std::string operator()(const GamepadScript&) { return "gamepad_script"; }
        std::string operator()(const ActionCallScript&) { return "action_call_script"; }
        std::string operator()(const ActionVectorStream&) { return "action_vector_stream"; }
    };
    return std::visit(Visitor{}, value);
}

// ── Captions ─────────────────────────────────────────────────────────────────

namespace {

std::string caption_phrase(Kind k) {
    switch (k) {
        case Kind::Forward: return "move forward";
        case Kind::Backward: return "move backward";
        case Kind::StrafeLeft: return "strafe left";
        case Kind::StrafeRight: return "strafe right";
        case Kind::YawLeft: return "turn the camera to the left";
        case Kind::YawRight: return "turn the camera to the right";
    }
    throw ValidationError("invalid action kind");
}

std::string duration_phrase(double seconds) {
    std::string num = format_double(seconds);
    return num + (num == "1" ? " second" : " seconds");
}

}  // namespace

CaptionPrompt to_caption(const ActionSequence& seq) {
    if (seq.segments.empty())
        throw ValidationError("cannot caption an empty action sequence");
    std::string text;
    for (size_t i = 0; i < seq.segments.size(); ++i) {
        std::string fragment = caption_phrase(seq.segments[i].kind) + " for " +
                               duration_phrase(seq.segments[i].duration);
        if (i == 0) {
            fragment[0] = static_cast<char>(
                std::toupper(static_cast<unsigned char>(fragment[0])));
            text += fragment;
        } else {
            text += " Then " + fragment;
        }
        text += '.';
    }
    return {text};
}

ActionSequence parse_caption(const std::string& text) {
    static const std::pair<const char*, Kind> phrases[] = {
        {"move forward for ", Kind::Forward},
        {"move backward for ", Kind::Backward},
        {"strafe left for ", Kind::StrafeLeft},
        {"strafe right for ", Kind::StrafeRight},
        {"turn the camera to the left for ", Kind::YawLeft},
        {"turn the camera to the right for ", Kind::YawRight},
    };

    ActionSequence seq;
    std::string body = trim(text);
    if (body.empty()) throw ParseError("empty caption");

    size_t pos = 0;
    while (pos < body.size()) {
        size_t end = body.find(". ", pos);
        std::string sentence = (end == std::string::npos)
                                   ? body.substr(pos)
                                   : body.substr(pos, end - pos + 1);
        pos = (end == std::string::npos) ? body.size() : end + 2;

        sentence = trim(sentence);
        if (sentence.empty()) continue;
        if (sentence.back() != '.')
            throw ParseError("caption sentence missing terminator: " + sentence);
        sentence.pop_back();
        if (sentence.rfind("Then ", 0) == 0) sentence = sentence.substr(5);
        if (!sentence.empty())
            sentence[0] = static_cast<char>(
                std::tolower(static_cast<unsigned char>(sentence[0])));

        bool matched = false;
        for (const auto& [phrase, kind] : phrases) {
            if (sentence.rfind(phrase, 0) != 0) continue;
            std::string tail = sentence.substr(std::string(phrase).size());
            std::string num;
            if (tail.size() > 8 && tail.substr(tail.size() - 8) == " seconds")
                num = tail.substr(0, tail.size() - 8);
            else if (tail.size() > 7 && tail.substr(tail.size() - 7) == " second")
                num = tail.substr(0, tail.size() - 7);
            else
                throw ParseError("caption sentence missing duration: " + sentence);
            char* endp = nullptr;
            double duration = std::strtod(num.c_str(), &endp);
            if (endp != num.c_str() + num.size() || num.empty())
                throw ParseError("caption duration is not a number: " + num);
            if (!(duration > 0.0) || !std::isfinite(duration))
                throw ValidationError("caption duration must be > 0");
            seq.segments.push_back({kind, duration});
            matched = true;
            break;
        }
        if (!matched)
            throw ParseError("unrecognized caption sentence: " + sentence);
    }
    if (seq.segments.empty()) throw ParseError("caption encodes no actions");
    seq.tier = seq.segments.size() == 1   ? actions::Tier::Easy
               : seq.segments.size() == 2 ? actions::Tier::Medium
                                          : actions::Tier::Hard;
    return seq;
}

// ── Pose / Plucker streams ───────────────────────────────────────────────────

PoseStream to_pose_stream(const ActionSequence& seq,
                          const CalibrationProfile& calib, size_t stride) {
    geom::Trajectory full = synth::synthesize(seq, calib);
    if (stride == 0) throw ValidationError("pose-stream stride must be >= 1");
    if (stride >= full.size())
        throw ValidationError("pose-stream stride " + std::to_string(stride) +
                              " >= trajectory length " +
                              std::to_string(full.size()));
    if (stride == 1) return {std::move(full), 1};
    geom::Trajectory strided;
    strided.frame_rate = full.frame_rate / static_cast<double>(stride);
    for (size_t i = 0; i < full.size(); i += stride)
        strided.poses.push_back(full.poses[i]);
    return {std::move(strided), stride};
}

PluckerStream to_plucker(const PoseStream& stream,
                         const geom::CameraIntrinsics& intrinsics) {
    intrinsics.validate();
    return {stream.poses, intrinsics};
}

// ── Gamepad / action-call / vector scripts ───────────────────────────────────

std::string gamepad_button(Kind kind) {
    switch (kind) {
        case Kind::Forward: return "left_stick_up";
        case Kind::Backward: return "left_stick_down";
        case Kind::StrafeLeft: return "left_stick_left";
        case Kind::StrafeRight: return "left_stick_right";
        case Kind::YawLeft: return "right_stick_left";
        case Kind::YawRight: return "right_stick_right";
    }
    throw ValidationError("invalid action kind");
}

Kind kind_from_button(const std::string& button) {
    for (Kind k : {Kind::Forward, Kind::Backward, Kind::StrafeLeft,
                   Kind::StrafeRight, Kind::YawLeft, Kind::YawRight})
        if (gamepad_button(k) == button) return k;
    throw ParseError("unknown gamepad button: " + button);
}

std::string action_call_name(Kind kind) {
    switch (kind) {
        case Kind::Forward: return "move_forward";
        case Kind::Backward: return "move_back";
        case Kind::StrafeLeft: return "move_left";
        case Kind::StrafeRight: return "move_right";
        case Kind::YawLeft: return "rotate_left";
        case Kind::YawRight: return "rotate_right";
    }
    throw ValidationError("invalid action kind");
}

Kind kind_from_call_name(const std::string& name) {
    for (Kind k : {Kind::Forward, Kind::Backward, Kind::StrafeLeft,
                   Kind::StrafeRight, Kind::YawLeft, Kind::YawRight})
        if (action_call_name(k) == name) return k;
    throw ParseError("unknown action call: " + name);
}

size_t vector_index(Kind kind) {
    switch (kind) {
        case Kind::Forward: return kVecForward;
        case Kind::Backward: return kVecBackward;
        case Kind::StrafeLeft: return kVecStrafeLeft;
        case Kind::StrafeRight: return kVecStrafeRight;
        case Kind::YawLeft: return kVecYawLeft;
        case Kind::YawRight: return kVecYawRight;
    }
    throw ValidationError("invalid action kind");
}

GamepadScript to_gamepad(const ActionSequence& seq,
                         const CalibrationProfile& calib) {
    calib.validate();
    if (seq.segments.empty())
        throw ValidationError("cannot script an empty action sequence");
    GamepadScript script;
    double cursor = 0.0;
    for (const auto& seg : seq.segments) {
        std::string button = gamepad_button(seg.kind);
        script.events.push_back({button, true, cursor});
        cursor += seg.duration;
        script.events.push_back({button, false, cursor});
    }
    return script;
}

ActionCallScript to_action_calls(const ActionSequence& seq,
                                 const CalibrationProfile& calib) {
    calib.validate();
    if (seq.segments.empty())
        throw ValidationError("cannot script an empty action sequence");
    ActionCallScript script;
    script.frame_rate = calib.frame_rate;
    double cursor = 0.0;
    for (const auto& seg : seq.segments) {
        auto start = static_cast<size_t>(std::llround(cursor * calib.frame_rate));
        cursor += seg.duration;
        auto end = static_cast<size_t>(std::llround(cursor * calib.frame_rate));
        script.calls.push_back({action_call_name(seg.kind), start, end});
    }
    return script;
}

ActionVectorStream to_action_vectors(const ActionSequence& seq,
                                     const CalibrationProfile& calib) {
    calib.validate();
    if (seq.segments.empty())
        throw ValidationError("cannot script an empty action sequence");
    ActionVectorStream stream;
    stream.frame_rate = calib.frame_rate;
    const double dt = 1.0 / calib.frame_rate;
    const auto steps = static_cast<size_t>(
        std::llround(seq.total_duration() * calib.frame_rate));
    stream.vectors.reserve(steps);
    for (size_t i = 0; i < steps; ++i) {
        std::array<double, kActionVectorDim> vec{};
        Kind kind = synth::active_kind(seq, static_cast<double>(i) * dt);
        vec[vector_index(kind)] = 1.0;
        stream.vectors.push_back(vec);
    }
    return stream;
}

// ── Registry ─────────────────────────────────────────────────────────────────

namespace {

NativeActionPayload adapt_caption(const ActionSequence& seq,
                                  const CalibrationProfile&,
                                  const geom::CameraIntrinsics&) {
    return {"", to_caption(seq)};
}

NativeActionPayload adapt_pose_stream(const ActionSequence& seq,
                                      const CalibrationProfile& calib,
                                      const geom::CameraIntrinsics&) {
    return {"", to_pose_stream(seq, calib, 1)};
}

NativeActionPayload adapt_plucker(const ActionSequence& seq,
                                  const CalibrationProfile& calib,
                                  const geom::CameraIntrinsics& intrinsics) {
    return {"", to_plucker(to_pose_stream(seq, calib, 1), intrinsics)};
}

NativeActionPayload adapt_gamepad(const ActionSequence& seq,
                                  const CalibrationProfile& calib,
                                  const geom::CameraIntrinsics&) {
    return {"", to_gamepad(seq, calib)};
}

NativeActionPayload adapt_action_calls(const ActionSequence& seq,
                                       const CalibrationProfile& calib,
                                       const geom::CameraIntrinsics&) {
    return {"", to_action_calls(seq, calib)};
}

NativeActionPayload adapt_action_vectors(const ActionSequence& seq,
                                         const CalibrationProfile& calib,
                                         const geom::CameraIntrinsics&) {
    return {"", to_action_vectors(seq, calib)};
}

}  // namespace

AdapterRegistry AdapterRegistry::with_defaults() {
    AdapterRegistry reg;
    reg.register_adapter("yume", &adapt_caption);
    reg.register_adapter("hy-world", &adapt_pose_stream);
    reg.register_adapter("hy-gamecraft", &adapt_plucker);
    reg.register_adapter("genie3", &adapt_gamepad);
    reg.register_adapter("matrix-game", &adapt_action_calls);
    reg.register_adapter("open-oasis", &adapt_action_vectors);
    reg.register_adapter("mock", &adapt_pose_stream);
    return reg;
}

void AdapterRegistry::register_adapter(const std::string& model_id,
                                       AdapterFn fn) {
    if (has(model_id))
        throw ValidationError("adapter already registered for model '" +
                              model_id + "'");
    adapters_.emplace_back(model_id, fn);
}

bool AdapterRegistry::has(const std::string& model_id) const {
    return std::any_of(adapters_.begin(), adapters_.end(),
                       [&](const auto& p) { return p.first == model_id; });
}

std::vector<std::string> AdapterRegistry::model_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : adapters_) ids.push_back(id);
    return ids;
}

NativeActionPayload AdapterRegistry::map(
    const std::string& model_id, const ActionSequence& seq,
    const CalibrationProfile& calib,
    const geom::CameraIntrinsics& intrinsics) const {
    for (const auto& [id, fn] : adapters_) {
        if (id != model_id) continue;
        NativeActionPayload payload = fn(seq, calib, intrinsics);
        payload.model_id = model_id;
        return payload;
    }
    throw LookupError("no adapter registered for model '" + model_id + "'");
}

// ── Serialization ────────────────────────────────────────────────────────────

std::string payload_filename(const NativeActionPayload& payload) {
    const bool traj = std::holds_alternative<PoseStream>(payload.value);
    return "action." + payload.model_id + (traj ? ".traj" : ".json");
}

namespace {

json poses_to_json(const geom::Trajectory& traj) {
    json rows = json::array();
    for (const auto& p : traj.poses) {
        rows.push_back({p.timestamp, p.translation[0], p.translation[1],
                        p.translation[2], p.rotation.x, p.rotation.y,
                        p.rotation.z, p.rotation.w});
    }
    return rows;
}

geom::Trajectory poses_from_json(const json& rows, double frame_rate) {
    geom::Trajectory traj;
    traj.frame_rate = frame_rate;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != 8)
            throw ParseError("pose row must have 8 numbers");
        geom::Rotation rot(row[7].get<double>(), row[4].get<double>(),
                           row[5].get<double>(), row[6].get<double>());
        traj.poses.push_back(geom::Pose(
            rot, {row[1].get<double>(), row[2].get<double>(), row[3].get<double>()},
            row[0].get<double>()));
    }
    return traj;
}

}  // namespace

std::string serialize_payload(const NativeActionPayload& payload) {
    if (const auto* stream = std::get_if<PoseStream>(&payload.value))
        return geom::serialize_trajectory(stream->poses);

    json doc;
    doc["format"] = payload.format();
    doc["model_id"] = payload.model_id;
    if (const auto* caption = std::get_if<CaptionPrompt>(&payload.value)) {
        doc["text"] = caption->text;
    } else if (const auto* plucker = std::get_if<PluckerStream>(&payload.value)) {
        doc["intrinsics"] = {{"fx", plucker->intrinsics.fx},
                             {"fy", plucker->intrinsics.fy},
                             {"cx", plucker->intrinsics.cx},
                             {"cy", plucker->intrinsics.cy},
                             {"width", plucker->intrinsics.width},
                             {"height", plucker->intrinsics.height}};
        doc["poses"] = poses_to_json(plucker->poses);
        doc["frame_rate"] = plucker->poses.frame_rate;
        doc["expansion"] = "deferred";
    } else if (const auto* pad = std::get_if<GamepadScript>(&payload.value)) {
        json events = json::array();
        for (const auto& ev : pad->events)
            events.push_back({{"button", ev.button},
                              {"type", ev.press ? "press" : "release"},
                              {"time", ev.time}});
        doc["events"] = events;
    } else if (const auto* calls = std::get_if<ActionCallScript>(&payload.value)) {
        json list = json::array();
        for (const auto& call : calls->calls)
            list.push_back({{"name", call.name},
                            {"start_frame", call.start_frame},
                            {"end_frame", call.end_frame}});
        doc["calls"] = list;
        doc["frame_rate"] = calls->frame_rate;
    } else if (const auto* vecs = std::get_if<ActionVectorStream>(&payload.value)) {
        json list = json::array();
        for (const auto& vec : vecs->vectors)
            list.push_back(std::vector<double>(vec.begin(), vec.end()));
        doc["vectors"] = list;
        doc["frame_rate"] = vecs->frame_rate;
        doc["dim"] = kActionVectorDim;
    }
    return doc.dump(2) + "\n";
}

NativeActionPayload parse_payload(const std::string& bytes,
                                  const std::string& filename,
                                  double frame_rate_hint) {
    // action.<model>.<ext>
    auto parts = split(filename, '.');
    std::string model_id = parts.size() >= 3 ? parts[parts.size() - 2] : "";

    if (filename.size() > 5 && filename.substr(filename.size() - 5) == ".traj") {
        std::istringstream in(bytes);
        geom::Trajectory traj =
            geom::parse_trajectory(in, frame_rate_hint, filename);
        return {model_id, PoseStream{std::move(traj), 1}};
    }

    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        throw ParseError(filename + ": " + e.what());
    }
    const std::string format = doc.at("format").get<std::string>();
    if (doc.contains("model_id")) model_id = doc.at("model_id").get<std::string>();

    if (format == "caption_prompt")
        return {model_id, CaptionPrompt{doc.at("text").get<std::string>()}};
    if (format == "plucker_stream") {
        const auto& k = doc.at("intrinsics");
        geom::CameraIntrinsics intr{
            k.at("fx").get<double>(),     k.at("fy").get<double>(),
            k.at("cx").get<double>(),     k.at("cy").get<double>(),
            k.at("width").get<int>(),     k.at("height").get<int>()};
        intr.validate();
        double fps = doc.value("frame_rate", frame_rate_hint);
        return {model_id, PluckerStream{poses_from_json(doc.at("poses"), fps), intr}};
    }
    if (format == "gamepad_script") {
        GamepadScript script;
        for (const auto& ev : doc.at("events")) {
            script.events.push_back({ev.at("button").get<std::string>(),
                                     ev.at("type").get<std::string>() == "press",
                                     ev.at("time").get<double>()});
        }
        for (size_t i = 1; i < script.events.size(); ++i) {
            if (script.events[i].time < script.events[i - 1].time)
                throw ValidationError(filename +
                                      ": gamepad events not time-sorted");
        }
        return {model_id, std::move(script)};
    }
    if (format == "action_call_script") {
        ActionCallScript script;
        script.frame_rate = doc.at("frame_rate").get<double>();
        for (const auto& call : doc.at("calls"))
            script.calls.push_back({call.at("name").get<std::string>(),
                                    call.at("start_frame").get<size_t>(),
                                    call.at("end_frame").get<size_t>()});
        return {model_id, std::move(script)};
    }
    if (format == "action_vector_stream") {
        ActionVectorStream stream;
        stream.frame_rate = doc.at("frame_rate").get<double>();
        for (const auto& row : doc.at("vectors")) {
            if (!row.is_array() || row.size() != kActionVectorDim)
                throw ParseError(filename + ": action vector must have " +
                                 std::to_string(kActionVectorDim) + " components");
            std::array<double, kActionVectorDim> vec{};
            for (size_t i = 0; i < kActionVectorDim; ++i)
                vec[i] = row[i].get<double>();
            stream.vectors.push_back(vec);
        }
        return {model_id, std::move(stream)};
    }
    throw ParseError(filename + ": unknown payload format '" + format + "'");
}

}  // namespace worldmark::adapters
