#pragma once

// Canonical action vocabulary: six duration-parameterized primitives
// (W forward, S backward, A strafe-left, D strafe-right, L yaw-left,
// R yaw-right), the "kind:seconds" text DSL, the 15-sequence standard
// library with Easy/Medium/Hard tiers, and scene-aware filtering.

#include <string>
#include <vector>

#include "worldmark/common.hpp"

namespace worldmark::actions {

enum class Kind { Forward, Backward, StrafeLeft, StrafeRight, YawLeft, YawRight };

char kind_letter(Kind k);
Kind kind_from_letter(char c);  // throws ParseError on unknown letter

bool is_translation(Kind k);
bool is_rotation(Kind k);

struct ActionPrimitive {
    Kind kind = Kind::Forward;
    double duration = 0.0;  // seconds, > 0 and finite
};

enum class Tier { Easy, Medium, Hard };

std::string tier_name(Tier t);
Tier tier_from_name(const std::string& name);

/// Tier rules: Easy = 1 segment / 20 s total, Medium = 2 / 40 s,
/// Hard = 3 / 60 s.
struct ActionSequence {
    std::string id;  // "1".."15" for the standard library, free-form for custom
    Tier tier = Tier::Easy;
    std::vector<ActionPrimitive> segments;

    double total_duration() const;
    bool contains(Kind k) const;
    bool rotation_only() const;
};

/// Parse the DSL: seq := segment ("," segment)*, segment := kind ":" seconds.
/// With allow_custom = false the tier invariants are enforced and violations
/// throw ValidationError; with allow_custom = true the tier is derived from
/// the segment count alone.
ActionSequence parse_sequence(const std::string& text,
                              bool allow_custom = false,
                              const std::string& id = "");

std::string serialize_sequence(const ActionSequence& seq);

// ── Standard library ─────────────────────────────────────────────────────────

struct ActionLibrary {
    std::vector<ActionSequence> sequences;  // ids "1".."15", in order

    const ActionSequence& by_id(const std::string& id) const;  // LookupError
};

/// The fixed 15-sequence benchmark library:
///   1-4  unidirectional translations (W/S/A/D, 20 s)
///   5    unidirectional rotation (L, 20 s)
///   6-10 two-segment Medium compositions (9-10 combine translation+rotation)
///   11-15 three-segment Hard sequences, including a patrol route (12), a
///         360-degree panoramic rotation at 6 deg/s yaw (13) and cyclic
///         motions (11, 14).
const ActionLibrary& standard_library();

/// JSON document (id, tier, segments) for non-code consumers.
std::string library_to_json(const ActionLibrary& lib);

// ── Scene-aware filtering ────────────────────────────────────────────────────

/// Fixed small schema produced by judge scene analysis (or a mock).
struct SceneConstraintReport {
    bool forward_blocked = false;
    bool backward_blocked = false;
    bool lateral_blocked = false;
    std::string rationale;
};

/// Retains only sequences whose movement axes are unobstructed: a blocked
/// axis drops every sequence containing the matching primitives (W for
/// forward, S for backward, A/D for lateral). Never returns an empty set:
/// if everything is dropped the rotation-only sequences are retained.
/// Throws ValidationError on an empty library.
std::vector<std::string> filter_actions(const SceneConstraintReport& report,
                                        const ActionLibrary& library);

}  // namespace worldmark::actions
