#include "worldmark/actions.hpp"

#include <random>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "worldmark/common.hpp"

using namespace worldmark;
using actions::ActionSequence;
using actions::Kind;
using actions::Tier;

TEST_CASE("DSL parsing: tier inference and validation") {
    SUBCASE("single forward segment is Easy") {
        auto seq = actions::parse_sequence("W:20");
        CHECK(seq.tier == Tier::Easy);
        REQUIRE(seq.segments.size() == 1);
        CHECK(seq.segments[0].kind == Kind::Forward);
        CHECK(seq.segments[0].duration == 20.0);
    }
    SUBCASE("forward then rotate is Medium") {
        auto seq = actions::parse_sequence("W:20,R:20");
        CHECK(seq.tier == Tier::Medium);
        REQUIRE(seq.segments.size() == 2);
        CHECK(seq.segments[1].kind == Kind::YawRight);
    }
    SUBCASE("tier mismatch rejected") {
        CHECK_THROWS_AS(actions::parse_sequence("W:15,R:60"), ValidationError);
        CHECK_THROWS_AS(actions::parse_sequence("W:10"), ValidationError);
        CHECK_THROWS_AS(actions::parse_sequence("W:20,S:20,W:20,S:20"),
                        ValidationError);
    }
    SUBCASE("custom relaxation accepts off-tier sequences") {
        auto seq = actions::parse_sequence("W:15,R:60", true, "custom-a");
        CHECK(seq.tier == Tier::Medium);  // from segment count
        CHECK(seq.id == "custom-a");
    }
    SUBCASE("unknown kind letter") {
        CHECK_THROWS_AS(actions::parse_sequence("X:20"), ParseError);
    }
    SUBCASE("non-positive and malformed durations") {
        CHECK_THROWS_AS(actions::parse_sequence("W:0", true), ValidationError);
        CHECK_THROWS_AS(actions::parse_sequence("W:-5", true), ValidationError);
        CHECK_THROWS_AS(actions::parse_sequence("W:abc", true), ParseError);
        CHECK_THROWS_AS(actions::parse_sequence("W20", true), ParseError);
        CHECK_THROWS_AS(actions::parse_sequence("", true), ParseError);
    }
}

TEST_CASE("DSL round trip: parse(serialize(seq)) == seq") {
    const auto& lib = actions::standard_library();
    for (const auto& seq : lib.sequences) {
        std::string text = actions::serialize_sequence(seq);
        auto parsed = actions::parse_sequence(text, false, seq.id);
        CHECK(parsed.tier == seq.tier);
        REQUIRE(parsed.segments.size() == seq.segments.size());
        for (size_t i = 0; i < seq.segments.size(); ++i) {
            CHECK(parsed.segments[i].kind == seq.segments[i].kind);
            CHECK(parsed.segments[i].duration == seq.segments[i].duration);
        }
        // Byte-stable second round.
        CHECK(actions::serialize_sequence(parsed) == text);
    }

    std::mt19937_64 rng(11);
    const Kind kinds[] = {Kind::Forward,    Kind::Backward, Kind::StrafeLeft,
                          Kind::StrafeRight, Kind::YawLeft,  Kind::YawRight};
    std::uniform_real_distribution<double> dur(0.1, 90.0);
    for (int i = 0; i < 200; ++i) {
        ActionSequence seq;
        seq.id = "rand";
        size_t n = 1 + rng() % 4;
        for (size_t s = 0; s < n; ++s)
            seq.segments.push_back({kinds[rng() % 6], dur(rng)});
        std::string text = actions::serialize_sequence(seq);
        auto parsed = actions::parse_sequence(text, true);
        CHECK(actions::serialize_sequence(parsed) == text);
    }
}

TEST_CASE("standard library structure") {
    const auto& lib = actions::standard_library();
    REQUIRE(lib.sequences.size() == 15);

    std::set<std::string> ids;
    for (const auto& seq : lib.sequences) ids.insert(seq.id);
    CHECK(ids.size() == 15);
    for (int i = 1; i <= 15; ++i) CHECK(ids.count(std::to_string(i)) == 1);

    SUBCASE("1-4 are single-segment pure translations") {
        for (int i = 1; i <= 4; ++i) {
            const auto& seq = lib.by_id(std::to_string(i));
            REQUIRE(seq.segments.size() == 1);
            CHECK(actions::is_translation(seq.segments[0].kind));
            CHECK(seq.tier == Tier::Easy);
        }
    }
    SUBCASE("5 is pure yaw-left 20 s") {
        const auto& seq = lib.by_id("5");
        CHECK(actions::serialize_sequence(seq) == "L:20");
        CHECK(seq.rotation_only());
    }
    SUBCASE("tier invariants hold for every member") {
        for (const auto& seq : lib.sequences) {
            double total = seq.total_duration();
            switch (seq.tier) {
                case Tier::Easy:
                    CHECK(seq.segments.size() == 1);
                    CHECK(total == 20.0);
                    break;
                case Tier::Medium:
                    CHECK(seq.segments.size() == 2);
                    CHECK(total == 40.0);
                    break;
                case Tier::Hard:
                    CHECK(seq.segments.size() == 3);
                    CHECK(total == 60.0);
                    break;
            }
        }
    }
    SUBCASE("9-10 combine translation and rotation") {
        for (const char* id : {"9", "10"}) {
            const auto& seq = lib.by_id(id);
            bool has_t = false, has_r = false;
            for (const auto& seg : seq.segments) {
                has_t |= actions::is_translation(seg.kind);
                has_r |= actions::is_rotation(seg.kind);
            }
            CHECK(has_t);
            CHECK(has_r);
        }
    }
    SUBCASE("11 and 14 are cyclic (return to the first primitive)") {
        for (const char* id : {"11", "14"}) {
            const auto& seq = lib.by_id(id);
            REQUIRE(seq.segments.size() == 3);
            CHECK(seq.segments[0].kind == seq.segments[2].kind);
            CHECK(seq.segments[0].kind != seq.segments[1].kind);
        }
    }
    SUBCASE("the Hard set includes a panorama and a patrol route") {
        CHECK(actions::serialize_sequence(lib.by_id("13")) == "L:20,L:20,L:20");
        CHECK(actions::serialize_sequence(lib.by_id("12")) == "W:20,L:20,W:20");
    }
    SUBCASE("unknown id") {
        CHECK_THROWS_AS(lib.by_id("16"), LookupError);
    }
}

TEST_CASE("library JSON export") {
    auto text = actions::library_to_json(actions::standard_library());
    auto doc = nlohmann::json::parse(text);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 15);
    CHECK(doc[0]["id"] == "1");
    CHECK(doc[0]["tier"] == "Easy");
    CHECK(doc[0]["segments"][0]["kind"] == "W");
    CHECK(doc[4]["segments"][0]["kind"] == "L");
}

TEST_CASE("scene-aware filtering") {
    const auto& lib = actions::standard_library();

    SUBCASE("nothing blocked keeps all 15") {
        actions::SceneConstraintReport open;
        CHECK(actions::filter_actions(open, lib).size() == 15);
    }
    SUBCASE("lateral blocked drops every A/D-bearing sequence") {
        actions::SceneConstraintReport report;
        report.lateral_blocked = true;
        auto kept = actions::filter_actions(report, lib);
        for (const auto& id : kept) {
            const auto& seq = lib.by_id(id);
            CHECK_FALSE(seq.contains(Kind::StrafeLeft));
            CHECK_FALSE(seq.contains(Kind::StrafeRight));
        }
        // 3, 4, 7, 8, 11 are the strafe-bearing members.
        CHECK(kept.size() == 10);
    }
    SUBCASE("all translation axes blocked leaves only pure rotation") {
        actions::SceneConstraintReport report;
        report.forward_blocked = true;
        report.backward_blocked = true;
        report.lateral_blocked = true;
        auto kept = actions::filter_actions(report, lib);
        // Enumerated under the stated rule: exactly the rotation-only
        // sequences survive.
        std::set<std::string> expected;
        for (const auto& seq : lib.sequences)
            if (seq.rotation_only()) expected.insert(seq.id);
        CHECK(std::set<std::string>(kept.begin(), kept.end()) == expected);
        CHECK_FALSE(kept.empty());
    }
    SUBCASE("output is a non-empty subset for every constraint combination") {
        for (int mask = 0; mask < 8; ++mask) {
            actions::SceneConstraintReport report;
            report.forward_blocked = mask & 1;
            report.backward_blocked = mask & 2;
            report.lateral_blocked = mask & 4;
            auto kept = actions::filter_actions(report, lib);
            CHECK_FALSE(kept.empty());
            for (const auto& id : kept) lib.by_id(id);  // must resolve
        }
    }
    SUBCASE("empty library rejected") {
        actions::ActionLibrary empty;
        CHECK_THROWS_AS(
            actions::filter_actions(actions::SceneConstraintReport{}, empty),
            ValidationError);
    }
}
