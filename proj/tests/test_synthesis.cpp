#include "worldmark/synthesis.hpp"

#include <cmath>

#include "doctest.h"
#include "worldmark/common.hpp"
#include "worldmark/metrics.hpp"

using namespace worldmark;
using geom::Rotation;
using geom::Trajectory;
using synth::CalibrationProfile;

namespace {

const CalibrationProfile kMock{"mock", 1.0, 9.0, 16.0};

Trajectory make_traj(const char* dsl, const CalibrationProfile& calib) {
    return synth::synthesize(actions::parse_sequence(dsl, true), calib);
}

}  // namespace

TEST_CASE("straight line: W:20 at 1 m/s, 10 Hz") {
    CalibrationProfile calib{"m", 1.0, 9.0, 10.0};
    Trajectory traj = make_traj("W:20", calib);
    REQUIRE(traj.size() == 201);
    traj.validate();
    const auto& last = traj.poses.back();
    CHECK(last.translation[0] == doctest::Approx(0.0));
    CHECK(last.translation[1] == doctest::Approx(0.0));
    CHECK(last.translation[2] == doctest::Approx(20.0).epsilon(1e-12));
    for (const auto& p : traj.poses)
        CHECK(geom::geodesic_deg(p.rotation, Rotation::identity()) < 1e-5);
}

TEST_CASE("pure rotation: L:20 at 4.5 deg/s ends at 90 degrees yaw") {
    CalibrationProfile calib{"m", 1.0, 4.5, 10.0};
    Trajectory traj = make_traj("L:20", calib);
    const auto& last = traj.poses.back();
    CHECK(geom::norm(last.translation) == 0.0);
    // Total rotation angle reaches 90 degrees (acos is well-conditioned
    // away from 0/180, so this is a tight check).
    CHECK(geom::geodesic_deg(last.rotation, Rotation::identity()) ==
          doctest::Approx(90.0).epsilon(1e-9));
    // Axis is -y: the quaternion has only w and y components.
    CHECK(std::abs(last.rotation.x) < 1e-12);
    CHECK(std::abs(last.rotation.z) < 1e-12);
}

TEST_CASE("two-phase closed form: L:10,W:10") {
    CalibrationProfile calib{"m", 1.0, 9.0, 10.0};
    Trajectory traj = make_traj("L:10,W:10", calib);
    const auto& last = traj.poses.back();
    // Final heading 90 degrees left, displacement of length 10 along the
    // rotated forward axis.
    CHECK(geom::geodesic_deg(last.rotation, Rotation::yaw_left_deg(90.0)) <
          1e-3);
    geom::Vec3 expected = Rotation::yaw_left_deg(90.0).rotate({0, 0, 10});
    CHECK(geom::norm(geom::sub(last.translation, expected)) < 1e-3);
    CHECK(geom::norm(last.translation) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("pose count matches round(duration*fps)+1 for the whole library") {
    for (const auto& seq : actions::standard_library().sequences) {
        Trajectory traj = synth::synthesize(seq, kMock);
        auto expected = static_cast<size_t>(
            std::llround(seq.total_duration() * kMock.frame_rate)) + 1;
        CHECK(traj.size() == expected);
        traj.validate();
    }
}

TEST_CASE("reversibility: W then S returns near the origin") {
    Trajectory traj = make_traj("W:20,S:20", kMock);
    CHECK(geom::norm(traj.poses.back().translation) <
          kMock.linear_speed / kMock.frame_rate);
}

TEST_CASE("360-degree rotation ends within one frame step of identity") {
    CalibrationProfile calib{"m", 1.0, 6.0, 16.0};  // 6 deg/s x 60 s = 360
    Trajectory traj = make_traj("L:20,L:20,L:20", calib);
    CHECK(geom::geodesic_deg(traj.poses.back().rotation, Rotation::identity()) <
          calib.yaw_rate / calib.frame_rate);
}

TEST_CASE("translation error of a trajectory against itself and a scaled copy") {
    Trajectory traj = make_traj("W:20,R:20", kMock);
    CHECK(metrics::translation_error(traj, traj) == 0.0);

    Trajectory doubled = traj;
    for (auto& p : doubled.poses) p.translation = geom::scale(p.translation, 2.0);
    CHECK(metrics::translation_error(traj, doubled) < 1e-9);
}

TEST_CASE("calibration registry") {
    auto reg = synth::CalibrationRegistry::with_defaults();

    SUBCASE("mock default profile") {
        const auto& mock = reg.profile_for("mock");
        CHECK(mock.linear_speed == 1.0);
        CHECK(mock.yaw_rate == 9.0);
        CHECK(mock.frame_rate == 16.0);
    }
    SUBCASE("unknown id lists the known ones") {
        try {
            reg.profile_for("foo");
            FAIL("expected LookupError");
        } catch (const LookupError& e) {
            std::string msg = e.what();
            CHECK(msg.find("foo") != std::string::npos);
            CHECK(msg.find("mock") != std::string::npos);
            CHECK(msg.find("genie3") != std::string::npos);
        }
    }
    SUBCASE("all returned profiles satisfy the invariants") {
        for (const auto& id : reg.model_ids()) reg.profile_for(id).validate();
        CHECK(reg.model_ids().size() == 7);
    }
    SUBCASE("JSON overrides") {
        reg.apply_json_overrides(
            R"({"mock": {"linear_speed": 2.5}, "new-model": {"frame_rate": 30}})");
        CHECK(reg.profile_for("mock").linear_speed == 2.5);
        CHECK(reg.profile_for("mock").yaw_rate == 9.0);
        CHECK(reg.profile_for("new-model").frame_rate == 30.0);
        CHECK_THROWS_AS(
            reg.apply_json_overrides(R"({"bad": {"yaw_rate": -1}})"),
            ValidationError);
    }
}
