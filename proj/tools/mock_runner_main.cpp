// Built-in mock world model as a standalone runner. Invoked per the runner
// contract: mock-runner <case_dir>, where the case directory carries
// manifest.json and the serialized action payload. Writes frames/,
// estimated.traj, reproj.jsonl and runner.log; exits 0 on success.

#include <cstdio>
#include <exception>
#include <string>

#include "json.hpp"
#include "worldmark/adapters.hpp"
#include "worldmark/common.hpp"
#include "worldmark/harness.hpp"

using namespace worldmark;
using nlohmann::json;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <case_dir>\n", argv[0]);
        return 2;
    }
    try {
        const fs::path dir = argv[1];
        json manifest = json::parse(read_file(dir / "manifest.json"));

        const std::string model_id = manifest.at("model_id").get<std::string>();
        const json& c = manifest.at("calibration");
        synth::CalibrationProfile calib{model_id, c.at("linear_speed"),
                                        c.at("yaw_rate"), c.at("frame_rate")};
        const json& k = manifest.at("intrinsics");
        geom::CameraIntrinsics intrinsics{k.at("fx"), k.at("fy"),
                                          k.at("cx"), k.at("cy"),
                                          k.at("width"), k.at("height")};

        harness::MockModelConfig config;
        config.seed = manifest.value("seed", std::uint64_t{0});
        if (manifest.contains("mock")) {
            const json& m = manifest.at("mock");
            config.mode = harness::mock_mode_from_name(
                m.value("mode", std::string("faithful")));
            config.sigma_t = m.value("sigma_t", 0.0);
            config.sigma_r = m.value("sigma_r", 0.0);
            config.frame_stride = m.value("frame_stride", size_t{8});
        }

        // The payload is the only action.<model>.* file in the directory.
        fs::path payload_path;
        const std::string prefix = "action." + model_id + ".";
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.rfind(prefix, 0) == 0) {
                payload_path = entry.path();
                break;
            }
        }
        if (payload_path.empty())
            throw ValidationError("no payload file " + prefix + "* in " +
                                  dir.string());

        auto payload = adapters::parse_payload(read_file(payload_path),
                                               payload_path.filename().string(),
                                               calib.frame_rate);
        harness::mock_generate(config, payload, calib, intrinsics, dir);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mock runner failed: %s\n", e.what());
        return 1;
    }
}
