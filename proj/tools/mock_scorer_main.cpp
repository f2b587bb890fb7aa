// Deterministic frame scorer speaking the subprocess scorer contract:
// request JSON on stdin, {"scores": [...]} on stdout. Scores derive from
// each frame's content hash (unit scale), or from --value when given.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "worldmark/common.hpp"

using namespace worldmark;
using nlohmann::json;

int main(int argc, char** argv) {
    std::optional<double> fixed;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--value" && i + 1 < argc) fixed = std::atof(argv[++i]);
    }
    try {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        json request = json::parse(buffer.str());

        json scores = json::array();
        for (const auto& frame : request.at("frames")) {
            if (fixed) {
                scores.push_back(*fixed);
            } else {
                std::uint64_t h = hash_file(frame.get<std::string>());
                scores.push_back(static_cast<double>(h % 10000) / 10000.0);
            }
        }
        std::cout << json({{"scores", scores}}).dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mock scorer failed: %s\n", e.what());
        return 1;
    }
}
