#include "worldmark/trajectory_io.hpp"

#include <fstream>
#include <sstream>

namespace worldmark::geom {

namespace {

bool parse_field(const std::string& token, double& out) {
    // Strict: the whole token must be one decimal number.
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + token.size() && token.size() > 0;
}

}  // namespace

Trajectory parse_trajectory(std::istream& in, double frame_rate,
                            const std::string& origin) {
    Trajectory traj;
    traj.frame_rate = frame_rate;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;

        std::istringstream fields(body);
        std::vector<std::string> tokens;
        std::string tok;
        while (fields >> tok) tokens.push_back(tok);
        if (tokens.size() != 8) {
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": expected 8 fields, got " +
                             std::to_string(tokens.size()));
        }
        double v[8];
        for (size_t i = 0; i < 8; ++i) {
            if (!parse_field(tokens[i], v[i])) {
                throw ParseError(origin + ":" + std::to_string(line_no) +
                                 ": field " + std::to_string(i + 1) +
                                 " is not a number: '" + tokens[i] + "'");
            }
        }
        // Line layout: timestamp tx ty tz qx qy qz qw.
        Rotation rot;
        try {
            rot = Rotation(v[7], v[4], v[5], v[6]);
        } catch (const ValidationError& e) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": " +
                             e.what());
        }
        if (!std::isfinite(v[0]) || v[0] < 0.0) {
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": timestamp must be finite and >= 0");
        }
        traj.poses.push_back(Pose(rot, {v[1], v[2], v[3]}, v[0]));
    }
    for (size_t i = 1; i < traj.size(); ++i) {
        if (!(traj.poses[i].timestamp > traj.poses[i - 1].timestamp))
            throw ValidationError(origin + ": timestamps not strictly increasing at pose " +
                                  std::to_string(i));
    }
    return traj;
}

Trajectory load_trajectory(const fs::path& path, double frame_rate) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file: " + path.string());
    return parse_trajectory(in, frame_rate, path.filename().string());
}

std::string serialize_trajectory(const Trajectory& traj) {
    std::string out;
    out.reserve(traj.size() * 64);
    for (const Pose& p : traj.poses) {
        out += format_double(p.timestamp);
        for (double t : p.translation) {
            out += ' ';
            out += format_double(t);
        }
        // Quaternion canonicalization guarantees qw >= 0 on every line.
        out += ' ';
        out += format_double(p.rotation.x);
        out += ' ';
        out += format_double(p.rotation.y);
        out += ' ';
        out += format_double(p.rotation.z);
        out += ' ';
        out += format_double(p.rotation.w);
        out += '\n';
    }
    return out;
}

void save_trajectory(const Trajectory& traj, const fs::path& path) {
    write_file(path, serialize_trajectory(traj));
}

}  // namespace worldmark::geom
