#pragma once

// Shared plumbing: error types, content hashing, file helpers, number
// formatting. Everything here is deliberately dependency-free.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace worldmark {

namespace fs = std::filesystem;

// ── Errors ───────────────────────────────────────────────────────────────────

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text (trajectory files, DSL strings, JSON payloads).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input violating a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unknown id in a registry (model, adapter, profile, scorer).
class LookupError : public Error {
public:
    using Error::Error;
};

/// A child process or external service broke its contract.
class ContractError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ── Content hashing ──────────────────────────────────────────────────────────
//
// FNV-1a 64-bit. Used for cache keys and stage-resumption gating; stable
// across runs and platforms.

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime  = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

/// Hash of a file's raw bytes; throws IoError if unreadable.
std::uint64_t hash_file(const fs::path& path);

std::string to_hex(std::uint64_t value);

// ── Files ────────────────────────────────────────────────────────────────────

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

/// Sorted list of regular files in `dir` matching an optional extension
/// (".png"). Sorted by filename so frame order is well-defined.
std::vector<fs::path> list_files(const fs::path& dir,
                                 const std::string& extension = "");

// ── Text helpers ─────────────────────────────────────────────────────────────

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Shortest decimal form that round-trips the exact double ("%.17g" collapsed
/// to the minimal digit count). Serialize→parse→serialize is byte-stable.
std::string format_double(double value);

std::string base64_encode(std::string_view bytes);

}  // namespace worldmark
