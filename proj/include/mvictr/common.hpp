#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mvictr {

// Error taxonomy; the CLI maps each family to a distinct exit code.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for content hashes embedded in output artifacts and for
// agent state digests. Not cryptographic; collision-resistance is not a
// requirement here, stability across runs is.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(std::span<const double> xs, uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(xs.data()),
                                    xs.size() * sizeof(double)),
                   h);
}

std::string to_hex(uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view line, char sep);
std::string trim(std::string_view s);

// Locale-independent numeric formatting (round-trip exact for doubles).
std::string format_double(double v);

}  // namespace mvictr
