#pragma once

// Small helpers shared by the unit tests: scratch directories and a
// hand-rolled property runner over seeded generators.

#include <doctest.h>

#include <cstdint>
#include <unistd.h>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("lscd-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Runs `body(rng, case_index)` for `cases` independently seeded generators.
/// The case index is reported on failure so a counterexample can be replayed.
template <typename Body>
void for_all(std::size_t cases, std::uint64_t seed, Body&& body) {
    for (std::size_t i = 0; i < cases; ++i) {
        std::mt19937_64 rng(seed * 1000003ULL + i);
        CAPTURE(i);
        body(rng, i);
    }
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, lo, hi);
    return v;
}

/// Sentences over a small alphabet `w0 .. w{alphabet-1}`.
inline std::vector<std::vector<std::string>> random_sentences(std::mt19937_64& rng, std::size_t n, std::size_t alphabet,
                                                              std::size_t max_len) {
    std::vector<std::vector<std::string>> out(n);
    for (auto& s : out) {
        const std::size_t len = uniform_size(rng, 0, max_len);
        for (std::size_t i = 0; i < len; ++i) s.push_back("w" + std::to_string(uniform_size(rng, 0, alphabet - 1)));
    }
    return out;
}

}  // namespace testing
