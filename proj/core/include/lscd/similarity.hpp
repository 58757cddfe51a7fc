#pragma once

#include "lscd/embedding.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lscd {

enum class Measure { Cosine, Pearson, Neighborhood };

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view s);

/// dot(u, v) / (|u| |v|), clamped to [-1, 1].
double cosine(std::span<const double> u, std::span<const double> v);

/// Cosine of the mean-centred vectors.
double pearson(std::span<const double> u, std::span<const double> v);

/// Tokens of `space` nearest to `word` by cosine, `word` itself excluded.
/// Ties at rank k are resolved by token order, so exactly k are returned.
/// Zero rows are never neighbours.
std::vector<std::string> nearest_neighbors(const EmbeddingSpace& space, std::string_view word, std::size_t k);

/// Second-order similarity: both vectors of `word` are re-expressed as their
/// cosines to the union of the two k-neighbour sets (in token order, each
/// resolved in its own space, 0 where a space lacks the token), and the two
/// profiles are compared by cosine.
double neighborhood_similarity(const EmbeddingSpace& e1, const EmbeddingSpace& e2, std::string_view word,
                               std::size_t k = 25);

struct SkippedTarget {
    std::string target;
    std::string reason;
    friend bool operator==(const SkippedTarget&, const SkippedTarget&) = default;
};

struct SimilaritySet {
    Measure measure = Measure::Cosine;
    /// target -> similarity, ordered by target.
    std::map<std::string, double> scores;
    std::vector<SkippedTarget> skipped;
    /// Free-form provenance (backend, parameters), written to the file header.
    std::map<std::string, std::string> metadata;

    std::size_t size() const { return scores.size(); }
    std::vector<double> values() const;
};

SimilaritySet target_similarities(const EmbeddingSpace& e1, const EmbeddingSpace& e2,
                                  const std::vector<std::string>& targets, Measure measure, std::size_t k = 25);

/// `# measure=<m> key=value ...` header, `#skip <target> <reason>` lines, then `target<TAB>score`.
void write_similarities(const SimilaritySet& set, std::ostream& out);
void write_similarities(const SimilaritySet& set, const std::filesystem::path& path);
SimilaritySet read_similarities(std::istream& in);
SimilaritySet read_similarities(const std::filesystem::path& path);

}  // namespace lscd
