#pragma once

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lscd::collocation {

/// 2 f(w,c) / (f(w) + f(c)).
double dice(std::uint64_t f_wc, std::uint64_t f_w, std::uint64_t f_c);

struct CollocationProfile {
    std::string word;
    std::string period_id;
    /// Sorted by descending score, ties by context token.
    std::vector<std::pair<std::string, double>> weights;

    bool empty() const { return weights.empty(); }
    friend bool operator==(const CollocationProfile&, const CollocationProfile&) = default;
};

struct ProfileOptions {
    std::size_t window = 5;
    std::size_t top_n = 100;
    /// Contexts scoring below this are dropped before the top-n cut.
    double min_score = 0.0;
};

/// Dice scores from a precomputed table. Frequencies are window-pair
/// marginals: f(w) pairs with w as target, f(c) pairs with c as context.
CollocationProfile profile_from_counts(const CooccurrenceCounts& counts, const Vocabulary& vocab,
                                       std::string_view word, std::string period_id, const ProfileOptions& options);

/// Precondition: `word` in `vocab`. A word unseen in `bin` yields an empty profile.
CollocationProfile build_profile(const CorpusBin& bin, const Vocabulary& vocab, std::string_view word,
                                 const ProfileOptions& options);

/// Cosine of the two weight vectors over the union of their contexts; 0 when
/// either profile is empty.
double profile_similarity(const CollocationProfile& p1, const CollocationProfile& p2);

/// Profiles of `words` as rows over the vocabulary (column i = context id i),
/// so the generic similarity measures apply. Words with empty profiles get no row.
EmbeddingSpace profile_space(const CorpusBin& bin, const Vocabulary& vocab, const std::vector<std::string>& words,
                             const ProfileOptions& options);

/// `word<TAB>period<TAB>context:score,context:score,...`
std::string format_profile(const CollocationProfile& profile);
CollocationProfile parse_profile(std::string_view line);

}  // namespace lscd::collocation
