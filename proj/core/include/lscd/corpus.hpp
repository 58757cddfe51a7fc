#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace lscd {

/// Raised for malformed input, violated preconditions and unreadable files.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using TokenId = std::int32_t;
inline constexpr TokenId kNoToken = -1;

using Sentence = std::vector<std::string>;

struct CorpusBin {
    std::string period_id;
    std::vector<Sentence> sentences;
};

struct TimeBinnedCorpus {
    std::vector<CorpusBin> bins;
};

/// Splits on runs of ASCII whitespace. No case folding, no punctuation handling.
std::vector<std::string> tokenize(std::string_view line);

/// One sentence per line. Empty lines are kept as empty sentences so line
/// numbers stay aligned with the source file.
CorpusBin read_bin(const std::filesystem::path& path, std::string period_id);

/// Regular files of `dir` in lexicographic path order, concatenated.
CorpusBin read_bin_directory(const std::filesystem::path& dir, std::string period_id);

void write_bin(const CorpusBin& bin, const std::filesystem::path& path);

struct TopK {
    std::size_t k;
};
struct MinCount {
    std::uint64_t n;
};
using VocabularyPolicy = std::variant<TopK, MinCount>;

class Vocabulary {
public:
    Vocabulary() = default;

    /// Ids follow descending count, ties by token bytes.
    static Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                  const VocabularyPolicy& policy);

    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    TokenId id(std::string_view token) const;
    bool contains(std::string_view token) const { return id(token) != kNoToken; }
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::uint64_t count(TokenId id) const { return counts_.at(static_cast<std::size_t>(id)); }

    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Counts are pooled over all bins before the policy is applied.
Vocabulary build_vocabulary(const TimeBinnedCorpus& corpus, const VocabularyPolicy& policy);

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocabulary(const std::filesystem::path& path);

/// Maps tokens to ids; out-of-vocabulary tokens become kNoToken but keep their slot.
std::vector<TokenId> encode(const Sentence& sentence, const Vocabulary& vocab);

/// Visits every (position, other position) pair with 0 < |i - j| <= window where
/// both ids are in vocabulary. Order: by position i, then j ascending.
template <typename Fn>
void for_each_window_pair(std::span<const TokenId> ids, std::size_t window, Fn&& fn) {
    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (ids[i] == kNoToken) continue;
        const std::size_t lo = i >= window ? i - window : 0;
        const std::size_t hi = std::min(n - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i || ids[j] == kNoToken) continue;
            fn(ids[i], ids[j]);
        }
    }
}

/// All (target, context) pairs of one bin, sentence by sentence.
std::vector<std::pair<TokenId, TokenId>> stream_pairs(const CorpusBin& bin, const Vocabulary& vocab,
                                                      std::size_t window);

/// Sparse window co-occurrence counts of one bin.
class CooccurrenceCounts {
public:
    CooccurrenceCounts(const CorpusBin& bin, const Vocabulary& vocab, std::size_t window);

    std::uint64_t count(TokenId target, TokenId context) const;
    const std::unordered_map<TokenId, std::uint64_t>& row(TokenId target) const {
        return rows_.at(static_cast<std::size_t>(target));
    }
    /// Number of pairs with `target` on the target side.
    std::uint64_t target_total(TokenId target) const { return target_totals_.at(static_cast<std::size_t>(target)); }
    /// Number of pairs with `context` on the context side.
    std::uint64_t context_total(TokenId context) const { return context_totals_.at(static_cast<std::size_t>(context)); }
    std::uint64_t total() const { return total_; }
    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::unordered_map<TokenId, std::uint64_t>> rows_;
    std::vector<std::uint64_t> target_totals_;
    std::vector<std::uint64_t> context_totals_;
    std::uint64_t total_ = 0;
};

/// One target per line; blank lines ignored.
std::vector<std::string> read_targets(const std::filesystem::path& path);

}  // namespace lscd
