#pragma once

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lscd::tr {

struct SgnsParams {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 20;
    std::uint64_t min_count = 10;
    std::size_t epochs = 8;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    /// 0 disables frequent-word subsampling.
    double subsample_threshold = 0.0;
    std::uint64_t rng_seed = 1;
    /// 1 is the strict deterministic mode; more threads update shared tables without locks.
    std::size_t threads = 1;
    /// Record the mean loss of every epoch (costs one log per update).
    bool track_loss = false;
};

void validate(const SgnsParams& params);

/// Serialized name of a target occurrence in bin `bin_index` (0-based): `word#t1`, `word#t2`, ...
std::string tagged_token(std::string_view word, std::size_t bin_index);

/// A corpus whose target-word occurrences carry a per-period identity on the
/// target side only. Context ids always refer to plain tokens.
struct ReferencedCorpus {
    struct Position {
        TokenId target = kNoToken;   ///< id in the target-side vocabulary
        TokenId context = kNoToken;  ///< id in the plain context vocabulary
    };
    using EncodedSentence = std::vector<Position>;

    std::vector<std::string> period_ids;
    std::vector<std::string> targets;
    Vocabulary context_vocab;
    std::vector<std::string> target_tokens;
    std::vector<std::uint64_t> target_counts;
    std::vector<std::vector<EncodedSentence>> bins;
    std::vector<std::string> warnings;

    TokenId target_id(std::string_view token) const;

    std::unordered_map<std::string, TokenId> target_index;
};

/// Precondition: `targets` non-empty. Targets absent from the vocabulary
/// produce a warning and stay untagged (they get no temporal identity).
ReferencedCorpus reference_targets(const TimeBinnedCorpus& corpus, const std::vector<std::string>& targets,
                                   const Vocabulary& vocab);

/// Loss and gradient of -log s(u_pos.v) - sum_n log s(-u_n.v) for one
/// (target, context, negatives) triple, s the logistic function.
struct SgnsGradient {
    double loss = 0.0;
    std::vector<double> d_target;
    std::vector<double> d_positive;
    std::vector<std::vector<double>> d_negatives;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double log_sigmoid(double x) { return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x)); }

/// label - s(dot): the scale applied to the partner vector in both the
/// gradient and the SGD update.
inline double sgns_coefficient(double dot, bool positive) { return (positive ? 1.0 : 0.0) - sigmoid(dot); }

SgnsGradient sgns_gradient(std::span<const double> target, std::span<const double> positive,
                           std::span<const std::vector<double>> negatives);

struct SgnsResult {
    EmbeddingSpace target_space;
    EmbeddingSpace context_space;
    /// Mean per-pair loss of each epoch, measured before each update; empty
    /// unless `track_loss` is set.
    std::vector<double> epoch_losses;
};

SgnsResult train_sgns(const ReferencedCorpus& corpus, const SgnsParams& params);

/// Vectors of `w#t1` and `w#t2`, in that order.
std::pair<std::vector<double>, std::vector<double>> extract_temporal_pair(const EmbeddingSpace& target_space,
                                                                          std::string_view word);

/// One space per bin: tagged rows of that bin are renamed to the plain word,
/// untagged rows are shared by every bin.
std::vector<EmbeddingSpace> period_spaces(const EmbeddingSpace& target_space, const ReferencedCorpus& corpus);

}  // namespace lscd::tr
