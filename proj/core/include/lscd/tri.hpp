#pragma once

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lscd::tri {

/// One nonzero component of a sparse ternary index vector.
struct Seed {
    std::uint32_t index;
    std::int8_t sign;
};

/// Sparse random index vectors, one per vocabulary id. The same table is
/// reused for every period, which is what makes the per-period spaces
/// directly comparable.
class IndexVectorTable {
public:
    IndexVectorTable(const Vocabulary& vocab, std::size_t dim, std::size_t seeds, std::uint64_t rng_seed);

    std::size_t dim() const { return dim_; }
    std::size_t seeds_per_vector() const { return seeds_; }
    std::uint64_t rng_seed() const { return rng_seed_; }
    std::size_t size() const { return vectors_.size() / std::max<std::size_t>(seeds_, 1); }

    std::span<const Seed> vector(TokenId id) const {
        return {vectors_.data() + static_cast<std::size_t>(id) * seeds_, seeds_};
    }
    std::vector<double> dense(TokenId id) const;

    friend bool operator==(const IndexVectorTable& a, const IndexVectorTable& b);

private:
    std::size_t dim_;
    std::size_t seeds_;
    std::uint64_t rng_seed_;
    std::vector<Seed> vectors_;
};

inline bool operator==(const Seed& a, const Seed& b) { return a.index == b.index && a.sign == b.sign; }
inline bool operator==(const IndexVectorTable& a, const IndexVectorTable& b) {
    return a.dim_ == b.dim_ && a.seeds_ == b.seeds_ && a.vectors_ == b.vectors_;
}

IndexVectorTable make_index_vectors(const Vocabulary& vocab, std::size_t dim, std::size_t seeds,
                                    std::uint64_t rng_seed);

struct TriOptions {
    bool init_from_previous = false;
    bool positive_only = false;
    bool ppmi_weights = false;
};

/// max(0, log(N * n(w,c) / (n(w) * n(c)))) with marginals taken from the
/// window pair counts of the bin.
double ppmi(const CooccurrenceCounts& counts, TokenId target, TokenId context);

/// Accumulates context index vectors into target vectors over one bin.
/// With `init_from_previous`, rows of `prev` seed the accumulation (and
/// tokens absent from this bin keep their previous vectors).
EmbeddingSpace train_tri(const CorpusBin& bin, const Vocabulary& vocab, const IndexVectorTable& table,
                         const TriOptions& options, std::size_t window,
                         const EmbeddingSpace* prev = nullptr);

}  // namespace lscd::tri
