#include "lscd/tri.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace lscd::tri {

IndexVectorTable::IndexVectorTable(const Vocabulary& vocab, std::size_t dim, std::size_t seeds,
                                   std::uint64_t rng_seed)
    : dim_(dim), seeds_(seeds), rng_seed_(rng_seed) {
    if (dim == 0) throw Error("index vector dimension must be positive");
    if (seeds == 0 || seeds > dim) throw Error("seeds per vector must be in [1, dim]");

    std::mt19937_64 rng(rng_seed);
    std::vector<std::uint32_t> positions(dim);
    vectors_.reserve(vocab.size() * seeds);
    const std::size_t positives = (seeds + 1) / 2;
    for (std::size_t v = 0; v < vocab.size(); ++v) {
        std::iota(positions.begin(), positions.end(), 0u);
        // partial Fisher-Yates: the first `seeds` slots become a uniform sample
        for (std::size_t i = 0; i < seeds; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, dim - 1);
            std::swap(positions[i], positions[pick(rng)]);
        }
        for (std::size_t i = 0; i < seeds; ++i) {
            vectors_.push_back({positions[i], static_cast<std::int8_t>(i < positives ? 1 : -1)});
        }
    }
}

std::vector<double> IndexVectorTable::dense(TokenId id) const {
    std::vector<double> out(dim_, 0.0);
    for (const auto& s : vector(id)) out[s.index] = s.sign;
    return out;
}

IndexVectorTable make_index_vectors(const Vocabulary& vocab, std::size_t dim, std::size_t seeds,
                                    std::uint64_t rng_seed) {
    return IndexVectorTable(vocab, dim, seeds, rng_seed);
}

double ppmi(const CooccurrenceCounts& counts, TokenId target, TokenId context) {
    const auto joint = counts.count(target, context);
    if (joint == 0) return 0.0;
    const double n = static_cast<double>(counts.total());
    const double pmi = std::log(n * static_cast<double>(joint) /
                                (static_cast<double>(counts.target_total(target)) *
                                 static_cast<double>(counts.context_total(context))));
    return std::max(0.0, pmi);
}

EmbeddingSpace train_tri(const CorpusBin& bin, const Vocabulary& vocab, const IndexVectorTable& table,
                         const TriOptions& options, std::size_t window, const EmbeddingSpace* prev) {
    if (table.size() != vocab.size()) throw Error("index vector table does not match vocabulary");
    if (window == 0) throw Error("window must be positive");
    if (prev && prev->dim() != table.dim()) {
        throw Error("previous space has dim " + std::to_string(prev->dim()) + ", expected " +
                    std::to_string(table.dim()));
    }

    EmbeddingSpace space(table.dim(), bin.period_id);
    if (options.init_from_previous && prev) {
        for (std::size_t i = 0; i < prev->size(); ++i) space.set(prev->token(i), prev->row(i));
    }

    // Vocabulary id -> row in `space`, filled lazily so unseen tokens get no row.
    std::vector<std::ptrdiff_t> rows(vocab.size(), -1);
    auto row_of = [&](TokenId id) {
        auto& r = rows[static_cast<std::size_t>(id)];
        if (r < 0) r = static_cast<std::ptrdiff_t>(space.add(vocab.token(id)));
        return space.row(static_cast<std::size_t>(r));
    };

    auto accumulate = [&](TokenId target, TokenId context, double weight) {
        auto dst = row_of(target);
        for (const auto& s : table.vector(context)) {
            if (options.positive_only && s.sign < 0) continue;
            dst[s.index] += weight * s.sign;
        }
    };

    if (!options.ppmi_weights) {
        for (const auto& sentence : bin.sentences) {
            const auto ids = encode(sentence, vocab);
            for_each_window_pair(ids, window, [&](TokenId t, TokenId c) { accumulate(t, c, 1.0); });
        }
        return space;
    }

    // Weighted mode: each distinct (target, context) pair contributes
    // count * ppmi. Targets in first-occurrence order, contexts by id, so the
    // summation order is fixed.
    const CooccurrenceCounts counts(bin, vocab, window);
    std::vector<TokenId> order;
    std::vector<bool> seen(vocab.size(), false);
    for (const auto& sentence : bin.sentences) {
        for (const auto id : encode(sentence, vocab)) {
            if (id != kNoToken && !seen[static_cast<std::size_t>(id)] && counts.target_total(id) > 0) {
                seen[static_cast<std::size_t>(id)] = true;
                order.push_back(id);
            }
        }
    }
    std::vector<std::pair<TokenId, std::uint64_t>> row;
    for (const auto t : order) {
        row.assign(counts.row(t).begin(), counts.row(t).end());
        std::sort(row.begin(), row.end());
        row_of(t);
        for (const auto& [c, n] : row) {
            const double w = ppmi(counts, t, c) * static_cast<double>(n);
            if (w > 0.0) accumulate(t, c, w);
        }
    }
    return space;
}

}  // namespace lscd::tri
