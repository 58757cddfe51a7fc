#include "lscd/tr.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <unordered_set>

namespace lscd::tr {

void validate(const SgnsParams& p) {
    if (p.dim < 1) throw Error("sgns: dim must be >= 1");
    if (p.window < 1) throw Error("sgns: window must be >= 1");
    if (p.negatives < 1) throw Error("sgns: negatives must be >= 1");
    if (p.epochs < 1) throw Error("sgns: epochs must be >= 1");
    if (!(p.learning_rate > 0.0)) throw Error("sgns: learning rate must be positive");
    if (p.min_learning_rate < 0.0 || p.min_learning_rate > p.learning_rate) {
        throw Error("sgns: min learning rate must lie in [0, learning_rate]");
    }
    if (p.subsample_threshold < 0.0) throw Error("sgns: subsample threshold must be >= 0");
    if (p.threads < 1) throw Error("sgns: threads must be >= 1");
}

std::string tagged_token(std::string_view word, std::size_t bin_index) {
    return std::string(word) + "#t" + std::to_string(bin_index + 1);
}

TokenId ReferencedCorpus::target_id(std::string_view token) const {
    const auto it = target_index.find(std::string(token));
    return it == target_index.end() ? kNoToken : it->second;
}

ReferencedCorpus reference_targets(const TimeBinnedCorpus& corpus, const std::vector<std::string>& targets,
                                   const Vocabulary& vocab) {
    if (targets.empty()) throw Error("reference_targets: target set must be non-empty");
    if (corpus.bins.empty()) throw Error("empty corpus");

    ReferencedCorpus rc;
    rc.context_vocab = vocab;
    for (const auto& b : corpus.bins) rc.period_ids.push_back(b.period_id);

    std::unordered_set<std::string> target_set;
    for (const auto& t : targets) {
        if (!target_set.insert(t).second) continue;
        rc.targets.push_back(t);
    }

    // Per-bin occurrence counts of in-vocabulary targets.
    const std::size_t nbins = corpus.bins.size();
    std::unordered_map<std::string, std::vector<std::uint64_t>> occurrences;
    for (const auto& t : rc.targets) {
        if (vocab.contains(t)) occurrences.emplace(t, std::vector<std::uint64_t>(nbins, 0));
    }
    for (std::size_t b = 0; b < nbins; ++b) {
        for (const auto& sentence : corpus.bins[b].sentences) {
            for (const auto& tok : sentence) {
                if (auto it = occurrences.find(tok); it != occurrences.end()) ++it->second[b];
            }
        }
    }

    auto add_target_token = [&](std::string token, std::uint64_t count) {
        rc.target_index.emplace(token, static_cast<TokenId>(rc.target_tokens.size()));
        rc.target_tokens.push_back(std::move(token));
        rc.target_counts.push_back(count);
    };

    // Plain (untagged) target-side entries first, in vocabulary order.
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto& tok = vocab.tokens()[i];
        if (!occurrences.contains(tok)) add_target_token(tok, vocab.counts()[i]);
    }
    for (const auto& t : rc.targets) {
        const auto it = occurrences.find(t);
        if (it == occurrences.end()) {
            rc.warnings.push_back("target '" + t + "' is not in the vocabulary; it gets no temporal identity");
            continue;
        }
        bool any = false;
        for (std::size_t b = 0; b < nbins; ++b) {
            if (it->second[b] == 0) continue;
            add_target_token(tagged_token(t, b), it->second[b]);
            any = true;
        }
        if (!any) rc.warnings.push_back("target '" + t + "' is absent from every bin");
    }

    rc.bins.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        auto& out = rc.bins[b];
        out.reserve(corpus.bins[b].sentences.size());
        for (const auto& sentence : corpus.bins[b].sentences) {
            ReferencedCorpus::EncodedSentence enc;
            enc.reserve(sentence.size());
            for (const auto& tok : sentence) {
                ReferencedCorpus::Position p;
                p.context = vocab.id(tok);
                if (p.context != kNoToken) {
                    p.target = occurrences.contains(tok) ? rc.target_id(tagged_token(tok, b)) : rc.target_id(tok);
                }
                enc.push_back(p);
            }
            out.push_back(std::move(enc));
        }
    }
    return rc;
}

SgnsGradient sgns_gradient(std::span<const double> target, std::span<const double> positive,
                           std::span<const std::vector<double>> negatives) {
    const std::size_t d = target.size();
    if (positive.size() != d) throw Error("sgns_gradient: dimension mismatch");
    SgnsGradient g;
    g.d_target.assign(d, 0.0);
    g.d_positive.assign(d, 0.0);

    auto dot = [&](std::span<const double> u) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += u[i] * target[i];
        return s;
    };

    const double fp = dot(positive);
    g.loss -= log_sigmoid(fp);
    const double cp = sgns_coefficient(fp, true);
    for (std::size_t i = 0; i < d; ++i) {
        g.d_target[i] -= cp * positive[i];
        g.d_positive[i] = -cp * target[i];
    }
    for (const auto& u : negatives) {
        if (u.size() != d) throw Error("sgns_gradient: dimension mismatch");
        const double fn = dot(u);
        g.loss -= log_sigmoid(-fn);
        const double cn = sgns_coefficient(fn, false);
        std::vector<double> du(d);
        for (std::size_t i = 0; i < d; ++i) {
            g.d_target[i] -= cn * u[i];
            du[i] = -cn * target[i];
        }
        g.d_negatives.push_back(std::move(du));
    }
    return g;
}

namespace {

/// Walker's alias table: O(1) draws from a fixed discrete distribution.
class AliasSampler {
public:
    explicit AliasSampler(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
        const std::size_t n = weights.size();
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const auto s = small.back();
            small.pop_back();
            const auto l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
        for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
    }

    TokenId operator()(std::mt19937_64& rng) const {
        const std::uint64_t r = rng();
        const auto column = static_cast<std::size_t>((r >> 32) * prob_.size() >> 32);
        const double coin = static_cast<double>(r & 0xffffffffULL) * 0x1p-32;
        return static_cast<TokenId>(coin < prob_[column] ? column : alias_[column]);
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Eight independent partial sums so the reduction vectorizes without -ffast-math.
inline float dot(const float* __restrict a, const float* __restrict b, std::size_t n) {
    float acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
    }
    float f = 0.0f;
    for (; i < n; ++i) f += a[i] * b[i];
    for (float x : acc) f += x;
    return f;
}

struct Trainer {
    const ReferencedCorpus& corpus;
    const SgnsParams& params;
    std::size_t dim;
    std::vector<float> input;   // target-side vectors
    std::vector<float> output;  // context vectors
    std::vector<double> keep_probability;
    std::optional<AliasSampler> noise;
    std::uint64_t total_pairs = 0;
    std::atomic<std::uint64_t> processed{0};

    Trainer(const ReferencedCorpus& c, const SgnsParams& p) : corpus(c), params(p), dim(p.dim) {
        const auto& counts = c.context_vocab.counts();
        std::vector<double> weights(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) weights[i] = std::pow(static_cast<double>(counts[i]), 0.75);
        noise.emplace(weights);

        keep_probability.assign(counts.size(), 1.0);
        if (p.subsample_threshold > 0.0) {
            double total = 0.0;
            for (auto n : counts) total += static_cast<double>(n);
            for (std::size_t i = 0; i < counts.size(); ++i) {
                const double f = static_cast<double>(counts[i]) / total;
                keep_probability[i] = std::min(1.0, std::sqrt(p.subsample_threshold / f));
            }
        }

        std::mt19937_64 rng(p.rng_seed);
        std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));
        input.resize(c.target_tokens.size() * dim);
        for (auto& x : input) x = static_cast<float>(init(rng));
        output.assign(c.context_vocab.size() * dim, 0.0f);

        for (const auto& bin : c.bins) {
            for (const auto& s : bin) total_pairs += count_pairs(s);
        }
        total_pairs *= p.epochs;
    }

    std::uint64_t count_pairs(const ReferencedCorpus::EncodedSentence& s) const {
        std::uint64_t n = 0;
        const std::size_t len = s.size();
        for (std::size_t i = 0; i < len; ++i) {
            if (s[i].target == kNoToken) continue;
            const std::size_t lo = i >= params.window ? i - params.window : 0;
            const std::size_t hi = std::min(len - 1, i + params.window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j != i && s[j].context != kNoToken) ++n;
            }
        }
        return n;
    }

    float learning_rate() const {
        const double progress = static_cast<double>(processed.load(std::memory_order_relaxed)) /
                                static_cast<double>(total_pairs);
        const double lr = params.learning_rate - (params.learning_rate - params.min_learning_rate) * progress;
        return static_cast<float>(std::max(lr, params.min_learning_rate));
    }

    /// One SGD step on a (target, context) pair; returns the pair loss when tracked.
    double step(TokenId target, TokenId context, float lr, std::mt19937_64& rng, std::vector<float>& grad) {
        float* __restrict v = input.data() + static_cast<std::size_t>(target) * dim;
        float* __restrict acc = grad.data();
        std::fill(grad.begin(), grad.end(), 0.0f);
        double loss = 0.0;
        for (std::size_t k = 0; k <= params.negatives; ++k) {
            TokenId out = context;
            if (k > 0) {
                out = (*noise)(rng);
                if (out == context) continue;
            }
            float* __restrict u = output.data() + static_cast<std::size_t>(out) * dim;
            const float f = dot(v, u, dim);
            if (params.track_loss) loss -= k == 0 ? log_sigmoid(f) : log_sigmoid(-f);
            const auto g = static_cast<float>(sgns_coefficient(f, k == 0)) * lr;
            for (std::size_t i = 0; i < dim; ++i) acc[i] += g * u[i];
            for (std::size_t i = 0; i < dim; ++i) u[i] += g * v[i];
        }
        for (std::size_t i = 0; i < dim; ++i) v[i] += acc[i];
        return loss;
    }

    double run(std::span<const std::pair<std::uint32_t, std::uint32_t>> order, std::mt19937_64& rng) {
        std::vector<float> grad(dim);
        std::vector<ReferencedCorpus::Position> kept;
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        double loss = 0.0;
        for (const auto& [b, si] : order) {
            const auto& src = corpus.bins[b][si];
            std::span<const ReferencedCorpus::Position> s = src;
            if (params.subsample_threshold > 0.0) {
                kept.clear();
                for (const auto& p : src) {
                    if (p.context == kNoToken || coin(rng) < keep_probability[static_cast<std::size_t>(p.context)]) {
                        kept.push_back(p);
                    }
                }
                s = kept;
            }
            const std::size_t len = s.size();
            const float lr = learning_rate();
            std::uint64_t pairs = 0;
            for (std::size_t i = 0; i < len; ++i) {
                if (s[i].target == kNoToken) continue;
                const std::size_t lo = i >= params.window ? i - params.window : 0;
                const std::size_t hi = std::min(len - 1, i + params.window);
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i || s[j].context == kNoToken) continue;
                    loss += step(s[i].target, s[j].context, lr, rng, grad);
                    ++pairs;
                }
            }
            processed.fetch_add(pairs, std::memory_order_relaxed);
        }
        return loss;
    }
};

std::vector<double> widen(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

SgnsResult train_sgns(const ReferencedCorpus& corpus, const SgnsParams& params) {
    validate(params);
    if (corpus.context_vocab.empty() || corpus.target_tokens.empty()) throw Error("empty referenced corpus");

    Trainer trainer(corpus, params);
    if (trainer.total_pairs == 0) throw Error("empty referenced corpus: no training pairs");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (std::size_t b = 0; b < corpus.bins.size(); ++b) {
        for (std::size_t s = 0; s < corpus.bins[b].size(); ++s) {
            order.emplace_back(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(s));
        }
    }

    SgnsResult result;
    std::mt19937_64 rng(params.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const auto before = trainer.processed.load();
        double loss = 0.0;
        if (params.threads == 1) {
            loss = trainer.run(order, rng);
        } else {
            std::vector<std::thread> workers;
            std::vector<double> losses(params.threads, 0.0);
            const std::size_t chunk = (order.size() + params.threads - 1) / params.threads;
            std::vector<std::uint64_t> seeds(params.threads);
            for (auto& s : seeds) s = rng();
            for (std::size_t t = 0; t < params.threads; ++t) {
                const std::size_t lo = std::min(order.size(), t * chunk);
                const std::size_t hi = std::min(order.size(), lo + chunk);
                workers.emplace_back([&, t, lo, hi] {
                    std::mt19937_64 local(seeds[t]);
                    losses[t] = trainer.run(std::span(order).subspan(lo, hi - lo), local);
                });
            }
            for (auto& w : workers) w.join();
            for (double l : losses) loss += l;
        }
        if (params.track_loss) {
            const auto pairs = trainer.processed.load() - before;
            result.epoch_losses.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
        }
    }

    result.target_space = EmbeddingSpace(params.dim, "referenced");
    for (std::size_t i = 0; i < corpus.target_tokens.size(); ++i) {
        result.target_space.set(corpus.target_tokens[i],
                                widen(std::span<const float>(trainer.input.data() + i * params.dim, params.dim)));
    }
    result.context_space = EmbeddingSpace(params.dim, "context");
    for (std::size_t i = 0; i < corpus.context_vocab.size(); ++i) {
        result.context_space.set(corpus.context_vocab.tokens()[i],
                                 widen(std::span<const float>(trainer.output.data() + i * params.dim, params.dim)));
    }
    return result;
}

std::pair<std::vector<double>, std::vector<double>> extract_temporal_pair(const EmbeddingSpace& target_space,
                                                                          std::string_view word) {
    std::vector<double> out[2];
    for (std::size_t b = 0; b < 2; ++b) {
        const auto tagged = tagged_token(word, b);
        const auto row = target_space.find(tagged);
        if (row < 0) throw Error("target unseen in period: " + tagged);
        const auto v = target_space.row(static_cast<std::size_t>(row));
        out[b].assign(v.begin(), v.end());
    }
    return {std::move(out[0]), std::move(out[1])};
}

std::vector<EmbeddingSpace> period_spaces(const EmbeddingSpace& target_space, const ReferencedCorpus& corpus) {
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> tagged;  // tagged -> (word, bin)
    for (const auto& t : corpus.targets) {
        for (std::size_t b = 0; b < corpus.bins.size(); ++b) tagged.emplace(tagged_token(t, b), std::pair{t, b});
    }
    std::vector<EmbeddingSpace> spaces;
    for (std::size_t b = 0; b < corpus.bins.size(); ++b) spaces.emplace_back(target_space.dim(), corpus.period_ids[b]);
    for (std::size_t i = 0; i < target_space.size(); ++i) {
        const auto& tok = target_space.token(i);
        if (const auto it = tagged.find(tok); it != tagged.end()) {
            spaces[it->second.second].set(it->second.first, target_space.row(i));
        } else {
            for (auto& s : spaces) s.set(tok, target_space.row(i));
        }
    }
    return spaces;
}

}  // namespace lscd::tr
