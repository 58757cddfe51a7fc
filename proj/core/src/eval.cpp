#include "lscd/eval.hpp"

#include "lscd/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lscd::eval {

namespace {

template <typename Map>
void require_coverage(const Map& pred, const std::vector<std::string>& gold_targets, std::string_view what) {
    std::vector<std::string> missing;
    for (const auto& t : gold_targets) {
        if (!pred.contains(t)) missing.push_back(t);
    }
    if (missing.empty()) return;
    std::string msg = std::string(what) + ": prediction misses " + std::to_string(missing.size()) + " gold target(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
}

template <typename Map>
std::vector<std::string> keys(const Map& m) {
    std::vector<std::string> out;
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
}

}  // namespace

double accuracy(const std::map<std::string, int>& pred, const std::map<std::string, int>& gold) {
    if (gold.empty()) throw Error("accuracy: empty gold standard");
    require_coverage(pred, keys(gold), "accuracy");
    std::size_t correct = 0;
    for (const auto& [t, label] : gold) correct += pred.at(t) == label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double accuracy(const detect::LabelSet& pred, const GoldStandard& gold) { return accuracy(pred.labels, gold.binary); }

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("spearman: length mismatch");
    if (x.size() < 2) throw Error("spearman: need at least 2 targets");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(rx.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("spearman: undefined for constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(const std::map<std::string, double>& pred, const std::map<std::string, double>& gold) {
    require_coverage(pred, keys(gold), "spearman");
    std::vector<double> x, y;
    for (const auto& [t, g] : gold) {
        x.push_back(pred.at(t));
        y.push_back(g);
    }
    return spearman(x, y);
}

double spearman(const detect::RankedList& pred, const GoldStandard& gold) {
    std::map<std::string, double> p;
    for (const auto& r : pred) p.emplace(r.target, r.distance);
    return spearman(p, gold.graded);
}

void validate(const SynthSpec& s) {
    if (s.n_targets == 0) throw Error("synthetic spec: n_targets must be positive");
    if (s.n_changed > s.n_targets) throw Error("synthetic spec: n_changed exceeds n_targets");
    if (s.n_targets > s.vocab_size) throw Error("synthetic spec: n_targets exceeds vocab_size");
    if ((s.vocab_size - s.n_targets) / (2 * s.n_targets) < 2) {
        throw Error("synthetic spec: vocab_size too small for two context communities of >= 2 words per target");
    }
    if (s.sentences_per_bin == 0) throw Error("synthetic spec: sentences_per_bin must be positive");
    if (s.context_length == 0) throw Error("synthetic spec: context_length must be positive");
    if (!s.change_strengths.empty() && s.change_strengths.size() != s.n_changed) {
        throw Error("synthetic spec: change_strengths must list one strength per changed target");
    }
    auto check = [&](double v) {
        if (!(v >= 0.05 && v <= 1.0)) {
            throw Error("synthetic spec: change strength must lie in [0.05, 1] (got " + text::format_double(v) + ")");
        }
    };
    if (s.n_changed > 0) {
        if (s.change_strengths.empty()) check(s.change_strength);
        for (double v : s.change_strengths) check(v);
    }
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.rng_seed);

    const std::size_t community = (spec.vocab_size - spec.n_targets) / (2 * spec.n_targets);
    const std::size_t n_filler = spec.vocab_size - spec.n_targets - 2 * spec.n_targets * community;

    auto name = [](std::string_view prefix, std::size_t i, int width) {
        auto digits = std::to_string(i);
        if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
        return std::string(prefix) + digits;
    };

    SyntheticData data;
    std::vector<std::array<std::vector<std::string>, 2>> communities(spec.n_targets);
    for (std::size_t t = 0; t < spec.n_targets; ++t) {
        data.targets.push_back(name("target", t, 3));
        for (std::size_t side = 0; side < 2; ++side) {
            for (std::size_t j = 0; j < community; ++j) {
                communities[t][side].push_back(name("ctx", (t * 2 + side) * community + j, 5));
            }
        }
    }
    std::vector<std::string> fillers;
    for (std::size_t i = 0; i < n_filler; ++i) fillers.push_back(name("fill", i, 4));

    std::vector<std::size_t> perm(spec.n_targets);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> strength(spec.n_targets, 0.0);
    for (std::size_t i = 0; i < spec.n_changed; ++i) {
        strength[perm[i]] = spec.change_strengths.empty() ? spec.change_strength : spec.change_strengths[i];
    }
    for (std::size_t t = 0; t < spec.n_targets; ++t) {
        data.gold.binary[data.targets[t]] = strength[t] > 0.0 ? 1 : 0;
        data.gold.graded[data.targets[t]] = strength[t];
    }

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_ctx(0, community - 1);
    for (std::size_t bin = 0; bin < 2; ++bin) {
        CorpusBin b{"t" + std::to_string(bin + 1), {}};
        b.sentences.reserve(spec.sentences_per_bin);
        for (std::size_t s = 0; s < spec.sentences_per_bin; ++s) {
            const std::size_t t = s % spec.n_targets;
            const bool use_b = bin == 1 && strength[t] > 0.0 && coin(rng) < strength[t];
            const auto& ctx = communities[t][use_b ? 1 : 0];
            Sentence sentence;
            for (std::size_t j = 0; j < spec.context_length; ++j) sentence.push_back(ctx[pick_ctx(rng)]);
            if (!fillers.empty() && coin(rng) < 0.5) {
                std::uniform_int_distribution<std::size_t> pick_fill(0, fillers.size() - 1);
                std::uniform_int_distribution<std::size_t> pos(0, sentence.size());
                sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(pos(rng)), fillers[pick_fill(rng)]);
            }
            std::uniform_int_distribution<std::size_t> pos(0, sentence.size());
            sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(pos(rng)), data.targets[t]);
            b.sentences.push_back(std::move(sentence));
        }
        std::shuffle(b.sentences.begin(), b.sentences.end(), rng);
        data.corpus.bins.push_back(std::move(b));
    }
    return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    for (const auto& bin : data.corpus.bins) write_bin(bin, dir / "corpus" / (bin.period_id + ".txt"));
    std::string targets;
    for (const auto& t : data.targets) targets += t + '\n';
    text::write_file_atomic(dir / "targets.txt", targets);
    std::string binary, graded;
    for (const auto& [t, l] : data.gold.binary) binary += t + '\t' + std::to_string(l) + '\n';
    for (const auto& [t, g] : data.gold.graded) graded += t + '\t' + text::format_fixed(g) + '\n';
    text::write_file_atomic(dir / "truth" / "task1" / (name + ".txt"), binary);
    text::write_file_atomic(dir / "truth" / "task2" / (name + ".txt"), graded);
}

GoldStandard read_gold(const std::filesystem::path& binary_path, const std::filesystem::path& graded_path) {
    GoldStandard g;
    g.binary = detect::read_labels(binary_path);
    g.graded = detect::read_scores(graded_path);
    if (keys(g.binary) != keys(g.graded)) throw Error("gold standard: binary and graded files cover different targets");
    return g;
}

}  // namespace lscd::eval
