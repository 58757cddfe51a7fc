#include "lscd/collocation.hpp"

#include "lscd/text.hpp"

#include <cmath>
#include <map>

namespace lscd::collocation {

double dice(std::uint64_t f_wc, std::uint64_t f_w, std::uint64_t f_c) {
    if (f_wc > f_w || f_wc > f_c) throw Error("dice: joint frequency exceeds a marginal");
    if (f_w + f_c == 0) throw Error("dice: both marginals are zero");
    return 2.0 * static_cast<double>(f_wc) / static_cast<double>(f_w + f_c);
}

CollocationProfile profile_from_counts(const CooccurrenceCounts& counts, const Vocabulary& vocab,
                                       std::string_view word, std::string period_id, const ProfileOptions& options) {
    const auto w = vocab.id(word);
    if (w == kNoToken) throw Error("collocation: word '" + std::string(word) + "' not in vocabulary");

    CollocationProfile profile{std::string(word), std::move(period_id), {}};
    for (const auto& [c, n] : counts.row(w)) {
        const double score = dice(n, counts.target_total(w), counts.context_total(c));
        if (score > 0.0 && score >= options.min_score) profile.weights.emplace_back(vocab.token(c), score);
    }
    std::sort(profile.weights.begin(), profile.weights.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (profile.weights.size() > options.top_n) profile.weights.resize(options.top_n);
    return profile;
}

CollocationProfile build_profile(const CorpusBin& bin, const Vocabulary& vocab, std::string_view word,
                                 const ProfileOptions& options) {
    const CooccurrenceCounts counts(bin, vocab, options.window);
    return profile_from_counts(counts, vocab, word, bin.period_id, options);
}

double profile_similarity(const CollocationProfile& p1, const CollocationProfile& p2) {
    if (p1.empty() || p2.empty()) return 0.0;
    std::map<std::string_view, std::pair<double, double>> joint;
    for (const auto& [c, s] : p1.weights) joint[c].first = s;
    for (const auto& [c, s] : p2.weights) joint[c].second = s;
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (const auto& [c, v] : joint) {
        dot += v.first * v.second;
        n1 += v.first * v.first;
        n2 += v.second * v.second;
    }
    return std::clamp(dot / std::sqrt(n1 * n2), 0.0, 1.0);
}

EmbeddingSpace profile_space(const CorpusBin& bin, const Vocabulary& vocab, const std::vector<std::string>& words,
                             const ProfileOptions& options) {
    const CooccurrenceCounts counts(bin, vocab, options.window);
    EmbeddingSpace space(vocab.size(), bin.period_id);
    std::vector<double> row(vocab.size());
    for (const auto& w : words) {
        if (!vocab.contains(w)) continue;
        const auto p = profile_from_counts(counts, vocab, w, bin.period_id, options);
        if (p.empty()) continue;
        std::fill(row.begin(), row.end(), 0.0);
        for (const auto& [c, s] : p.weights) row[static_cast<std::size_t>(vocab.id(c))] = s;
        space.set(w, row);
    }
    return space;
}

std::string format_profile(const CollocationProfile& profile) {
    std::string out = profile.word + '\t' + profile.period_id + '\t';
    for (std::size_t i = 0; i < profile.weights.size(); ++i) {
        const auto& [c, s] = profile.weights[i];
        if (c.find(',') != std::string::npos) throw Error("collocation: context '" + c + "' contains ','");
        if (i) out += ',';
        out += c;
        out += ':';
        out += text::format_double(s);
    }
    return out;
}

CollocationProfile parse_profile(std::string_view line) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) throw Error("profile line: expected word<TAB>period<TAB>contexts");
    CollocationProfile p{std::string(fields[0]), std::string(fields[1]), {}};
    if (fields[2].empty()) return p;
    for (auto item : text::split(fields[2], ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos || colon == 0) throw Error("profile line: malformed entry '" + std::string(item) + "'");
        p.weights.emplace_back(std::string(item.substr(0, colon)), text::parse_double(item.substr(colon + 1)));
    }
    return p;
}

}  // namespace lscd::collocation
