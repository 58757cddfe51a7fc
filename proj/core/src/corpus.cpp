#include "lscd/corpus.hpp"

#include "lscd/text.hpp"

#include <fstream>
#include <sstream>

namespace lscd {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

void append_lines(std::istream& in, CorpusBin& bin) {
    std::string line;
    while (std::getline(in, line)) bin.sentences.push_back(tokenize(line));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) tokens.emplace_back(line.substr(start, i - start));
    }
    return tokens;
}

CorpusBin read_bin(const std::filesystem::path& path, std::string period_id) {
    if (std::filesystem::is_directory(path)) return read_bin_directory(path, std::move(period_id));
    std::ifstream in(path);
    if (!in) throw Error("cannot read corpus file " + path.string());
    CorpusBin bin{std::move(period_id), {}};
    append_lines(in, bin);
    return bin;
}

CorpusBin read_bin_directory(const std::filesystem::path& dir, std::string period_id) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    CorpusBin bin{std::move(period_id), {}};
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw Error("cannot read corpus file " + f.string());
        append_lines(in, bin);
    }
    return bin;
}

void write_bin(const CorpusBin& bin, const std::filesystem::path& path) {
    std::string out;
    for (const auto& sentence : bin.sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i) out += ' ';
            out += sentence[i];
        }
        out += '\n';
    }
    text::write_file_atomic(path, out);
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                   const VocabularyPolicy& policy) {
    std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(), counts.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::size_t keep = entries.size();
    if (const auto* top = std::get_if<TopK>(&policy)) {
        keep = std::min(keep, top->k);
    } else {
        const auto min = std::get<MinCount>(policy).n;
        keep = static_cast<std::size_t>(
            std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.second < min; }) -
            entries.begin());
    }

    Vocabulary v;
    v.tokens_.reserve(keep);
    v.counts_.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        v.index_.emplace(entries[i].first, static_cast<TokenId>(i));
        v.tokens_.push_back(std::move(entries[i].first));
        v.counts_.push_back(entries[i].second);
    }
    return v;
}

TokenId Vocabulary::id(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? kNoToken : it->second;
}

Vocabulary build_vocabulary(const TimeBinnedCorpus& corpus, const VocabularyPolicy& policy) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& bin : corpus.bins) {
        for (const auto& sentence : bin.sentences) {
            for (const auto& token : sentence) ++counts[token];
        }
    }
    if (counts.empty()) throw Error("empty corpus");
    return Vocabulary::from_counts(counts, policy);
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out += vocab.tokens()[i];
        out += '\t';
        out += std::to_string(vocab.counts()[i]);
        out += '\n';
    }
    text::write_file_atomic(path, out);
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read vocabulary " + path.string());
    std::unordered_map<std::string, std::uint64_t> counts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 2) throw Error(path.string() + ":" + std::to_string(lineno) + ": expected token<TAB>count");
        counts[std::string(fields[0])] = static_cast<std::uint64_t>(text::parse_int(fields[1]));
    }
    return Vocabulary::from_counts(counts, MinCount{0});
}

std::vector<TokenId> encode(const Sentence& sentence, const Vocabulary& vocab) {
    std::vector<TokenId> ids;
    ids.reserve(sentence.size());
    for (const auto& token : sentence) ids.push_back(vocab.id(token));
    return ids;
}

std::vector<std::pair<TokenId, TokenId>> stream_pairs(const CorpusBin& bin, const Vocabulary& vocab,
                                                      std::size_t window) {
    if (window == 0) throw Error("window must be positive");
    std::vector<std::pair<TokenId, TokenId>> pairs;
    for (const auto& sentence : bin.sentences) {
        const auto ids = encode(sentence, vocab);
        for_each_window_pair(ids, window, [&](TokenId t, TokenId c) { pairs.emplace_back(t, c); });
    }
    return pairs;
}

CooccurrenceCounts::CooccurrenceCounts(const CorpusBin& bin, const Vocabulary& vocab, std::size_t window)
    : rows_(vocab.size()), target_totals_(vocab.size(), 0), context_totals_(vocab.size(), 0) {
    if (window == 0) throw Error("window must be positive");
    for (const auto& sentence : bin.sentences) {
        const auto ids = encode(sentence, vocab);
        for_each_window_pair(ids, window, [&](TokenId t, TokenId c) {
            ++rows_[static_cast<std::size_t>(t)][c];
            ++target_totals_[static_cast<std::size_t>(t)];
            ++context_totals_[static_cast<std::size_t>(c)];
            ++total_;
        });
    }
}

std::uint64_t CooccurrenceCounts::count(TokenId target, TokenId context) const {
    const auto& r = row(target);
    const auto it = r.find(context);
    return it == r.end() ? 0 : it->second;
}

std::vector<std::string> read_targets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read targets file " + path.string());
    std::vector<std::string> targets;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = text::trim(line);
        if (!t.empty()) targets.emplace_back(t);
    }
    return targets;
}

}  // namespace lscd
