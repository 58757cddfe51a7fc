#include "support.hpp"

#include "lscd/corpus.hpp"
#include "lscd/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

using namespace lscd;

namespace {

// Reference splitter: character-by-character scan using isspace.
std::vector<std::string> naive_split(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

TimeBinnedCorpus corpus_of(std::vector<std::vector<Sentence>> bins) {
    TimeBinnedCorpus c;
    for (std::size_t i = 0; i < bins.size(); ++i) c.bins.push_back({"t" + std::to_string(i + 1), std::move(bins[i])});
    return c;
}

Vocabulary vocab_of(std::unordered_map<std::string, std::uint64_t> counts, VocabularyPolicy policy) {
    return Vocabulary::from_counts(counts, policy);
}

}  // namespace

TEST_CASE("tokenize splits on whitespace runs only") {
    CHECK(tokenize("the cat sat") == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("Apfel  Baum\tHaus") == std::vector<std::string>{"Apfel", "Baum", "Haus"});
    CHECK(tokenize("  Don't, STOP!  ") == std::vector<std::string>{"Don't,", "STOP!"});
}

TEST_CASE("tokenize agrees with a reference splitter on mixed whitespace") {
    const std::string alphabet = "ab \t\n\r\v\fC.";
    testing::for_all(500, 11, [&](auto& rng, std::size_t) {
        std::string s;
        const auto len = testing::uniform_size(rng, 0, 30);
        for (std::size_t i = 0; i < len; ++i) s += alphabet[testing::uniform_size(rng, 0, alphabet.size() - 1)];
        CHECK(tokenize(s) == naive_split(s));
    });
}

TEST_CASE("tokenize inverts join for whitespace-free tokens") {
    testing::for_all(200, 12, [](auto& rng, std::size_t) {
        const auto sentences = testing::random_sentences(rng, 1, 20, 12);
        const auto& ts = sentences[0];
        std::string joined;
        for (std::size_t i = 0; i < ts.size(); ++i) joined += (i ? " " : "") + ts[i];
        CHECK(tokenize(joined) == ts);
    });
}

TEST_CASE("vocabulary policies") {
    const std::unordered_map<std::string, std::uint64_t> counts{{"a", 5}, {"b", 3}, {"c", 1}};
    SUBCASE("TopK keeps the most frequent") {
        const auto v = vocab_of(counts, TopK{2});
        CHECK(v.tokens() == std::vector<std::string>{"a", "b"});
        CHECK(v.id("a") == 0);
        CHECK(v.id("c") == kNoToken);
    }
    SUBCASE("MinCount thresholds") {
        CHECK(vocab_of(counts, MinCount{3}).tokens() == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("TopK larger than the vocabulary keeps everything") {
        CHECK(vocab_of(counts, TopK{10}).size() == 3);
    }
}

TEST_CASE("TopK ties are broken lexicographically regardless of insertion order") {
    std::vector<std::string> words{"a", "b", "c"};
    std::sort(words.begin(), words.end());
    do {
        std::unordered_map<std::string, std::uint64_t> counts;
        for (const auto& w : words) counts.emplace(w, 2);
        CHECK(vocab_of(counts, TopK{2}).tokens() == std::vector<std::string>{"a", "b"});
    } while (std::next_permutation(words.begin(), words.end()));
}

TEST_CASE("build_vocabulary pools both bins and rejects empty corpora") {
    const auto c = corpus_of({{{"a", "b"}, {"a"}}, {{"b", "b", "c"}}});
    const auto v = build_vocabulary(c, MinCount{1});
    CHECK(v.count(v.id("a")) == 2);
    CHECK(v.count(v.id("b")) == 3);
    CHECK(v.count(v.id("c")) == 1);
    CHECK(v.tokens().front() == "b");

    CHECK_THROWS_WITH_AS(build_vocabulary(corpus_of({{}, {{}}}), TopK{10}), "empty corpus", Error);
}

TEST_CASE("vocabulary counts sum to in-vocabulary occurrences") {
    testing::for_all(100, 13, [](auto& rng, std::size_t) {
        const auto c = corpus_of({testing::random_sentences(rng, 20, 15, 8), testing::random_sentences(rng, 20, 15, 8)});
        std::size_t total = 0;
        for (const auto& b : c.bins)
            for (const auto& s : b.sentences) total += s.size();
        if (total == 0) return;
        const auto v = build_vocabulary(c, TopK{testing::uniform_size(rng, 1, 20)});
        std::uint64_t sum = 0;
        for (auto n : v.counts()) sum += n;
        std::uint64_t in_vocab = 0;
        for (const auto& b : c.bins)
            for (const auto& s : b.sentences)
                for (const auto& t : s) in_vocab += v.contains(t) ? 1 : 0;
        CHECK(sum == in_vocab);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.id(v.tokens()[i]) == static_cast<TokenId>(i));
    });
}

TEST_CASE("window pairs") {
    const auto v = vocab_of({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}, {"e", 1}}, MinCount{1});
    auto pairs_of = [&](const Sentence& s, std::size_t window) {
        std::multiset<std::pair<std::string, std::string>> out;
        for (auto [t, c] : stream_pairs(CorpusBin{"t1", {s}}, v, window)) out.emplace(v.token(t), v.token(c));
        return out;
    };

    SUBCASE("adjacency with window 1") {
        const std::multiset<std::pair<std::string, std::string>> expected{{"a", "b"}, {"b", "a"}, {"b", "c"}, {"c", "b"}};
        CHECK(pairs_of({"a", "b", "c"}, 1) == expected);
    }
    SUBCASE("a single token has no context") { CHECK(pairs_of({"a"}, 3).empty()); }
    SUBCASE("five tokens, window 2") {
        // Brute force over all ordered position pairs.
        std::size_t expected = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) expected += (i != j && std::abs(i - j) <= 2) ? 1 : 0;
        CHECK(expected == 14);
        CHECK(pairs_of({"a", "b", "c", "d", "e"}, 2).size() == expected);
    }
    SUBCASE("OOV tokens keep their slot") {
        // x is out of vocabulary: a and c are two positions apart.
        const std::multiset<std::pair<std::string, std::string>> expected{};
        CHECK(pairs_of({"a", "x", "c"}, 1) == expected);
        CHECK(pairs_of({"a", "x", "c"}, 2).size() == 2);
    }
    SUBCASE("windows never cross sentences") {
        CHECK(stream_pairs(CorpusBin{"t1", {{"a"}, {"b"}}}, v, 5).empty());
    }
    SUBCASE("zero window is rejected") { CHECK_THROWS_AS(stream_pairs(CorpusBin{"t1", {{"a"}}}, v, 0), Error); }
}

TEST_CASE("pair streaming is symmetric and matches brute-force enumeration") {
    testing::for_all(200, 14, [](auto& rng, std::size_t) {
        CorpusBin bin{"t1", testing::random_sentences(rng, 10, 12, 10)};
        std::unordered_map<std::string, std::uint64_t> counts;
        for (const auto& s : bin.sentences)
            for (const auto& t : s) ++counts[t];
        if (counts.empty()) return;
        const auto v = Vocabulary::from_counts(counts, TopK{testing::uniform_size(rng, 1, 12)});
        const std::size_t window = testing::uniform_size(rng, 1, 4);

        std::map<std::pair<TokenId, TokenId>, int> got, expected;
        for (auto p : stream_pairs(bin, v, window)) ++got[p];
        for (const auto& s : bin.sentences) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (std::size_t j = 0; j < s.size(); ++j) {
                    const auto d = i > j ? i - j : j - i;
                    if (i == j || d > window || !v.contains(s[i]) || !v.contains(s[j])) continue;
                    ++expected[{v.id(s[i]), v.id(s[j])}];
                }
            }
        }
        CHECK(got == expected);
        for (const auto& [p, n] : got) CHECK(got[{p.second, p.first}] == n);

        const CooccurrenceCounts table(bin, v, window);
        std::uint64_t total = 0;
        for (const auto& [p, n] : expected) {
            CHECK(table.count(p.first, p.second) == static_cast<std::uint64_t>(n));
            total += static_cast<std::uint64_t>(n);
        }
        CHECK(table.total() == total);
    });
}

TEST_CASE("corpus and vocabulary files round-trip") {
    testing::TempDir dir("corpus");
    CorpusBin bin{"t1", {{"a", "b"}, {}, {"c"}}};
    write_bin(bin, dir / "t1.txt");
    const auto back = read_bin(dir / "t1.txt", "t1");
    CHECK(back.sentences == bin.sentences);

    std::filesystem::create_directories(dir / "parts");
    text::write_file_atomic(dir / "parts/b.txt", "y z\n");
    text::write_file_atomic(dir / "parts/a.txt", "x\n");
    const auto joined = read_bin(dir / "parts", "t2");
    CHECK(joined.sentences == std::vector<Sentence>{{"x"}, {"y", "z"}});

    const auto v = vocab_of({{"a", 4}, {"b", 4}, {"c", 1}}, MinCount{1});
    write_vocabulary(v, dir / "vocab.tsv");
    const auto w = read_vocabulary(dir / "vocab.tsv");
    CHECK(w.tokens() == v.tokens());
    CHECK(w.counts() == v.counts());

    CHECK_THROWS_AS(read_bin(dir / "missing.txt", "t1"), Error);
}

TEST_CASE("read_targets ignores blank lines") {
    testing::TempDir dir("targets");
    text::write_file_atomic(dir / "targets.txt", "cat\n\n  dog \n");
    CHECK(read_targets(dir / "targets.txt") == std::vector<std::string>{"cat", "dog"});
}
