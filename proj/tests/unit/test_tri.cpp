#include "support.hpp"

#include "lscd/similarity.hpp"
#include "lscd/tri.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace lscd;
using namespace lscd::tri;

namespace {

Vocabulary vocab_for(const CorpusBin& bin) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : bin.sentences)
        for (const auto& t : s) ++counts[t];
    return Vocabulary::from_counts(counts, MinCount{1});
}

Vocabulary numbered_vocab(std::size_t n) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (std::size_t i = 0; i < n; ++i) counts.emplace("w" + std::to_string(i), 1);
    return Vocabulary::from_counts(counts, MinCount{1});
}

}  // namespace

TEST_CASE("index vectors are sparse ternary with balanced signs") {
    const auto v = numbered_vocab(50);
    SUBCASE("dim 4, two seeds: one +1 and one -1") {
        const auto table = make_index_vectors(v, 4, 2, 7);
        for (TokenId id = 0; id < 50; ++id) {
            const auto d = table.dense(id);
            CHECK(std::count(d.begin(), d.end(), 1.0) == 1);
            CHECK(std::count(d.begin(), d.end(), -1.0) == 1);
            CHECK(std::count(d.begin(), d.end(), 0.0) == 2);
        }
    }
    SUBCASE("seeds land on distinct indices") {
        const auto table = make_index_vectors(v, 20, 11, 3);
        for (TokenId id = 0; id < 50; ++id) {
            std::set<std::uint32_t> idx;
            int plus = 0;
            for (const auto& s : table.vector(id)) idx.insert(s.index), plus += s.sign > 0;
            CHECK(idx.size() == 11);
            CHECK(*idx.rbegin() < 20);
            CHECK(plus == 6);
        }
    }
    SUBCASE("deterministic per seed") {
        CHECK(make_index_vectors(v, 100, 10, 5) == make_index_vectors(v, 100, 10, 5));
        CHECK_FALSE(make_index_vectors(v, 100, 10, 5) == make_index_vectors(v, 100, 10, 6));
    }
    SUBCASE("invalid shapes") {
        CHECK_THROWS_AS(make_index_vectors(v, 4, 5, 1), Error);
        CHECK_THROWS_AS(make_index_vectors(v, 4, 0, 1), Error);
    }
}

TEST_CASE("index vectors are nearly orthogonal at dim 1000") {
    const auto v = numbered_vocab(50000);
    const auto table = make_index_vectors(v, 1000, 10, 42);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<TokenId> pick(0, 49999);
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        TokenId a = pick(rng), b = pick(rng);
        while (b == a) b = pick(rng);
        sum += std::abs(cosine(table.dense(a), table.dense(b)));
    }
    CHECK(sum / 1000.0 < 0.05);
}

TEST_CASE("empty bin yields an empty space") {
    const auto v = numbered_vocab(3);
    const auto table = make_index_vectors(v, 8, 2, 1);
    CHECK(train_tri(CorpusBin{"t1", {}}, v, table, {}, 2).empty());
}

TEST_CASE("count mode: each vector is the sum of its neighbours' index vectors") {
    const CorpusBin bin{"t1", {{"a", "b", "c"}, {"c", "a", "x"}}};
    const auto v = vocab_for(bin);
    const auto table = make_index_vectors(v, 8, 2, 9);
    const auto space = train_tri(bin, v, table, {}, 1);

    std::map<std::string, std::vector<double>> expected;
    for (auto [t, c] : stream_pairs(bin, v, 1)) {
        auto& row = expected[v.token(t)];
        row.resize(8, 0.0);
        const auto d = table.dense(c);
        for (std::size_t i = 0; i < 8; ++i) row[i] += d[i];
    }
    CHECK(space.size() == expected.size());
    for (const auto& [w, row] : expected) {
        const auto got = space.vector(w);
        CHECK(std::vector<double>(got.begin(), got.end()) == row);
    }
}

TEST_CASE("identical bins give identical spaces (implicit alignment)") {
    testing::for_all(30, 21, [](auto& rng, std::size_t) {
        const auto sentences = testing::random_sentences(rng, 40, 25, 10);
        const CorpusBin b1{"t1", sentences}, b2{"t2", sentences};
        std::unordered_map<std::string, std::uint64_t> counts;
        for (const auto& s : sentences)
            for (const auto& t : s) counts[t] += 2;
        if (counts.empty()) return;
        const auto v = Vocabulary::from_counts(counts, MinCount{1});
        const auto table = make_index_vectors(v, 64, 4, 5);
        for (bool ppmi : {false, true}) {
            TriOptions opt;
            opt.ppmi_weights = ppmi;
            const auto e1 = train_tri(b1, v, table, opt, 2);
            const auto e2 = train_tri(b2, v, table, opt, 2);
            REQUIRE(e1.tokens() == e2.tokens());
            for (const auto& w : e1.tokens()) {
                const auto a = e1.vector(w), b = e2.vector(w);
                CHECK(std::equal(a.begin(), a.end(), b.begin()));
                if (std::any_of(a.begin(), a.end(), [](double x) { return x != 0.0; })) CHECK(cosine(a, b) == 1.0);
            }
        }
    });
}

TEST_CASE("doubling a bin doubles every count-mode vector") {
    testing::for_all(30, 22, [](auto& rng, std::size_t) {
        const auto sentences = testing::random_sentences(rng, 30, 15, 8);
        auto doubled = sentences;
        doubled.insert(doubled.end(), sentences.begin(), sentences.end());
        const CorpusBin once{"t1", sentences}, twice{"t1", doubled};
        const auto v = vocab_for(twice);
        if (v.empty()) return;
        const auto table = make_index_vectors(v, 32, 4, 2);
        const auto e1 = train_tri(once, v, table, {}, 2);
        const auto e2 = train_tri(twice, v, table, {}, 2);
        REQUIRE(e1.tokens() == e2.tokens());
        for (const auto& w : e1.tokens()) {
            const auto a = e1.vector(w), b = e2.vector(w);
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == 2.0 * a[i]);
        }
    });
}

TEST_CASE("PPMI matches a brute-force probability table") {
    const CorpusBin bin{"t1", {{"a", "b", "a", "c"}, {"b", "c", "d"}, {"a", "d", "d", "b", "a"}}};
    const auto v = vocab_for(bin);
    const std::size_t window = 2;
    const CooccurrenceCounts counts(bin, v, window);

    // Independent table built from explicit position pairs.
    std::map<std::pair<std::string, std::string>, double> joint;
    std::map<std::string, double> left, right;
    double n = 0.0;
    for (const auto& s : bin.sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < s.size(); ++j) {
                if (i == j || (i > j ? i - j : j - i) > window) continue;
                joint[{s[i], s[j]}] += 1, left[s[i]] += 1, right[s[j]] += 1, n += 1;
            }
        }
    }
    for (const auto& w : v.tokens()) {
        for (const auto& c : v.tokens()) {
            const auto it = joint.find({w, c});
            double expected = 0.0;
            if (it != joint.end()) {
                const double pmi = std::log((it->second / n) / ((left[w] / n) * (right[c] / n)));
                expected = std::max(0.0, pmi);
            }
            CAPTURE(w);
            CAPTURE(c);
            CHECK(std::abs(ppmi(counts, v.id(w), v.id(c)) - expected) < 1e-12);
        }
    }
}

TEST_CASE("PPMI mode weights each distinct pair by count times PPMI") {
    const CorpusBin bin{"t1", {{"a", "b", "a", "c"}, {"b", "c", "d"}, {"a", "d", "d", "b", "a"}}};
    const auto v = vocab_for(bin);
    const auto table = make_index_vectors(v, 16, 4, 3);
    TriOptions opt;
    opt.ppmi_weights = true;
    const auto space = train_tri(bin, v, table, opt, 2);
    const CooccurrenceCounts counts(bin, v, 2);
    for (const auto& w : v.tokens()) {
        std::vector<double> expected(16, 0.0);
        for (const auto& c : v.tokens()) {
            const double weight = static_cast<double>(counts.count(v.id(w), v.id(c))) * ppmi(counts, v.id(w), v.id(c));
            const auto d = table.dense(v.id(c));
            for (std::size_t i = 0; i < 16; ++i) expected[i] += weight * d[i];
        }
        const auto got = space.vector(w);
        for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(got[i] - expected[i]) < 1e-12);
    }
}

TEST_CASE("positive_only ignores the -1 components") {
    const CorpusBin bin{"t1", {{"a", "b", "c", "a"}}};
    const auto v = vocab_for(bin);
    const auto table = make_index_vectors(v, 12, 4, 8);
    TriOptions opt;
    opt.positive_only = true;
    const auto space = train_tri(bin, v, table, opt, 1);
    for (const auto& w : space.tokens()) {
        for (double x : space.vector(w)) CHECK(x >= 0.0);
    }
}

TEST_CASE("init_from_previous starts from the previous space") {
    const CorpusBin b1{"t1", {{"a", "b", "c"}, {"d", "e"}}};
    const CorpusBin b2{"t2", {{"a", "c", "b"}}};
    std::unordered_map<std::string, std::uint64_t> counts{{"a", 2}, {"b", 2}, {"c", 2}, {"d", 1}, {"e", 1}};
    const auto v = Vocabulary::from_counts(counts, MinCount{1});
    const auto table = make_index_vectors(v, 10, 2, 4);
    const auto e1 = train_tri(b1, v, table, {}, 2);
    const auto fresh = train_tri(b2, v, table, {}, 2);
    TriOptions opt;
    opt.init_from_previous = true;
    const auto e2 = train_tri(b2, v, table, opt, 2, &e1);

    for (const auto& w : e1.tokens()) {
        const auto prev = e1.vector(w), got = e2.vector(w);
        for (std::size_t i = 0; i < 10; ++i) {
            const double add = fresh.contains(w) ? fresh.vector(w)[i] : 0.0;
            CHECK(got[i] == prev[i] + add);
        }
    }
    CHECK(e2.contains("d"));

    EmbeddingSpace wrong(3, "t0");
    CHECK_THROWS_AS(train_tri(b2, v, table, opt, 2, &wrong), Error);
}

TEST_CASE("training is deterministic") {
    const CorpusBin bin{"t1", {{"a", "b", "c", "d"}, {"b", "a"}}};
    const auto v = vocab_for(bin);
    const auto t1 = make_index_vectors(v, 50, 6, 77);
    const auto t2 = make_index_vectors(v, 50, 6, 77);
    CHECK(train_tri(bin, v, t1, {}, 2) == train_tri(bin, v, t2, {}, 2));
}
