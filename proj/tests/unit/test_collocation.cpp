#include "support.hpp"

#include "lscd/collocation.hpp"
#include "lscd/similarity.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace lscd;
using namespace lscd::collocation;

namespace {

Vocabulary vocab_for(const CorpusBin& bin) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : bin.sentences)
        for (const auto& t : s) ++counts[t];
    return Vocabulary::from_counts(counts, MinCount{1});
}

CollocationProfile profile(std::vector<std::pair<std::string, double>> w) { return {"x", "t1", std::move(w)}; }

// Dice from an explicit enumeration of window position pairs.
std::map<std::string, double> brute_dice(const CorpusBin& bin, const std::string& word, std::size_t window) {
    std::map<std::pair<std::string, std::string>, double> joint;
    std::map<std::string, double> as_target, as_context;
    for (const auto& s : bin.sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < s.size(); ++j) {
                if (i == j || (i > j ? i - j : j - i) > window) continue;
                joint[{s[i], s[j]}] += 1;
                as_target[s[i]] += 1;
                as_context[s[j]] += 1;
            }
        }
    }
    std::map<std::string, double> out;
    for (const auto& [p, n] : joint)
        if (p.first == word) out[p.second] = 2 * n / (as_target[word] + as_context[p.second]);
    return out;
}

}  // namespace

TEST_CASE("dice coefficient") {
    CHECK(dice(0, 4, 7) == 0.0);
    CHECK(dice(5, 5, 5) == 1.0);
    CHECK(dice(3, 10, 5) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK_THROWS_AS(dice(6, 5, 10), Error);
    CHECK_THROWS_AS(dice(0, 0, 0), Error);
    testing::for_all(300, 61, [](auto& rng, std::size_t) {
        const auto a = testing::uniform_size(rng, 1, 100), b = testing::uniform_size(rng, 1, 100);
        const auto j = testing::uniform_size(rng, 0, std::min(a, b));
        CHECK(dice(j, a, b) == dice(j, b, a));
        CHECK(dice(j, a, b) >= 0.0);
        CHECK(dice(j, a, b) <= 1.0);
    });
}

TEST_CASE("profiles") {
    const CorpusBin bin{"t1", {{"a", "w", "b"}, {"c", "d"}}};
    const auto v = vocab_for(bin);
    SUBCASE("unseen word gives an empty profile") {
        const CorpusBin other{"t2", {{"c", "d"}}};
        CHECK(build_profile(other, v, "w", {}).empty());
    }
    SUBCASE("support is exactly the co-occurring contexts") {
        ProfileOptions opt;
        opt.window = 1;
        opt.top_n = 10;
        std::set<std::string> support;
        for (const auto& [c, s] : build_profile(bin, v, "w", opt).weights) support.insert(c);
        CHECK(support == std::set<std::string>{"a", "b"});
    }
    SUBCASE("word outside the vocabulary violates the precondition") {
        CHECK_THROWS_AS(build_profile(bin, v, "zzz", {}), Error);
    }
}

TEST_CASE("profile scores match a brute-force Dice table") {
    testing::for_all(100, 62, [](auto& rng, std::size_t) {
        const CorpusBin bin{"t1", testing::random_sentences(rng, 12, 8, 9)};
        const auto v = vocab_for(bin);
        if (v.empty()) return;
        ProfileOptions opt;
        opt.window = testing::uniform_size(rng, 1, 4);
        opt.top_n = 1000;
        for (const auto& w : v.tokens()) {
            const auto expected = brute_dice(bin, w, opt.window);
            const auto p = build_profile(bin, v, w, opt);
            REQUIRE(p.weights.size() == expected.size());
            for (const auto& [c, s] : p.weights) {
                CHECK(std::abs(s - expected.at(c)) < 1e-12);
                CHECK(s > 0.0);
                CHECK(s <= 1.0);
            }
            for (std::size_t i = 1; i < p.weights.size(); ++i) CHECK(p.weights[i].second <= p.weights[i - 1].second);
        }
    });
}

TEST_CASE("top_n and min_score limit the profile") {
    const CorpusBin bin{"t1", {{"a", "w", "b"}, {"w", "b"}, {"c", "w", "b"}}};
    const auto v = vocab_for(bin);
    ProfileOptions opt;
    opt.window = 1;
    const auto full = build_profile(bin, v, "w", opt);
    REQUIRE(full.weights.size() == 3);
    CHECK(full.weights[0].first == "b");

    opt.top_n = 1;
    CHECK(build_profile(bin, v, "w", opt).weights == std::vector<std::pair<std::string, double>>{full.weights[0]});
    opt.top_n = 100;
    opt.min_score = full.weights[1].second + 1e-9;
    CHECK(build_profile(bin, v, "w", opt).weights.size() == 1);
}

TEST_CASE("duplicating every sentence leaves Dice unchanged") {
    testing::for_all(50, 63, [](auto& rng, std::size_t) {
        auto sentences = testing::random_sentences(rng, 10, 8, 8);
        const CorpusBin once{"t1", sentences};
        sentences.insert(sentences.end(), once.sentences.begin(), once.sentences.end());
        const CorpusBin twice{"t1", sentences};
        const auto v = vocab_for(once);
        for (const auto& w : v.tokens()) CHECK(build_profile(once, v, w, {}) == build_profile(twice, v, w, {}));
    });
}

TEST_CASE("profile similarity") {
    const auto p = profile({{"a", 0.3}, {"b", 0.7}});
    CHECK(profile_similarity(p, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(profile_similarity(p, profile({{"c", 0.5}})) == 0.0);
    CHECK(profile_similarity(profile({{"a", 0.5}, {"b", 0.5}}), profile({{"a", 0.5}, {"c", 0.5}})) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(profile_similarity(p, profile({})) == 0.0);

    testing::for_all(300, 64, [](auto& rng, std::size_t) {
        auto random_profile = [&] {
            std::vector<std::pair<std::string, double>> w;
            for (std::size_t i = 0; i < 10; ++i)
                if (rng() % 2) w.emplace_back("c" + std::to_string(i), testing::uniform(rng, 0.01, 1));
            return profile(w);
        };
        const auto a = random_profile(), b = random_profile();
        const double s = profile_similarity(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s == profile_similarity(b, a));
    });
}

TEST_CASE("profile space rows reproduce profile similarity under cosine") {
    std::mt19937_64 rng(65);
    const CorpusBin b1{"t1", testing::random_sentences(rng, 40, 10, 8)};
    const CorpusBin b2{"t2", testing::random_sentences(rng, 40, 10, 8)};
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto* b : {&b1, &b2})
        for (const auto& s : b->sentences)
            for (const auto& t : s) ++counts[t];
    const auto v = Vocabulary::from_counts(counts, MinCount{1});
    const auto e1 = profile_space(b1, v, v.tokens(), {});
    const auto e2 = profile_space(b2, v, v.tokens(), {});
    CHECK(e1.dim() == v.size());
    for (const auto& w : v.tokens()) {
        const auto p1 = build_profile(b1, v, w, {}), p2 = build_profile(b2, v, w, {});
        if (p1.empty() || p2.empty()) {
            CHECK(e1.contains(w) == !p1.empty());
            continue;
        }
        CHECK(std::abs(cosine(e1.vector(w), e2.vector(w)) - profile_similarity(p1, p2)) < 1e-12);
    }
}

TEST_CASE("profile lines round-trip") {
    const CollocationProfile p{"word", "t2", {{"x:y", 0.25}, {"z", 1.0 / 3.0}}};
    const auto line = format_profile(p);
    CHECK(line.rfind("word\tt2\t", 0) == 0);
    CHECK(parse_profile(line) == p);
    CHECK(parse_profile("w\tt1\t").empty());
    CHECK_THROWS_AS(parse_profile("w\tt1"), Error);
    CHECK_THROWS_AS(format_profile({"w", "t1", {{"a,b", 0.5}}}), Error);
}
