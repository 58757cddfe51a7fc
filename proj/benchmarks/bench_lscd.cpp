#include "lscd/detect.hpp"
#include "lscd/eval.hpp"
#include "lscd/similarity.hpp"
#include "lscd/tr.hpp"
#include "lscd/tri.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace lscd;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

EmbeddingSpace random_space(std::size_t words, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    EmbeddingSpace e(dim, "t");
    for (std::size_t i = 0; i < words; ++i) e.set("w" + std::to_string(i), random_vector(rng, dim));
    return e;
}

const eval::SyntheticData& synthetic(std::size_t sentences) {
    static std::map<std::size_t, eval::SyntheticData> cache;
    auto it = cache.find(sentences);
    if (it == cache.end()) {
        eval::SynthSpec spec;
        spec.sentences_per_bin = sentences;
        it = cache.emplace(sentences, eval::generate_synthetic(spec)).first;
    }
    return it->second;
}

Vocabulary vocab_of(const TimeBinnedCorpus& c) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& b : c.bins)
        for (const auto& s : b.sentences)
            for (const auto& t : s) ++counts[t];
    return Vocabulary::from_counts(counts, MinCount{1});
}

}  // namespace

static void BM_GmmFit(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> a(0.3, 0.05), b(0.8, 0.05);
    std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = i % 2 ? a(rng) : b(rng);
    for (auto _ : state) benchmark::DoNotOptimize(detect::fit_gmm_1d(xs));
}
BENCHMARK(BM_GmmFit)->Arg(40)->Arg(200)->Arg(1000);

static void BM_Cosine(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto u = random_vector(rng, n), v = random_vector(rng, n);
    for (auto _ : state) benchmark::DoNotOptimize(cosine(u, v));
}
BENCHMARK(BM_Cosine)->Arg(100)->Arg(1000);

static void BM_NeighborhoodSimilarity(benchmark::State& state) {
    const auto words = static_cast<std::size_t>(state.range(0));
    const auto e1 = random_space(words, 100, 3), e2 = random_space(words, 100, 4);
    for (auto _ : state) benchmark::DoNotOptimize(neighborhood_similarity(e1, e2, "w0", 25));
}
BENCHMARK(BM_NeighborhoodSimilarity)->Arg(1000)->Arg(10000);

static void BM_SgnsGradient(benchmark::State& state) {
    std::mt19937_64 rng(5);
    const auto t = random_vector(rng, 100), p = random_vector(rng, 100);
    std::vector<std::vector<double>> n(20);
    for (auto& v : n) v = random_vector(rng, 100);
    for (auto _ : state) benchmark::DoNotOptimize(tr::sgns_gradient(t, p, n));
}
BENCHMARK(BM_SgnsGradient);

static void BM_TrainSgnsEpoch(benchmark::State& state) {
    const auto& data = synthetic(2000);
    const auto rc = tr::reference_targets(data.corpus, data.targets, vocab_of(data.corpus));
    tr::SgnsParams p;
    p.epochs = 1;
    p.min_count = 1;
    std::int64_t pairs = 0;
    for (const auto& bin : rc.bins)
        for (const auto& s : bin) pairs += static_cast<std::int64_t>(s.size()) * 10;
    for (auto _ : state) benchmark::DoNotOptimize(tr::train_sgns(rc, p));
    state.SetItemsProcessed(state.iterations() * pairs);
}
BENCHMARK(BM_TrainSgnsEpoch)->Unit(benchmark::kMillisecond);

static void BM_TriAccumulate(benchmark::State& state) {
    const auto& data = synthetic(2000);
    const auto vocab = vocab_of(data.corpus);
    const auto table = tri::make_index_vectors(vocab, 400, 10, 1);
    tri::TriOptions opt;
    opt.ppmi_weights = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(tri::train_tri(data.corpus.bins[0], vocab, table, opt, 5));
}
BENCHMARK(BM_TriAccumulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
