#include "lscd/detect.hpp"

#include "lscd/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

namespace lscd::detect {

namespace {

double log_sum_exp(double a, double b) {
    const double m = std::max(a, b);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double quantile(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Moments {
    double mean;
    double sd;  // population
};

Moments moments(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

/// E-step: fills responsibilities, returns the log-likelihood.
double expectation(std::span<const double> xs, const GmmModel& m, std::vector<std::array<double, 2>>& resp) {
    resp.resize(xs.size());
    double ll = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double a = std::log(m.weights[0]) + gaussian_log_density(xs[i], m.means[0], m.variances[0]);
        const double b = std::log(m.weights[1]) + gaussian_log_density(xs[i], m.means[1], m.variances[1]);
        const double lse = log_sum_exp(a, b);
        resp[i] = {std::exp(a - lse), std::exp(b - lse)};
        ll += lse;
    }
    return ll;
}

void check_fit_input(std::span<const double> values) {
    if (values.size() < kMinGmmPoints) {
        throw Error("insufficient targets: GMM needs at least " + std::to_string(kMinGmmPoints) + " scores, got " +
                    std::to_string(values.size()));
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) throw Error("degenerate similarity set: all scores are equal");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error("similarity set contains a non-finite score");
    }
}

}  // namespace

double gaussian_log_density(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_likelihood(const GmmModel& model, std::span<const double> values) {
    double ll = 0.0;
    for (double x : values) {
        ll += log_sum_exp(std::log(model.weights[0]) + gaussian_log_density(x, model.means[0], model.variances[0]),
                          std::log(model.weights[1]) + gaussian_log_density(x, model.means[1], model.variances[1]));
    }
    return ll;
}

GmmModel run_em(std::span<const double> xs, std::array<double, 2> weights, std::array<double, 2> means,
                std::array<double, 2> variances, const GmmOptions& options) {
    GmmModel m;
    m.weights = weights;
    m.means = means;
    m.variances = {std::max(variances[0], options.variance_floor), std::max(variances[1], options.variance_floor)};

    double ll = expectation(xs, m, m.responsibilities);
    m.history.push_back(ll);
    const double n = static_cast<double>(xs.size());
    while (m.iterations < options.max_iter) {
        for (std::size_t c = 0; c < 2; ++c) {
            double nk = 0.0, sx = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                nk += m.responsibilities[i][c];
                sx += m.responsibilities[i][c] * xs[i];
            }
            // A component with no mass keeps its parameters.
            if (nk <= 0.0) continue;
            const double mean = sx / nk;
            double sq = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) sq += m.responsibilities[i][c] * (xs[i] - mean) * (xs[i] - mean);
            m.weights[c] = nk / n;
            m.means[c] = mean;
            m.variances[c] = std::max(sq / nk, options.variance_floor);
        }
        const double total = m.weights[0] + m.weights[1];
        m.weights[0] /= total;
        m.weights[1] /= total;

        const double next = expectation(xs, m, m.responsibilities);
        m.history.push_back(next);
        ++m.iterations;
        const double gain = next - ll;
        ll = next;
        if (gain < options.tol) {
            m.converged = true;
            break;
        }
    }
    m.log_likelihood = ll;
    return m;
}

GmmModel fit_gmm_1d(std::span<const double> values, const GmmOptions& options) {
    check_fit_input(values);
    if (options.restarts < 1) throw Error("GMM restarts must be >= 1");

    const std::vector<double> xs(values.begin(), values.end());
    const auto [mean, sd] = moments(xs);
    const double pooled = sd * sd;
    const std::array<double, 2> base =
        options.init.means ? *options.init.means : std::array<double, 2>{quantile(xs, 0.25), quantile(xs, 0.75)};

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 0.25 * sd);
    std::optional<GmmModel> best;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        auto init = base;
        if (r > 0) {
            init[0] += jitter(rng);
            init[1] += jitter(rng);
        }
        if (options.init.swap_components) std::swap(init[0], init[1]);
        auto model = run_em(xs, {0.5, 0.5}, init, {pooled, pooled}, options);
        if (!best || model.log_likelihood > best->log_likelihood) best = std::move(model);
    }
    return std::move(*best);
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Gmm: return "gmm";
        case Strategy::Mean: return "mean";
        case Strategy::MeanMinusSigma: return "mean-sigma";
        case Strategy::MeanPlusSigma: return "mean+sigma";
        case Strategy::Winsorizing: return "winsorize";
    }
    return "?";
}

Strategy parse_strategy(std::string_view s) {
    std::string l(text::trim(s));
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "gmm") return Strategy::Gmm;
    if (l == "mean") return Strategy::Mean;
    if (l == "mean-sigma" || l == "mean_minus_sigma") return Strategy::MeanMinusSigma;
    if (l == "mean+sigma" || l == "mean_plus_sigma") return Strategy::MeanPlusSigma;
    if (l == "winsorize" || l == "winsorizing") return Strategy::Winsorizing;
    throw Error("unknown detection strategy '" + std::string(s) + "'");
}

GmmLabeling assign_labels(const SimilaritySet& set, const GmmOptions& options) {
    const auto values = set.values();
    GmmLabeling out;
    out.model = fit_gmm_1d(values, options);
    out.labels.strategy = Strategy::Gmm;

    // Component 0 starts as "stable", component 1 as "changed".
    out.flipped = out.model.means[0] < out.model.means[1];
    std::size_t i = 0;
    for (const auto& [target, score] : set.scores) {
        const auto& r = out.model.responsibilities[i++];
        int label = 0;
        if (r[0] != r[1]) {
            label = r[1] > r[0] ? 1 : 0;
            if (out.flipped) label = 1 - label;
        }
        out.labels.labels.emplace(target, label);
    }
    return out;
}

LabelSet threshold_labels(const SimilaritySet& set, Strategy strategy) {
    if (set.size() < 2) throw Error("threshold labels need at least 2 scores");
    const auto values = set.values();
    const auto [mu, sigma] = moments(values);
    double theta = mu;
    switch (strategy) {
        case Strategy::Mean: theta = mu; break;
        case Strategy::MeanMinusSigma: theta = mu - sigma; break;
        case Strategy::MeanPlusSigma: theta = mu + sigma; break;
        default: throw Error("threshold_labels: not a threshold strategy");
    }
    LabelSet out;
    out.strategy = strategy;
    out.threshold = theta;
    for (const auto& [target, score] : set.scores) out.labels.emplace(target, score < theta ? 1 : 0);
    return out;
}

std::vector<double> winsorized_scores(const SimilaritySet& set) {
    if (set.size() < 2) throw Error("winsorizing needs at least 2 scores");
    auto values = set.values();
    const auto [mu, sigma] = moments(values);
    for (auto& v : values) v = std::clamp(v, mu - sigma, mu + sigma);
    return values;
}

LabelSet winsorize_labels(const SimilaritySet& set) {
    const auto clamped = winsorized_scores(set);
    const double theta = std::accumulate(clamped.begin(), clamped.end(), 0.0) / static_cast<double>(clamped.size());
    LabelSet out;
    out.strategy = Strategy::Winsorizing;
    out.threshold = theta;
    for (const auto& [target, score] : set.scores) out.labels.emplace(target, score < theta ? 1 : 0);
    return out;
}

LabelSet label_targets(const SimilaritySet& set, Strategy strategy, const GmmOptions& options) {
    switch (strategy) {
        case Strategy::Gmm: return assign_labels(set, options).labels;
        case Strategy::Winsorizing: return winsorize_labels(set);
        default: return threshold_labels(set, strategy);
    }
}

Selection select_model(std::span<const Candidate> candidates) {
    if (candidates.empty()) throw Error("select_model: no candidates");
    Selection s;
    s.log_likelihood = candidates[0].model.log_likelihood;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].model.log_likelihood > s.log_likelihood) {
            s.index = i;
            s.log_likelihood = candidates[i].model.log_likelihood;
        }
    }
    if (candidates.size() > 1) {
        s.caveat =
            "log-likelihoods compared across different similarity sets; the comparison is heuristic, not a "
            "likelihood-ratio test on shared data";
    }
    return s;
}

RankedList rank_targets(const SimilaritySet& set) {
    RankedList out;
    out.reserve(set.size());
    for (const auto& [target, score] : set.scores) out.push_back({target, 1.0 - std::abs(score)});
    std::stable_sort(out.begin(), out.end(), [](const RankedTarget& a, const RankedTarget& b) {
        if (a.distance != b.distance) return a.distance > b.distance;
        return a.target < b.target;
    });
    return out;
}

std::string format_labels(const LabelSet& labels) {
    std::string out;
    for (const auto& [target, label] : labels.labels) {
        out += target;
        out += '\t';
        out += label ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_labels(const LabelSet& labels, const std::filesystem::path& path) {
    text::write_file_atomic(path, format_labels(labels));
}

std::string format_ranking(const RankedList& ranking) {
    std::string out;
    for (const auto& r : ranking) {
        out += r.target;
        out += '\t';
        out += text::format_fixed(r.distance);
        out += '\n';
    }
    return out;
}

void write_ranking(const RankedList& ranking, const std::filesystem::path& path) {
    text::write_file_atomic(path, format_ranking(ranking));
}

namespace {

template <typename Parse>
auto read_two_column(const std::filesystem::path& path, Parse parse) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::map<std::string, decltype(parse(std::string_view{}))> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 2 || fields[0].empty()) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>value");
        }
        if (!out.emplace(std::string(fields[0]), parse(fields[1])).second) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": duplicate word '" + std::string(fields[0]) + "'");
        }
    }
    return out;
}

}  // namespace

std::map<std::string, int> read_labels(const std::filesystem::path& path) {
    return read_two_column(path, [&](std::string_view v) {
        const auto t = text::trim(v);
        if (t != "0" && t != "1") throw Error(path.string() + ": label must be 0 or 1, got '" + std::string(t) + "'");
        return t == "1" ? 1 : 0;
    });
}

std::map<std::string, double> read_scores(const std::filesystem::path& path) {
    return read_two_column(path, [](std::string_view v) { return text::parse_double(v); });
}

}  // namespace lscd::detect
