#pragma once

#include "lscd/similarity.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lscd::detect {

/// Two-component univariate Gaussian mixture. Component index is the
/// initial (arbitrary) label; assign_labels decides which one means "changed".
struct GmmModel {
    std::array<double, 2> weights{};
    std::array<double, 2> means{};
    std::array<double, 2> variances{};
    /// Posterior of each component per point, in input order.
    std::vector<std::array<double, 2>> responsibilities;
    double log_likelihood = 0.0;
    /// Log-likelihood at the initial parameters, then after every EM iteration.
    std::vector<double> history;
    std::size_t iterations = 0;
    bool converged = false;
};

struct InitPolicy {
    /// Initial means; defaults to the 25th and 75th percentiles.
    std::optional<std::array<double, 2>> means;
    /// Exchange the two initial components (exercises label symmetry).
    bool swap_components = false;
};

struct GmmOptions {
    InitPolicy init;
    double tol = 1e-10;
    std::size_t max_iter = 1000;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
    double variance_floor = 1e-6;
};

/// Minimum number of points fit_gmm_1d accepts.
inline constexpr std::size_t kMinGmmPoints = 4;

/// Best of `restarts` EM runs by final log-likelihood. The first run starts
/// from the policy's means; later runs jitter them.
GmmModel fit_gmm_1d(std::span<const double> values, const GmmOptions& options = {});

/// Runs EM from exactly these parameters, without restarts.
GmmModel run_em(std::span<const double> values, std::array<double, 2> weights, std::array<double, 2> means,
                std::array<double, 2> variances, const GmmOptions& options);

double gaussian_log_density(double x, double mean, double variance);

/// Sum over points of log sum_m w_m N(x | mu_m, var_m).
double log_likelihood(const GmmModel& model, std::span<const double> values);

enum class Strategy { Gmm, Mean, MeanMinusSigma, MeanPlusSigma, Winsorizing };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct LabelSet {
    Strategy strategy = Strategy::Gmm;
    /// 1 = changed, 0 = stable.
    std::map<std::string, int> labels;
    /// Decision threshold for the threshold strategies.
    std::optional<double> threshold;
};

struct GmmLabeling {
    LabelSet labels;
    GmmModel model;
    /// Whether the component labels were inverted.
    bool flipped = false;
};

/// Maximum-responsibility labels, inverted when the "stable" component has
/// the lower mean. Equal responsibilities resolve to 0.
GmmLabeling assign_labels(const SimilaritySet& set, const GmmOptions& options = {});

/// label = 1 iff score < threshold, with threshold mu, mu - sigma or mu + sigma
/// (population standard deviation).
LabelSet threshold_labels(const SimilaritySet& set, Strategy strategy);

/// Scores clamped into [mu - sigma, mu + sigma]; label = 1 iff the original
/// score is below the mean of the clamped scores.
LabelSet winsorize_labels(const SimilaritySet& set);

/// Clamped scores used by winsorize_labels, in target order.
std::vector<double> winsorized_scores(const SimilaritySet& set);

LabelSet label_targets(const SimilaritySet& set, Strategy strategy, const GmmOptions& options = {});

struct Candidate {
    std::string name;
    SimilaritySet similarities;
    GmmModel model;
};

struct Selection {
    std::size_t index = 0;
    double log_likelihood = 0.0;
    /// Set whenever candidates were fitted on different similarity sets, where
    /// their likelihoods are not strictly comparable.
    std::optional<std::string> caveat;
};

/// Argmax of the GMM log-likelihood; the first candidate wins ties.
Selection select_model(std::span<const Candidate> candidates);

struct RankedTarget {
    std::string target;
    double distance = 0.0;
};
using RankedList = std::vector<RankedTarget>;

/// distance = 1 - |score|, descending, ties by target.
RankedList rank_targets(const SimilaritySet& set);

/// `word<TAB>label` per line.
void write_labels(const LabelSet& labels, const std::filesystem::path& path);
std::string format_labels(const LabelSet& labels);
/// `word<TAB>distance` per line, plain decimals.
void write_ranking(const RankedList& ranking, const std::filesystem::path& path);
std::string format_ranking(const RankedList& ranking);

std::map<std::string, int> read_labels(const std::filesystem::path& path);
std::map<std::string, double> read_scores(const std::filesystem::path& path);

}  // namespace lscd::detect
