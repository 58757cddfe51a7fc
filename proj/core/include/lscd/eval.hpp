#pragma once

#include "lscd/corpus.hpp"
#include "lscd/detect.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lscd::eval {

struct GoldStandard {
    std::map<std::string, int> binary;
    std::map<std::string, double> graded;
};

/// Fraction of gold targets whose predicted label matches. Every gold target
/// must be predicted.
double accuracy(const detect::LabelSet& pred, const GoldStandard& gold);
double accuracy(const std::map<std::string, int>& pred, const std::map<std::string, int>& gold);

/// Ranks 1..n, tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman between predicted distances and gold graded scores, over the
/// graded gold targets.
double spearman(const detect::RankedList& pred, const GoldStandard& gold);
double spearman(const std::map<std::string, double>& pred, const std::map<std::string, double>& gold);

struct SynthSpec {
    std::size_t vocab_size = 500;
    std::size_t n_targets = 40;
    std::size_t n_changed = 10;
    std::size_t sentences_per_bin = 20000;
    /// Used for every changed target unless `change_strengths` is given.
    double change_strength = 0.9;
    /// Optional per-changed-target strengths (size n_changed).
    std::vector<double> change_strengths;
    /// Context words per sentence, besides the target.
    std::size_t context_length = 6;
    std::uint64_t rng_seed = 1;
};

void validate(const SynthSpec& spec);

struct SyntheticData {
    TimeBinnedCorpus corpus;
    GoldStandard gold;
    std::vector<std::string> targets;
};

/// Each target owns two disjoint context communities A and B. Period 1 draws
/// contexts from A; in period 2 a changed target draws from B with
/// probability equal to its change strength. Gold: binary = changed flag,
/// graded = change strength (0 for stable targets).
SyntheticData generate_synthetic(const SynthSpec& spec);

/// Writes period files, targets.txt and gold files in the answer layout
/// (`truth/task1/<name>.txt`, `truth/task2/<name>.txt`).
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir, const std::string& name);

GoldStandard read_gold(const std::filesystem::path& binary_path, const std::filesystem::path& graded_path);

}  // namespace lscd::eval
