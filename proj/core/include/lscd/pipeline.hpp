#pragma once

#include "lscd/collocation.hpp"
#include "lscd/detect.hpp"
#include "lscd/eval.hpp"
#include "lscd/similarity.hpp"
#include "lscd/tr.hpp"
#include "lscd/tri.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lscd::pipeline {

enum class Backend { Tri, Tr, Collocation };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

/// A failure attributed to one pipeline stage (ingest, train, similarities, ...).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct TriConfig {
    std::size_t dim = 400;
    std::size_t seeds = 10;
    std::size_t vocab_top_k = 50000;
    tri::TriOptions options;
};

struct CollocationConfig {
    std::size_t top_n = 100;
    double min_score = 0.0;
    std::size_t vocab_top_k = 50000;
};

struct PipelineConfig {
    std::vector<std::pair<std::string, std::filesystem::path>> periods;
    std::filesystem::path targets;
    std::vector<Backend> backends{Backend::Tr};
    std::vector<Measure> measures{Measure::Cosine};
    detect::Strategy strategy = detect::Strategy::Gmm;
    std::size_t k = 25;
    std::size_t window = 5;
    std::uint64_t seed = 1;
    TriConfig tri;
    tr::SgnsParams sgns;
    CollocationConfig collocation;
    detect::GmmOptions gmm;

    std::filesystem::path output_dir = "out";
    std::string name = "answer";
    std::filesystem::path cache_dir;  ///< empty: <output_dir>/cache
    bool use_cache = true;
    bool strict_deterministic = false;

    /// Out-of-range but legal settings noticed while loading.
    std::vector<std::string> warnings;
};

/// INI file with sections [corpus], [model], [tri], [tr], [collocation],
/// [gmm], [output]. Relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view ini, const std::filesystem::path& base_dir);

/// Throws on invalid settings; appends range warnings to `config.warnings`.
void validate(PipelineConfig& config);

/// Sorted `key=value` lines covering every parameter that affects outputs.
std::string canonical_string(const PipelineConfig& config);
std::string sha256_hex(std::string_view data);
std::string config_hash(const PipelineConfig& config);

struct RunRecord {
    Backend backend;
    Measure measure;
    SimilaritySet similarities;
    std::optional<detect::GmmModel> gmm;
    detect::LabelSet labels;
    detect::RankedList ranking;
    std::string name() const;
};

struct RunResult {
    std::vector<RunRecord> runs;
    std::size_t selected = 0;
    std::optional<std::string> caveat;
    std::filesystem::path labels_path;
    std::filesystem::path ranking_path;
    std::filesystem::path report_path;
    std::vector<std::string> warnings;
};

/// Stage-by-stage driver. Corpus and trained spaces are loaded lazily and
/// memoized; spaces are also cached on disk under a content hash.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);

    const PipelineConfig& config() const { return config_; }

    const TimeBinnedCorpus& corpus();
    const std::vector<std::string>& targets();
    Vocabulary vocabulary(Backend backend);

    std::string cache_key(Backend backend);
    /// One space per period.
    const std::vector<EmbeddingSpace>& spaces(Backend backend);
    SimilaritySet similarities(Backend backend, Measure measure);
    RunRecord evaluate_run(Backend backend, Measure measure, SimilaritySet set);

    /// Stages in order; writes task1/<name>.txt, task2/<name>.txt and report.json.
    RunResult run();

    /// Stand-alone stages used by the CLI subcommands; each reads the previous
    /// stage's artifacts from the output directory.
    void ingest_stage();
    void train_stage();
    void similarities_stage();
    void detect_stage();
    void rank_stage();

    std::vector<std::string> warnings;

private:
    std::filesystem::path cache_root() const;
    std::vector<EmbeddingSpace> train(Backend backend);
    std::vector<RunRecord> load_similarity_runs();
    std::size_t select(const std::vector<RunRecord>& runs, std::optional<std::string>& caveat) const;

    PipelineConfig config_;
    std::optional<TimeBinnedCorpus> corpus_;
    std::optional<std::vector<std::string>> targets_;
    std::vector<std::optional<std::vector<EmbeddingSpace>>> spaces_;
};

RunResult run_pipeline(const PipelineConfig& config);

struct Metric {
    std::string task;
    std::string dataset;
    std::string metric;
    double value = 0.0;
    friend bool operator==(const Metric&, const Metric&) = default;
};

struct MetricsReport {
    std::vector<Metric> metrics;
};

/// Compares `<pred>/task1/*.txt` (labels) and `<pred>/task2/*.txt` (rankings)
/// with identically named gold files.
MetricsReport evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gold_dir);

std::string render_table(const MetricsReport& report);
/// `task<TAB>dataset<TAB>metric<TAB>value` lines.
std::string render_machine(const MetricsReport& report);
MetricsReport parse_machine(std::string_view text);

/// Whole-file checks against the answer grammars.
bool is_valid_labels_file(std::string_view contents);
bool is_valid_ranking_file(std::string_view contents);

}  // namespace lscd::pipeline
