// lscd: lexical semantic change detection between two corpora.
//
//   lscd synth --out data/              synthetic corpus, gold and config.ini
//   lscd run --config data/config.ini   full pipeline
//   lscd eval --pred out/ --gold data/truth/

#include "lscd/pipeline.hpp"
#include "lscd/text.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace lscd;
namespace fs = std::filesystem;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool strict = false;
};

pipeline::PipelineConfig load(const Globals& g) {
    if (g.config.empty()) throw Error("--config is required for this subcommand");
    auto c = pipeline::load_config(g.config);
    if (g.seed) c.seed = *g.seed;
    c.strict_deterministic = g.strict;
    pipeline::validate(c);
    return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "lscd: warning: " << w << '\n';
}

void print_runs(const pipeline::RunResult& r) {
    std::cout << "run               scored  skipped  changed  log-likelihood\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const auto& run = r.runs[i];
        std::size_t changed = 0;
        for (const auto& [t, l] : run.labels.labels) changed += static_cast<std::size_t>(l);
        std::string name = run.name() + (i == r.selected ? " *" : "");
        name.resize(std::max<std::size_t>(name.size(), 16), ' ');
        std::cout << name << "  " << std::setw(6) << run.similarities.size() << "  " << std::setw(7)
                  << run.similarities.skipped.size() << "  " << std::setw(7) << changed << "  "
                  << (run.gmm ? text::format_double(run.gmm->log_likelihood) : std::string("-")) << '\n';
    }
    if (r.caveat) std::cout << "note: " << *r.caveat << '\n';
    std::cout << "labels:  " << r.labels_path.string() << "\nranking: " << r.ranking_path.string()
              << "\nreport:  " << r.report_path.string() << '\n';
}

void write_synth_config(const fs::path& dir, const std::string& name, std::uint64_t seed) {
    std::string ini;
    ini += "[corpus]\nperiods = t1, t2\nt1 = corpus/t1.txt\nt2 = corpus/t2.txt\ntargets = targets.txt\n\n";
    ini += "[model]\nbackend = tr\nmeasure = cs\nstrategy = gmm\nwindow = 5\nseed = " + std::to_string(seed) + "\n\n";
    ini += "[tr]\ndim = 100\nnegatives = 20\nmin_count = 10\nepochs = 4\n\n";
    ini += "[output]\ndir = out\nname = " + name + "\n";
    text::write_file_atomic(dir / "config.ini", ini);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised lexical semantic change detection over two time periods"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Pipeline configuration (INI)");
    app.add_option("--seed", g.seed, "Override the configured random seed");
    app.add_flag("--strict-deterministic", g.strict, "Single-threaded training; reruns are byte-identical");

    auto* ingest = app.add_subcommand("ingest", "Read corpora and targets, write vocabularies");
    auto* train = app.add_subcommand("train", "Train (or load cached) per-period embedding spaces");
    auto* sims = app.add_subcommand("similarities", "Score every target across periods");
    auto* detect = app.add_subcommand("detect", "Write binary change labels (task1)");
    auto* rank = app.add_subcommand("rank", "Write graded change ranking (task2)");
    auto* run = app.add_subcommand("run", "Full pipeline: ingest, train, similarities, detect, rank");

    auto* eval = app.add_subcommand("eval", "Score answer files against gold files");
    std::string pred_dir, gold_dir;
    bool machine = false;
    eval->add_option("--pred", pred_dir, "Directory with task1/ and task2/ answers")->required();
    eval->add_option("--gold", gold_dir, "Directory with task1/ and task2/ gold files")->required();
    eval->add_flag("--machine", machine, "Print task<TAB>dataset<TAB>metric<TAB>value lines only");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-period corpus with gold labels");
    eval::SynthSpec spec;
    std::string synth_out, synth_name = "synthetic";
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--vocab", spec.vocab_size, "Vocabulary size")->capture_default_str();
    synth->add_option("--targets", spec.n_targets, "Number of target words")->capture_default_str();
    synth->add_option("--changed", spec.n_changed, "Number of changed targets")->capture_default_str();
    synth->add_option("--sentences", spec.sentences_per_bin, "Sentences per period")->capture_default_str();
    synth->add_option("--strength", spec.change_strength, "Change strength of changed targets")->capture_default_str();
    synth->add_option("--name", synth_name, "Dataset name for gold files")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            spec.rng_seed = g.seed.value_or(1);
            const auto data = eval::generate_synthetic(spec);
            eval::write_synthetic(data, synth_out, synth_name);
            write_synth_config(synth_out, synth_name, spec.rng_seed);
            std::cout << "wrote " << synth_out << " (" << data.targets.size() << " targets, "
                      << spec.n_changed << " changed)\n";
            return 0;
        }
        if (eval->parsed()) {
            const auto report = pipeline::evaluate(pred_dir, gold_dir);
            std::cout << (machine ? pipeline::render_machine(report) : pipeline::render_table(report));
            return 0;
        }

        pipeline::Pipeline p(load(g));
        if (ingest->parsed()) {
            p.ingest_stage();
        } else if (train->parsed()) {
            p.train_stage();
        } else if (sims->parsed()) {
            p.similarities_stage();
        } else if (detect->parsed()) {
            p.detect_stage();
        } else if (rank->parsed()) {
            p.rank_stage();
        } else if (run->parsed()) {
            const auto result = p.run();
            print_runs(result);
        }
        print_warnings(p.warnings);
        return 0;
    } catch (const pipeline::StageError& e) {
        std::cerr << "lscd: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lscd: " << e.what() << '\n';
        return 1;
    }
}
