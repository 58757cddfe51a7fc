#include "lscd/pipeline.hpp"

#include "lscd/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <unistd.h>

namespace lscd::pipeline {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string lower(std::string_view s) {
    std::string out(text::trim(s));
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool parse_bool(std::string_view s) {
    const auto l = lower(s);
    if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
    if (l == "false" || l == "no" || l == "off" || l == "0") return false;
    throw Error("not a boolean: '" + std::string(s) + "'");
}

std::size_t parse_size(std::string_view s) {
    const auto v = text::parse_int(s);
    if (v < 0) throw Error("expected a non-negative integer, got '" + std::string(s) + "'");
    return static_cast<std::size_t>(v);
}

std::vector<std::string> parse_list(std::string_view s) {
    std::vector<std::string> out;
    for (auto item : text::split(s, ',')) {
        const auto t = text::trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::string corpus_fingerprint(const fs::path& path) {
    if (!fs::is_directory(path)) return sha256_hex(text::read_file(path));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string digest;
    for (const auto& f : files) digest += sha256_hex(text::read_file(f));
    return sha256_hex(digest);
}

void apply_language_preset(PipelineConfig& c, std::string_view language) {
    const auto l = lower(language);
    if (l == "english" || l == "en") {
        c.tri.dim = 400;
        c.tri.options.ppmi_weights = false;
        c.sgns.epochs = 8;
    } else if (l == "latin" || l == "la") {
        c.tri.dim = 1000;
        c.tri.options.ppmi_weights = true;
        c.sgns.epochs = 8;
    } else if (l == "german" || l == "de" || l == "swedish" || l == "sv") {
        c.tri.dim = 1000;
        c.tri.options.ppmi_weights = true;
        c.sgns.epochs = 4;
    } else {
        throw Error("unknown language preset '" + std::string(language) + "'");
    }
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"model", {"backend", "measure", "strategy", "k", "window", "seed", "language"}},
        {"tri", {"dim", "seeds", "vocab_top_k", "init_from_previous", "positive_only", "ppmi_weights"}},
        {"tr",
         {"dim", "negatives", "min_count", "epochs", "learning_rate", "min_learning_rate", "subsample", "threads"}},
        {"collocation", {"top_n", "min_score", "vocab_top_k"}},
        {"gmm", {"tol", "max_iter", "restarts", "variance_floor"}},
        {"output", {"dir", "name", "cache_dir", "cache"}},
    };
    return keys;
}

fs::path resolve(const fs::path& base, std::string_view p) {
    fs::path path{std::string(text::trim(p))};
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::Tri: return "tri";
        case Backend::Tr: return "tr";
        case Backend::Collocation: return "collocation";
    }
    return "?";
}

Backend parse_backend(std::string_view s) {
    const auto l = lower(s);
    if (l == "tri") return Backend::Tri;
    if (l == "tr") return Backend::Tr;
    if (l == "collocation" || l == "collocations") return Backend::Collocation;
    throw Error("unknown backend '" + std::string(s) + "' (expected tri, tr or collocation)");
}

PipelineConfig parse_config(std::string_view ini, const fs::path& base_dir) {
    pt::ptree tree;
    std::istringstream in{std::string(ini)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(std::string("config: ") + e.what());
    }

    PipelineConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw Error("config: key '" + section + "' outside a section");
        if (section == "corpus") continue;
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) throw Error("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) throw Error("config: unknown key '" + key + "' in [" + section + "]");
        }
    }

    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '/'))) return std::string(text::trim(*v));
        return std::nullopt;
    };

    if (auto lang = get("model/language")) apply_language_preset(c, *lang);

    const auto corpus = tree.get_child_optional("corpus");
    if (!corpus) throw Error("config: missing [corpus] section");
    const auto periods = get("corpus/periods");
    if (!periods) throw Error("config: [corpus] needs 'periods = <id>, <id>'");
    for (const auto& id : parse_list(*periods)) {
        const auto p = get("corpus/" + id);
        if (!p) throw Error("config: [corpus] lists period '" + id + "' but gives no path for it");
        c.periods.emplace_back(id, resolve(base_dir, *p));
    }
    for (const auto& [key, value] : *corpus) {
        if (key != "periods" && key != "targets" &&
            std::none_of(c.periods.begin(), c.periods.end(), [&](const auto& p) { return p.first == key; })) {
            throw Error("config: unknown key '" + key + "' in [corpus]");
        }
    }
    const auto targets = get("corpus/targets");
    if (!targets) throw Error("config: [corpus] needs 'targets = <path>'");
    c.targets = resolve(base_dir, *targets);

    if (auto v = get("model/backend")) {
        c.backends.clear();
        for (const auto& b : parse_list(*v)) c.backends.push_back(parse_backend(b));
    }
    if (auto v = get("model/measure")) {
        c.measures.clear();
        for (const auto& m : parse_list(*v)) c.measures.push_back(parse_measure(m));
    }
    if (auto v = get("model/strategy")) c.strategy = detect::parse_strategy(*v);
    if (auto v = get("model/k")) c.k = parse_size(*v);
    if (auto v = get("model/window")) c.window = parse_size(*v);
    if (auto v = get("model/seed")) c.seed = static_cast<std::uint64_t>(text::parse_int(*v));

    if (auto v = get("tri/dim")) c.tri.dim = parse_size(*v);
    if (auto v = get("tri/seeds")) c.tri.seeds = parse_size(*v);
    if (auto v = get("tri/vocab_top_k")) c.tri.vocab_top_k = parse_size(*v);
    if (auto v = get("tri/init_from_previous")) c.tri.options.init_from_previous = parse_bool(*v);
    if (auto v = get("tri/positive_only")) c.tri.options.positive_only = parse_bool(*v);
    if (auto v = get("tri/ppmi_weights")) c.tri.options.ppmi_weights = parse_bool(*v);

    if (auto v = get("tr/dim")) c.sgns.dim = parse_size(*v);
    if (auto v = get("tr/negatives")) c.sgns.negatives = parse_size(*v);
    if (auto v = get("tr/min_count")) c.sgns.min_count = parse_size(*v);
    if (auto v = get("tr/epochs")) c.sgns.epochs = parse_size(*v);
    if (auto v = get("tr/learning_rate")) c.sgns.learning_rate = text::parse_double(*v);
    if (auto v = get("tr/min_learning_rate")) c.sgns.min_learning_rate = text::parse_double(*v);
    if (auto v = get("tr/subsample")) c.sgns.subsample_threshold = text::parse_double(*v);
    if (auto v = get("tr/threads")) c.sgns.threads = parse_size(*v);

    if (auto v = get("collocation/top_n")) c.collocation.top_n = parse_size(*v);
    if (auto v = get("collocation/min_score")) c.collocation.min_score = text::parse_double(*v);
    if (auto v = get("collocation/vocab_top_k")) c.collocation.vocab_top_k = parse_size(*v);

    if (auto v = get("gmm/tol")) c.gmm.tol = text::parse_double(*v);
    if (auto v = get("gmm/max_iter")) c.gmm.max_iter = parse_size(*v);
    if (auto v = get("gmm/restarts")) c.gmm.restarts = parse_size(*v);
    if (auto v = get("gmm/variance_floor")) c.gmm.variance_floor = text::parse_double(*v);

    if (auto v = get("output/dir")) c.output_dir = resolve(base_dir, *v);
    else c.output_dir = base_dir / "out";
    if (auto v = get("output/name")) c.name = *v;
    if (auto v = get("output/cache_dir")) c.cache_dir = resolve(base_dir, *v);
    if (auto v = get("output/cache")) c.use_cache = parse_bool(*v);

    validate(c);
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    const auto contents = text::read_file(path);
    return parse_config(contents, fs::absolute(path).parent_path());
}

void validate(PipelineConfig& c) {
    if (c.periods.size() != 2) throw Error("config: exactly two periods are required");
    if (c.periods[0].first == c.periods[1].first) throw Error("config: period ids must differ");
    for (const auto& [id, path] : c.periods) {
        if (id.empty() || id.find_first_of(" \t") != std::string::npos) throw Error("config: bad period id '" + id + "'");
    }
    if (c.backends.empty()) throw Error("config: no backend given");
    if (c.measures.empty()) throw Error("config: no measure given");
    if (c.k == 0) throw Error("config: k must be positive");
    if (c.window == 0) throw Error("config: window must be positive");
    if (c.name.empty() || c.name.find_first_of("/\\ \t") != std::string::npos) {
        throw Error("config: output name must be a plain file stem");
    }
    if (c.tri.seeds == 0 || c.tri.seeds > c.tri.dim) throw Error("config: tri seeds must lie in [1, dim]");
    if (c.tri.vocab_top_k == 0 || c.collocation.vocab_top_k == 0) throw Error("config: vocab_top_k must be positive");
    if (c.collocation.top_n == 0) throw Error("config: collocation top_n must be positive");
    if (c.gmm.restarts == 0) throw Error("config: gmm restarts must be positive");
    if (!(c.gmm.variance_floor > 0.0)) throw Error("config: gmm variance floor must be positive");

    c.sgns.window = c.window;
    c.sgns.rng_seed = c.seed;
    c.gmm.seed = c.seed;
    if (c.strict_deterministic) c.sgns.threads = 1;
    tr::validate(c.sgns);

    const bool uses_tri = std::find(c.backends.begin(), c.backends.end(), Backend::Tri) != c.backends.end();
    if (uses_tri && (c.tri.dim < 200 || c.tri.dim > 1000)) {
        const auto w = "tri dim " + std::to_string(c.tri.dim) + " lies outside the studied range [200, 1000]";
        if (std::find(c.warnings.begin(), c.warnings.end(), w) == c.warnings.end()) c.warnings.push_back(w);
    }
}

std::string canonical_string(const PipelineConfig& c) {
    std::vector<std::string> lines;
    auto add = [&](const std::string& k, const std::string& v) { lines.push_back(k + "=" + v); };
    for (std::size_t i = 0; i < c.periods.size(); ++i) {
        add("corpus.period." + std::to_string(i), c.periods[i].first + ":" + c.periods[i].second.lexically_normal().string());
    }
    add("corpus.targets", c.targets.lexically_normal().string());
    std::string list;
    for (auto b : c.backends) list += std::string(list.empty() ? "" : ",") + std::string(to_string(b));
    add("model.backend", list);
    list.clear();
    for (auto m : c.measures) list += std::string(list.empty() ? "" : ",") + std::string(to_string(m));
    add("model.measure", list);
    add("model.strategy", std::string(detect::to_string(c.strategy)));
    add("model.k", std::to_string(c.k));
    add("model.window", std::to_string(c.window));
    add("model.seed", std::to_string(c.seed));
    add("tri.dim", std::to_string(c.tri.dim));
    add("tri.seeds", std::to_string(c.tri.seeds));
    add("tri.vocab_top_k", std::to_string(c.tri.vocab_top_k));
    add("tri.init_from_previous", c.tri.options.init_from_previous ? "true" : "false");
    add("tri.positive_only", c.tri.options.positive_only ? "true" : "false");
    add("tri.ppmi_weights", c.tri.options.ppmi_weights ? "true" : "false");
    add("tr.dim", std::to_string(c.sgns.dim));
    add("tr.negatives", std::to_string(c.sgns.negatives));
    add("tr.min_count", std::to_string(c.sgns.min_count));
    add("tr.epochs", std::to_string(c.sgns.epochs));
    add("tr.learning_rate", text::format_double(c.sgns.learning_rate));
    add("tr.min_learning_rate", text::format_double(c.sgns.min_learning_rate));
    add("tr.subsample", text::format_double(c.sgns.subsample_threshold));
    add("tr.threads", std::to_string(c.sgns.threads));
    add("collocation.top_n", std::to_string(c.collocation.top_n));
    add("collocation.min_score", text::format_double(c.collocation.min_score));
    add("collocation.vocab_top_k", std::to_string(c.collocation.vocab_top_k));
    add("gmm.tol", text::format_double(c.gmm.tol));
    add("gmm.max_iter", std::to_string(c.gmm.max_iter));
    add("gmm.restarts", std::to_string(c.gmm.restarts));
    add("gmm.variance_floor", text::format_double(c.gmm.variance_floor));
    add("output.name", c.name);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + '\n';
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string config_hash(const PipelineConfig& config) { return sha256_hex(canonical_string(config)); }

std::string RunRecord::name() const { return std::string(to_string(backend)) + "-" + std::string(lscd::to_string(measure)); }

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), spaces_(3) {
    validate(config_);
    warnings = config_.warnings;
}

fs::path Pipeline::cache_root() const {
    return config_.cache_dir.empty() ? config_.output_dir / "cache" : config_.cache_dir;
}

const TimeBinnedCorpus& Pipeline::corpus() {
    if (!corpus_) {
        corpus_ = in_stage("ingest", [&] {
            TimeBinnedCorpus c;
            for (const auto& [id, path] : config_.periods) {
                if (!fs::exists(path)) throw Error("corpus path does not exist: " + path.string());
                c.bins.push_back(read_bin(path, id));
            }
            return c;
        });
    }
    return *corpus_;
}

const std::vector<std::string>& Pipeline::targets() {
    if (!targets_) {
        targets_ = in_stage("ingest", [&] {
            auto t = read_targets(config_.targets);
            if (t.empty()) throw Error("targets file is empty: " + config_.targets.string());
            return t;
        });
    }
    return *targets_;
}

Vocabulary Pipeline::vocabulary(Backend backend) {
    const auto& c = corpus();
    return in_stage("ingest", [&] {
        switch (backend) {
            case Backend::Tri: return build_vocabulary(c, TopK{config_.tri.vocab_top_k});
            case Backend::Tr: return build_vocabulary(c, MinCount{config_.sgns.min_count});
            case Backend::Collocation: return build_vocabulary(c, TopK{config_.collocation.vocab_top_k});
        }
        throw Error("unknown backend");
    });
}

std::string Pipeline::cache_key(Backend backend) {
    return in_stage("train", [&] {
        std::string key = "backend=" + std::string(to_string(backend)) + "\nwindow=" + std::to_string(config_.window) + "\n";
        for (const auto& [id, path] : config_.periods) key += "period=" + id + ":" + corpus_fingerprint(path) + "\n";
        const auto& c = config_;
        switch (backend) {
            case Backend::Tri:
                key += "seed=" + std::to_string(c.seed) + "\ndim=" + std::to_string(c.tri.dim) +
                       "\nseeds=" + std::to_string(c.tri.seeds) + "\nvocab=" + std::to_string(c.tri.vocab_top_k) +
                       "\ninit=" + std::to_string(c.tri.options.init_from_previous) +
                       "\npositive=" + std::to_string(c.tri.options.positive_only) +
                       "\nppmi=" + std::to_string(c.tri.options.ppmi_weights) + "\n";
                break;
            case Backend::Tr: {
                auto p = c.sgns;
                key += "seed=" + std::to_string(p.rng_seed) + "\ndim=" + std::to_string(p.dim) +
                       "\nnegatives=" + std::to_string(p.negatives) + "\nmin_count=" + std::to_string(p.min_count) +
                       "\nepochs=" + std::to_string(p.epochs) + "\nlr=" + text::format_double(p.learning_rate) +
                       "\nmin_lr=" + text::format_double(p.min_learning_rate) +
                       "\nsubsample=" + text::format_double(p.subsample_threshold) +
                       "\nthreads=" + std::to_string(p.threads) + "\n";
                for (const auto& t : targets()) key += "target=" + t + "\n";
                break;
            }
            case Backend::Collocation: {
                const bool all_words = std::find(c.measures.begin(), c.measures.end(), Measure::Neighborhood) != c.measures.end();
                key += "top_n=" + std::to_string(c.collocation.top_n) +
                       "\nmin_score=" + text::format_double(c.collocation.min_score) +
                       "\nvocab=" + std::to_string(c.collocation.vocab_top_k) + "\nall_words=" + std::to_string(all_words) + "\n";
                if (!all_words) {
                    for (const auto& t : targets()) key += "target=" + t + "\n";
                }
                break;
            }
        }
        return sha256_hex(key);
    });
}

std::vector<EmbeddingSpace> Pipeline::train(Backend backend) {
    const auto& c = corpus();
    const auto vocab = vocabulary(backend);
    return in_stage("train", [&] {
        std::vector<EmbeddingSpace> spaces;
        switch (backend) {
            case Backend::Tri: {
                const auto table = tri::make_index_vectors(vocab, config_.tri.dim, config_.tri.seeds, config_.seed);
                for (std::size_t b = 0; b < c.bins.size(); ++b) {
                    const EmbeddingSpace* prev = b > 0 ? &spaces[b - 1] : nullptr;
                    spaces.push_back(tri::train_tri(c.bins[b], vocab, table, config_.tri.options, config_.window, prev));
                }
                break;
            }
            case Backend::Tr: {
                const auto rc = tr::reference_targets(c, targets(), vocab);
                for (const auto& w : rc.warnings) warnings.push_back(w);
                const auto result = tr::train_sgns(rc, config_.sgns);
                spaces = tr::period_spaces(result.target_space, rc);
                break;
            }
            case Backend::Collocation: {
                const bool all_words =
                    std::find(config_.measures.begin(), config_.measures.end(), Measure::Neighborhood) != config_.measures.end();
                const auto& words = all_words ? vocab.tokens() : targets();
                const collocation::ProfileOptions opts{config_.window, config_.collocation.top_n, config_.collocation.min_score};
                for (const auto& bin : c.bins) spaces.push_back(collocation::profile_space(bin, vocab, words, opts));
                break;
            }
        }
        return spaces;
    });
}

const std::vector<EmbeddingSpace>& Pipeline::spaces(Backend backend) {
    auto& slot = spaces_[static_cast<std::size_t>(backend)];
    if (slot) return *slot;

    if (!config_.use_cache) {
        slot = train(backend);
        return *slot;
    }
    const auto dir = cache_root() / cache_key(backend);
    const std::size_t n = config_.periods.size();
    auto file = [&](const fs::path& d, std::size_t i) { return d / (std::to_string(i) + ".vec"); };

    bool hit = fs::is_directory(dir);
    for (std::size_t i = 0; hit && i < n; ++i) hit = fs::exists(file(dir, i));
    if (hit) {
        slot = in_stage("train", [&] {
            std::vector<EmbeddingSpace> s;
            for (std::size_t i = 0; i < n; ++i) s.push_back(read_space(file(dir, i)));
            return s;
        });
        return *slot;
    }

    slot = train(backend);
    in_stage("train", [&] {
        // Build the entry in a private directory, then publish it with one rename.
        auto tmp = dir;
        tmp += ".tmp." + std::to_string(::getpid());
        fs::remove_all(tmp);
        fs::create_directories(tmp);
        for (std::size_t i = 0; i < n; ++i) write_space((*slot)[i], file(tmp, i));
        std::error_code ec;
        fs::rename(tmp, dir, ec);
        if (ec) fs::remove_all(tmp);  // another process published first
    });
    return *slot;
}

SimilaritySet Pipeline::similarities(Backend backend, Measure measure) {
    const auto& s = spaces(backend);
    const auto& t = targets();
    return in_stage("similarities", [&] {
        auto set = target_similarities(s[0], s[1], t, measure, config_.k);
        set.metadata["backend"] = std::string(to_string(backend));
        set.metadata["window"] = std::to_string(config_.window);
        set.metadata["config"] = config_hash(config_).substr(0, 16);
        return set;
    });
}

RunRecord Pipeline::evaluate_run(Backend backend, Measure measure, SimilaritySet set) {
    RunRecord r{backend, measure, std::move(set), std::nullopt, {}, {}};
    in_stage("detect", [&] {
        if (config_.strategy == detect::Strategy::Gmm) {
            auto labeling = detect::assign_labels(r.similarities, config_.gmm);
            r.gmm = std::move(labeling.model);
            r.labels = std::move(labeling.labels);
        } else {
            try {
                r.gmm = detect::fit_gmm_1d(r.similarities.values(), config_.gmm);
            } catch (const Error& e) {
                warnings.push_back(r.name() + ": no GMM log-likelihood (" + e.what() + ")");
            }
            r.labels = detect::label_targets(r.similarities, config_.strategy, config_.gmm);
        }
    });
    r.ranking = in_stage("rank", [&] { return detect::rank_targets(r.similarities); });
    return r;
}

std::size_t Pipeline::select(const std::vector<RunRecord>& runs, std::optional<std::string>& caveat) const {
    return in_stage("detect", [&]() -> std::size_t {
        if (runs.size() == 1) return 0;
        std::vector<detect::Candidate> candidates;
        std::vector<std::size_t> index;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (!runs[i].gmm) continue;
            candidates.push_back({runs[i].name(), runs[i].similarities, *runs[i].gmm});
            index.push_back(i);
        }
        if (candidates.empty()) throw Error("no run produced a GMM log-likelihood to select by");
        const auto sel = detect::select_model(candidates);
        caveat = sel.caveat;
        return index[sel.index];
    });
}

namespace {

nlohmann::json run_json(const RunRecord& r, bool selected) {
    nlohmann::json j;
    j["backend"] = std::string(to_string(r.backend));
    j["measure"] = std::string(to_string(r.measure));
    j["strategy"] = std::string(detect::to_string(r.labels.strategy));
    j["scored"] = r.similarities.size();
    j["changed"] = std::count_if(r.labels.labels.begin(), r.labels.labels.end(), [](const auto& l) { return l.second == 1; });
    if (r.gmm) {
        j["gmm"] = {{"log_likelihood", r.gmm->log_likelihood},
                    {"weights", r.gmm->weights},
                    {"means", r.gmm->means},
                    {"variances", r.gmm->variances},
                    {"iterations", r.gmm->iterations},
                    {"converged", r.gmm->converged}};
    } else {
        j["gmm"] = nullptr;
    }
    if (r.labels.threshold) j["threshold"] = *r.labels.threshold;
    auto skipped = nlohmann::json::array();
    for (const auto& s : r.similarities.skipped) skipped.push_back({{"target", s.target}, {"reason", s.reason}});
    j["skipped"] = skipped;
    j["selected"] = selected;
    return j;
}

std::string report_json(const PipelineConfig& c, const std::vector<RunRecord>& runs, std::size_t selected,
                        const std::optional<std::string>& caveat, const std::vector<std::string>& warnings) {
    nlohmann::json j;
    j["config_hash"] = config_hash(c);
    j["name"] = c.name;
    j["parameters"] = canonical_string(c);
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) arr.push_back(run_json(runs[i], i == selected));
    j["runs"] = arr;
    j["selected"] = runs[selected].name();
    j["selection_caveat"] = caveat ? nlohmann::json(*caveat) : nlohmann::json(nullptr);
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

/// Writes all files or none: on failure every file already renamed into place is removed.
void publish(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> written;
    try {
        for (const auto& [path, contents] : files) {
            text::write_file_atomic(path, contents);
            written.push_back(path);
        }
    } catch (...) {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }
}

}  // namespace

RunResult Pipeline::run() {
    corpus();
    targets();
    std::vector<RunRecord> runs;
    for (auto b : config_.backends) {
        spaces(b);
        for (auto m : config_.measures) {
            auto set = similarities(b, m);
            runs.push_back(evaluate_run(b, m, std::move(set)));
        }
    }
    RunResult result;
    result.selected = select(runs, result.caveat);
    const auto& best = runs[result.selected];

    result.labels_path = config_.output_dir / "task1" / (config_.name + ".txt");
    result.ranking_path = config_.output_dir / "task2" / (config_.name + ".txt");
    result.report_path = config_.output_dir / "report.json";
    in_stage("output", [&] {
        publish({{result.labels_path, detect::format_labels(best.labels)},
                 {result.ranking_path, detect::format_ranking(best.ranking)},
                 {result.report_path, report_json(config_, runs, result.selected, result.caveat, warnings)}});
    });
    result.runs = std::move(runs);
    result.warnings = warnings;
    return result;
}

void Pipeline::ingest_stage() {
    corpus();
    targets();
    for (auto b : config_.backends) {
        const auto vocab = vocabulary(b);
        in_stage("ingest", [&] {
            write_vocabulary(vocab, config_.output_dir / "vocab" / (std::string(to_string(b)) + ".tsv"));
        });
    }
}

void Pipeline::train_stage() {
    for (auto b : config_.backends) {
        const auto& s = spaces(b);
        in_stage("train", [&] {
            for (std::size_t i = 0; i < s.size(); ++i) {
                write_space(s[i], config_.output_dir / "spaces" / std::string(to_string(b)) /
                                      (std::to_string(i) + "_" + config_.periods[i].first + ".vec"));
            }
        });
    }
}

void Pipeline::similarities_stage() {
    for (auto b : config_.backends) {
        auto& slot = spaces_[static_cast<std::size_t>(b)];
        if (!slot) {
            slot = in_stage("similarities", [&] {
                std::vector<EmbeddingSpace> s;
                for (std::size_t i = 0; i < config_.periods.size(); ++i) {
                    const auto p = config_.output_dir / "spaces" / std::string(to_string(b)) /
                                   (std::to_string(i) + "_" + config_.periods[i].first + ".vec");
                    if (!fs::exists(p)) throw Error("missing " + p.string() + " (run the train stage first)");
                    s.push_back(read_space(p));
                }
                return s;
            });
        }
        for (auto m : config_.measures) {
            const auto set = similarities(b, m);
            in_stage("similarities", [&] {
                write_similarities(set, config_.output_dir / "similarities" /
                                            (std::string(to_string(b)) + "-" + std::string(to_string(m)) + ".tsv"));
            });
        }
    }
}

std::vector<RunRecord> Pipeline::load_similarity_runs() {
    std::vector<RunRecord> runs;
    for (auto b : config_.backends) {
        for (auto m : config_.measures) {
            auto set = in_stage("detect", [&] {
                const auto p = config_.output_dir / "similarities" /
                               (std::string(to_string(b)) + "-" + std::string(to_string(m)) + ".tsv");
                if (!fs::exists(p)) throw Error("missing " + p.string() + " (run the similarities stage first)");
                return read_similarities(p);
            });
            runs.push_back(evaluate_run(b, m, std::move(set)));
        }
    }
    return runs;
}

void Pipeline::detect_stage() {
    auto runs = load_similarity_runs();
    std::optional<std::string> caveat;
    const auto sel = select(runs, caveat);
    in_stage("detect", [&] {
        publish({{config_.output_dir / "task1" / (config_.name + ".txt"), detect::format_labels(runs[sel].labels)},
                 {config_.output_dir / "report.json", report_json(config_, runs, sel, caveat, warnings)}});
    });
}

void Pipeline::rank_stage() {
    auto runs = load_similarity_runs();
    std::optional<std::string> caveat;
    const auto sel = select(runs, caveat);
    in_stage("rank", [&] {
        publish({{config_.output_dir / "task2" / (config_.name + ".txt"), detect::format_ranking(runs[sel].ranking)}});
    });
}

RunResult run_pipeline(const PipelineConfig& config) {
    Pipeline p(config);
    return p.run();
}

MetricsReport evaluate(const fs::path& pred_dir, const fs::path& gold_dir) {
    MetricsReport report;
    bool any = false;
    for (const std::string task : {"task1", "task2"}) {
        const auto gdir = gold_dir / task;
        if (!fs::is_directory(gdir)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(gdir)) {
            if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& gold : files) {
            const auto pred = pred_dir / task / gold.filename();
            if (!fs::exists(pred)) {
                throw Error("layout mismatch: gold " + gold.string() + " has no prediction at " + pred.string());
            }
            const auto dataset = gold.stem().string();
            if (task == "task1") {
                report.metrics.push_back({task, dataset, "accuracy",
                                          eval::accuracy(detect::read_labels(pred), detect::read_labels(gold))});
            } else {
                report.metrics.push_back({task, dataset, "spearman",
                                          eval::spearman(detect::read_scores(pred), detect::read_scores(gold))});
            }
            any = true;
        }
    }
    if (!any) throw Error("layout mismatch: no task1/*.txt or task2/*.txt under " + gold_dir.string());
    return report;
}

std::string render_table(const MetricsReport& report) {
    std::size_t wt = 4, wd = 7, wm = 6;
    for (const auto& m : report.metrics) {
        wt = std::max(wt, m.task.size());
        wd = std::max(wd, m.dataset.size());
        wm = std::max(wm, m.metric.size());
    }
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(wt)) << "task" << "  " << std::setw(static_cast<int>(wd)) << "dataset"
        << "  " << std::setw(static_cast<int>(wm)) << "metric" << "  " << "value\n";
    for (const auto& m : report.metrics) {
        out << std::left << std::setw(static_cast<int>(wt)) << m.task << "  " << std::setw(static_cast<int>(wd))
            << m.dataset << "  " << std::setw(static_cast<int>(wm)) << m.metric << "  " << std::fixed
            << std::setprecision(3) << m.value << '\n';
    }
    return out.str();
}

std::string render_machine(const MetricsReport& report) {
    std::string out;
    for (const auto& m : report.metrics) {
        out += m.task + '\t' + m.dataset + '\t' + m.metric + '\t' + text::format_double(m.value) + '\n';
    }
    return out;
}

MetricsReport parse_machine(std::string_view contents) {
    MetricsReport report;
    for (auto line : text::split(contents, '\n')) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 4) throw Error("metrics line: expected task<TAB>dataset<TAB>metric<TAB>value");
        report.metrics.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), text::parse_double(f[3])});
    }
    return report;
}

namespace {

bool all_lines_match(std::string_view contents, const std::regex& re) {
    if (contents.empty() || contents.back() != '\n') return false;
    contents.remove_suffix(1);
    for (auto line : text::split(contents, '\n')) {
        if (!std::regex_match(line.begin(), line.end(), re)) return false;
    }
    return true;
}

}  // namespace

bool is_valid_labels_file(std::string_view contents) {
    static const std::regex re(R"(^\S+\t(0|1)$)");
    return all_lines_match(contents, re);
}

bool is_valid_ranking_file(std::string_view contents) {
    static const std::regex re(R"(^\S+\t-?\d+(\.\d+)?$)");
    return all_lines_match(contents, re);
}

}  // namespace lscd::pipeline
