#include "lscd/similarity.hpp"

#include "lscd/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace lscd {

namespace {

double dot(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::Cosine: return "CS";
        case Measure::Pearson: return "PC";
        case Measure::Neighborhood: return "NS";
    }
    return "?";
}

Measure parse_measure(std::string_view s) {
    const auto l = lower(text::trim(s));
    if (l == "cs" || l == "cosine") return Measure::Cosine;
    if (l == "pc" || l == "pearson") return Measure::Pearson;
    if (l == "ns" || l == "neighborhood" || l == "neighbourhood") return Measure::Neighborhood;
    throw Error("unknown similarity measure '" + std::string(s) + "' (expected CS, PC or NS)");
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error("cosine: length mismatch");
    const double nu = dot(u, u);
    const double nv = dot(v, v);
    if (nu == 0.0 || nv == 0.0) throw Error("undefined cosine: zero vector");
    return std::clamp(dot(u, v) / std::sqrt(nu * nv), -1.0, 1.0);
}

double pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error("pearson: length mismatch");
    if (u.size() < 2) throw Error("undefined correlation: fewer than two components");
    auto centred = [](std::span<const double> x) {
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        std::vector<double> c(x.begin(), x.end());
        for (auto& e : c) e -= mean;
        return c;
    };
    const auto cu = centred(u);
    const auto cv = centred(v);
    if (dot(cu, cu) == 0.0 || dot(cv, cv) == 0.0) throw Error("undefined correlation: constant vector");
    return cosine(cu, cv);
}

std::vector<std::string> nearest_neighbors(const EmbeddingSpace& space, std::string_view word, std::size_t k) {
    const auto self = space.find(word);
    if (self < 0) throw Error("token '" + std::string(word) + "' not in space " + space.period_id());
    if (space.size() < k + 1) {
        throw Error("space " + space.period_id() + " has fewer than k=" + std::to_string(k) + " other tokens");
    }
    const auto v = space.row(static_cast<std::size_t>(self));
    const double nv = dot(v, v);
    if (nv == 0.0) throw Error("undefined cosine: zero vector for '" + std::string(word) + "'");

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == self) continue;
        const auto r = space.row(i);
        const double nr = dot(r, r);
        if (nr == 0.0) continue;
        scored.emplace_back(std::clamp(dot(v, r) / std::sqrt(nv * nr), -1.0, 1.0), i);
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return space.token(a.second) < space.token(b.second);
                      });
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(space.token(scored[i].second));
    return out;
}

double neighborhood_similarity(const EmbeddingSpace& e1, const EmbeddingSpace& e2, std::string_view word,
                               std::size_t k) {
    if (k == 0) throw Error("neighborhood similarity: k must be positive");
    std::set<std::string> united;
    for (auto& t : nearest_neighbors(e1, word, k)) united.insert(std::move(t));
    for (auto& t : nearest_neighbors(e2, word, k)) united.insert(std::move(t));

    auto second_order = [&](const EmbeddingSpace& e) {
        const auto v = e.vector(word);
        std::vector<double> out;
        out.reserve(united.size());
        for (const auto& t : united) {
            const auto row = e.find(t);
            if (row < 0) {
                out.push_back(0.0);
                continue;
            }
            const auto r = e.row(static_cast<std::size_t>(row));
            out.push_back(dot(r, r) == 0.0 ? 0.0 : cosine(v, r));
        }
        return out;
    };
    return cosine(second_order(e1), second_order(e2));
}

std::vector<double> SimilaritySet::values() const {
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& [t, s] : scores) out.push_back(s);
    return out;
}

SimilaritySet target_similarities(const EmbeddingSpace& e1, const EmbeddingSpace& e2,
                                  const std::vector<std::string>& targets, Measure measure, std::size_t k) {
    if (targets.empty()) throw Error("target_similarities: no targets");
    SimilaritySet set;
    set.measure = measure;
    if (measure == Measure::Neighborhood) set.metadata["k"] = std::to_string(k);
    std::set<std::string> done;
    for (const auto& w : targets) {
        if (!done.insert(w).second) continue;
        const bool in1 = e1.contains(w), in2 = e2.contains(w);
        if (!in1 || !in2) {
            std::string reason = "missing in ";
            if (!in1) reason += e1.period_id().empty() ? "E1" : e1.period_id();
            if (!in1 && !in2) reason += " and ";
            if (!in2) reason += e2.period_id().empty() ? "E2" : e2.period_id();
            set.skipped.push_back({w, reason});
            continue;
        }
        try {
            double s = 0.0;
            switch (measure) {
                case Measure::Cosine: s = cosine(e1.vector(w), e2.vector(w)); break;
                case Measure::Pearson: s = pearson(e1.vector(w), e2.vector(w)); break;
                case Measure::Neighborhood: s = neighborhood_similarity(e1, e2, w, k); break;
            }
            set.scores.emplace(w, s);
        } catch (const Error& e) {
            set.skipped.push_back({w, e.what()});
        }
    }
    if (set.scores.empty()) throw Error("target_similarities: every target was skipped");
    return set;
}

void write_similarities(const SimilaritySet& set, std::ostream& out) {
    out << "# measure=" << to_string(set.measure);
    for (const auto& [key, value] : set.metadata) {
        if (key.find_first_of(" \t=") != std::string::npos || value.find_first_of(" \t\n") != std::string::npos) {
            throw Error("similarity metadata '" + key + "' must not contain whitespace");
        }
        out << ' ' << key << '=' << value;
    }
    out << '\n';
    for (const auto& s : set.skipped) {
        std::string reason = s.reason;
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        out << "#skip " << s.target << ' ' << reason << '\n';
    }
    for (const auto& [t, s] : set.scores) out << t << '\t' << text::format_double(s) << '\n';
}

void write_similarities(const SimilaritySet& set, const std::filesystem::path& path) {
    std::ostringstream ss;
    write_similarities(set, ss);
    text::write_file_atomic(path, ss.str());
}

SimilaritySet read_similarities(std::istream& in) {
    SimilaritySet set;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("#skip ", 0) == 0) {
            const auto rest = std::string_view(line).substr(6);
            const auto sp = rest.find(' ');
            set.skipped.push_back({std::string(rest.substr(0, sp)),
                                   sp == std::string_view::npos ? std::string() : std::string(rest.substr(sp + 1))});
            continue;
        }
        if (line.front() == '#') {
            for (auto field : text::split(std::string_view(line).substr(1), ' ')) {
                if (field.empty()) continue;
                const auto eq = field.find('=');
                if (eq == std::string_view::npos) throw Error("similarity header: malformed field '" + std::string(field) + "'");
                const auto key = field.substr(0, eq);
                const auto value = field.substr(eq + 1);
                if (key == "measure") {
                    set.measure = parse_measure(value);
                    header = true;
                } else {
                    set.metadata[std::string(key)] = std::string(value);
                }
            }
            continue;
        }
        const auto fields = text::split(line, '\t');
        if (fields.size() != 2) throw Error("similarity line: expected target<TAB>score");
        set.scores[std::string(fields[0])] = text::parse_double(fields[1]);
    }
    if (!header) throw Error("similarity file lacks '# measure=' header");
    return set;
}

SimilaritySet read_similarities(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read similarity file " + path.string());
    return read_similarities(in);
}

}  // namespace lscd
