#include "lscd/embedding.hpp"

#include "lscd/text.hpp"

#include <fstream>
#include <sstream>

namespace lscd {

bool EmbeddingSpace::contains(std::string_view token) const { return find(token) >= 0; }

std::ptrdiff_t EmbeddingSpace::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::size_t EmbeddingSpace::add(std::string_view token) {
    if (token.empty()) throw Error("empty token in embedding space");
    const auto [it, inserted] = index_.emplace(std::string(token), tokens_.size());
    if (inserted) {
        tokens_.emplace_back(token);
        data_.resize(data_.size() + dim_, 0.0);
    }
    return it->second;
}

void EmbeddingSpace::set(std::string_view token, std::span<const double> values) {
    if (values.size() != dim_) {
        throw Error("vector for '" + std::string(token) + "' has length " + std::to_string(values.size()) +
                    ", space dim is " + std::to_string(dim_));
    }
    const auto i = add(token);
    std::copy(values.begin(), values.end(), row(i).begin());
}

std::span<const double> EmbeddingSpace::vector(std::string_view token) const {
    const auto i = find(token);
    if (i < 0) throw Error("token '" + std::string(token) + "' not in space " + period_id_);
    return row(static_cast<std::size_t>(i));
}

void write_space(const EmbeddingSpace& space, std::ostream& out) {
    out << "#dim=" << space.dim() << " period=" << space.period_id() << '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
        out << space.token(i) << '\t';
        const auto r = space.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out << ' ';
            out << text::format_double(r[j]);
        }
        out << '\n';
    }
}

void write_space(const EmbeddingSpace& space, const std::filesystem::path& path) {
    std::ostringstream ss;
    write_space(space, ss);
    text::write_file_atomic(path, ss.str());
}

EmbeddingSpace read_space(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("#dim=", 0) != 0) throw Error("embedding file lacks '#dim=' header");
    const auto header = std::string_view(line).substr(5);
    const auto sp = header.find(' ');
    const auto dim_str = header.substr(0, sp);
    std::string period;
    if (sp != std::string_view::npos) {
        const auto rest = text::trim(header.substr(sp + 1));
        if (rest.rfind("period=", 0) != 0) throw Error("embedding header: expected period=<id>");
        period = std::string(rest.substr(7));
    }
    const auto dim = static_cast<std::size_t>(text::parse_int(dim_str));
    EmbeddingSpace space(dim, period);

    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error("embedding line " + std::to_string(lineno) + ": missing tab");
        values.clear();
        const auto fields = std::string_view(line).substr(tab + 1);
        for (auto f : text::split(fields, ' ')) {
            if (!f.empty()) values.push_back(text::parse_double(f));
        }
        if (values.size() != dim) {
            throw Error("embedding line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(values.size()));
        }
        space.set(std::string_view(line).substr(0, tab), values);
    }
    return space;
}

EmbeddingSpace read_space(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read embedding file " + path.string());
    return read_space(in);
}

}  // namespace lscd
