#pragma once

#include "lscd/corpus.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lscd {

/// Dense word vectors for one period, stored row-major. Tokens absent from
/// the space have no row; there is no implicit zero vector.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;
    EmbeddingSpace(std::size_t dim, std::string period_id) : dim_(dim), period_id_(std::move(period_id)) {}

    std::size_t dim() const { return dim_; }
    const std::string& period_id() const { return period_id_; }
    void set_period_id(std::string id) { period_id_ = std::move(id); }

    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    bool contains(std::string_view token) const;

    /// Adds a zero row, or returns the existing row index.
    std::size_t add(std::string_view token);
    /// Inserts or overwrites a row.
    void set(std::string_view token, std::span<const double> values);

    std::span<const double> vector(std::string_view token) const;
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    const std::string& token(std::size_t i) const { return tokens_[i]; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Row index or -1.
    std::ptrdiff_t find(std::string_view token) const;

    friend bool operator==(const EmbeddingSpace& a, const EmbeddingSpace& b) {
        return a.dim_ == b.dim_ && a.period_id_ == b.period_id_ && a.tokens_ == b.tokens_ && a.data_ == b.data_;
    }

private:
    std::size_t dim_ = 0;
    std::string period_id_;
    std::vector<std::string> tokens_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// `#dim=<d> period=<id>` header, then `token<TAB>v1 v2 ... vd` per row.
/// Numbers are written in shortest round-trip form, so parse(serialize(E)) == E.
void write_space(const EmbeddingSpace& space, std::ostream& out);
void write_space(const EmbeddingSpace& space, const std::filesystem::path& path);
EmbeddingSpace read_space(std::istream& in);
EmbeddingSpace read_space(const std::filesystem::path& path);

}  // namespace lscd
