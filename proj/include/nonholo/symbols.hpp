#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nonholo {

enum class SymbolKind { coordinate, parameter };

struct Symbol {
    std::string name;
    SymbolKind kind;

    bool operator==(const Symbol&) const = default;
};

// An immutable, shared list of symbols fixing the variable order of every
// polynomial built against it: coordinates first (in declaration order),
// then parameters sorted by name.  The order is what makes the printed
// graded-lex form canonical, so tables are never mutated after construction.
class SymbolTable {
public:
    // `coords` keeps caller order (x, y, z and, for the extended 6-space,
    // psi1, psi2, psi3); `params` is sorted internally.
    static std::shared_ptr<const SymbolTable>
    make(std::vector<std::string> coords, std::vector<std::string> params);

    std::size_t size() const { return symbols_.size(); }
    std::size_t coordinate_count() const { return n_coords_; }
    const Symbol& at(std::size_t i) const { return symbols_[i]; }

    std::optional<std::size_t> find(const std::string& name) const;

    // Index lookup that must succeed; throws DomainError otherwise.
    std::size_t index_of(const std::string& name) const;

    bool is_coordinate(std::size_t i) const {
        return symbols_[i].kind == SymbolKind::coordinate;
    }

    // Two tables are interchangeable when they declare the same symbols in
    // the same order; pointer identity is the cheap common case.
    bool compatible(const SymbolTable& other) const {
        return this == &other || symbols_ == other.symbols_;
    }

    const std::vector<Symbol>& symbols() const { return symbols_; }

private:
    SymbolTable() = default;
    std::vector<Symbol> symbols_;
    std::size_t n_coords_ = 0;
};

using SymbolTablePtr = std::shared_ptr<const SymbolTable>;

// The ubiquitous 3-space table: coordinates x, y, z plus the given parameters.
SymbolTablePtr make_table_xyz(std::vector<std::string> params = {});

} // namespace nonholo
