#include "nonholo/symbols.hpp"

#include "nonholo/errors.hpp"

#include <algorithm>

namespace nonholo {

std::shared_ptr<const SymbolTable>
SymbolTable::make(std::vector<std::string> coords, std::vector<std::string> params) {
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());

    auto tab = std::shared_ptr<SymbolTable>(new SymbolTable());
    tab->symbols_.reserve(coords.size() + params.size());
    for (auto& c : coords)
        tab->symbols_.push_back({std::move(c), SymbolKind::coordinate});
    tab->n_coords_ = tab->symbols_.size();
    for (auto& p : params) {
        for (std::size_t i = 0; i < tab->n_coords_; ++i)
            if (tab->symbols_[i].name == p)
                throw DomainError("symbol '" + p + "' declared as both coordinate and parameter");
        tab->symbols_.push_back({std::move(p), SymbolKind::parameter});
    }
    return tab;
}

std::optional<std::size_t> SymbolTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        if (symbols_[i].name == name)
            return i;
    return std::nullopt;
}

std::size_t SymbolTable::index_of(const std::string& name) const {
    if (auto i = find(name))
        return *i;
    throw DomainError("symbol '" + name + "' not in table");
}

SymbolTablePtr make_table_xyz(std::vector<std::string> params) {
    return SymbolTable::make({"x", "y", "z"}, std::move(params));
}

} // namespace nonholo
