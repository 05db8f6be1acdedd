#include "gapgrad/model.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace gapgrad {

int MilpModel::add_variable(std::string name, VarKind kind, double lb, double ub) {
    variables_.push_back(Variable{std::move(name), kind, lb, ub});
    return static_cast<int>(variables_.size()) - 1;
}

int MilpModel::add_constraint(LinearRow row) {
    for (const auto& [j, c] : row.coeffs) {
        if (j < 0 || j >= num_variables())
            throw InvalidArgument("constraint '" + row.name + "' references undeclared variable index " +
                                  std::to_string(j));
        (void)c;
    }
    rows_.push_back(std::move(row));
    return static_cast<int>(rows_.size()) - 1;
}

int MilpModel::find_variable(const std::string& name) const {
    for (int j = 0; j < num_variables(); ++j)
        if (variables_[static_cast<std::size_t>(j)].name == name) return j;
    return -1;
}

std::vector<int> MilpModel::continuous_variable_indices() const {
    std::vector<int> out;
    for (int j = 0; j < num_variables(); ++j)
        if (variables_[static_cast<std::size_t>(j)].kind == VarKind::continuous) out.push_back(j);
    return out;
}

int MilpModel::num_integral_variables() const {
    int n = 0;
    for (const auto& v : variables_)
        if (v.kind != VarKind::continuous) ++n;
    return n;
}

void MilpModel::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& v : variables_) {
        if (!seen.insert(v.name).second)
            throw InvalidArgument("duplicate variable name '" + v.name + "'");
        if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
            throw InvalidArgument("variable '" + v.name + "' has inconsistent bounds");
    }
    for (const auto& r : rows_) {
        for (const auto& [j, c] : r.coeffs) {
            if (j < 0 || j >= num_variables())
                throw InvalidArgument("constraint '" + r.name + "' references undeclared variable");
            if (!std::isfinite(c))
                throw InvalidArgument("constraint '" + r.name + "' has a non-finite coefficient");
        }
        if (r.lb > r.ub) throw InvalidArgument("constraint '" + r.name + "' has inconsistent bounds");
    }
}

std::vector<double> SubobjectiveMatrix::image(std::span<const double> y) const {
    std::vector<double> out(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double acc = 0.0;
        for (const auto& [j, c] : rows[r]) acc += c * y[static_cast<std::size_t>(j)];
        out[r] = acc;
    }
    return out;
}

void SubobjectiveMatrix::validate(bool allow_degenerate) const {
    if (k() < (allow_degenerate ? 1 : 2))
        throw InvalidArgument("sub-objective matrix needs at least " +
                              std::string(allow_degenerate ? "1 row" : "2 rows (k >= 2)"));
    for (const auto& row : rows) {
        if (row.empty()) throw InvalidArgument("sub-objective row is all zero");
        for (const auto& [j, c] : row) {
            if (j < 0 || j >= num_variables)
                throw InvalidArgument("sub-objective row references variable out of range");
            (void)c;
        }
    }
}

}  // namespace gapgrad
