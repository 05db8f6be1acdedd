#ifndef GAPGRAD_MODEL_HPP
#define GAPGRAD_MODEL_HPP

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gapgrad/errors.hpp"

namespace gapgrad {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, integer, binary };

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lb = 0.0;
    double ub = kInfinity;
};

/// One linear constraint lb <= a'y <= ub. Equality rows have lb == ub;
/// one-sided rows use +-infinity on the free side.
struct LinearRow {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    double lb = -kInfinity;
    double ub = kInfinity;
};

/// A mixed-integer linear model: variables with bounds/kinds plus linear
/// rows. The base objective read from a file is kept but ignored once a
/// sub-objective matrix is imposed.
class MilpModel {
public:
    int add_variable(std::string name, VarKind kind, double lb, double ub);
    int add_constraint(LinearRow row);

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int num_constraints() const { return static_cast<int>(rows_.size()); }

    const Variable& variable(int j) const { return variables_[static_cast<std::size_t>(j)]; }
    Variable& variable(int j) { return variables_[static_cast<std::size_t>(j)]; }
    const LinearRow& constraint(int i) const { return rows_[static_cast<std::size_t>(i)]; }

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<LinearRow>& constraints() const { return rows_; }

    /// Index of a variable by name, or -1.
    int find_variable(const std::string& name) const;

    std::vector<int> continuous_variable_indices() const;
    int num_integral_variables() const;

    /// Checks the structural invariants (unique names, indices in range).
    /// Throws InvalidArgument on violation.
    void validate() const;

    std::string name;
    std::vector<std::pair<int, double>> base_objective;
    bool base_objective_maximize = false;

private:
    std::vector<Variable> variables_;
    std::vector<LinearRow> rows_;
};

/// Sparse |K| x n matrix whose rows are the sub-objective functions.
struct SubobjectiveMatrix {
    int num_variables = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;

    int k() const { return static_cast<int>(rows.size()); }

    /// C * y for a full assignment vector.
    std::vector<double> image(std::span<const double> y) const;

    /// Throws InvalidArgument unless k >= 2... callers that genuinely need
    /// k = 1 (degenerate single-objective tests) pass allow_degenerate.
    void validate(bool allow_degenerate = false) const;
};

/// Result of one forward solve.
struct ForwardSolution {
    std::vector<double> values;               // by variable index
    std::vector<double> sub_objective_image;  // C * values
    bool proven_optimal = false;
    double mip_gap = 0.0;
};

/// Backend knobs for one forward oracle.
struct OracleConfig {
    std::string backend = "glpk";
    double mip_gap_tolerance = 0.0;  // relative; 0 = exact
    double time_limit_seconds = 360.0;
    int threads = 1;

    void validate() const {
        if (mip_gap_tolerance < 0.0 || mip_gap_tolerance >= 1.0)
            throw InvalidArgument("OracleConfig: mip gap tolerance must lie in [0, 1)");
        if (time_limit_seconds <= 0.0)
            throw InvalidArgument("OracleConfig: time limit must be positive");
        if (threads < 1)
            throw InvalidArgument("OracleConfig: thread count must be >= 1");
    }
};

}  // namespace gapgrad

#endif
