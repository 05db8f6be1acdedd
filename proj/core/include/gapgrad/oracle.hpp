#ifndef GAPGRAD_ORACLE_HPP
#define GAPGRAD_ORACLE_HPP

#include <memory>
#include <string>
#include <vector>

#include "gapgrad/cost_vector.hpp"
#include "gapgrad/model.hpp"

namespace gapgrad {

/// Handle to a weighted-objective forward solve: min alpha' C y over the
/// model's feasible region. An oracle owns one backend problem instance;
/// it is not re-entrant, but distinct oracles may solve concurrently
/// (each oracle must be used by the thread that created it).
class ForwardOracle {
public:
    virtual ~ForwardOracle() = default;

    /// Solves min alpha' C y. Throws InfeasibleForward / UnboundedForward /
    /// SolveTimeout on the corresponding backend outcomes.
    virtual ForwardSolution solve(const CostVector& alpha) = 0;

    virtual const MilpModel& model() const = 0;
    virtual const SubobjectiveMatrix& subobjectives() const = 0;

    /// Number of forward solves performed so far.
    virtual long solve_count() const = 0;
};

/// Builds an oracle on the configured backend ("glpk" is the one provided).
std::unique_ptr<ForwardOracle> make_oracle(const MilpModel& model, SubobjectiveMatrix C,
                                           const OracleConfig& cfg = {});

/// One-shot forward solve (builds a throwaway oracle).
ForwardSolution solve_weighted(const MilpModel& model, const SubobjectiveMatrix& C,
                               const CostVector& alpha, const OracleConfig& cfg = {});

// -- small LP interface used by the master problems ------------------------

struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;  // minimize
    std::vector<double> lb, ub;
    struct Row {
        std::vector<std::pair<int, double>> terms;
        double lb, ub;
    };
    std::vector<Row> rows;

    int add_var(double lower, double upper, double obj) {
        lb.push_back(lower);
        ub.push_back(upper);
        objective.push_back(obj);
        return num_vars++;
    }
    void add_row(std::vector<std::pair<int, double>> terms, double lower, double upper) {
        rows.push_back(Row{std::move(terms), lower, upper});
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    double objective = 0.0;
    std::vector<double> x;
};

/// Exact simplex solve of a small LP (backend: GLPK).
LpSolution solve_lp(const LpProblem& lp);

/// Name/version of the loaded backend, for logs and README checks.
std::string backend_version();

}  // namespace gapgrad

#endif
