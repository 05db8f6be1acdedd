#ifndef GAPGRAD_SOLVERS_HPP
#define GAPGRAD_SOLVERS_HPP

#include <memory>
#include <vector>

#include "gapgrad/gap.hpp"
#include "gapgrad/oracle.hpp"

namespace gapgrad {

struct SolverParams {
    double initial_step_norm = 0.1;  // Euclidean norm of the first descent step
    double momentum_beta = 0.5;      // heavy-ball coefficient, in (0, 1]
    int max_iterations = 1000;
    double max_wall_seconds = 360.0;
    double eq_tolerance = 1e-6;  // base epsilon for the algorithms' equality tests
    // Min-max ensemble problems can have negative gap minima; setting this
    // drops the "gap <= 0" early exit so descent continues below zero.
    bool allow_negative_gap = false;

    void validate() const {
        if (initial_step_norm <= 0.0) throw InvalidArgument("SolverParams: initial_step_norm must be > 0");
        // beta = 0 reduces the heavy ball to plain descent (used by tests)
        if (momentum_beta < 0.0 || momentum_beta > 1.0)
            throw InvalidArgument("SolverParams: momentum_beta must lie in [0, 1]");
        if (max_iterations < 0) throw InvalidArgument("SolverParams: max_iterations must be >= 0");
        if (max_wall_seconds <= 0.0) throw InvalidArgument("SolverParams: max_wall_seconds must be > 0");
    }
};

enum class Termination {
    mp_solve,  // exact optimum certified (master verification, or a zero-gap certificate)
    budget,    // iteration/time budget exhausted; result is the incumbent
};

struct TraceRecord {
    int iteration = 0;
    std::vector<double> alpha;
    double xi = 0.0;
    int pool_size = 0;
    double step_size = 0.0;
    double wall_seconds = 0.0;
};

struct SolverResult {
    CostVector alpha_star;
    double xi_star = 0.0;
    int iterations = 0;  // = trace.size(); gap-gradient methods count descent
                         // steps, cutting planes count forward evaluations
    long fop_solves = 0;
    double wall_seconds = 0.0;
    Termination terminated_by = Termination::budget;
    std::vector<TraceRecord> trace;
};

/// What a solver needs from the forward side: solve min alpha'Cy, possibly
/// across several coarsened instances at once. `images` carries every
/// member's optimum (all get pooled); `best_image` is the argmin member's.
struct ProbeResult {
    double best_objective = 0.0;
    std::vector<double> best_image;
    std::vector<std::vector<double>> images;
    int active_member = 0;
};

class ForwardProbe {
public:
    virtual ~ForwardProbe() = default;
    virtual ProbeResult probe(const CostVector& alpha) = 0;
    virtual int k() const = 0;
    virtual long solves() const = 0;
    virtual double gap_tolerance() const = 0;
};

/// Probe over a single forward oracle.
class OracleProbe final : public ForwardProbe {
public:
    explicit OracleProbe(ForwardOracle& oracle, double gap_tol = 0.0)
        : oracle_(oracle), gap_tol_(gap_tol) {}

    ProbeResult probe(const CostVector& alpha) override {
        ForwardSolution y = oracle_.solve(alpha);
        ProbeResult r;
        r.best_objective = dot(alpha, y.sub_objective_image);
        r.best_image = y.sub_objective_image;
        r.images = {y.sub_objective_image};
        return r;
    }
    int k() const override { return oracle_.subobjectives().k(); }
    long solves() const override { return oracle_.solve_count(); }
    double gap_tolerance() const override { return gap_tol_; }

private:
    ForwardOracle& oracle_;
    double gap_tol_;
};

enum class DescentMethod { pgd, pgd_accel, frank_wolfe };

/// The four inverse methods, as selectable from configs and the CLI.
enum class InverseMethod { cp, cp_rel, pgd, pgd_accel, fw };

std::string method_name(InverseMethod m);
InverseMethod parse_method(const std::string& name);

/// Dispatch over any probe (single oracle or ensemble).
SolverResult run_method(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                        InverseMethod method, const SolverParams& params);

// -- probe-level entry points (shared with the ensemble module) ------------

SolverResult run_gap_gradient(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                              DescentMethod method, const SolverParams& params);
SolverResult run_cutting_plane_abs(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                                   const SolverParams& params);
SolverResult run_cutting_plane_rel(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                                   const SolverParams& params);

// -- the four inverse solution methods --------------------------------------

SolverResult solve_cp_abs(ForwardOracle& oracle, const ForwardSolution& y_hat,
                          const SolverParams& params = {});
SolverResult solve_cp_rel(ForwardOracle& oracle, const ForwardSolution& y_hat,
                          const SolverParams& params = {});
SolverResult solve_pgd(ForwardOracle& oracle, const ForwardSolution& y_hat,
                       const SolverParams& params = {});
SolverResult solve_pgd_accel(ForwardOracle& oracle, const ForwardSolution& y_hat,
                             const SolverParams& params = {});
SolverResult solve_fw(ForwardOracle& oracle, const ForwardSolution& y_hat,
                      const SolverParams& params = {});

}  // namespace gapgrad

#endif
