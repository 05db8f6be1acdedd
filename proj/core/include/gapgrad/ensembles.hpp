#ifndef GAPGRAD_ENSEMBLES_HPP
#define GAPGRAD_ENSEMBLES_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gapgrad/districting.hpp"
#include "gapgrad/solvers.hpp"
#include "gapgrad/state_graph.hpp"

namespace gapgrad {

enum class CoarseningScheme { random, population, boosted };

/// How to produce an ensemble of coarsened forward problems from one state
/// graph. Metric sub-objectives are invariant to coarsening, so all members
/// share the same k-dimensional image space.
struct EnsembleSpec {
    PlanarStateGraph base;
    int districts = 2;  // L
    std::vector<Metric> metrics{Metric::population_imbalance, Metric::compactness_area,
                                Metric::efficiency_gap};
    int members = 1;  // n
    int rounds = 1;
    CoarseningScheme scheme = CoarseningScheme::random;
    double eta = 1.5;
    BoostSemantics boost_semantics = BoostSemantics::prose;
    std::uint64_t seed = 0;
    OracleConfig oracle;

    void validate() const {
        if (members < 1) throw InvalidArgument("EnsembleSpec: need members >= 1");
        if (rounds < 1) throw InvalidArgument("EnsembleSpec: need rounds >= 1");
    }
};

/// The coarsened member graphs, deterministic in (seed, member index).
std::vector<PlanarStateGraph> make_member_graphs(const EnsembleSpec& spec);

/// One forward oracle per coarsened member FOP.
std::vector<std::unique_ptr<ForwardOracle>> make_member_oracles(const EnsembleSpec& spec);

/// The min-max ensemble gap at alpha: every member FOP is solved, the
/// worst (largest) member gap is the value, and the subgradient comes from
/// the member attaining the overall objective minimum.
struct EnsembleGapEvaluation {
    double xi_ens = 0.0;
    int active_member = 0;
    ForwardSolution minimizer;
    std::vector<double> subgrad;
};

EnsembleGapEvaluation multipoint_gap(std::vector<std::unique_ptr<ForwardOracle>>& oracles,
                                     const std::vector<double>& y_hat_image,
                                     const CostVector& alpha);

/// Probe across an ensemble of member oracles (ties go to the lowest index).
class EnsembleProbe final : public ForwardProbe {
public:
    explicit EnsembleProbe(std::vector<std::unique_ptr<ForwardOracle>> oracles, double gap_tol = 0.0);

    ProbeResult probe(const CostVector& alpha) override;
    int k() const override;
    long solves() const override;
    double gap_tolerance() const override { return gap_tol_; }

    int members() const { return static_cast<int>(oracles_.size()); }

private:
    std::vector<std::unique_ptr<ForwardOracle>> oracles_;
    double gap_tol_;
};

/// Solves the min-max multipoint inverse formulation over the ensemble with
/// the chosen method. The master pools constraints from all members and the
/// gap is free in sign.
SolverResult solve_multipoint(const EnsembleSpec& spec, const std::vector<double>& y_hat_image,
                              InverseMethod method, const SolverParams& params);

/// Solves each member's inverse problem independently and averages.
struct IndependentResult {
    CostVector mean;
    std::vector<CostVector> alphas;      // one per successful member
    std::vector<SolverResult> results;   // aligned with alphas
    std::vector<std::string> failures;   // "member <i>: <reason>" entries
};

IndependentResult solve_independent(const EnsembleSpec& spec,
                                    const std::vector<double>& y_hat_image, InverseMethod method,
                                    const SolverParams& params);

/// Ensemble-size rule for the stochastic method: a fixed n, or n = k
/// (growing with the iteration count).
struct StochasticRule {
    enum class Kind { fixed, increasing } kind = Kind::fixed;
    int n = 16;

    static StochasticRule fixed(int n) { return {Kind::fixed, n}; }
    static StochasticRule increasing() { return {Kind::increasing, 0}; }

    int size_at(int iteration) const {
        return kind == Kind::fixed ? n : std::max(1, iteration);
    }
};

struct StochasticResult {
    SolverResult result;  // alpha_star = the (i+1)^2-weighted iterate average
    std::vector<std::pair<int, CostVector>> checkpoints;
    bool completed = false;  // false when the wall budget cut the run short
};

/// Projected descent with stochastic subgradients estimated from a fresh
/// coarsening ensemble at every iteration; steps decay as 1/sqrt(k) from a
/// first step of params.initial_step_norm, with momentum params.momentum_beta.
/// Checkpoints default to {0, ceil(K/3), ceil(2K/3), K}.
StochasticResult solve_stochastic(const EnsembleSpec& spec, const std::vector<double>& y_hat_image,
                                  StochasticRule rule, int max_iterations_K,
                                  const SolverParams& params,
                                  const std::vector<int>& checkpoints = {});

}  // namespace gapgrad

#endif
