#ifndef GAPGRAD_GAP_HPP
#define GAPGRAD_GAP_HPP

#include <vector>

#include "gapgrad/cost_vector.hpp"
#include "gapgrad/model.hpp"
#include "gapgrad/oracle.hpp"

namespace gapgrad {

/// One gap-function evaluation: the loss value, the forward minimizer that
/// produced it, and the subgradient C(y_hat - y).
struct GapEvaluation {
    double xi = 0.0;
    ForwardSolution minimizer;
    std::vector<double> subgrad;
};

/// The growing set of discovered forward solutions and their images C*y,
/// deduplicated by image (absolute tolerance 1e-9).
class SolutionPool {
public:
    /// Returns true when the image was new.
    bool add(std::vector<double> image);
    bool contains(const std::vector<double>& image) const;

    int size() const { return static_cast<int>(images_.size()); }
    bool empty() const { return images_.empty(); }
    const std::vector<std::vector<double>>& images() const { return images_; }

    static constexpr double kDedupTolerance = 1e-9;

private:
    std::vector<std::vector<double>> images_;
};

/// Output of a finite-pool master problem.
struct MasterResult {
    CostVector alpha;
    double xi = 0.0;  // may be negative: the pool relaxation is a lower bound
};

/// xi(alpha) = alpha'C y_hat - min_y alpha'C y, evaluated with one oracle
/// call, together with the subgradient at alpha.
GapEvaluation evaluate_gap(ForwardOracle& oracle, const std::vector<double>& y_hat_image,
                           const CostVector& alpha);

/// C*y_hat - C*y as a length-k vector (images already in sub-objective space).
std::vector<double> subgradient(const std::vector<double>& y_hat_image,
                                const std::vector<double>& y_image);

/// Euclidean projection onto the unit simplex (sort-and-threshold, exact).
/// Throws InvalidArgument on non-finite input.
CostVector project_simplex(const std::vector<double>& v);

/// Finite-pool master for the absolute loss:
///   min xi  s.t.  alpha'(C y_hat - b) <= xi  for all pool images b,
///                 alpha on the unit simplex, xi free.
MasterResult master_abs(const std::vector<double>& y_hat_image, const SolutionPool& pool);

/// Finite-pool master for the relative loss (the linearized program):
///   min alpha'C y_hat  s.t.  alpha'b >= 1 for all pool images b, alpha >= 0,
/// followed by the normalization alpha_bar = alpha/||alpha||_1 and
/// xi_rel = alpha'C y_hat. Requires strictly positive images.
MasterResult master_rel(const std::vector<double>& y_hat_image, const SolutionPool& pool);

/// Verifies a master candidate by a fresh forward solve at candidate.alpha.
/// The fresh solution's image is always added to `pool`. Returns true when
/// the re-solved gap matches candidate.xi within eq_tol.
bool mp_solve_verify(ForwardOracle& oracle, const std::vector<double>& y_hat_image,
                     const MasterResult& candidate, SolutionPool& pool, double eq_tol = 1e-6);

}  // namespace gapgrad

#endif
