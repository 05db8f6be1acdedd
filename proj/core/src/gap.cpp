#include "gapgrad/gap.hpp"

#include <algorithm>
#include <cmath>

namespace gapgrad {

bool SolutionPool::add(std::vector<double> image) {
    if (contains(image)) return false;
    images_.push_back(std::move(image));
    return true;
}

bool SolutionPool::contains(const std::vector<double>& image) const {
    for (const auto& b : images_) {
        if (b.size() != image.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < b.size() && same; ++i)
            same = std::fabs(b[i] - image[i]) <= kDedupTolerance;
        if (same) return true;
    }
    return false;
}

GapEvaluation evaluate_gap(ForwardOracle& oracle, const std::vector<double>& y_hat_image,
                           const CostVector& alpha) {
    GapEvaluation out;
    out.minimizer = oracle.solve(alpha);
    out.xi = dot(alpha, y_hat_image) - dot(alpha, out.minimizer.sub_objective_image);
    out.subgrad = subgradient(y_hat_image, out.minimizer.sub_objective_image);
    return out;
}

std::vector<double> subgradient(const std::vector<double>& y_hat_image,
                                const std::vector<double>& y_image) {
    if (y_hat_image.size() != y_image.size())
        throw InvalidArgument("subgradient: image dimensions differ");
    std::vector<double> g(y_hat_image.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = y_hat_image[i] - y_image[i];
    return g;
}

CostVector project_simplex(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument("project_simplex: non-finite component");
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = static_cast<int>(i + 1);
            theta = t;
        }
    }
    CostVector out;
    out.weights.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.weights[i] = std::max(0.0, v[i] - theta);
    return out;
}

MasterResult master_abs(const std::vector<double>& y_hat_image, const SolutionPool& pool) {
    if (pool.empty()) throw InvalidArgument("master_abs: empty solution pool");
    int k = static_cast<int>(y_hat_image.size());
    LpProblem lp;
    for (int i = 0; i < k; ++i) lp.add_var(0.0, kInfinity, 0.0);
    int xi = lp.add_var(-kInfinity, kInfinity, 1.0);
    {
        std::vector<std::pair<int, double>> simplex_row;
        for (int i = 0; i < k; ++i) simplex_row.emplace_back(i, 1.0);
        lp.add_row(std::move(simplex_row), 1.0, 1.0);
    }
    for (const auto& b : pool.images()) {
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < k; ++i) {
            double c = y_hat_image[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
            if (c != 0.0) row.emplace_back(i, c);
        }
        row.emplace_back(xi, -1.0);
        lp.add_row(std::move(row), -kInfinity, 0.0);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw BackendError("master_abs: LP did not solve");
    MasterResult out;
    out.alpha.weights.assign(sol.x.begin(), sol.x.begin() + k);
    out.xi = sol.x[static_cast<std::size_t>(xi)];
    return out;
}

MasterResult master_rel(const std::vector<double>& y_hat_image, const SolutionPool& pool) {
    if (pool.empty()) throw InvalidArgument("master_rel: empty solution pool");
    for (double v : y_hat_image)
        if (v <= 0.0) throw InvalidArgument("master_rel: C y_hat must be strictly positive");
    for (const auto& b : pool.images())
        for (double v : b)
            if (v <= 0.0) throw InvalidArgument("master_rel: pool images must be strictly positive");

    int k = static_cast<int>(y_hat_image.size());
    LpProblem lp;
    for (int i = 0; i < k; ++i) lp.add_var(0.0, kInfinity, y_hat_image[static_cast<std::size_t>(i)]);
    for (const auto& b : pool.images()) {
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < k; ++i)
            if (b[static_cast<std::size_t>(i)] != 0.0) row.emplace_back(i, b[static_cast<std::size_t>(i)]);
        lp.add_row(std::move(row), 1.0, kInfinity);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal)
        throw BackendError("master_rel: LP did not solve (positivity precondition violated?)");
    double norm1 = 0.0;
    for (double v : sol.x) norm1 += v;
    if (norm1 <= 0.0) throw BackendError("master_rel: degenerate zero solution");
    MasterResult out;
    out.alpha.weights.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.alpha.weights[static_cast<std::size_t>(i)] = sol.x[static_cast<std::size_t>(i)] / norm1;
    out.xi = sol.objective;  // alpha_hat' C y_hat, the relative gap value
    return out;
}

bool mp_solve_verify(ForwardOracle& oracle, const std::vector<double>& y_hat_image,
                     const MasterResult& candidate, SolutionPool& pool, double eq_tol) {
    ForwardSolution fresh = oracle.solve(candidate.alpha);
    double gap = dot(candidate.alpha, y_hat_image) - dot(candidate.alpha, fresh.sub_objective_image);
    pool.add(fresh.sub_objective_image);
    return std::fabs(gap - candidate.xi) <= eq_tol;
}

}  // namespace gapgrad
