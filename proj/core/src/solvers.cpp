#include "gapgrad/solvers.hpp"

#include <chrono>
#include <cmath>

namespace gapgrad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double norm2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

bool alpha_equal(const CostVector& a, const CostVector& b, double tol) {
    for (int i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > tol) return false;
    return true;
}

/// Equal-xi tolerance; widens with the backend's relative MIP gap.
double eq_tol(const SolverParams& p, double gap_tol, double xi) {
    return std::max(p.eq_tolerance, 10.0 * gap_tol * std::fabs(xi));
}

struct Incumbent {
    double xi = std::numeric_limits<double>::infinity();
    CostVector alpha;
    void offer(double x, const CostVector& a) {
        if (x < xi) {
            xi = x;
            alpha = a;
        }
    }
};

}  // namespace

SolverResult run_gap_gradient(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                              DescentMethod method, const SolverParams& params) {
    const int k = probe.k();
    const auto t0 = Clock::now();
    const long solves0 = probe.solves();
    const double gap_tol = probe.gap_tolerance();
    const bool fw = method == DescentMethod::frank_wolfe;
    const double beta = method == DescentMethod::pgd_accel ? params.momentum_beta : 0.0;

    SolverResult res;
    SolutionPool pool;
    Incumbent best;

    auto finish = [&](Termination how, const CostVector& alpha, double xi) {
        res.terminated_by = how;
        res.alpha_star = alpha;
        res.xi_star = xi;
        res.iterations = static_cast<int>(res.trace.size());
        res.fop_solves = probe.solves() - solves0;
        res.wall_seconds = seconds_since(t0);
        return res;
    };

    CostVector a_cur = CostVector::uniform(k);
    CostVector a_before = a_cur;  // alpha^(-1) := alpha^(0)

    try {
        ProbeResult r0 = probe.probe(a_cur);
        for (auto& img : r0.images) pool.add(img);
        double xi_cur = dot(a_cur, y_hat_image) - r0.best_objective;
        best.offer(xi_cur, a_cur);
        std::vector<double> g = subgradient(y_hat_image, r0.best_image);
        double xi_est = xi_cur;  // the running xi_ABS of the expected-decrease test

        double gnorm = norm2(g);
        if (gnorm == 0.0) return finish(Termination::mp_solve, a_cur, xi_cur);
        double t = params.initial_step_norm / gnorm;

        int k_iter = 0;
        while (true) {
            if (!params.allow_negative_gap && xi_cur <= 0.0)
                return finish(Termination::mp_solve, a_cur, xi_cur);
            if (static_cast<int>(res.trace.size()) >= params.max_iterations ||
                seconds_since(t0) > params.max_wall_seconds)
                return finish(Termination::budget, best.alpha, best.xi);

            ++k_iter;
            CostVector a_next;
            double step_used;
            if (fw) {
                int imin = 0;
                for (int i = 1; i < k; ++i)
                    if (g[static_cast<std::size_t>(i)] < g[static_cast<std::size_t>(imin)]) imin = i;
                double gamma = 2.0 / (2.0 + k_iter);
                a_next = a_cur;
                for (int i = 0; i < k; ++i)
                    a_next[i] = a_cur[i] + gamma * ((i == imin ? 1.0 : 0.0) - a_cur[i]);
                step_used = gamma;
            } else {
                std::vector<double> raw(static_cast<std::size_t>(k));
                for (int i = 0; i < k; ++i)
                    raw[static_cast<std::size_t>(i)] =
                        a_cur[i] - t * g[static_cast<std::size_t>(i)] + beta * (a_cur[i] - a_before[i]);
                a_next = project_simplex(raw);
                step_used = t;
            }

            ProbeResult r = probe.probe(a_next);
            bool already_known = pool.contains(r.best_image);
            for (auto& img : r.images) pool.add(img);
            double xi_new = dot(a_next, y_hat_image) - r.best_objective;
            best.offer(xi_new, a_next);

            double tol = eq_tol(params, gap_tol, xi_est);
            double expected = xi_est + [&] {
                double acc = 0.0;
                for (int i = 0; i < k; ++i) acc += (a_next[i] - a_cur[i]) * g[static_cast<std::size_t>(i)];
                return acc;
            }();
            bool stalled = alpha_equal(a_next, a_cur, params.eq_tolerance);
            bool no_expected_decrease = xi_new > expected + tol && already_known;

            if (stalled || no_expected_decrease) {
                MasterResult cand = master_abs(y_hat_image, pool);
                ++k_iter;
                ProbeResult rv = probe.probe(cand.alpha);
                for (auto& img : rv.images) pool.add(img);
                double xi_v = dot(cand.alpha, y_hat_image) - rv.best_objective;
                best.offer(xi_v, cand.alpha);
                res.trace.push_back({k_iter, cand.alpha.weights, xi_v, pool.size(), step_used,
                                     seconds_since(t0)});
                if (std::fabs(xi_v - cand.xi) <= eq_tol(params, gap_tol, cand.xi))
                    return finish(Termination::mp_solve, cand.alpha, xi_v);
                // verification failed: restart descent from the master point
                a_before = a_next;
                a_cur = cand.alpha;
                xi_cur = xi_v;
                g = subgradient(y_hat_image, rv.best_image);
                if (!fw) {
                    t /= 2.0;
                    if (t < 1e-12) return finish(Termination::budget, best.alpha, best.xi);
                }
            } else {
                res.trace.push_back({k_iter, a_next.weights, xi_new, pool.size(), step_used,
                                     seconds_since(t0)});
                a_before = a_cur;
                a_cur = a_next;
                xi_cur = xi_new;
                xi_est = xi_new;
                g = subgradient(y_hat_image, r.best_image);
            }
        }
    } catch (const SolveTimeout&) {
        return finish(Termination::budget, best.alpha.size() ? best.alpha : CostVector::uniform(k),
                      best.xi);
    }
}

SolverResult run_cutting_plane_abs(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                                   const SolverParams& params) {
    const int k = probe.k();
    const auto t0 = Clock::now();
    const long solves0 = probe.solves();
    const double gap_tol = probe.gap_tolerance();

    SolverResult res;
    SolutionPool pool;
    Incumbent best_seen;

    auto finish = [&](Termination how, const CostVector& alpha, double xi) {
        res.terminated_by = how;
        res.alpha_star = alpha;
        res.xi_star = xi;
        res.iterations = static_cast<int>(res.trace.size());
        res.fop_solves = probe.solves() - solves0;
        res.wall_seconds = seconds_since(t0);
        return res;
    };

    try {
        CostVector a_cur = CostVector::uniform(k);
        ProbeResult r = probe.probe(a_cur);
        for (auto& img : r.images) pool.add(img);
        double xi_cur = dot(a_cur, y_hat_image) - r.best_objective;
        best_seen.offer(xi_cur, a_cur);
        res.trace.push_back({1, a_cur.weights, xi_cur, pool.size(), 0.0, seconds_since(t0)});

        double xi_best = xi_cur;
        CostVector a_best = a_cur;

        while (true) {
            if (!params.allow_negative_gap && xi_cur <= 0.0)
                return finish(Termination::mp_solve, a_cur, xi_cur);
            if (static_cast<int>(res.trace.size()) >= params.max_iterations ||
                seconds_since(t0) > params.max_wall_seconds)
                return finish(Termination::budget, best_seen.alpha, best_seen.xi);

            MasterResult cand = master_abs(y_hat_image, pool);
            r = probe.probe(cand.alpha);
            for (auto& img : r.images) pool.add(img);
            xi_cur = dot(cand.alpha, y_hat_image) - r.best_objective;
            a_cur = cand.alpha;
            best_seen.offer(xi_cur, a_cur);
            res.trace.push_back({static_cast<int>(res.trace.size()) + 1, a_cur.weights, xi_cur,
                                 pool.size(), 0.0, seconds_since(t0)});

            double tol = eq_tol(params, gap_tol, xi_best);
            if (std::fabs(xi_cur - xi_best) <= tol) {
                if (alpha_equal(a_cur, a_best, params.eq_tolerance))
                    return finish(Termination::mp_solve, a_best, xi_best);
                a_best = a_cur;
            } else if (xi_cur < xi_best) {
                xi_best = xi_cur;
                a_best = a_cur;
            }
        }
    } catch (const SolveTimeout&) {
        return finish(Termination::budget,
                      best_seen.alpha.size() ? best_seen.alpha : CostVector::uniform(k),
                      best_seen.xi);
    }
}

SolverResult run_cutting_plane_rel(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                                   const SolverParams& params) {
    const int k = probe.k();
    const auto t0 = Clock::now();
    const long solves0 = probe.solves();
    const double gap_tol = probe.gap_tolerance();

    for (double v : y_hat_image)
        if (v <= 0.0)
            throw InvalidArgument("relative loss needs C y_hat > 0 (well-definedness condition)");

    SolverResult res;
    SolutionPool pool;
    Incumbent best_seen;

    auto finish = [&](Termination how, const CostVector& alpha, double xi) {
        res.terminated_by = how;
        res.alpha_star = alpha;
        res.xi_star = xi;
        res.iterations = static_cast<int>(res.trace.size());
        res.fop_solves = probe.solves() - solves0;
        res.wall_seconds = seconds_since(t0);
        return res;
    };

    try {
        CostVector a_cur = CostVector::uniform(k);
        ProbeResult r = probe.probe(a_cur);
        for (auto& img : r.images) pool.add(img);
        double ratio_cur = dot(a_cur, y_hat_image) / r.best_objective;
        best_seen.offer(ratio_cur, a_cur);
        res.trace.push_back({1, a_cur.weights, ratio_cur, pool.size(), 0.0, seconds_since(t0)});

        while (true) {
            if (ratio_cur <= 1.0) return finish(Termination::mp_solve, a_cur, ratio_cur);
            if (static_cast<int>(res.trace.size()) >= params.max_iterations ||
                seconds_since(t0) > params.max_wall_seconds)
                return finish(Termination::budget, best_seen.alpha, best_seen.xi);

            MasterResult cand = master_rel(y_hat_image, pool);
            r = probe.probe(cand.alpha);
            for (auto& img : r.images) pool.add(img);
            ratio_cur = dot(cand.alpha, y_hat_image) / r.best_objective;
            a_cur = cand.alpha;
            best_seen.offer(ratio_cur, a_cur);
            res.trace.push_back({static_cast<int>(res.trace.size()) + 1, a_cur.weights, ratio_cur,
                                 pool.size(), 0.0, seconds_since(t0)});

            // the master is a relaxation: matching realized ratio proves optimality
            if (std::fabs(ratio_cur - cand.xi) <= eq_tol(params, gap_tol, cand.xi))
                return finish(Termination::mp_solve, a_cur, ratio_cur);
        }
    } catch (const SolveTimeout&) {
        return finish(Termination::budget,
                      best_seen.alpha.size() ? best_seen.alpha : CostVector::uniform(k),
                      best_seen.xi);
    }
}

std::string method_name(InverseMethod m) {
    switch (m) {
        case InverseMethod::cp: return "cp";
        case InverseMethod::cp_rel: return "cp-rel";
        case InverseMethod::pgd: return "pgd";
        case InverseMethod::pgd_accel: return "pgd-a";
        case InverseMethod::fw: return "fw";
    }
    return "?";
}

InverseMethod parse_method(const std::string& name) {
    if (name == "cp") return InverseMethod::cp;
    if (name == "cp-rel" || name == "cprel") return InverseMethod::cp_rel;
    if (name == "pgd") return InverseMethod::pgd;
    if (name == "pgd-a" || name == "pgda" || name == "pgd_accel") return InverseMethod::pgd_accel;
    if (name == "fw") return InverseMethod::fw;
    throw InvalidArgument("unknown method '" + name + "' (cp, cp-rel, pgd, pgd-a, fw)");
}

SolverResult run_method(ForwardProbe& probe, const std::vector<double>& y_hat_image,
                        InverseMethod method, const SolverParams& params) {
    switch (method) {
        case InverseMethod::cp: return run_cutting_plane_abs(probe, y_hat_image, params);
        case InverseMethod::cp_rel: return run_cutting_plane_rel(probe, y_hat_image, params);
        case InverseMethod::pgd:
            return run_gap_gradient(probe, y_hat_image, DescentMethod::pgd, params);
        case InverseMethod::pgd_accel:
            return run_gap_gradient(probe, y_hat_image, DescentMethod::pgd_accel, params);
        case InverseMethod::fw:
            return run_gap_gradient(probe, y_hat_image, DescentMethod::frank_wolfe, params);
    }
    throw InvalidArgument("run_method: bad method");
}

namespace {

SolverResult run_single(ForwardOracle& oracle, const ForwardSolution& y_hat,
                        const SolverParams& params, DescentMethod method) {
    params.validate();
    OracleProbe probe(oracle);
    return run_gap_gradient(probe, y_hat.sub_objective_image, method, params);
}

}  // namespace

SolverResult solve_cp_abs(ForwardOracle& oracle, const ForwardSolution& y_hat,
                          const SolverParams& params) {
    params.validate();
    OracleProbe probe(oracle);
    return run_cutting_plane_abs(probe, y_hat.sub_objective_image, params);
}

SolverResult solve_cp_rel(ForwardOracle& oracle, const ForwardSolution& y_hat,
                          const SolverParams& params) {
    params.validate();
    OracleProbe probe(oracle);
    return run_cutting_plane_rel(probe, y_hat.sub_objective_image, params);
}

SolverResult solve_pgd(ForwardOracle& oracle, const ForwardSolution& y_hat,
                       const SolverParams& params) {
    return run_single(oracle, y_hat, params, DescentMethod::pgd);
}

SolverResult solve_pgd_accel(ForwardOracle& oracle, const ForwardSolution& y_hat,
                             const SolverParams& params) {
    return run_single(oracle, y_hat, params, DescentMethod::pgd_accel);
}

SolverResult solve_fw(ForwardOracle& oracle, const ForwardSolution& y_hat,
                      const SolverParams& params) {
    return run_single(oracle, y_hat, params, DescentMethod::frank_wolfe);
}

}  // namespace gapgrad
