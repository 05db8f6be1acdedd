#include "gapgrad/ensembles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gapgrad/gap.hpp"
#include "gapgrad/rng.hpp"

namespace gapgrad {

namespace {

using Clock = std::chrono::steady_clock;

PlanarStateGraph coarsen_member(const PlanarStateGraph& base, int rounds, CoarseningScheme scheme,
                                std::uint64_t member_seed) {
    PlanarStateGraph g = base;
    for (int r = 0; r < rounds; ++r) {
        std::uint64_t round_seed = derive_seed(member_seed, static_cast<std::uint64_t>(r) + 1);
        Matching m = scheme == CoarseningScheme::population ? match_population(g, round_seed)
                                                            : match_random(g, round_seed);
        g = contract(g, m);
    }
    return g;
}

}  // namespace

std::vector<PlanarStateGraph> make_member_graphs(const EnsembleSpec& spec) {
    spec.validate();
    std::vector<PlanarStateGraph> out;
    if (spec.scheme == CoarseningScheme::boosted) {
        out = boosted_ensemble(spec.base, spec.members, spec.eta, spec.rounds, spec.seed,
                               spec.boost_semantics);
    } else {
        out.reserve(static_cast<std::size_t>(spec.members));
        for (int i = 0; i < spec.members; ++i)
            out.push_back(coarsen_member(spec.base, spec.rounds, spec.scheme,
                                         derive_seed(spec.seed, static_cast<std::uint64_t>(i))));
    }
    for (const auto& g : out)
        if (g.num_vertices() < spec.districts)
            throw InvalidArgument("ensemble member coarsened below L vertices; reduce rounds");
    return out;
}

std::vector<std::unique_ptr<ForwardOracle>> make_member_oracles(const EnsembleSpec& spec) {
    std::vector<std::unique_ptr<ForwardOracle>> oracles;
    for (const auto& g : make_member_graphs(spec)) {
        DistrictingModel fop = build_fop(g, spec.districts, spec.metrics);
        oracles.push_back(make_oracle(fop.milp, fop.C, spec.oracle));
    }
    return oracles;
}

EnsembleGapEvaluation multipoint_gap(std::vector<std::unique_ptr<ForwardOracle>>& oracles,
                                     const std::vector<double>& y_hat_image,
                                     const CostVector& alpha) {
    if (oracles.empty()) throw InvalidArgument("multipoint_gap: no ensemble members");
    EnsembleGapEvaluation out;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < oracles.size(); ++i) {
        ForwardSolution sol;
        try {
            sol = oracles[i]->solve(alpha);
        } catch (const Error& e) {
            throw BackendError("ensemble member " + std::to_string(i) + ": " + e.what());
        }
        double obj = dot(alpha, sol.sub_objective_image);
        if (obj < best_obj) {
            best_obj = obj;
            out.active_member = static_cast<int>(i);
            out.minimizer = std::move(sol);
        }
    }
    out.xi_ens = dot(alpha, y_hat_image) - best_obj;
    out.subgrad = subgradient(y_hat_image, out.minimizer.sub_objective_image);
    return out;
}

EnsembleProbe::EnsembleProbe(std::vector<std::unique_ptr<ForwardOracle>> oracles, double gap_tol)
    : oracles_(std::move(oracles)), gap_tol_(gap_tol) {
    if (oracles_.empty()) throw InvalidArgument("EnsembleProbe: no members");
}

ProbeResult EnsembleProbe::probe(const CostVector& alpha) {
    ProbeResult r;
    r.best_objective = std::numeric_limits<double>::infinity();
    r.images.reserve(oracles_.size());
    for (std::size_t i = 0; i < oracles_.size(); ++i) {
        ForwardSolution sol;
        try {
            sol = oracles_[i]->solve(alpha);
        } catch (const SolveTimeout&) {
            throw;
        } catch (const Error& e) {
            throw BackendError("ensemble member " + std::to_string(i) + ": " + e.what());
        }
        double obj = dot(alpha, sol.sub_objective_image);
        if (obj < r.best_objective) {
            r.best_objective = obj;
            r.best_image = sol.sub_objective_image;
            r.active_member = static_cast<int>(i);
        }
        r.images.push_back(std::move(sol.sub_objective_image));
    }
    return r;
}

int EnsembleProbe::k() const { return oracles_.front()->subobjectives().k(); }

long EnsembleProbe::solves() const {
    long total = 0;
    for (const auto& o : oracles_) total += o->solve_count();
    return total;
}

SolverResult solve_multipoint(const EnsembleSpec& spec, const std::vector<double>& y_hat_image,
                              InverseMethod method, const SolverParams& params) {
    EnsembleProbe probe(make_member_oracles(spec), spec.oracle.mip_gap_tolerance);
    SolverParams p = params;
    p.allow_negative_gap = true;  // min-max gaps may be negative
    return run_method(probe, y_hat_image, method, p);
}

IndependentResult solve_independent(const EnsembleSpec& spec,
                                    const std::vector<double>& y_hat_image, InverseMethod method,
                                    const SolverParams& params) {
    IndependentResult out;
    auto graphs = make_member_graphs(spec);
    SolverParams p = params;
    p.allow_negative_gap = true;  // y-hat may dominate a coarsened feasible set
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        try {
            DistrictingModel fop = build_fop(graphs[i], spec.districts, spec.metrics);
            auto oracle = make_oracle(fop.milp, fop.C, spec.oracle);
            OracleProbe probe(*oracle, spec.oracle.mip_gap_tolerance);
            SolverResult r = run_method(probe, y_hat_image, method, p);
            out.alphas.push_back(r.alpha_star);
            out.results.push_back(std::move(r));
        } catch (const Error& e) {
            out.failures.push_back("member " + std::to_string(i) + ": " + e.what());
        }
    }
    if (out.alphas.empty()) throw BackendError("solve_independent: every member failed");
    int k = out.alphas.front().size();
    out.mean.weights.assign(static_cast<std::size_t>(k), 0.0);
    for (const auto& a : out.alphas)
        for (int i = 0; i < k; ++i) out.mean[i] += a[i];
    for (int i = 0; i < k; ++i) out.mean[i] /= static_cast<double>(out.alphas.size());
    return out;
}

StochasticResult solve_stochastic(const EnsembleSpec& spec, const std::vector<double>& y_hat_image,
                                  StochasticRule rule, int max_iterations_K,
                                  const SolverParams& params, const std::vector<int>& checkpoints) {
    spec.validate();
    params.validate();
    if (max_iterations_K < 0) throw InvalidArgument("solve_stochastic: K must be >= 0");
    const int K = max_iterations_K;
    const int k = static_cast<int>(spec.metrics.size());
    const auto t0 = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

    std::vector<int> checks = checkpoints;
    if (checks.empty()) {
        checks = {0, static_cast<int>(std::ceil(K / 3.0)), static_cast<int>(std::ceil(2.0 * K / 3.0)), K};
    }
    std::sort(checks.begin(), checks.end());
    checks.erase(std::unique(checks.begin(), checks.end()), checks.end());

    StochasticResult sr;
    SolverResult& res = sr.result;
    long fop_solves = 0;

    // iterate history for the (i+1)^2-weighted average
    std::vector<CostVector> iterates;
    iterates.push_back(CostVector::uniform(k));

    auto weighted_average = [&](int upto) {
        CostVector avg;
        avg.weights.assign(static_cast<std::size_t>(k), 0.0);
        double wsum = 0.0;
        for (int i = 0; i <= upto; ++i) {
            double w = static_cast<double>(i + 1) * static_cast<double>(i + 1);
            wsum += w;
            for (int c = 0; c < k; ++c) avg[c] += w * iterates[static_cast<std::size_t>(i)][c];
        }
        for (int c = 0; c < k; ++c) avg[c] /= wsum;
        return avg;
    };

    auto solve_fresh_ensemble = [&](const CostVector& alpha, int iteration, int count,
                                    std::vector<double>& best_image) {
        double best_obj = std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            std::uint64_t mseed = derive_seed(spec.seed, static_cast<std::uint64_t>(i),
                                              static_cast<std::uint64_t>(iteration) + 1);
            PlanarStateGraph g = coarsen_member(spec.base, spec.rounds,
                                                spec.scheme == CoarseningScheme::boosted
                                                    ? CoarseningScheme::random
                                                    : spec.scheme,
                                                mseed);
            DistrictingModel fop = build_fop(g, spec.districts, spec.metrics);
            auto oracle = make_oracle(fop.milp, fop.C, spec.oracle);
            ForwardSolution sol = oracle->solve(alpha);
            ++fop_solves;
            double obj = dot(alpha, sol.sub_objective_image);
            if (obj < best_obj) {
                best_obj = obj;
                best_image = sol.sub_objective_image;
            }
        }
        return best_obj;
    };

    auto record_checkpoints_through = [&](int reached) {
        for (int c : checks)
            if (c <= reached) {
                bool already = false;
                for (const auto& [it, a] : sr.checkpoints) already |= (it == c);
                if (!already) sr.checkpoints.emplace_back(c, weighted_average(c));
            }
    };

    CostVector a_cur = iterates[0];
    CostVector a_before = a_cur;
    std::vector<double> best_image;
    double xi_est = 0.0;
    double t1 = 0.0;

    // iteration 0: estimate the gap/subgradient at the uniform start
    int n0 = std::max(1, rule.size_at(0));
    double best_obj = solve_fresh_ensemble(a_cur, 0, n0, best_image);
    xi_est = dot(a_cur, y_hat_image) - best_obj;
    std::vector<double> g = subgradient(y_hat_image, best_image);

    int reached = 0;
    for (int it = 1; it <= K; ++it) {
        if (elapsed() > params.max_wall_seconds) break;
        double gnorm = std::sqrt([&] {
            double s = 0.0;
            for (double v : g) s += v * v;
            return s;
        }());
        if (t1 == 0.0) t1 = gnorm > 0 ? params.initial_step_norm / gnorm : 0.0;
        double t_k = t1 / std::sqrt(static_cast<double>(it));

        std::vector<double> raw(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c)
            raw[static_cast<std::size_t>(c)] =
                a_cur[c] - t_k * g[static_cast<std::size_t>(c)] +
                params.momentum_beta * (a_cur[c] - a_before[c]);
        CostVector a_next = project_simplex(raw);

        int n_it = std::max(1, rule.size_at(it));
        best_obj = solve_fresh_ensemble(a_next, it, n_it, best_image);
        xi_est = dot(a_next, y_hat_image) - best_obj;
        g = subgradient(y_hat_image, best_image);

        a_before = a_cur;
        a_cur = a_next;
        iterates.push_back(a_cur);
        reached = it;
        res.trace.push_back({it, a_cur.weights, xi_est, 0, t_k, elapsed()});
    }

    record_checkpoints_through(reached);
    sr.completed = (reached == K);
    res.alpha_star = weighted_average(reached);
    res.xi_star = xi_est;
    res.iterations = reached;
    res.fop_solves = fop_solves;
    res.wall_seconds = elapsed();
    res.terminated_by = Termination::budget;  // stochastic runs carry no optimality certificate
    return sr;
}

}  // namespace gapgrad
