// Backend adapter for the GLPK shared library, loaded at runtime via dlopen.
// Development headers for GLPK are not assumed; the prototypes and control
// structures below follow the stable documented C API (4.65). The control
// structs declare only the leading fields we touch and over-allocate the
// tail; their layout is verified at load time against the documented
// defaults written by glp_init_*.

#include <dlfcn.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "gapgrad/errors.hpp"
#include "gapgrad/oracle.hpp"

namespace gapgrad {
namespace {

// ---- GLPK constants (glpk.h 4.65) ----------------------------------------
constexpr int GLP_MIN = 1;
constexpr int GLP_FR = 1, GLP_LO = 2, GLP_UP = 3, GLP_DB = 4, GLP_FX = 5;
constexpr int GLP_CV = 1, GLP_IV = 2, GLP_BV = 3;
constexpr int GLP_UNDEF = 1, GLP_FEAS = 2, GLP_NOFEAS = 4, GLP_OPT = 5, GLP_UNBND = 6;
constexpr int GLP_ON = 1;
constexpr int GLP_MSG_OFF = 0;
constexpr int GLP_ETMLIM = 0x09, GLP_ENOPFS = 0x0A, GLP_ENODFS = 0x0B, GLP_EMIPGAP = 0x0E,
              GLP_ENOFEAS = 0x0F;

struct GlpSmcp {
    int msg_lev, meth, pricing, r_test;
    double tol_bnd, tol_dj, tol_piv, obj_ll, obj_ul;
    int it_lim, tm_lim, out_frq, out_dly, presolve;
    unsigned char reserved[512];
};

struct GlpIocp {
    int msg_lev, br_tech, bt_tech;
    double tol_int, tol_obj;
    int tm_lim, out_frq, out_dly;
    void* cb_func;
    void* cb_info;
    int cb_size, pp_tech;
    double mip_gap;
    int mir_cuts, gmi_cuts, cov_cuts, clq_cuts, presolve, binarize, fp_heur, ps_heur, ps_tm_lim,
        sr_heur, use_sol;
    const char* save_sol;
    int alien, flip;
    unsigned char reserved[512];
};

struct Api {
    const char* (*version)();
    int (*term_out)(int);
    void* (*create_prob)();
    void (*delete_prob)(void*);
    void (*set_obj_dir)(void*, int);
    int (*add_rows)(void*, int);
    int (*add_cols)(void*, int);
    void (*set_row_bnds)(void*, int, int, double, double);
    void (*set_col_bnds)(void*, int, int, double, double);
    void (*set_col_kind)(void*, int, int);
    void (*set_obj_coef)(void*, int, double);
    void (*load_matrix)(void*, int, const int*, const int*, const double*);
    void (*init_smcp)(void*);
    int (*simplex)(void*, const void*);
    int (*get_status)(void*);
    double (*get_obj_val)(void*);
    double (*get_col_prim)(void*, int);
    void (*init_iocp)(void*);
    int (*intopt)(void*, const void*);
    int (*mip_status)(void*);
    double (*mip_obj_val)(void*);
    double (*mip_col_val)(void*, int);
};

void* try_load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return nullptr;
    void* glpk = nullptr;
    // sibling libraries may depend on each other; loop until a fixpoint
    for (int pass = 0; pass < 4 && !glpk; ++pass) {
        std::vector<std::string> paths;
        for (const auto& e : fs::directory_iterator(dir, ec)) {
            if (e.path().filename().string().find(".so") != std::string::npos)
                paths.push_back(e.path().string());
        }
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            void* h = dlopen(p.c_str(), RTLD_NOW | RTLD_GLOBAL);
            if (h && p.find("libglpk") != std::string::npos) glpk = h;
        }
    }
    return glpk;
}

void* locate_library() {
    if (const char* file = std::getenv("GAPGRAD_GLPK_PATH")) {
        if (void* h = dlopen(file, RTLD_NOW | RTLD_GLOBAL)) return h;
    }
    if (const char* dir = std::getenv("GAPGRAD_GLPK_DIR")) {
        if (void* h = try_load_dir(dir)) return h;
    }
    for (const char* name : {"libglpk.so.40", "libglpk.so"}) {
        if (void* h = dlopen(name, RTLD_NOW | RTLD_GLOBAL)) return h;
    }
    // GLPK ships inside the cvxopt wheel on systems without a dev package
    namespace fs = std::filesystem;
    for (const char* prefix : {"/usr/local/lib", "/usr/lib"}) {
        std::error_code ec;
        if (!fs::is_directory(prefix, ec)) continue;
        for (const auto& py : fs::directory_iterator(prefix, ec)) {
            if (py.path().filename().string().rfind("python3", 0) != 0) continue;
            for (const char* pkgs : {"dist-packages", "site-packages"}) {
                if (void* h = try_load_dir(py.path().string() + "/" + pkgs + "/cvxopt.libs"))
                    return h;
            }
        }
    }
    return nullptr;
}

const Api& api() {
    static Api a = [] {
        void* h = locate_library();
        if (!h)
            throw BackendError(
                "no GLPK shared library found (set GAPGRAD_GLPK_PATH or GAPGRAD_GLPK_DIR)");
        Api t{};
        auto sym = [&](const char* name) {
            void* p = dlsym(h, name);
            if (!p) throw BackendError(std::string("GLPK symbol missing: ") + name);
            return p;
        };
        t.version = reinterpret_cast<const char* (*)()>(sym("glp_version"));
        t.term_out = reinterpret_cast<int (*)(int)>(sym("glp_term_out"));
        t.create_prob = reinterpret_cast<void* (*)()>(sym("glp_create_prob"));
        t.delete_prob = reinterpret_cast<void (*)(void*)>(sym("glp_delete_prob"));
        t.set_obj_dir = reinterpret_cast<void (*)(void*, int)>(sym("glp_set_obj_dir"));
        t.add_rows = reinterpret_cast<int (*)(void*, int)>(sym("glp_add_rows"));
        t.add_cols = reinterpret_cast<int (*)(void*, int)>(sym("glp_add_cols"));
        t.set_row_bnds =
            reinterpret_cast<void (*)(void*, int, int, double, double)>(sym("glp_set_row_bnds"));
        t.set_col_bnds =
            reinterpret_cast<void (*)(void*, int, int, double, double)>(sym("glp_set_col_bnds"));
        t.set_col_kind = reinterpret_cast<void (*)(void*, int, int)>(sym("glp_set_col_kind"));
        t.set_obj_coef = reinterpret_cast<void (*)(void*, int, double)>(sym("glp_set_obj_coef"));
        t.load_matrix = reinterpret_cast<void (*)(void*, int, const int*, const int*, const double*)>(
            sym("glp_load_matrix"));
        t.init_smcp = reinterpret_cast<void (*)(void*)>(sym("glp_init_smcp"));
        t.simplex = reinterpret_cast<int (*)(void*, const void*)>(sym("glp_simplex"));
        t.get_status = reinterpret_cast<int (*)(void*)>(sym("glp_get_status"));
        t.get_obj_val = reinterpret_cast<double (*)(void*)>(sym("glp_get_obj_val"));
        t.get_col_prim = reinterpret_cast<double (*)(void*, int)>(sym("glp_get_col_prim"));
        t.init_iocp = reinterpret_cast<void (*)(void*)>(sym("glp_init_iocp"));
        t.intopt = reinterpret_cast<int (*)(void*, const void*)>(sym("glp_intopt"));
        t.mip_status = reinterpret_cast<int (*)(void*)>(sym("glp_mip_status"));
        t.mip_obj_val = reinterpret_cast<double (*)(void*)>(sym("glp_mip_obj_val"));
        t.mip_col_val = reinterpret_cast<double (*)(void*, int)>(sym("glp_mip_col_val"));

        // layout guard: glp_init_* must land the documented defaults in our
        // declared fields, otherwise the installed build is ABI-incompatible
        GlpIocp ic;
        std::memset(&ic, 0, sizeof ic);
        t.init_iocp(&ic);
        GlpSmcp sc;
        std::memset(&sc, 0, sizeof sc);
        t.init_smcp(&sc);
        if (ic.br_tech != 4 || ic.bt_tech != 3 || std::fabs(ic.tol_int - 1e-5) > 1e-12 ||
            sc.meth != 1 || std::fabs(sc.tol_bnd - 1e-7) > 1e-12)
            throw BackendError("GLPK control structure layout mismatch (incompatible build)");
        return t;
    }();
    return a;
}

void quiet() { api().term_out(GLP_MSG_OFF); }

int bound_type(double lb, double ub) {
    bool lo = std::isfinite(lb), up = std::isfinite(ub);
    if (lo && up) return lb == ub ? GLP_FX : GLP_DB;
    if (lo) return GLP_LO;
    if (up) return GLP_UP;
    return GLP_FR;
}

int clamp_ms(double seconds) {
    double ms = seconds * 1000.0;
    if (ms >= 2147483000.0) return 2147483000;
    return std::max(1, static_cast<int>(ms));
}

class GlpkProblem {
public:
    explicit GlpkProblem(const MilpModel& model) {
        quiet();
        prob_ = api().create_prob();
        api().set_obj_dir(prob_, GLP_MIN);
        int m = model.num_constraints(), n = model.num_variables();
        if (m > 0) api().add_rows(prob_, m);
        if (n > 0) api().add_cols(prob_, n);
        for (int i = 0; i < m; ++i) {
            const LinearRow& r = model.constraint(i);
            api().set_row_bnds(prob_, i + 1, bound_type(r.lb, r.ub),
                               std::isfinite(r.lb) ? r.lb : 0.0, std::isfinite(r.ub) ? r.ub : 0.0);
        }
        has_integers_ = false;
        for (int j = 0; j < n; ++j) {
            const Variable& v = model.variable(j);
            if (v.kind == VarKind::binary) {
                api().set_col_kind(prob_, j + 1, GLP_BV);
                has_integers_ = true;
            } else {
                api().set_col_bnds(prob_, j + 1, bound_type(v.lb, v.ub),
                                   std::isfinite(v.lb) ? v.lb : 0.0,
                                   std::isfinite(v.ub) ? v.ub : 0.0);
                if (v.kind == VarKind::integer) {
                    api().set_col_kind(prob_, j + 1, GLP_IV);
                    has_integers_ = true;
                }
            }
        }
        // 1-based sparse triplets with the dummy leading element
        std::vector<int> ia{0}, ja{0};
        std::vector<double> ar{0.0};
        for (int i = 0; i < m; ++i) {
            for (const auto& [j, c] : model.constraint(i).coeffs) {
                if (c == 0.0) continue;
                ia.push_back(i + 1);
                ja.push_back(j + 1);
                ar.push_back(c);
            }
        }
        if (ia.size() > 1)
            api().load_matrix(prob_, static_cast<int>(ia.size()) - 1, ia.data(), ja.data(),
                              ar.data());
        num_vars_ = n;
    }

    GlpkProblem(const GlpkProblem&) = delete;
    GlpkProblem& operator=(const GlpkProblem&) = delete;
    ~GlpkProblem() {
        if (prob_) api().delete_prob(prob_);
    }

    void set_objective(const std::vector<int>& support, const std::vector<double>& dense) {
        for (int j : support) api().set_obj_coef(prob_, j + 1, dense[static_cast<std::size_t>(j)]);
    }

    bool has_integers() const { return has_integers_; }

    /// Runs the appropriate solve and fills `x`. Returns true when proven
    /// optimal. Throws on infeasible/unbounded/timeout.
    bool optimize(const OracleConfig& cfg, std::vector<double>& x) {
        quiet();
        if (has_integers_) return solve_mip(cfg, x);
        return solve_lp_path(cfg, x);
    }

private:
    bool solve_mip(const OracleConfig& cfg, std::vector<double>& x) {
        GlpIocp p;
        std::memset(&p, 0, sizeof p);
        api().init_iocp(&p);
        p.msg_lev = GLP_MSG_OFF;
        p.presolve = GLP_ON;
        p.tm_lim = clamp_ms(cfg.time_limit_seconds);
        p.mip_gap = cfg.mip_gap_tolerance;
        int rc = api().intopt(prob_, &p);
        int st = api().mip_status(prob_);
        if (rc == GLP_ENOPFS || st == GLP_NOFEAS)
            throw InfeasibleForward("forward problem infeasible");
        if (rc == GLP_ENODFS) throw UnboundedForward("forward problem unbounded (LP relaxation)");
        if (rc == GLP_ETMLIM) {
            if (st == GLP_FEAS) {
                extract_mip(x);
                throw SolveTimeout("forward solve hit the time limit", x);
            }
            throw SolveTimeout("forward solve hit the time limit with no incumbent", std::nullopt);
        }
        if (rc != 0 && rc != GLP_EMIPGAP)
            throw BackendError("glp_intopt failed with code " + std::to_string(rc));
        if (st != GLP_OPT && st != GLP_FEAS)
            throw BackendError("glp_intopt returned unusable status " + std::to_string(st));
        extract_mip(x);
        return st == GLP_OPT && rc == 0;
    }

    bool solve_lp_path(const OracleConfig& cfg, std::vector<double>& x) {
        GlpSmcp p;
        std::memset(&p, 0, sizeof p);
        api().init_smcp(&p);
        p.msg_lev = GLP_MSG_OFF;
        p.tm_lim = clamp_ms(cfg.time_limit_seconds);
        int rc = api().simplex(prob_, &p);
        if (rc == GLP_ETMLIM) throw SolveTimeout("LP solve hit the time limit", std::nullopt);
        if (rc != 0) throw BackendError("glp_simplex failed with code " + std::to_string(rc));
        int st = api().get_status(prob_);
        if (st == GLP_NOFEAS) throw InfeasibleForward("forward problem infeasible");
        if (st == GLP_UNBND) throw UnboundedForward("forward problem unbounded");
        if (st != GLP_OPT) throw BackendError("LP solve returned status " + std::to_string(st));
        extract_lp(x);
        return true;
    }

    void extract_mip(std::vector<double>& x) {
        x.resize(static_cast<std::size_t>(num_vars_));
        for (int j = 0; j < num_vars_; ++j)
            x[static_cast<std::size_t>(j)] = api().mip_col_val(prob_, j + 1);
    }
    void extract_lp(std::vector<double>& x) {
        x.resize(static_cast<std::size_t>(num_vars_));
        for (int j = 0; j < num_vars_; ++j)
            x[static_cast<std::size_t>(j)] = api().get_col_prim(prob_, j + 1);
    }

    void* prob_ = nullptr;
    int num_vars_ = 0;
    bool has_integers_ = false;
};

class GlpkOracle final : public ForwardOracle {
public:
    GlpkOracle(const MilpModel& model, SubobjectiveMatrix C, OracleConfig cfg)
        : model_(model), C_(std::move(C)), cfg_(std::move(cfg)), problem_(model_) {
        cfg_.validate();
        C_.validate(/*allow_degenerate=*/true);
        if (C_.num_variables != model_.num_variables())
            throw InvalidArgument("sub-objective matrix dimension does not match the model");
        std::vector<char> in_support(static_cast<std::size_t>(model_.num_variables()), 0);
        for (const auto& row : C_.rows)
            for (const auto& [j, c] : row) {
                in_support[static_cast<std::size_t>(j)] = 1;
                (void)c;
            }
        for (int j = 0; j < model_.num_variables(); ++j)
            if (in_support[static_cast<std::size_t>(j)]) support_.push_back(j);
        dense_.assign(static_cast<std::size_t>(model_.num_variables()), 0.0);
    }

    ForwardSolution solve(const CostVector& alpha) override {
        if (alpha.size() != C_.k())
            throw InvalidArgument("alpha dimension does not match the sub-objective count");
        for (int j : support_) dense_[static_cast<std::size_t>(j)] = 0.0;
        for (int r = 0; r < C_.k(); ++r)
            for (const auto& [j, c] : C_.rows[static_cast<std::size_t>(r)])
                dense_[static_cast<std::size_t>(j)] += alpha[r] * c;
        problem_.set_objective(support_, dense_);

        ForwardSolution sol;
        sol.proven_optimal = problem_.optimize(cfg_, sol.values);
        ++solves_;
        snap_integers(sol.values);
        sol.sub_objective_image = C_.image(sol.values);
        sol.mip_gap = sol.proven_optimal ? 0.0 : cfg_.mip_gap_tolerance;
        return sol;
    }

    const MilpModel& model() const override { return model_; }
    const SubobjectiveMatrix& subobjectives() const override { return C_; }
    long solve_count() const override { return solves_; }

private:
    void snap_integers(std::vector<double>& values) const {
        for (int j = 0; j < model_.num_variables(); ++j) {
            if (model_.variable(j).kind == VarKind::continuous) continue;
            double& v = values[static_cast<std::size_t>(j)];
            double r = std::nearbyint(v);
            if (std::fabs(v - r) > 1e-5)
                throw BackendError("integer variable '" + model_.variable(j).name +
                                   "' came back fractional (" + std::to_string(v) + ")");
            v = r;
        }
    }

    MilpModel model_;
    SubobjectiveMatrix C_;
    OracleConfig cfg_;
    GlpkProblem problem_;
    std::vector<int> support_;
    std::vector<double> dense_;
    long solves_ = 0;
};

}  // namespace

std::unique_ptr<ForwardOracle> make_oracle(const MilpModel& model, SubobjectiveMatrix C,
                                           const OracleConfig& cfg) {
    if (cfg.backend != "glpk")
        throw InvalidArgument("unknown backend '" + cfg.backend + "' (available: glpk)");
    return std::make_unique<GlpkOracle>(model, std::move(C), cfg);
}

ForwardSolution solve_weighted(const MilpModel& model, const SubobjectiveMatrix& C,
                               const CostVector& alpha, const OracleConfig& cfg) {
    GlpkOracle oracle(model, C, cfg);
    return oracle.solve(alpha);
}

LpSolution solve_lp(const LpProblem& lp) {
    quiet();
    MilpModel m;
    for (int j = 0; j < lp.num_vars; ++j)
        m.add_variable("x" + std::to_string(j), VarKind::continuous,
                       lp.lb[static_cast<std::size_t>(j)], lp.ub[static_cast<std::size_t>(j)]);
    for (const auto& row : lp.rows) {
        LinearRow r;
        r.coeffs = row.terms;
        r.lb = row.lb;
        r.ub = row.ub;
        m.add_constraint(std::move(r));
    }
    GlpkProblem prob(m);
    std::vector<int> support;
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.objective[static_cast<std::size_t>(j)] != 0.0) support.push_back(j);
    prob.set_objective(support, lp.objective);

    LpSolution out;
    try {
        OracleConfig cfg;
        prob.optimize(cfg, out.x);
        out.status = LpStatus::optimal;
        out.objective = 0.0;
        for (int j = 0; j < lp.num_vars; ++j)
            out.objective += lp.objective[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
    } catch (const InfeasibleForward&) {
        out.status = LpStatus::infeasible;
    } catch (const UnboundedForward&) {
        out.status = LpStatus::unbounded;
    }
    return out;
}

std::string backend_version() { return std::string("GLPK ") + api().version(); }

}  // namespace gapgrad
