#include "gapgrad/districting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gapgrad {

using nlohmann::json;

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::population_imbalance: return "population_imbalance";
        case Metric::compactness_area: return "compactness_area";
        case Metric::compactness_perimeter: return "compactness_perimeter";
        case Metric::efficiency_gap: return "efficiency_gap";
        case Metric::efficiency_gap_directional: return "efficiency_gap_directional";
    }
    return "?";
}

double MetricVector::value_of(Metric m) const {
    switch (m) {
        case Metric::population_imbalance: return rho;
        case Metric::compactness_area: return sigma_A;
        case Metric::compactness_perimeter: return sigma_P;
        case Metric::efficiency_gap: return phi_EG;
        case Metric::efficiency_gap_directional: return phi_EG_directional;
    }
    return 0.0;
}

DistrictingModel build_fop(const PlanarStateGraph& graph, int L,
                           const std::vector<Metric>& metrics) {
    const int n = graph.num_vertices();
    if (L < 1) throw InvalidArgument("build_fop: need L >= 1");
    if (L > n) throw InvalidArgument("build_fop: more districts than vertices");
    if (!graph.connected()) throw InvalidArgument("build_fop: graph must be connected");
    if (metrics.empty()) throw InvalidArgument("build_fop: no metrics selected");
    {
        std::set<Metric> uniq(metrics.begin(), metrics.end());
        if (uniq.size() != metrics.size()) throw InvalidArgument("build_fop: duplicate metric");
        if (uniq.count(Metric::efficiency_gap) && uniq.count(Metric::efficiency_gap_directional))
            throw InvalidArgument(
                "build_fop: efficiency_gap and its directional variant are linearly dependent and "
                "cannot both be sub-objectives");
    }
    bool want_sigma_p =
        std::find(metrics.begin(), metrics.end(), Metric::compactness_perimeter) != metrics.end();
    bool want_phi_dir = std::find(metrics.begin(), metrics.end(),
                                  Metric::efficiency_gap_directional) != metrics.end();

    const double total_pop = graph.total_population();
    const double pop_target = total_pop / L;  // P-bar
    double total_votes = 0.0, margin_reach = 1.0;
    for (const auto& v : graph.vertices) {
        total_votes += v.dem + v.rep;
        margin_reach += std::fabs(v.dem - v.rep);
    }
    if (pop_target <= 0) throw InvalidArgument("build_fop: zero total population");
    if (total_votes <= 0) throw InvalidArgument("build_fop: zero total votes");

    DistrictingModel dm;
    dm.metrics = metrics;
    dm.num_vertices = n;
    dm.districts = L;
    MilpModel& m = dm.milp;
    m.name = "districting";

    auto vname = [](const char* base, int i, int j = -1, int v = -1) {
        std::string s = base;
        s += "_" + std::to_string(i);
        if (j >= 0) s += "_" + std::to_string(j);
        if (v >= 0) s += "_" + std::to_string(v);
        return s;
    };

    dm.x_base = m.num_variables();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add_variable(vname("x", i, j), VarKind::binary, 0.0, 1.0);

    // directed arcs between adjacent vertices, shared by all flow networks
    std::vector<std::pair<int, int>> arcs;
    for (const auto& e : graph.edges) {
        arcs.emplace_back(e.u, e.v);
        arcs.emplace_back(e.v, e.u);
    }
    const int narcs = static_cast<int>(arcs.size());
    std::vector<std::vector<int>> arcs_out(static_cast<std::size_t>(n)), arcs_in(static_cast<std::size_t>(n));
    for (int a = 0; a < narcs; ++a) {
        arcs_out[static_cast<std::size_t>(arcs[static_cast<std::size_t>(a)].first)].push_back(a);
        arcs_in[static_cast<std::size_t>(arcs[static_cast<std::size_t>(a)].second)].push_back(a);
    }
    const int f_base = m.num_variables();
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < narcs; ++a)
            m.add_variable(vname("f", i, arcs[static_cast<std::size_t>(a)].first,
                                 arcs[static_cast<std::size_t>(a)].second),
                           VarKind::continuous, 0.0, n);
    auto f_index = [&](int i, int a) { return f_base + i * narcs + a; };

    const int z_base = m.num_variables();
    for (int i = 0; i < n; ++i) m.add_variable(vname("zD", i), VarKind::binary, 0.0, 1.0);
    // v^D is an AND of two binaries; the three linearization rows pin it, so
    // it can stay continuous
    const int vd_base = m.num_variables();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add_variable(vname("vD", i, j), VarKind::continuous, 0.0, 1.0);
    const int w_base = m.num_variables();
    for (int i = 0; i < n; ++i)
        m.add_variable(vname("w", i), VarKind::continuous, -kInfinity, kInfinity);

    dm.rho_var = m.add_variable("rho", VarKind::continuous, 0.0, std::max(1.0, static_cast<double>(L)));
    double sigma_a_reach = 1.0;
    for (int j = 0; j < n; ++j) {
        double dmax = 0.0;
        for (int i = 0; i < n; ++i) dmax = std::max(dmax, graph.distance(i, j));
        sigma_a_reach += dmax * graph.vertices[static_cast<std::size_t>(j)].area;
    }
    if (graph.one_median > 0) sigma_a_reach /= graph.one_median;
    dm.sigma_a_var = m.add_variable("sigma_A", VarKind::continuous, 0.0, sigma_a_reach);
    dm.phi_var = m.add_variable("phi_EG", VarKind::continuous, 0.0, 1.0);
    if (want_phi_dir)
        dm.phi_dir_var = m.add_variable("phi_EG_dir", VarKind::continuous, -1.0, 1.0);

    auto row = [&](std::string name, std::vector<std::pair<int, double>> coeffs, double lb, double ub) {
        LinearRow r;
        r.name = std::move(name);
        r.coeffs = std::move(coeffs);
        r.lb = lb;
        r.ub = ub;
        m.add_constraint(std::move(r));
    };

    // (2b) exactly L centers
    {
        std::vector<std::pair<int, double>> c;
        for (int i = 0; i < n; ++i) c.emplace_back(dm.x_index(i, i), 1.0);
        row("centers", std::move(c), L, L);
    }
    // (2c) every vertex assigned once
    for (int j = 0; j < n; ++j) {
        std::vector<std::pair<int, double>> c;
        for (int i = 0; i < n; ++i) c.emplace_back(dm.x_index(i, j), 1.0);
        row(vname("assign", j), std::move(c), 1.0, 1.0);
    }
    // (2d) only centers hold vertices
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            row(vname("open", i, j), {{dm.x_index(i, j), 1.0}, {dm.x_index(i, i), -1.0}}, -kInfinity,
                0.0);
        }
    // (2e) every assigned vertex consumes one unit of center-i flow
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            std::vector<std::pair<int, double>> c{{dm.x_index(i, j), 1.0}};
            for (int a : arcs_out[static_cast<std::size_t>(j)]) c.emplace_back(f_index(i, a), 1.0);
            for (int a : arcs_in[static_cast<std::size_t>(j)]) c.emplace_back(f_index(i, a), -1.0);
            row(vname("flow", i, j), std::move(c), 0.0, 0.0);
        }
    // (2f) the center supplies one unit per assigned vertex
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> c{{dm.x_index(i, i), 1.0}};
        for (int a : arcs_out[static_cast<std::size_t>(i)]) c.emplace_back(f_index(i, a), 1.0);
        for (int a : arcs_in[static_cast<std::size_t>(i)]) c.emplace_back(f_index(i, a), -1.0);
        for (int v = 0; v < n; ++v) {
            bool merged = false;
            for (auto& [idx, coef] : c)
                if (idx == dm.x_index(i, v)) {
                    coef -= 1.0;
                    merged = true;
                    break;
                }
            if (!merged) c.emplace_back(dm.x_index(i, v), -1.0);
        }
        row(vname("supply", i), std::move(c), 0.0, 0.0);
    }
    // (2g) no flow through unassigned vertices
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<std::pair<int, double>> c{{dm.x_index(i, j), static_cast<double>(n)}};
            for (int a : arcs_in[static_cast<std::size_t>(j)]) c.emplace_back(f_index(i, a), -1.0);
            row(vname("cap", i, j), std::move(c), 0.0, kInfinity);
        }
    // (2h)/(2i) rho bounds district populations around the target
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> lo{{dm.x_index(i, i), pop_target}, {dm.rho_var, -pop_target}};
        std::vector<std::pair<int, double>> hi{{dm.x_index(i, i), -pop_target}, {dm.rho_var, -pop_target}};
        for (int j = 0; j < n; ++j) {
            double p = graph.vertices[static_cast<std::size_t>(j)].population;
            if (p == 0.0) continue;
            bool self = (j == i);
            if (self) {
                lo[0].second -= p;
                hi[0].second += p;
            } else {
                lo.emplace_back(dm.x_index(i, j), -p);
                hi.emplace_back(dm.x_index(i, j), p);
            }
        }
        row(vname("pop_lo", i), std::move(lo), -kInfinity, 0.0);
        row(vname("pop_hi", i), std::move(hi), -kInfinity, 0.0);
    }
    // (2j) sigma_A defining row
    {
        std::vector<std::pair<int, double>> c{{dm.sigma_a_var, -(graph.one_median > 0 ? graph.one_median : 1.0)}};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double coef = graph.distance(i, j) * graph.vertices[static_cast<std::size_t>(j)].area;
                if (coef != 0.0) c.emplace_back(dm.x_index(i, j), coef);
            }
        row("p_median", std::move(c), 0.0, 0.0);
    }
    // (2k) z_i = 1 iff the district's Democratic margin is positive
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> up{{z_base + i, -margin_reach}};
        std::vector<std::pair<int, double>> dn{{z_base + i, -(margin_reach + 0.5)}};
        for (int j = 0; j < n; ++j) {
            double d = graph.vertices[static_cast<std::size_t>(j)].dem -
                       graph.vertices[static_cast<std::size_t>(j)].rep;
            if (d == 0.0) continue;
            up.emplace_back(dm.x_index(i, j), d);
            dn.emplace_back(dm.x_index(i, j), d);
        }
        row(vname("dem_win_up", i), std::move(up), -kInfinity, 0.0);
        row(vname("dem_win_dn", i), std::move(dn), -margin_reach, kInfinity);
    }
    // (2l)-(2n) v^D = x AND z
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int vd = vd_base + i * n + j;
            row(vname("vd_x", i, j), {{vd, 1.0}, {dm.x_index(i, j), -1.0}}, -kInfinity, 0.0);
            row(vname("vd_z", i, j), {{vd, 1.0}, {z_base + i, -1.0}}, -kInfinity, 0.0);
            row(vname("vd_and", i, j), {{vd, 1.0}, {dm.x_index(i, j), -1.0}, {z_base + i, -1.0}},
                -1.0, kInfinity);
        }
    // (2n) wasted-vote balance per potential district
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> c{{w_base + i, -1.0}};
        for (int j = 0; j < n; ++j) {
            const auto& vj = graph.vertices[static_cast<std::size_t>(j)];
            double cx = (3.0 * vj.dem - vj.rep) / 2.0;
            double cv = vj.dem + vj.rep;
            if (cx != 0.0) c.emplace_back(dm.x_index(i, j), cx);
            if (cv != 0.0) c.emplace_back(vd_base + i * n + j, -cv);
        }
        row(vname("wasted", i), std::move(c), 0.0, 0.0);
    }
    // (2o)/(2p) phi_EG >= |sum w| / total votes
    {
        std::vector<std::pair<int, double>> up{{dm.phi_var, -total_votes}};
        std::vector<std::pair<int, double>> dn{{dm.phi_var, -total_votes}};
        for (int i = 0; i < n; ++i) {
            up.emplace_back(w_base + i, 1.0);
            dn.emplace_back(w_base + i, -1.0);
        }
        row("eg_pos", std::move(up), -kInfinity, 0.0);
        row("eg_neg", std::move(dn), -kInfinity, 0.0);
    }
    if (want_phi_dir) {
        // positive favors Democrats: phi_dir = -sum w / total votes
        std::vector<std::pair<int, double>> c{{dm.phi_dir_var, total_votes}};
        for (int i = 0; i < n; ++i) c.emplace_back(w_base + i, 1.0);
        row("eg_directional", std::move(c), 0.0, 0.0);
    }
    // (2t)-(2v) perimeter compactness
    if (want_sigma_p) {
        double border_reach = 0.0;
        for (const auto& e : graph.edges) border_reach += 2.0 * e.border;
        double sigma_p_ub = (border_reach + graph.state_perimeter) / (L * graph.state_perimeter) + 1.0;
        dm.sigma_p_var = m.add_variable("sigma_P", VarKind::continuous, 0.0, sigma_p_ub);

        std::vector<std::pair<int, double>> defn{{dm.sigma_p_var, -L * graph.state_perimeter}};
        for (const auto& e : graph.edges) {
            if (e.border <= 0.0) continue;
            for (auto [i, j] : {std::make_pair(e.u, e.v), std::make_pair(e.v, e.u)}) {
                int q = m.add_variable(vname("q", i, j), VarKind::binary, 0.0, 1.0);
                for (int kc = 0; kc < n; ++kc)
                    row(vname("cut", i, j, kc),
                        {{dm.x_index(kc, i), 1.0}, {dm.x_index(kc, j), -1.0}, {q, -1.0}}, -kInfinity,
                        0.0);
                defn.emplace_back(q, e.border);
            }
        }
        row("perimeter", std::move(defn), -graph.state_perimeter, -graph.state_perimeter);
    }

    dm.C.num_variables = m.num_variables();
    for (Metric metric : metrics) {
        int var = -1;
        switch (metric) {
            case Metric::population_imbalance: var = dm.rho_var; break;
            case Metric::compactness_area: var = dm.sigma_a_var; break;
            case Metric::compactness_perimeter: var = dm.sigma_p_var; break;
            case Metric::efficiency_gap: var = dm.phi_var; break;
            case Metric::efficiency_gap_directional: var = dm.phi_dir_var; break;
        }
        dm.C.rows.push_back({{var, 1.0}});
    }
    m.validate();
    return dm;
}

namespace {

void check_connected_districts(const PlanarStateGraph& graph, const Districting& d) {
    const int n = graph.num_vertices();
    const int L = d.num_districts();
    if (static_cast<int>(d.assignment.size()) != n)
        throw InvalidArgument("districting: assignment size does not match the graph");
    std::vector<std::vector<int>> members(static_cast<std::size_t>(L));
    for (int v = 0; v < n; ++v) {
        int lab = d.assignment[static_cast<std::size_t>(v)];
        if (lab < 0 || lab >= L) throw InvalidArgument("districting: label out of range");
        members[static_cast<std::size_t>(lab)].push_back(v);
    }
    auto adj = graph.adjacency();
    for (int lab = 0; lab < L; ++lab) {
        const auto& mem = members[static_cast<std::size_t>(lab)];
        if (mem.empty()) throw InvalidArgument("districting: empty district " + std::to_string(lab));
        std::vector<char> in_d(static_cast<std::size_t>(n), 0), seen(static_cast<std::size_t>(n), 0);
        for (int v : mem) in_d[static_cast<std::size_t>(v)] = 1;
        std::queue<int> q;
        q.push(mem[0]);
        seen[static_cast<std::size_t>(mem[0])] = 1;
        int cnt = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (in_d[static_cast<std::size_t>(v)] && !seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    ++cnt;
                    q.push(v);
                }
        }
        if (cnt != static_cast<int>(mem.size()))
            throw InvalidArgument("districting: district " + std::to_string(lab) + " is disconnected");
    }
}

}  // namespace

MetricVector evaluate_metrics(const PlanarStateGraph& graph, const Districting& d) {
    check_connected_districts(graph, d);
    const int n = graph.num_vertices();
    const int L = d.num_districts();
    std::vector<std::vector<int>> members(static_cast<std::size_t>(L));
    for (int v = 0; v < n; ++v) members[static_cast<std::size_t>(d.assignment[static_cast<std::size_t>(v)])].push_back(v);

    MetricVector out;
    const double total_pop = graph.total_population();
    const double target = total_pop / L;

    double sigma_a_total = 0.0, wasted_sum = 0.0, total_votes = 0.0;
    for (const auto& v : graph.vertices) total_votes += v.dem + v.rep;

    for (int lab = 0; lab < L; ++lab) {
        const auto& mem = members[static_cast<std::size_t>(lab)];
        double pop = 0.0, dem = 0.0, rep = 0.0;
        for (int v : mem) {
            const auto& sv = graph.vertices[static_cast<std::size_t>(v)];
            pop += sv.population;
            dem += sv.dem;
            rep += sv.rep;
        }
        out.rho = std::max(out.rho, std::fabs(pop - target) / target);

        // area-weighted 1-median center within the district
        double best = std::numeric_limits<double>::infinity();
        for (int c : mem) {
            double s = 0.0;
            for (int v : mem)
                s += graph.distance(c, v) * graph.vertices[static_cast<std::size_t>(v)].area;
            best = std::min(best, s);
        }
        sigma_a_total += best;

        bool dem_wins = (dem - rep) > 0.0;  // ties go Republican
        double w = (3.0 * dem - rep) / 2.0 - (dem_wins ? (dem + rep) : 0.0);
        wasted_sum += w;
    }
    out.sigma_A = graph.one_median > 0 ? sigma_a_total / graph.one_median : 0.0;

    double cut = 0.0;
    for (const auto& e : graph.edges)
        if (d.assignment[static_cast<std::size_t>(e.u)] != d.assignment[static_cast<std::size_t>(e.v)])
            cut += 2.0 * e.border;  // both ordered pairs
    out.sigma_P = (cut + graph.state_perimeter) / (L * graph.state_perimeter);

    out.phi_EG_directional = total_votes > 0 ? -wasted_sum / total_votes : 0.0;
    out.phi_EG = std::fabs(out.phi_EG_directional);
    return out;
}

Districting decode_districting(const DistrictingModel& model, const ForwardSolution& sol) {
    const int n = model.num_vertices;
    auto x = [&](int i, int j) { return sol.values[static_cast<std::size_t>(model.x_index(i, j))]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = x(i, j);
            if (std::fabs(v - std::nearbyint(v)) > 1e-6)
                throw InvalidArgument("decode_districting: fractional assignment variable");
        }
    Districting d;
    for (int i = 0; i < n; ++i)
        if (x(i, i) > 0.5) d.centers.push_back(i);
    if (static_cast<int>(d.centers.size()) != model.districts)
        throw InvalidArgument("decode_districting: wrong number of district centers");
    d.assignment.assign(static_cast<std::size_t>(n), -1);
    for (int j = 0; j < n; ++j) {
        for (std::size_t lab = 0; lab < d.centers.size(); ++lab)
            if (x(d.centers[lab], j) > 0.5) {
                d.assignment[static_cast<std::size_t>(j)] = static_cast<int>(lab);
                break;
            }
        if (d.assignment[static_cast<std::size_t>(j)] < 0)
            throw InvalidArgument("decode_districting: unassigned vertex");
    }
    return d;
}

Districting load_districting(const std::string& path, const PlanarStateGraph& graph) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open districting plan '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("districting plan ") + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("districting plan " + path + ": expected a JSON object");

    std::map<long long, int> index_of;
    for (int v = 0; v < graph.num_vertices(); ++v)
        index_of[graph.vertices[static_cast<std::size_t>(v)].id] = v;

    std::vector<int> raw(graph.vertices.size(), -1);
    for (const auto& [key, value] : doc.items()) {
        long long id;
        try {
            id = std::stoll(key);
        } catch (const std::logic_error&) {
            throw ParseError("districting plan " + path + ": non-integer vertex id '" + key + "'");
        }
        auto it = index_of.find(id);
        if (it == index_of.end())
            throw ParseError("districting plan " + path + ": unknown vertex id " + key);
        if (!value.is_number_integer())
            throw ParseError("districting plan " + path + ": label for vertex " + key +
                             " must be an integer");
        raw[static_cast<std::size_t>(it->second)] = value.get<int>();
    }
    for (std::size_t v = 0; v < raw.size(); ++v)
        if (raw[v] < 0)
            throw ParseError("districting plan " + path + ": no label for vertex id " +
                             std::to_string(graph.vertices[v].id));

    // normalize labels to 0..L-1 in order of first appearance by sorted label
    std::set<int> labels(raw.begin(), raw.end());
    std::map<int, int> remap;
    int next = 0;
    for (int lab : labels) remap[lab] = next++;
    Districting d;
    d.assignment.resize(raw.size());
    for (std::size_t v = 0; v < raw.size(); ++v) d.assignment[v] = remap[raw[v]];

    // centers: area-weighted 1-median within each district (the x_ii choice)
    std::vector<std::vector<int>> members(static_cast<std::size_t>(next));
    for (int v = 0; v < graph.num_vertices(); ++v)
        members[static_cast<std::size_t>(d.assignment[static_cast<std::size_t>(v)])].push_back(v);
    for (const auto& mem : members) {
        int best_c = mem[0];
        double best = std::numeric_limits<double>::infinity();
        for (int c : mem) {
            double s = 0.0;
            for (int v : mem) s += graph.distance(c, v) * graph.vertices[static_cast<std::size_t>(v)].area;
            if (s < best) {
                best = s;
                best_c = c;
            }
        }
        d.centers.push_back(best_c);
    }
    return d;
}

void save_districting(const Districting& d, const PlanarStateGraph& graph, const std::string& path) {
    json doc = json::object();
    for (std::size_t v = 0; v < d.assignment.size(); ++v)
        doc[std::to_string(graph.vertices[v].id)] = d.assignment[v];
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << doc.dump(1) << "\n";
}

std::vector<double> metric_image(const MetricVector& mv, const std::vector<Metric>& metrics) {
    std::vector<double> img;
    img.reserve(metrics.size());
    for (Metric m : metrics) img.push_back(mv.value_of(m));
    return img;
}

}  // namespace gapgrad
