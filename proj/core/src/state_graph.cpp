#include "gapgrad/state_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gapgrad/rng.hpp"

namespace gapgrad {

using nlohmann::json;

double PlanarStateGraph::total_population() const {
    double s = 0.0;
    for (const auto& v : vertices) s += v.population;
    return s;
}

std::vector<std::vector<int>> PlanarStateGraph::adjacency() const {
    std::vector<std::vector<int>> adj(vertices.size());
    for (const auto& e : edges) {
        adj[static_cast<std::size_t>(e.u)].push_back(e.v);
        adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    return adj;
}

bool PlanarStateGraph::connected() const {
    if (vertices.empty()) return false;
    auto adj = adjacency();
    std::vector<char> seen(vertices.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[static_cast<std::size_t>(u)])
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++count;
                q.push(v);
            }
    }
    return count == num_vertices();
}

void PlanarStateGraph::finalize() {
    const std::size_t n = vertices.size();
    if (n == 0) throw InvalidArgument("state graph has no vertices");
    for (const auto& v : vertices)
        if (v.population < 0 || v.dem < 0 || v.rep < 0 || v.area < 0)
            throw InvalidArgument("state graph: negative population/vote/area data");
    std::vector<char> seen_pair(n * n, 0);
    for (auto& e : edges) {
        if (e.u == e.v) throw InvalidArgument("state graph: self-loop edge");
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.u < 0 || e.v >= num_vertices())
            throw InvalidArgument("state graph: edge endpoint out of range");
        if (e.border < 0) throw InvalidArgument("state graph: negative border length");
        char& flag = seen_pair[static_cast<std::size_t>(e.u) * n + static_cast<std::size_t>(e.v)];
        if (flag) throw InvalidArgument("state graph: parallel edges");
        flag = 1;
    }
    if (!connected()) throw InvalidArgument("state graph must be connected");

    dist.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = vertices[i].cx - vertices[j].cx;
            double dy = vertices[i].cy - vertices[j].cy;
            double d = std::sqrt(dx * dx + dy * dy);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    one_median = 0.0;
    if (n > 1) {
        one_median = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += dist[i * n + j] * vertices[j].area;
            one_median = std::min(one_median, s);
        }
    }
}

// ---- JSON ingestion -------------------------------------------------------

namespace {

double require_number(const json& obj, const char* field, const std::string& where) {
    if (!obj.contains(field))
        throw ParseError("state graph " + where + ": missing field '" + field + "'");
    const json& v = obj.at(field);
    if (!v.is_number())
        throw ParseError("state graph " + where + ": field '" + field + "' must be a number");
    return v.get<double>();
}

}  // namespace

PlanarStateGraph parse_state_graph(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError("state graph " + origin + ": " + e.what());
    }
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        throw ParseError("state graph " + origin + ": missing field 'vertices'");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw ParseError("state graph " + origin + ": missing field 'edges'");

    PlanarStateGraph g;
    g.state_perimeter = require_number(doc, "state_perimeter", origin);

    std::map<long long, int> index_of;
    std::size_t vi = 0;
    for (const auto& v : doc["vertices"]) {
        std::string where = origin + " vertices[" + std::to_string(vi++) + "]";
        StateVertex sv;
        if (!v.contains("id") || !v["id"].is_number_integer())
            throw ParseError("state graph " + where + ": missing field 'id'");
        sv.id = v["id"].get<long long>();
        sv.population = require_number(v, "population", where);
        sv.dem = require_number(v, "dem", where);
        sv.rep = require_number(v, "rep", where);
        sv.area = require_number(v, "area", where);
        sv.cx = require_number(v, "cx", where);
        sv.cy = require_number(v, "cy", where);
        sv.min_origin = sv.id;
        if (index_of.count(sv.id))
            throw ParseError("state graph " + where + ": duplicate vertex id");
        index_of[sv.id] = g.num_vertices();
        g.vertices.push_back(sv);
    }
    std::size_t ei = 0;
    for (const auto& e : doc["edges"]) {
        std::string where = origin + " edges[" + std::to_string(ei++) + "]";
        StateEdge se;
        long long uid = static_cast<long long>(require_number(e, "u", where));
        long long vid = static_cast<long long>(require_number(e, "v", where));
        se.border = require_number(e, "border", where);
        auto iu = index_of.find(uid), iv = index_of.find(vid);
        if (iu == index_of.end() || iv == index_of.end())
            throw ParseError("state graph " + where + ": edge references unknown vertex id");
        se.u = iu->second;
        se.v = iv->second;
        g.edges.push_back(se);
    }
    try {
        g.finalize();
    } catch (const InvalidArgument& err) {
        throw ParseError("state graph " + origin + ": " + err.what());
    }
    return g;
}

PlanarStateGraph load_state_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open state graph file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_state_graph(ss.str(), path);
}

void save_state_graph(const PlanarStateGraph& graph, const std::string& path) {
    json doc;
    doc["state_perimeter"] = graph.state_perimeter;
    doc["vertices"] = json::array();
    for (const auto& v : graph.vertices)
        doc["vertices"].push_back({{"id", v.id},
                                   {"population", v.population},
                                   {"dem", v.dem},
                                   {"rep", v.rep},
                                   {"area", v.area},
                                   {"cx", v.cx},
                                   {"cy", v.cy}});
    doc["edges"] = json::array();
    for (const auto& e : graph.edges)
        doc["edges"].push_back({{"u", graph.vertices[static_cast<std::size_t>(e.u)].id},
                                {"v", graph.vertices[static_cast<std::size_t>(e.v)].id},
                                {"border", e.border}});
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << doc.dump(1) << "\n";
}

// ---- synthetic state generation -------------------------------------------

namespace {

struct DegenerateGeometry : Error {
    using Error::Error;
};

struct Vec2 {
    double x, y;
};

struct Triangle {
    int a, b, c;
    double ccx, ccy, r2;  // circumcircle
};

Triangle make_triangle(const std::vector<Vec2>& pts, int a, int b, int c) {
    const Vec2 &A = pts[static_cast<std::size_t>(a)], &B = pts[static_cast<std::size_t>(b)],
               &C = pts[static_cast<std::size_t>(c)];
    double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) + C.x * (A.y - B.y));
    if (std::fabs(d) < 1e-12) throw DegenerateGeometry("collinear points in triangulation");
    double a2 = A.x * A.x + A.y * A.y, b2 = B.x * B.x + B.y * B.y, c2 = C.x * C.x + C.y * C.y;
    double ux = (a2 * (B.y - C.y) + b2 * (C.y - A.y) + c2 * (A.y - B.y)) / d;
    double uy = (a2 * (C.x - B.x) + b2 * (A.x - C.x) + c2 * (B.x - A.x)) / d;
    double dx = A.x - ux, dy = A.y - uy;
    return Triangle{a, b, c, ux, uy, dx * dx + dy * dy};
}

/// Bowyer-Watson incremental Delaunay; returns the set of edges (i < j)
/// between the n input points.
std::vector<std::pair<int, int>> delaunay_edges(const std::vector<Vec2>& input) {
    int n = static_cast<int>(input.size());
    std::vector<Vec2> pts = input;
    pts.push_back({-50.0, -50.0});
    pts.push_back({50.0, -50.0});
    pts.push_back({0.5, 100.0});
    std::vector<Triangle> tris{make_triangle(pts, n, n + 1, n + 2)};

    for (int p = 0; p < n; ++p) {
        const Vec2& P = pts[static_cast<std::size_t>(p)];
        std::vector<Triangle> keep;
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& t : tris) {
            double dx = P.x - t.ccx, dy = P.y - t.ccy;
            if (dx * dx + dy * dy <= t.r2 * (1.0 + 1e-12)) {
                auto bump = [&](int u, int v) {
                    if (u > v) std::swap(u, v);
                    edge_count[{u, v}]++;
                };
                bump(t.a, t.b);
                bump(t.b, t.c);
                bump(t.c, t.a);
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& [edge, count] : edge_count)
            if (count == 1) keep.push_back(make_triangle(pts, edge.first, edge.second, p));
        tris = std::move(keep);
    }

    std::vector<std::pair<int, int>> edges;
    for (const auto& t : tris) {
        auto add = [&](int u, int v) {
            if (u >= n || v >= n) return;
            if (u > v) std::swap(u, v);
            edges.emplace_back(u, v);
        };
        add(t.a, t.b);
        add(t.b, t.c);
        add(t.c, t.a);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

/// Convex polygon with a tag per directed boundary edge (pts[i] -> pts[i+1]);
/// tag -1 marks the unit-square boundary, tag j >= 0 the bisector with cell j.
struct TaggedPolygon {
    std::vector<Vec2> pts;
    std::vector<int> tags;
};

/// Clips by the half-plane a.x <= b; newly created boundary runs get `tag`.
TaggedPolygon clip(const TaggedPolygon& poly, Vec2 a, double b, int tag) {
    TaggedPolygon out;
    const std::size_t n = poly.pts.size();
    if (n == 0) return out;
    auto value = [&](const Vec2& p) { return a.x * p.x + a.y * p.y - b; };
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& P = poly.pts[i];
        const Vec2& Q = poly.pts[(i + 1) % n];
        int t = poly.tags[i];
        double vp = value(P), vq = value(Q);
        bool inP = vp <= 1e-12, inQ = vq <= 1e-12;
        auto intersect = [&]() {
            double s = vp / (vp - vq);
            return Vec2{P.x + s * (Q.x - P.x), P.y + s * (Q.y - P.y)};
        };
        if (inP && inQ) {
            out.pts.push_back(P);
            out.tags.push_back(t);
        } else if (inP && !inQ) {
            out.pts.push_back(P);
            out.tags.push_back(t);
            out.pts.push_back(intersect());
            out.tags.push_back(tag);
        } else if (!inP && inQ) {
            out.pts.push_back(intersect());
            out.tags.push_back(t);
        }
    }
    return out;
}

double polygon_area(const TaggedPolygon& poly) {
    double acc = 0.0;
    const std::size_t n = poly.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& P = poly.pts[i];
        const Vec2& Q = poly.pts[(i + 1) % n];
        acc += P.x * Q.y - Q.x * P.y;
    }
    return std::fabs(acc) / 2.0;
}

double tagged_length(const TaggedPolygon& poly, int tag) {
    double acc = 0.0;
    const std::size_t n = poly.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (poly.tags[i] != tag) continue;
        const Vec2& P = poly.pts[i];
        const Vec2& Q = poly.pts[(i + 1) % n];
        acc += std::hypot(Q.x - P.x, Q.y - P.y);
    }
    return acc;
}

PlanarStateGraph try_generate(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {rng.next_double(), rng.next_double()};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx = pts[static_cast<std::size_t>(i)].x - pts[static_cast<std::size_t>(j)].x;
            double dy = pts[static_cast<std::size_t>(i)].y - pts[static_cast<std::size_t>(j)].y;
            if (dx * dx + dy * dy < 1e-18) throw DegenerateGeometry("duplicate sample points");
        }

    auto edges = delaunay_edges(pts);

    // Voronoi cells clipped to the unit square, with tagged boundary edges
    std::vector<TaggedPolygon> cells(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        TaggedPolygon poly;
        poly.pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        poly.tags = {-1, -1, -1, -1};
        const Vec2& pi = pts[static_cast<std::size_t>(i)];
        for (int j = 0; j < n && !poly.pts.empty(); ++j) {
            if (j == i) continue;
            const Vec2& pj = pts[static_cast<std::size_t>(j)];
            Vec2 a{pj.x - pi.x, pj.y - pi.y};
            double b = (pj.x * pj.x + pj.y * pj.y - pi.x * pi.x - pi.y * pi.y) / 2.0;
            poly = clip(poly, a, b, j);
        }
        if (poly.pts.size() < 3) throw DegenerateGeometry("degenerate Voronoi cell");
        cells[static_cast<std::size_t>(i)] = std::move(poly);
    }

    PlanarStateGraph g;
    g.state_perimeter = 4.0;  // the unit square
    for (int i = 0; i < n; ++i) {
        StateVertex v;
        v.id = i;
        v.min_origin = i;
        v.cx = pts[static_cast<std::size_t>(i)].x;
        v.cy = pts[static_cast<std::size_t>(i)].y;
        v.area = polygon_area(cells[static_cast<std::size_t>(i)]);
        v.dem = static_cast<double>(rng.next_int(10, 100));
        v.rep = static_cast<double>(rng.next_int(10, 100));
        double nonvoting = static_cast<double>(rng.next_int(10, 100));
        v.population = v.dem + v.rep + nonvoting;
        g.vertices.push_back(v);
    }
    for (const auto& [u, v] : edges) {
        StateEdge e;
        e.u = u;
        e.v = v;
        e.border = tagged_length(cells[static_cast<std::size_t>(u)], v);
        g.edges.push_back(e);
    }
    g.finalize();
    return g;
}

}  // namespace

PlanarStateGraph generate_synthetic_state(int n, std::uint64_t seed) {
    if (n < 4) throw InvalidArgument("generate_synthetic_state: need n >= 4");
    for (int attempt = 0; attempt < 32; ++attempt) {
        try {
            return try_generate(n, seed + static_cast<std::uint64_t>(attempt));
        } catch (const DegenerateGeometry&) {
            // measure-zero event under uniform sampling; resample with seed+1
        }
    }
    throw Error("generate_synthetic_state: repeated degenerate samples");
}

// ---- matchings and contraction ---------------------------------------------

namespace {

Matching greedy_matching(const PlanarStateGraph& graph, const std::vector<int>& order,
                         std::uint64_t seed) {
    std::vector<char> used(graph.vertices.size(), 0);
    Matching m;
    m.order_seed = seed;
    for (int ei : order) {
        const StateEdge& e = graph.edges[static_cast<std::size_t>(ei)];
        if (used[static_cast<std::size_t>(e.u)] || used[static_cast<std::size_t>(e.v)]) continue;
        used[static_cast<std::size_t>(e.u)] = used[static_cast<std::size_t>(e.v)] = 1;
        m.edge_indices.push_back(ei);
    }
    return m;
}

}  // namespace

Matching match_random(const PlanarStateGraph& graph, std::uint64_t seed) {
    if (graph.edges.empty()) throw InvalidArgument("match_random: graph has no edges");
    std::vector<int> order(graph.edges.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return greedy_matching(graph, order, seed);
}

Matching match_population(const PlanarStateGraph& graph, std::uint64_t seed) {
    if (graph.edges.empty()) throw InvalidArgument("match_population: graph has no edges");
    double mean_pop = graph.total_population() / graph.num_vertices();
    Rng rng(seed);
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(graph.edges.size());
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const StateEdge& e = graph.edges[i];
        double combined = graph.vertices[static_cast<std::size_t>(e.u)].population +
                          graph.vertices[static_cast<std::size_t>(e.v)].population;
        double mean = combined / (2.0 * mean_pop);
        if (mean < 1e-9) mean = 1e-9;  // zero-population clamp
        keyed.emplace_back(rng.next_exponential(mean), static_cast<int>(i));
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> order;
    order.reserve(keyed.size());
    for (const auto& [key, idx] : keyed) order.push_back(idx);
    return greedy_matching(graph, order, seed);
}

PlanarStateGraph contract(const PlanarStateGraph& graph, const Matching& matching) {
    const int n = graph.num_vertices();
    std::vector<int> comp(static_cast<std::size_t>(n));
    std::iota(comp.begin(), comp.end(), 0);
    for (int ei : matching.edge_indices) {
        const StateEdge& e = graph.edges[static_cast<std::size_t>(ei)];
        if (comp[static_cast<std::size_t>(e.u)] != e.u || comp[static_cast<std::size_t>(e.v)] != e.v)
            throw InvalidArgument("contract: matching is not vertex-disjoint");
        comp[static_cast<std::size_t>(e.v)] = e.u;
    }
    std::vector<int> new_index(static_cast<std::size_t>(n), -1);
    PlanarStateGraph out;
    out.state_perimeter = graph.state_perimeter;
    for (int v = 0; v < n; ++v) {
        if (comp[static_cast<std::size_t>(v)] != v) continue;
        new_index[static_cast<std::size_t>(v)] = out.num_vertices();
        out.vertices.push_back(graph.vertices[static_cast<std::size_t>(v)]);
    }
    for (int v = 0; v < n; ++v) {
        int root = comp[static_cast<std::size_t>(v)];
        if (root == v) continue;
        StateVertex& dst = out.vertices[static_cast<std::size_t>(new_index[static_cast<std::size_t>(root)])];
        const StateVertex& src = graph.vertices[static_cast<std::size_t>(v)];
        double total_area = dst.area + src.area;
        if (total_area > 0) {
            dst.cx = (dst.cx * dst.area + src.cx * src.area) / total_area;
            dst.cy = (dst.cy * dst.area + src.cy * src.area) / total_area;
        } else {
            dst.cx = (dst.cx + src.cx) / 2.0;
            dst.cy = (dst.cy + src.cy) / 2.0;
        }
        dst.population += src.population;
        dst.dem += src.dem;
        dst.rep += src.rep;
        dst.area = total_area;
        dst.min_origin = std::min(dst.min_origin, src.min_origin);
        dst.id = std::min(dst.id, src.id);
    }
    std::map<std::pair<int, int>, double> merged;
    for (const auto& e : graph.edges) {
        int cu = new_index[static_cast<std::size_t>(comp[static_cast<std::size_t>(e.u)])];
        int cv = new_index[static_cast<std::size_t>(comp[static_cast<std::size_t>(e.v)])];
        if (cu == cv) continue;
        if (cu > cv) std::swap(cu, cv);
        merged[{cu, cv}] += e.border;
    }
    for (const auto& [key, border] : merged)
        out.edges.push_back(StateEdge{key.first, key.second, border});
    out.finalize();
    return out;
}

std::vector<PlanarStateGraph> boosted_ensemble(const PlanarStateGraph& graph, int n, double eta,
                                               int rounds, std::uint64_t seed,
                                               BoostSemantics semantics,
                                               std::vector<EdgeWeights>* final_weights) {
    if (n < 1) throw InvalidArgument("boosted_ensemble: need n >= 1");
    if (rounds < 1) throw InvalidArgument("boosted_ensemble: need rounds >= 1");
    if (!(eta >= 1.0)) throw InvalidArgument("boosted_ensemble: need eta >= 1");

    std::vector<EdgeWeights> tiers(static_cast<std::size_t>(rounds));
    std::vector<PlanarStateGraph> out;
    out.reserve(static_cast<std::size_t>(n));

    for (int member = 0; member < n; ++member) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(member)));
        PlanarStateGraph g = graph;
        for (int round = 0; round < rounds; ++round) {
            EdgeWeights& weights = tiers[static_cast<std::size_t>(round)];
            std::vector<std::pair<double, int>> keyed;
            keyed.reserve(g.edges.size());
            for (std::size_t i = 0; i < g.edges.size(); ++i) {
                const StateEdge& e = g.edges[i];
                long long ou = g.vertices[static_cast<std::size_t>(e.u)].min_origin;
                long long ov = g.vertices[static_cast<std::size_t>(e.v)].min_origin;
                double w = weights.get(ou, ov);
                keyed.emplace_back(w * rng.next_exponential(1.0), static_cast<int>(i));
            }
            std::sort(keyed.begin(), keyed.end());
            std::vector<int> order;
            order.reserve(keyed.size());
            for (const auto& [key, idx] : keyed) order.push_back(idx);
            Matching m = greedy_matching(g, order, seed);

            std::vector<char> contracted(g.edges.size(), 0);
            for (int ei : m.edge_indices) contracted[static_cast<std::size_t>(ei)] = 1;
            for (std::size_t i = 0; i < g.edges.size(); ++i) {
                const StateEdge& e = g.edges[i];
                long long ou = g.vertices[static_cast<std::size_t>(e.u)].min_origin;
                long long ov = g.vertices[static_cast<std::size_t>(e.v)].min_origin;
                double w = weights.get(ou, ov);
                bool up;  // does this edge's weight increase?
                if (semantics == BoostSemantics::prose)
                    up = contracted[i];  // contracted edges become less likely next time
                else
                    up = !contracted[i];
                weights.set(ou, ov, up ? w * eta : w / eta);
            }
            g = contract(g, m);
        }
        out.push_back(std::move(g));
    }
    if (final_weights) *final_weights = tiers;
    return out;
}

}  // namespace gapgrad
