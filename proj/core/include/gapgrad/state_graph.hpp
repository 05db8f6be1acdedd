#ifndef GAPGRAD_STATE_GRAPH_HPP
#define GAPGRAD_STATE_GRAPH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gapgrad/errors.hpp"

namespace gapgrad {

struct StateVertex {
    long long id = 0;
    double population = 0.0;
    double dem = 0.0;  // party A / Democratic voters
    double rep = 0.0;  // party B / Republican voters
    double area = 0.0;
    double cx = 0.0, cy = 0.0;      // landmass centroid
    long long min_origin = 0;  // smallest original vertex id merged into this one
};

struct StateEdge {
    int u = 0, v = 0;        // indices into vertices, u < v
    double border = 0.0;     // shared border length
};

/// A planar state graph: census units with population/vote/area data,
/// adjacency edges with shared-border lengths, plus the derived pairwise
/// centroid distances and the state 1-median constant M.
struct PlanarStateGraph {
    std::vector<StateVertex> vertices;
    std::vector<StateEdge> edges;
    double state_perimeter = 0.0;  // M_p

    // derived by finalize()
    std::vector<double> dist;  // |V| x |V| row-major
    double one_median = 0.0;   // M = min_i sum_j d_ij a_j

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    double distance(int i, int j) const {
        return dist[static_cast<std::size_t>(i) * vertices.size() + static_cast<std::size_t>(j)];
    }
    double total_population() const;

    /// Recomputes distances and M from centroids, and checks invariants
    /// (connected, simple, nonnegative data). Throws InvalidArgument.
    void finalize();

    std::vector<std::vector<int>> adjacency() const;
    bool connected() const;
};

/// Reads the state-graph JSON schema:
///   { "vertices": [{"id","population","dem","rep","area","cx","cy"}],
///     "edges": [{"u","v","border"}], "state_perimeter": real }
/// Edge u/v reference vertex ids. Throws ParseError naming the missing or
/// malformed field; disconnected graphs are rejected.
PlanarStateGraph load_state_graph(const std::string& path);
PlanarStateGraph parse_state_graph(const std::string& json_text, const std::string& origin);
void save_state_graph(const PlanarStateGraph& graph, const std::string& path);

/// Synthetic state: n points uniform on the unit square, Delaunay adjacency,
/// Voronoi-cell areas clipped to the square, shared Voronoi boundaries as
/// border lengths, and party A / party B / non-voting counts uniform in
/// [10, 100]. Degenerate point sets are resampled with seed+1.
PlanarStateGraph generate_synthetic_state(int n, std::uint64_t seed);

/// A maximal matching: vertex-disjoint edges, no addable edge remains.
struct Matching {
    std::vector<int> edge_indices;
    std::uint64_t order_seed = 0;
};

/// Maximal matching from a uniformly random edge ordering.
Matching match_random(const PlanarStateGraph& graph, std::uint64_t seed);

/// Maximal matching ordered by per-edge exponential draws whose mean is the
/// combined endpoint population over twice the mean vertex population, so
/// light edges tend to contract first.
Matching match_population(const PlanarStateGraph& graph, std::uint64_t seed);

/// Contracts all matched edges: merged vertices sum population/votes/area,
/// centroids are area-weighted means, parallel edges merge with borders
/// summed, distances are recomputed from the new centroids.
PlanarStateGraph contract(const PlanarStateGraph& graph, const Matching& matching);

/// Per-edge positive weights for boosted coarsening, keyed by the pair of
/// min-origin ids of the endpoints so they survive contraction and can be
/// shared across ensemble members.
struct EdgeWeights {
    std::map<std::pair<long long, long long>, double> w;
    double get(long long a, long long b) const {
        auto it = w.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
        return it == w.end() ? 1.0 : it->second;
    }
    void set(long long a, long long b, double value) {
        w[a < b ? std::make_pair(a, b) : std::make_pair(b, a)] = value;
    }
};

/// The paper's prose reweights contracted edges up (diversification); its
/// pseudocode does the opposite. Both are provided; prose is the default.
enum class BoostSemantics { prose, pseudocode };

/// Sequentially-boosted ensemble of coarsened graphs: each member applies
/// `rounds` weighted maximal matchings, multiplying weights by eta (or 1/eta)
/// per the chosen semantics; weight maps are tiered per round. When
/// `final_weights` is given, the per-round weight maps are copied out.
std::vector<PlanarStateGraph> boosted_ensemble(const PlanarStateGraph& graph, int n, double eta,
                                               int rounds, std::uint64_t seed,
                                               BoostSemantics semantics = BoostSemantics::prose,
                                               std::vector<EdgeWeights>* final_weights = nullptr);

}  // namespace gapgrad

#endif
