#ifndef GAPGRAD_DISTRICTING_HPP
#define GAPGRAD_DISTRICTING_HPP

#include <string>
#include <vector>

#include "gapgrad/model.hpp"
#include "gapgrad/state_graph.hpp"

namespace gapgrad {

enum class Metric {
    population_imbalance,       // rho
    compactness_area,           // sigma_A (area-weighted p-median / state 1-median)
    compactness_perimeter,      // sigma_P (district perimeters / state perimeter * L)
    efficiency_gap,             // phi_EG = |sum w| / total votes
    efficiency_gap_directional  // -sum w / total votes; positive favors Democrats
};

std::string metric_name(Metric m);

/// The districting MILP plus handles into its variables. x_ij = 1 when
/// vertex j belongs to the district centered at i; flow variables keep each
/// district contiguous; z/v/w implement the wasted-votes bookkeeping. The
/// sub-objective matrix has one unit row per selected metric, in order.
struct DistrictingModel {
    MilpModel milp;
    SubobjectiveMatrix C;
    std::vector<Metric> metrics;
    int num_vertices = 0;
    int districts = 0;  // L

    int x_base = 0;
    int rho_var = -1, sigma_a_var = -1, sigma_p_var = -1, phi_var = -1, phi_dir_var = -1;

    int x_index(int i, int j) const { return x_base + i * num_vertices + j; }
};

/// A decoded plan: district label per vertex (labels 0..L-1, each district
/// nonempty and connected) and the center vertex per district.
struct Districting {
    std::vector<int> assignment;
    std::vector<int> centers;

    int num_districts() const { return static_cast<int>(centers.size()); }
};

struct MetricVector {
    double rho = 0.0;
    double sigma_A = 0.0;
    double sigma_P = 0.0;
    double phi_EG = 0.0;
    double phi_EG_directional = 0.0;

    double value_of(Metric m) const;
};

/// Builds the forward districting MILP for the graph with L districts.
/// phi_EG and its directional variant cannot both be selected (they are
/// linearly dependent). Throws InvalidArgument on a disconnected graph or
/// L > |V|.
DistrictingModel build_fop(const PlanarStateGraph& graph, int L, const std::vector<Metric>& metrics);

/// Direct (non-MILP) metric evaluation of a districting plan.
/// sigma_A picks the area-weighted 1-median center within each district;
/// a tied vote margin counts as a Republican win. Throws on a disconnected
/// district.
MetricVector evaluate_metrics(const PlanarStateGraph& graph, const Districting& d);

/// Reads district labels off a feasible solution's x variables.
/// Throws InvalidArgument when any x is fractional beyond 1e-6.
Districting decode_districting(const DistrictingModel& model, const ForwardSolution& sol);

/// Plan files: a JSON object mapping vertex id -> district label.
Districting load_districting(const std::string& path, const PlanarStateGraph& graph);
void save_districting(const Districting& d, const PlanarStateGraph& graph, const std::string& path);

/// The metric image of a plan, in the order of `metrics` (the C-row order of
/// build_fop); this is what serves as the inverse input for graph problems.
std::vector<double> metric_image(const MetricVector& mv, const std::vector<Metric>& metrics);

}  // namespace gapgrad

#endif
