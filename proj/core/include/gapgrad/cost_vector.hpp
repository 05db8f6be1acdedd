#ifndef GAPGRAD_COST_VECTOR_HPP
#define GAPGRAD_COST_VECTOR_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace gapgrad {

/// A point on (or near) the unit simplex: the objective weighting alpha.
struct CostVector {
    std::vector<double> weights;

    CostVector() = default;
    explicit CostVector(std::vector<double> w) : weights(std::move(w)) {}

    static CostVector uniform(int k) {
        return CostVector(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
    }

    int size() const { return static_cast<int>(weights.size()); }
    double operator[](int i) const { return weights[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return weights[static_cast<std::size_t>(i)]; }

    bool on_simplex(double tol = 1e-9) const {
        double sum = 0.0;
        for (double w : weights) {
            if (w < -tol || std::isnan(w)) return false;
            sum += w;
        }
        return std::fabs(sum - 1.0) <= tol;
    }

    double distance_to(const CostVector& other) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            double d = weights[i] - other.weights[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
};

inline double dot(const CostVector& alpha, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += alpha.weights[i] * v[i];
    return acc;
}

}  // namespace gapgrad

#endif
