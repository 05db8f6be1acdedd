#include "gapgrad/instance.hpp"

#include "gapgrad/rng.hpp"

namespace gapgrad {

SubobjectiveMatrix derive_subobjectives(const MilpModel& model, int k, std::uint64_t seed) {
    if (k < 1) throw InvalidArgument("derive_subobjectives: k must be >= 1");
    std::vector<int> pool = model.continuous_variable_indices();
    if (static_cast<int>(pool.size()) < k)
        throw InvalidArgument("derive_subobjectives: model has " + std::to_string(pool.size()) +
                              " continuous variables, need " + std::to_string(k));
    Rng rng(seed);
    // partial Fisher-Yates: the first k entries are a without-replacement sample
    for (int i = 0; i < k; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        static_cast<std::size_t>(rng.next_below(pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    SubobjectiveMatrix C;
    C.num_variables = model.num_variables();
    C.rows.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        C.rows.push_back({{pool[static_cast<std::size_t>(i)], 1.0}});
    return C;
}

CostVector sample_simplex(int k, std::uint64_t seed) {
    if (k < 1) throw InvalidArgument("sample_simplex: k must be >= 1");
    Rng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double& x : w) {
        x = rng.next_exponential(1.0);
        sum += x;
    }
    for (double& x : w) x /= sum;
    return CostVector(std::move(w));
}

ForwardSolution generate_inverse_input(const MilpModel& model, const SubobjectiveMatrix& C,
                                       const CostVector& alpha, const OracleConfig& cfg) {
    return solve_weighted(model, C, alpha, cfg);
}

}  // namespace gapgrad
