#ifndef GAPGRAD_INSTANCE_HPP
#define GAPGRAD_INSTANCE_HPP

#include <cstdint>

#include "gapgrad/cost_vector.hpp"
#include "gapgrad/model.hpp"
#include "gapgrad/oracle.hpp"

namespace gapgrad {

/// Samples k distinct continuous variables of the model (without
/// replacement, deterministic in the seed) and returns the matrix whose
/// rows put coefficient 1 on each sampled variable.
SubobjectiveMatrix derive_subobjectives(const MilpModel& model, int k, std::uint64_t seed);

/// Uniform sample from the unit simplex in k dimensions (k independent
/// standard-exponential draws, normalized).
CostVector sample_simplex(int k, std::uint64_t seed);

/// Solves the forward problem at alpha and records the result as the
/// observed solution y-hat of a test instance.
ForwardSolution generate_inverse_input(const MilpModel& model, const SubobjectiveMatrix& C,
                                       const CostVector& alpha, const OracleConfig& cfg = {});

}  // namespace gapgrad

#endif
