#pragma once

#include <span>
#include <vector>

#include "trustfuse/evidence.hpp"

namespace trustfuse {

// Below this value of 1 - k the pair is treated as irreconcilable.
inline constexpr double kConflictEpsilon = 1e-12;

/// Mass the two opinions put on different singleton classes,
/// k = sum_{i != j} a_i * b_j.
double conflict(const Opinion& a, const Opinion& b);

/// Reduced Dempster combination over singleton classes plus the whole frame.
/// Throws TotalConflict when 1 - k < kConflictEpsilon.
Opinion combine_pair(const Opinion& a, const Opinion& b);

/// Left fold of combine_pair. A single opinion is returned unchanged.
Opinion combine_many(std::span<const Opinion> opinions);

/// Adjoint of combine_pair. Given the gradient of some scalar with respect to
/// the fused masses (beliefs then uncertainty), returns the gradients with
/// respect to the masses of both inputs, each laid out the same way.
struct PairGradient {
  std::vector<double> first;   // size C + 1
  std::vector<double> second;  // size C + 1
};
PairGradient combine_pair_backward(const Opinion& a, const Opinion& b,
                                   std::span<const double> fused_gradient);

}  // namespace trustfuse
