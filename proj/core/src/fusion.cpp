#include "trustfuse/fusion.hpp"

#include <numeric>
#include <string>

#include "trustfuse/error.hpp"

namespace trustfuse {
namespace {

void require_same_classes(const Opinion& a, const Opinion& b) {
  if (a.num_classes() != b.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "cannot fuse opinions over " + std::to_string(a.num_classes()) +
                    " and " + std::to_string(b.num_classes()) + " classes");
  }
}

// Unnormalized fused masses; the last entry is the uncertainty.
std::vector<double> raw_masses(const Opinion& a, const Opinion& b) {
  const std::size_t n = a.num_classes();
  std::vector<double> raw(n + 1);
  for (std::size_t c = 0; c < n; ++c) {
    raw[c] = a.belief(c) * b.belief(c) + a.belief(c) * b.uncertainty() +
             b.belief(c) * a.uncertainty();
  }
  raw[n] = a.uncertainty() * b.uncertainty();
  return raw;
}

}  // namespace

double conflict(const Opinion& a, const Opinion& b) {
  require_same_classes(a, b);
  // Direct double sum over i != j keeps every term nonnegative, which avoids
  // cancellation in the product-of-sums form.
  double k = 0.0;
  for (std::size_t i = 0; i < a.num_classes(); ++i) {
    double others = 0.0;
    for (std::size_t j = 0; j < b.num_classes(); ++j) {
      if (i != j) others += b.belief(j);
    }
    k += a.belief(i) * others;
  }
  return k;
}

Opinion combine_pair(const Opinion& a, const Opinion& b) {
  const double k = conflict(a, b);
  if (1.0 - k < kConflictEpsilon) {
    throw Error(ErrorKind::kTotalConflict,
                "conflict k = " + std::to_string(k) + " leaves no mass to fuse");
  }
  auto raw = raw_masses(a, b);
  const double u = raw.back();
  raw.pop_back();
  // Dividing by the exact mass total equals dividing by 1 - k up to rounding.
  return Opinion::normalized(std::move(raw), u);
}

Opinion combine_many(std::span<const Opinion> opinions) {
  if (opinions.empty()) {
    throw Error(ErrorKind::kInvalidInput, "nothing to fuse");
  }
  Opinion fused = opinions.front();
  for (std::size_t i = 1; i < opinions.size(); ++i) {
    fused = combine_pair(fused, opinions[i]);
  }
  return fused;
}

PairGradient combine_pair_backward(const Opinion& a, const Opinion& b,
                                   std::span<const double> fused_gradient) {
  require_same_classes(a, b);
  const std::size_t n = a.num_classes();
  if (fused_gradient.size() != n + 1) {
    throw Error(ErrorKind::kDimensionMismatch, "fused gradient has wrong size");
  }
  const auto raw = raw_masses(a, b);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);

  // fused_x = raw_x / total, so d/d raw_y = (g_y - sum_x g_x fused_x) / total.
  double projected = 0.0;
  for (std::size_t x = 0; x <= n; ++x) {
    projected += fused_gradient[x] * raw[x] / total;
  }
  std::vector<double> graw(n + 1);
  for (std::size_t y = 0; y <= n; ++y) {
    graw[y] = (fused_gradient[y] - projected) / total;
  }

  PairGradient out{std::vector<double>(n + 1, 0.0),
                   std::vector<double>(n + 1, 0.0)};
  const double ua = a.uncertainty();
  const double ub = b.uncertainty();
  for (std::size_t c = 0; c < n; ++c) {
    out.first[c] = graw[c] * (b.belief(c) + ub);
    out.second[c] = graw[c] * (a.belief(c) + ua);
    out.first[n] += graw[c] * b.belief(c);
    out.second[n] += graw[c] * a.belief(c);
  }
  out.first[n] += graw[n] * ub;
  out.second[n] += graw[n] * ua;
  return out;
}

}  // namespace trustfuse
