#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace qagen::textmetrics {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TransportPlan {
  std::map<std::pair<std::size_t, std::size_t>, double> flows;  // positive entries only
  double cost = 0.0;
};

// Exact minimum-cost transport between `supply` and `demand` (non-negative,
// equal totals up to 1e-9 relative; demand is rescaled onto the supply
// total) under `cost`. Transportation simplex on a spanning-tree basis,
// north-west corner start, Bland's rule for entering and leaving cells.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand, const Matrix& cost);

}  // namespace qagen::textmetrics
