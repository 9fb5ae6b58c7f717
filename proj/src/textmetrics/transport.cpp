#include "qagen/textmetrics/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "qagen/error.hpp"

namespace qagen::textmetrics {

namespace {

struct Cell {
  std::size_t i;
  std::size_t j;
  double flow;
};

// Spanning-tree basis over m row nodes [0, m) and n column nodes [m, m+n).
class Basis {
 public:
  Basis(std::size_t m, std::size_t n) : m_(m), n_(n) {}

  std::vector<Cell> cells;

  // Path of basis-cell indices from row node `row` to column node `col`.
  std::vector<std::size_t> tree_path(std::size_t row, std::size_t col) const {
    const std::size_t nodes = m_ + n_;
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      adj[cells[k].i].push_back(k);
      adj[m_ + cells[k].j].push_back(k);
    }
    std::vector<std::optional<std::size_t>> via(nodes);
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> stack{row};
    seen[row] = true;
    const std::size_t target = m_ + col;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      if (u == target) break;
      for (std::size_t k : adj[u]) {
        const std::size_t v = u < m_ ? m_ + cells[k].j : cells[k].i;
        if (seen[v]) continue;
        seen[v] = true;
        via[v] = k;
        stack.push_back(v);
      }
    }
    if (!seen[target]) throw Error("transport basis is not a spanning tree");
    std::vector<std::size_t> path;
    for (std::size_t u = target; u != row;) {
      const std::size_t k = *via[u];
      path.push_back(k);
      u = u < m_ ? m_ + cells[k].j : cells[k].i;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void potentials(const Matrix& cost, std::vector<double>& u, std::vector<double>& v) const {
    u.assign(m_, 0.0);
    v.assign(n_, 0.0);
    std::vector<bool> have_u(m_, false), have_v(n_, false);
    have_u[0] = true;
    std::size_t solved = 1;
    while (solved < m_ + n_) {
      bool progress = false;
      for (const auto& c : cells) {
        if (have_u[c.i] && !have_v[c.j]) {
          v[c.j] = cost(c.i, c.j) - u[c.i];
          have_v[c.j] = true;
        } else if (!have_u[c.i] && have_v[c.j]) {
          u[c.i] = cost(c.i, c.j) - v[c.j];
          have_u[c.i] = true;
        } else {
          continue;
        }
        ++solved;
        progress = true;
      }
      if (!progress) throw Error("transport basis is disconnected");
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
};

void check_masses(std::span<const double> masses, const char* what) {
  if (masses.empty()) throw ArgumentError(std::string(what) + " must be non-empty");
  for (double x : masses)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError(std::string(what) + " masses must be finite and >= 0");
}

}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand, const Matrix& cost) {
  check_masses(supply, "supply");
  check_masses(demand, "demand");
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (cost.rows != m || cost.cols != n) throw ArgumentError("cost matrix shape does not match supply x demand");
  for (double c : cost.data)
    if (!std::isfinite(c)) throw ArgumentError("cost entries must be finite");

  const double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(total_supply > 0.0)) throw ArgumentError("total mass must be positive");
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(total_supply, total_demand))
    throw ArgumentError("supply and demand totals differ");

  std::vector<double> a(supply.begin(), supply.end());
  std::vector<double> b(demand.begin(), demand.end());
  for (double& x : b) x *= total_supply / total_demand;

  // North-west corner start: a staircase of exactly m+n-1 cells.
  Basis basis(m, n);
  {
    std::size_t i = 0, j = 0;
    while (true) {
      const double x = std::min(a[i], b[j]);
      basis.cells.push_back({i, j, x});
      a[i] -= x;
      b[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if ((a[i] <= b[j] && i < m - 1) || j == n - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double scale = 0.0;
  for (double c : cost.data) scale = std::max(scale, std::abs(c));
  const double eps = 1e-12 * (scale + 1.0);

  std::vector<double> u, v;
  std::vector<bool> in_basis(m * n, false);
  for (const auto& c : basis.cells) in_basis[c.i * n + c.j] = true;

  const std::size_t max_iter = 1000 * (m + n) * (m + n) + 1000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iter) throw Error("transport simplex did not converge");
    basis.potentials(cost, u, v);

    // Bland: lowest-index cell with negative reduced cost enters.
    std::optional<std::pair<std::size_t, std::size_t>> entering;
    for (std::size_t i = 0; i < m && !entering; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (in_basis[i * n + j]) continue;
        if (cost(i, j) - u[i] - v[j] < -eps) {
          entering = {i, j};
          break;
        }
      }
    if (!entering) break;

    const auto [ei, ej] = *entering;
    const auto path = basis.tree_path(ei, ej);
    // Path cells alternate -, +, -, ...; the first and last share a line with the entering cell.
    double theta = INFINITY;
    for (std::size_t p = 0; p < path.size(); p += 2) theta = std::min(theta, basis.cells[path[p]].flow);

    std::optional<std::size_t> leaving;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const auto& c = basis.cells[path[p]];
      if (c.flow > theta) continue;
      if (!leaving || std::pair(c.i, c.j) < std::pair(basis.cells[*leaving].i, basis.cells[*leaving].j))
        leaving = path[p];
    }

    for (std::size_t p = 0; p < path.size(); ++p) {
      auto& c = basis.cells[path[p]];
      c.flow = p % 2 == 0 ? std::max(c.flow - theta, 0.0) : c.flow + theta;
    }
    auto& out = basis.cells[*leaving];
    in_basis[out.i * n + out.j] = false;
    in_basis[ei * n + ej] = true;
    out = {ei, ej, theta};
  }

  TransportPlan plan;
  for (const auto& c : basis.cells) {
    if (c.flow <= 0.0) continue;
    plan.flows[{c.i, c.j}] += c.flow;
    plan.cost += c.flow * cost(c.i, c.j);
  }
  return plan;
}

}  // namespace qagen::textmetrics
