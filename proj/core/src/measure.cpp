#include "stablemv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stablemv {

EmpiricalMeasure::EmpiricalMeasure(int dim, std::vector<double> flat_points)
    : dim_(dim), data_(std::move(flat_points)) {
  if (dim_ < 1) throw std::invalid_argument("EmpiricalMeasure: dim must be >= 1");
  if (data_.empty() || data_.size() % static_cast<std::size_t>(dim_) != 0)
    throw std::invalid_argument("EmpiricalMeasure: point data not a multiple of dim");
  count_ = static_cast<int>(data_.size() / dim_);
}

namespace {

double pdist(const double* a, const double* b, int dim, double p) {
  double s2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    s2 += d * d;
  }
  return std::pow(s2, 0.5 * p);
}

void check_pair(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: p must be >= 1");
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  if (a.count() != b.count()) throw std::invalid_argument("unequal support sizes");
}

}  // namespace

double wasserstein_1d(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  check_pair(p, a, b);
  if (a.dim() != 1) throw std::invalid_argument("wasserstein_1d: dim must be 1");
  std::vector<double> xa = a.flat(), xb = b.flat();
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < xa.size(); ++k)
    acc += std::pow(std::fabs(xa[k] - xb[k]), p);
  return std::pow(acc / static_cast<double>(xa.size()), 1.0 / p);
}

// Jonker-Volgenant style shortest augmenting paths with dual potentials.
// Ties broken toward the lowest column index.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  if (n < 1 || cost.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("solve_assignment: bad cost matrix");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
  std::vector<int> path(n, -1), col4row(n, -1), row4col(n, -1), remaining(n);
  std::vector<char> in_sr(n), in_sc(n);

  for (int cur_row = 0; cur_row < n; ++cur_row) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(in_sr.begin(), in_sr.end(), 0);
    std::fill(in_sc.begin(), in_sc.end(), 0);
    for (int j = 0; j < n; ++j) remaining[j] = j;
    int num_remaining = n;

    double min_val = 0.0;
    int i = cur_row;
    int sink = -1;
    while (sink == -1) {
      in_sr[i] = 1;
      double lowest = kInf;
      int index = -1;
      for (int it = 0; it < num_remaining; ++it) {
        int j = remaining[it];
        double r = min_val + cost[static_cast<std::size_t>(i) * n + j] - u[i] - v[j];
        if (r < shortest[j]) {
          shortest[j] = r;
          path[j] = i;
        }
        if (shortest[j] < lowest ||
            (shortest[j] == lowest && index >= 0 && j < remaining[index])) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_val = lowest;
      if (min_val == kInf) throw std::runtime_error("solve_assignment: infeasible");
      int j = remaining[index];
      if (row4col[j] == -1)
        sink = j;
      else
        i = row4col[j];
      in_sc[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur_row] += min_val;
    for (int k = 0; k < n; ++k) {
      if (in_sr[k] && k != cur_row) u[k] += min_val - shortest[col4row[k]];
      if (in_sc[k]) v[k] -= min_val - shortest[k];
    }

    int j = sink;
    for (;;) {
      int r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == cur_row) break;
    }
  }
  return col4row;
}

double wasserstein_exact(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                         int hard_cap) {
  check_pair(p, a, b);
  const int n = a.count();
  if (n > hard_cap) throw std::invalid_argument("assignment too large");
  if (a.dim() == 1 && n > 64) return wasserstein_1d(p, a, b);

  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      cost[static_cast<std::size_t>(j) * n + k] = pdist(a.point(j), b.point(k), a.dim(), p);
  std::vector<int> match = solve_assignment(cost, n);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += cost[static_cast<std::size_t>(j) * n + match[j]];
  return std::pow(acc / n, 1.0 / p);
}

double coupling_upper_bound(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  check_pair(p, a, b);
  double acc = 0.0;
  for (int j = 0; j < a.count(); ++j) acc += pdist(a.point(j), b.point(j), a.dim(), p);
  return std::pow(acc / a.count(), 1.0 / p);
}

}  // namespace stablemv
