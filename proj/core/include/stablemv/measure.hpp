#ifndef STABLEMV_MEASURE_HPP
#define STABLEMV_MEASURE_HPP

#include <cstddef>
#include <vector>

namespace stablemv {

/// Equal-weight point cloud representing (1/N) sum_j delta_{x_j}.
/// Point order carries no meaning for the distances; the coupling
/// upper bound is the one index-aligned exception.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(int dim, std::vector<double> flat_points);

  int dim() const { return dim_; }
  int count() const { return count_; }
  const double* point(int j) const { return data_.data() + static_cast<std::size_t>(j) * dim_; }
  const std::vector<double>& flat() const { return data_; }

 private:
  int dim_;
  int count_;
  std::vector<double> data_;  // row-major, count x dim
};

/// Exact W_p for 1-D equal-weight clouds by sorted matching.
double wasserstein_1d(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Exact W_p by an optimal assignment on the cost matrix |a_j - b_k|^p
/// (Jonker-Volgenant shortest augmenting paths). N capped to keep the
/// O(N^3) solve bounded; callers must downsample above the cap.
double wasserstein_exact(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                         int hard_cap = 2048);

/// Cost of the index-aligned product coupling,
/// ((1/N) sum_j |a_j - b_j|^p)^(1/p). Always >= wasserstein_exact.
double coupling_upper_bound(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Minimum-cost perfect matching on an n x n dense cost matrix
/// (row-major). Returns the column assigned to each row. Ties broken
/// toward the lowest column index.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

}  // namespace stablemv

#endif
