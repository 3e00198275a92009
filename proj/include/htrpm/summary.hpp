#pragma once

#include <Eigen/Dense>
#include <vector>

#include "htrpm/rng.hpp"
#include "htrpm/spline.hpp"
#include "htrpm/state.hpp"

namespace htrpm {

// Posterior co-clustering frequencies across a set of partition draws.
// Symmetric with unit diagonal.
Eigen::MatrixXd cocluster_matrix(const std::vector<std::vector<int>>& draws);

// Jensen lower bound of the expected variation-of-information loss for a
// candidate partition against a co-clustering matrix, in nats per item.
double vi_lower_bound(const std::vector<int>& labels, const Eigen::MatrixXd& cocluster);

// SALSO point estimate: greedy sequential allocation over random item
// permutations followed by one-item reallocation sweeps, minimizing
// vi_lower_bound; best of `restarts` starts.
std::vector<int> salso(const Eigen::MatrixXd& cocluster, int restarts, RngStream& rng,
                       int max_sweeps = 10);

// Partition point estimate for a chain: one global partition of the N*J
// cells for hierarchical variants, per-period partitions stitched into the
// same layout otherwise. Layout matches Draw::dish (i * J + j).
std::vector<int> salso_estimate(const ChainArchive& archive, int restarts,
                                RngStream& rng);

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

// WAIC over per-cell likelihood records, computed on an evenly spaced
// subsample of ceil(fraction * draws) retained draws.
WaicResult waic(const ChainArchive& archive, double fraction);

struct ClusterCurve {
  int cluster = 0;                 // report label, ordered by mean log-odds
  std::vector<int> cells;          // member cell indices (i * J + j)
  std::vector<double> mean;        // pointwise posterior mean over the grid
  std::vector<double> lower;       // 2.5% pointwise quantile
  std::vector<double> upper;       // 97.5% pointwise quantile
};

// Per-cluster estimated trajectories with pointwise 95% bands, aggregating
// each draw's fitted smooth over the cluster's cells. Clusters are ordered
// by descending average log-odds.
std::vector<ClusterCurve> trajectory_summary(const ChainArchive& archive,
                                             const SplineBasis& basis,
                                             const std::vector<double>& grid,
                                             const std::vector<int>& partition);

// J-1 cross-tabulations of cluster moves between consecutive periods.
// Tables are sized (max label + 1)^2 over the partition's label range.
std::vector<Eigen::MatrixXi> transition_tables(const std::vector<int>& partition,
                                               int n_participants, int n_periods);

}  // namespace htrpm
