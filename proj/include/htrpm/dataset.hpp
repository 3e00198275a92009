#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace htrpm {

// Observations for one (participant, period) cell. Times are stored rescaled
// to [0,1]; the dataset keeps the affine map back to original units.
struct PanelCell {
  std::vector<double> times;
  std::vector<std::int8_t> y;
  Eigen::VectorXd z;  // baseline covariates, leading intercept
  Eigen::VectorXd x;  // transition covariates, leading intercept; may be empty

  int size() const { return static_cast<int>(times.size()); }
};

struct PanelDataset {
  int n_participants = 0;
  int n_periods = 0;
  std::vector<PanelCell> cells;  // row-major: participant * n_periods + period

  // original_time = time_offset + time_scale * rescaled_time
  double time_offset = 0.0;
  double time_scale = 1.0;

  PanelCell& cell(int i, int j) { return cells[i * n_periods + j]; }
  const PanelCell& cell(int i, int j) const { return cells[i * n_periods + j]; }

  int d_z() const { return cells.empty() ? 0 : static_cast<int>(cells[0].z.size()); }
  int d_x() const { return cells.empty() ? 0 : static_cast<int>(cells[0].x.size()); }
  bool has_x() const { return d_x() > 0; }

  int total_observations() const {
    int m = 0;
    for (const auto& c : cells) m += c.size();
    return m;
  }
};

// Enforces the panel assumptions and rescales observation times to [0,1].
// Throws std::invalid_argument with a located message on: a missing
// (participant, period) cell, a non-binary outcome, nonfinite times,
// inconsistent covariate dimensions, or fewer than 2 distinct time values.
PanelDataset validate_dataset(PanelDataset raw);

}  // namespace htrpm
