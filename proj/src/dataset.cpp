#include "htrpm/dataset.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace htrpm {

PanelDataset validate_dataset(PanelDataset raw) {
  if (raw.n_participants < 1 || raw.n_periods < 1) {
    throw std::invalid_argument("validate_dataset: empty panel");
  }
  if (static_cast<int>(raw.cells.size()) != raw.n_participants * raw.n_periods) {
    throw std::invalid_argument("validate_dataset: cell grid does not match N x J");
  }

  int dz = static_cast<int>(raw.cells[0].z.size());
  int dx = static_cast<int>(raw.cells[0].x.size());
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  bool two_distinct = false;
  double first_time = std::numeric_limits<double>::quiet_NaN();

  for (int i = 0; i < raw.n_participants; ++i) {
    for (int j = 0; j < raw.n_periods; ++j) {
      const PanelCell& c = raw.cell(i, j);
      if (c.size() == 0) {
        throw std::invalid_argument("validate_dataset: missing (i=" + std::to_string(i + 1) +
                                    ", j=" + std::to_string(j + 1) + ")");
      }
      if (c.y.size() != c.times.size()) {
        throw std::invalid_argument("validate_dataset: times/outcomes length mismatch at (i=" +
                                    std::to_string(i + 1) + ", j=" + std::to_string(j + 1) + ")");
      }
      if (static_cast<int>(c.z.size()) != dz || static_cast<int>(c.x.size()) != dx) {
        throw std::invalid_argument(
            "validate_dataset: inconsistent covariate dimension at (i=" + std::to_string(i + 1) +
            ", j=" + std::to_string(j + 1) + ")");
      }
      for (int m = 0; m < c.size(); ++m) {
        if (!std::isfinite(c.times[m])) {
          throw std::invalid_argument("validate_dataset: nonfinite time at (i=" +
                                      std::to_string(i + 1) + ", j=" + std::to_string(j + 1) + ")");
        }
        if (c.y[m] != 0 && c.y[m] != 1) {
          throw std::invalid_argument("validate_dataset: non-binary outcome at (i=" +
                                      std::to_string(i + 1) + ", j=" + std::to_string(j + 1) + ")");
        }
        tmin = std::min(tmin, c.times[m]);
        tmax = std::max(tmax, c.times[m]);
        if (std::isnan(first_time)) first_time = c.times[m];
        if (c.times[m] != first_time) two_distinct = true;
      }
    }
  }
  if (!two_distinct) {
    throw std::invalid_argument("validate_dataset: fewer than 2 distinct time values");
  }

  raw.time_offset = tmin;
  raw.time_scale = tmax - tmin;
  for (auto& c : raw.cells) {
    for (auto& t : c.times) t = (t - raw.time_offset) / raw.time_scale;
  }
  return raw;
}

}  // namespace htrpm
