#include "htrpm/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace htrpm {

namespace {

// Working state for the greedy VI-lower-bound search. Keeps per-item sums
// S_i = sum of cocluster probabilities over the item's current cluster
// (including itself) so that move deltas cost O(cluster size).
struct SalsoSearch {
  const Eigen::MatrixXd& pi;
  std::vector<int> label;                // -1 = unassigned
  std::vector<std::vector<int>> members; // by cluster id; empty = free slot
  std::vector<double> s;                 // per assigned item

  explicit SalsoSearch(const Eigen::MatrixXd& cocluster)
      : pi(cocluster),
        label(cocluster.rows(), -1),
        s(cocluster.rows(), 0.0) {}

  // Objective delta of adding unassigned item v to cluster c.
  double join_delta(int v, int c) const {
    const auto& m = members[c];
    double n = static_cast<double>(m.size());
    double growth = std::log(n + 1.0) - std::log(n);
    double delta = 0.0;
    double sv = pi(v, v);
    for (int i : m) {
      delta += growth - 2.0 * (std::log(s[i] + pi(i, v)) - std::log(s[i]));
      sv += pi(v, i);
    }
    delta += std::log(n + 1.0) - 2.0 * std::log(sv);
    return delta;
  }

  void join(int v, int c) {
    double sv = pi(v, v);
    for (int i : members[c]) {
      s[i] += pi(i, v);
      sv += pi(v, i);
    }
    members[c].push_back(v);
    label[v] = c;
    s[v] = sv;
  }

  void detach(int v) {
    int c = label[v];
    auto& m = members[c];
    m.erase(std::find(m.begin(), m.end(), v));
    for (int i : m) s[i] -= pi(i, v);
    label[v] = -1;
    s[v] = 0.0;
  }

  int place_best(int v) {  // returns chosen cluster id
    int best_c = -1;
    double best_delta = 0.0;  // opening a singleton always has delta 0
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) continue;
      double d = join_delta(v, static_cast<int>(c));
      if (d < best_delta) {
        best_delta = d;
        best_c = static_cast<int>(c);
      }
    }
    if (best_c < 0) {
      for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty()) {
          best_c = static_cast<int>(c);
          break;
        }
      }
      if (best_c < 0) {
        members.emplace_back();
        best_c = static_cast<int>(members.size()) - 1;
      }
    }
    join(v, best_c);
    return best_c;
  }
};

std::vector<int> shuffled_indices(int n, RngStream& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    int k = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(idx[i], idx[k]);
  }
  return idx;
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double pos = p * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  double w = pos - lo;
  return (1.0 - w) * v[lo] + w * v[lo + 1];
}

}  // namespace

Eigen::MatrixXd cocluster_matrix(const std::vector<std::vector<int>>& draws) {
  if (draws.empty()) throw std::invalid_argument("cocluster_matrix: empty archive");
  int n = static_cast<int>(draws[0].size());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  for (const auto& d : draws) {
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        if (d[a] == d[b]) pi(a, b) += 1.0;
      }
    }
  }
  pi /= static_cast<double>(draws.size());
  pi.triangularView<Eigen::StrictlyLower>() = pi.transpose();
  return pi;
}

double vi_lower_bound(const std::vector<int>& labels, const Eigen::MatrixXd& cocluster) {
  int n = static_cast<int>(labels.size());
  double total = 0.0;
  std::vector<double> cluster_size;
  for (int lab : labels) {
    if (lab >= static_cast<int>(cluster_size.size())) cluster_size.resize(lab + 1, 0.0);
    cluster_size[lab] += 1.0;
  }
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0, own_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row_sum += cocluster(i, j);
      if (labels[j] == labels[i]) own_sum += cocluster(i, j);
    }
    total += std::log(cluster_size[labels[i]]) + std::log(row_sum) - 2.0 * std::log(own_sum);
  }
  return total / n;
}

std::vector<int> salso(const Eigen::MatrixXd& cocluster, int restarts, RngStream& rng,
                       int max_sweeps) {
  int n = static_cast<int>(cocluster.rows());
  std::vector<int> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    SalsoSearch search(cocluster);
    std::vector<int> order = shuffled_indices(n, rng);
    for (int v : order) search.place_best(v);
    for (int pass = 0; pass < max_sweeps; ++pass) {
      bool moved = false;
      for (int v : order) {
        int old_c = search.label[v];
        search.detach(v);
        int new_c = search.place_best(v);
        moved |= new_c != old_c;
      }
      if (!moved) break;
    }
    std::vector<int> canonical(n);
    std::vector<int> remap(search.members.size(), -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
      if (remap[search.label[v]] < 0) remap[search.label[v]] = next++;
      canonical[v] = remap[search.label[v]];
    }
    double obj = vi_lower_bound(canonical, cocluster);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(canonical);
    }
  }
  return best;
}

std::vector<int> salso_estimate(const ChainArchive& archive, int restarts,
                                RngStream& rng) {
  if (archive.draws.empty()) throw std::invalid_argument("salso_estimate: empty archive");
  int n = archive.n_participants, j_count = archive.n_periods;
  std::vector<int> out(static_cast<std::size_t>(n) * j_count);
  if (is_hierarchical(archive.variant)) {
    std::vector<std::vector<int>> draws;
    draws.reserve(archive.draws.size());
    for (std::size_t s = 0; s < archive.draws.size(); ++s) {
      draws.push_back(archive.global_labels(static_cast<int>(s)));
    }
    out = salso(cocluster_matrix(draws), restarts, rng);
  } else {
    int offset = 0;
    for (int j = 0; j < j_count; ++j) {
      std::vector<std::vector<int>> draws;
      draws.reserve(archive.draws.size());
      for (std::size_t s = 0; s < archive.draws.size(); ++s) {
        draws.push_back(archive.period_labels(static_cast<int>(s), j));
      }
      std::vector<int> part = salso(cocluster_matrix(draws), restarts, rng);
      int used = 0;
      for (int i = 0; i < n; ++i) {
        out[i * j_count + j] = offset + part[i];
        used = std::max(used, part[i] + 1);
      }
      offset += used;  // keep per-period labels distinct in the global layout
    }
  }
  return out;
}

WaicResult waic(const ChainArchive& archive, double fraction) {
  int n_draws = static_cast<int>(archive.draws.size());
  int s_count = static_cast<int>(std::ceil(fraction * n_draws));
  if (s_count < 2) throw std::invalid_argument("waic: need at least 2 subsampled draws");
  // subsample on the iteration-sorted order so draw storage order is
  // irrelevant
  std::vector<int> order(n_draws);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return archive.draws[a].iteration < archive.draws[b].iteration;
  });
  std::vector<int> picks(s_count);
  for (int k = 0; k < s_count; ++k) picks[k] = order[k * n_draws / s_count];

  WaicResult out;
  int cells = archive.n_participants * archive.n_periods;
  std::vector<double> ll(s_count);
  for (int c = 0; c < cells; ++c) {
    double max_ll = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < s_count; ++k) {
      ll[k] = archive.draws[picks[k]].loglik[c];
      max_ll = std::max(max_ll, ll[k]);
    }
    double sum_exp = 0.0, mean_ll = 0.0;
    for (double v : ll) {
      sum_exp += std::exp(v - max_ll);
      mean_ll += v;
    }
    mean_ll /= s_count;
    double var = 0.0;
    for (double v : ll) var += (v - mean_ll) * (v - mean_ll);
    var /= (s_count - 1);
    out.lppd += max_ll + std::log(sum_exp / s_count);
    out.p_waic += var;
  }
  out.waic = -2.0 * (out.lppd - out.p_waic);
  return out;
}

std::vector<ClusterCurve> trajectory_summary(const ChainArchive& archive,
                                             const SplineBasis& basis,
                                             const std::vector<double>& grid,
                                             const std::vector<int>& partition) {
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("trajectory_summary: grid outside [0,1]");
    }
  }
  Eigen::MatrixXd g = basis.design_matrix(grid);
  int n_labels = *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<ClusterCurve> curves(n_labels);
  for (int k = 0; k < n_labels; ++k) curves[k].cluster = k;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    curves[partition[c]].cells.push_back(static_cast<int>(c));
  }

  int s_count = static_cast<int>(archive.draws.size());
  int g_count = static_cast<int>(grid.size());
  for (auto& curve : curves) {
    // per-draw cluster curve = basis * (mean beta over member cells)
    Eigen::MatrixXd samples(s_count, g_count);
    for (int s = 0; s < s_count; ++s) {
      const Draw& d = archive.draws[s];
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(archive.q);
      for (int cell : curve.cells) beta += d.beta[d.dish[cell]];
      beta /= static_cast<double>(curve.cells.size());
      samples.row(s) = (g * beta).transpose();
    }
    curve.mean.resize(g_count);
    curve.lower.resize(g_count);
    curve.upper.resize(g_count);
    for (int t = 0; t < g_count; ++t) {
      std::vector<double> col(samples.col(t).data(), samples.col(t).data() + s_count);
      curve.mean[t] = samples.col(t).mean();
      curve.lower[t] = quantile(col, 0.025);
      curve.upper[t] = quantile(col, 0.975);
    }
  }

  std::sort(curves.begin(), curves.end(), [](const ClusterCurve& a, const ClusterCurve& b) {
    double ma = std::accumulate(a.mean.begin(), a.mean.end(), 0.0) / a.mean.size();
    double mb = std::accumulate(b.mean.begin(), b.mean.end(), 0.0) / b.mean.size();
    return ma > mb;
  });
  return curves;
}

std::vector<Eigen::MatrixXi> transition_tables(const std::vector<int>& partition,
                                               int n_participants, int n_periods) {
  int k = *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<Eigen::MatrixXi> tables(n_periods - 1, Eigen::MatrixXi::Zero(k, k));
  for (int i = 0; i < n_participants; ++i) {
    for (int j = 1; j < n_periods; ++j) {
      tables[j - 1](partition[i * n_periods + j - 1], partition[i * n_periods + j]) += 1;
    }
  }
  return tables;
}

}  // namespace htrpm
