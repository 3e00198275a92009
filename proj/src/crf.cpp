#include "htrpm/crf.hpp"

#include <cmath>
#include <stdexcept>

namespace htrpm {

CrfState::CrfState(int n_participants, int n_periods, bool hierarchical, double alpha,
                   double alpha0)
    : n_participants_(n_participants),
      n_periods_(n_periods),
      hierarchical_(hierarchical),
      alpha_(alpha),
      alpha0_(alpha0),
      dish_of_(static_cast<std::size_t>(n_participants) * n_periods, -1),
      period_counts_(n_periods) {}

int CrfState::mint_dish() {
  if (!free_list_.empty()) {
    int id = free_list_.back();
    free_list_.pop_back();
    return id;
  }
  return next_id_++;
}

void CrfState::assign(int i, int j, int dish) {
  if (assigned(i, j)) throw std::logic_error("CrfState::assign: (i,j) already assigned");
  dish_of_[i * n_periods_ + j] = dish;
  int& njd = period_counts_[j][dish];
  ++njd;
  if (njd == 1) {
    ++global_tables_[dish];  // new table in this period
    ++total_tables_;
  }
}

CrfState::Removal CrfState::remove(int i, int j) {
  int dish = dish_of(i, j);
  if (dish < 0) throw std::logic_error("CrfState::remove: (i,j) not assigned");
  dish_of_[i * n_periods_ + j] = -1;
  Removal out;
  out.dish = dish;
  auto it = period_counts_[j].find(dish);
  if (--it->second == 0) {
    period_counts_[j].erase(it);
    auto git = global_tables_.find(dish);
    --total_tables_;
    if (--git->second == 0) {
      global_tables_.erase(git);
      free_list_.push_back(dish);
      out.dish_freed = true;
    }
  }
  return out;
}

std::vector<int> CrfState::active_dishes() const {
  std::vector<int> out;
  out.reserve(global_tables_.size());
  for (const auto& [d, m] : global_tables_) out.push_back(d);
  return out;
}

int CrfState::period_count(int j, int dish) const {
  auto it = period_counts_[j].find(dish);
  return it == period_counts_[j].end() ? 0 : it->second;
}

int CrfState::global_table_count(int dish) const {
  auto it = global_tables_.find(dish);
  return it == global_tables_.end() ? 0 : it->second;
}

int CrfState::period_total(int j) const {
  int total = 0;
  for (const auto& [d, n] : period_counts_[j]) total += n;
  return total;
}

double CrfState::raw_weight(int j, int dish) const {
  if (hierarchical_) {
    double cross = alpha_ * global_table_count(dish) / (alpha0_ + total_tables_);
    return period_count(j, dish) + cross;
  }
  return period_count(j, dish);
}

double CrfState::fresh_weight_total() const {
  if (hierarchical_) return alpha_ * alpha0_ / (alpha0_ + total_tables_);
  return alpha_;
}

double CrfState::total_weight(int j) const {
  double total = fresh_weight_total();
  if (hierarchical_) {
    for (const auto& [d, m] : global_tables_) total += raw_weight(j, d);
  } else {
    for (const auto& [d, n] : period_counts_[j]) total += n;
  }
  return total;
}

std::vector<CrfState::Candidate> CrfState::predictive_logweights(int j, int n_aux) const {
  if (n_aux < 1) throw std::invalid_argument("predictive_logweights: n_aux must be >= 1");
  std::vector<Candidate> out;
  if (hierarchical_) {
    for (const auto& [d, m] : global_tables_) {
      out.push_back({d, std::log(raw_weight(j, d))});
    }
  } else {
    for (const auto& [d, n] : period_counts_[j]) {
      out.push_back({d, std::log(static_cast<double>(n))});
    }
  }
  double fresh_each = std::log(fresh_weight_total() / n_aux);
  for (int a = 0; a < n_aux; ++a) out.push_back({-1, fresh_each});
  return out;
}

double CrfState::predictive_prob(int j, int dish) const {
  double w = dish < 0 ? fresh_weight_total() : raw_weight(j, dish);
  if (dish >= 0 && !hierarchical_ && period_count(j, dish) == 0) {
    w = 0.0;  // cross-period dishes carry no mass in non-hierarchical variants
  }
  return w / total_weight(j);
}

std::vector<int> CrfState::period_labels(int j) const {
  std::vector<int> out(n_participants_);
  for (int i = 0; i < n_participants_; ++i) out[i] = dish_of(i, j);
  return out;
}

void CrfState::restore(const std::vector<int>& assignments,
                       const std::vector<int>& free_list, int next_id) {
  if (static_cast<int>(assignments.size()) != n_participants_ * n_periods_) {
    throw std::invalid_argument("CrfState::restore: assignment size mismatch");
  }
  dish_of_.assign(dish_of_.size(), -1);
  for (auto& pc : period_counts_) pc.clear();
  global_tables_.clear();
  total_tables_ = 0;
  free_list_.clear();
  next_id_ = 0;
  for (int i = 0; i < n_participants_; ++i) {
    for (int j = 0; j < n_periods_; ++j) {
      int d = assignments[i * n_periods_ + j];
      if (d >= 0) assign(i, j, d);
    }
  }
  free_list_ = free_list;
  next_id_ = next_id;
}

}  // namespace htrpm
