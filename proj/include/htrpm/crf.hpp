#pragma once

#include <map>
#include <vector>

namespace htrpm {

// Chinese-restaurant-franchise bookkeeping for the partition sequence.
//
// Dish ids are stable small integers recycled through a free list. Within a
// period, a dish occupies at most one table: a table opens when the dish
// first appears in the period and absorbs later joiners, so the global table
// count of a dish equals the number of periods it occupies. Non-hierarchical
// variants run the same machinery with the global level degenerated: only
// same-period dishes are reallocation candidates, so menus are never shared
// across periods.
class CrfState {
 public:
  CrfState(int n_participants, int n_periods, bool hierarchical, double alpha,
           double alpha0);

  int dish_of(int i, int j) const { return dish_of_[i * n_periods_ + j]; }
  bool assigned(int i, int j) const { return dish_of(i, j) >= 0; }

  // Mints a dish id with zero counts; it must be used by assign() next.
  int mint_dish();

  void assign(int i, int j, int dish);

  struct Removal {
    int dish = -1;
    bool dish_freed = false;  // the dish lost its last member anywhere
  };
  Removal remove(int i, int j);

  int n_active_dishes() const { return static_cast<int>(global_tables_.size()); }
  std::vector<int> active_dishes() const;
  int period_count(int j, int dish) const;       // n_jd
  int global_table_count(int dish) const;        // m_d
  int total_tables() const { return total_tables_; }
  int period_total(int j) const;                 // number of assigned (i, j)

  struct Candidate {
    int dish = -1;  // -1 marks a fresh (auxiliary) dish
    double log_weight = 0.0;
  };

  // Prior predictive log-weights for reallocating one participant in period
  // j, who must already be removed. Existing dishes carry
  // n_jd + alpha * m_d / (alpha0 + T); each of n_aux fresh dishes carries
  // alpha * alpha0 / ((alpha0 + T) * n_aux). Non-hierarchical: occupied
  // same-period dishes carry n_jd and the fresh total is alpha.
  std::vector<Candidate> predictive_logweights(int j, int n_aux) const;

  // Normalized prior predictive mass of one concrete assignment; pass
  // dish = -1 for "any fresh dish". The participant must be removed.
  double predictive_prob(int j, int dish) const;

  // Within-period cluster labels for period j (dish ids; canonicalize for
  // label-invariant comparisons).
  std::vector<int> period_labels(int j) const;

  int n_participants() const { return n_participants_; }
  int n_periods() const { return n_periods_; }
  bool hierarchical() const { return hierarchical_; }

  // Serialization helpers: counts are rebuilt from assignments; the free
  // list is kept so dish-id allocation resumes identically.
  const std::vector<int>& assignments() const { return dish_of_; }
  const std::vector<int>& free_list() const { return free_list_; }
  int next_id() const { return next_id_; }
  void restore(const std::vector<int>& assignments, const std::vector<int>& free_list,
               int next_id);

 private:
  double raw_weight(int j, int dish) const;
  double fresh_weight_total() const;
  double total_weight(int j) const;

  int n_participants_;
  int n_periods_;
  bool hierarchical_;
  double alpha_;
  double alpha0_;

  std::vector<int> dish_of_;                   // -1 = unassigned
  std::vector<std::map<int, int>> period_counts_;  // per period: dish -> n_jd
  std::map<int, int> global_tables_;           // dish -> m_d
  int total_tables_ = 0;
  std::vector<int> free_list_;
  int next_id_ = 0;
};

}  // namespace htrpm
