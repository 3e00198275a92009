#include "htrpm/partition.hpp"

#include <stdexcept>
#include <unordered_map>

namespace htrpm {

std::vector<int> canonicalize_partition(const std::vector<int>& labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int lab : labels) {
    auto [it, inserted] = remap.emplace(lab, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> reduced_partition(const std::vector<int>& labels,
                                   const std::vector<int>& subset) {
  std::vector<int> picked;
  picked.reserve(subset.size());
  for (int idx : subset) {
    if (idx < 0 || idx >= static_cast<int>(labels.size())) {
      throw std::invalid_argument("reduced_partition: subset index out of range");
    }
    picked.push_back(labels[idx]);
  }
  return canonicalize_partition(picked);
}

bool is_compatible(const std::vector<int>& prev, const std::vector<int>& curr,
                   const std::vector<int>& subset) {
  if (prev.size() != curr.size()) {
    throw std::invalid_argument("is_compatible: partitions over different ground sets");
  }
  return reduced_partition(prev, subset) == reduced_partition(curr, subset);
}

}  // namespace htrpm
