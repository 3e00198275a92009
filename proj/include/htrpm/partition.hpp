#pragma once

#include <vector>

namespace htrpm {

// Partitions are label vectors; equality of set-partitions is label-invariant.

// Relabels by order of first appearance: the first item gets 0, the next new
// block 1, and so on.
std::vector<int> canonicalize_partition(const std::vector<int>& labels);

// Restriction of the partition to `subset` (indices into labels, kept in the
// given order), canonicalized. An empty subset yields an empty partition.
std::vector<int> reduced_partition(const std::vector<int>& labels,
                                   const std::vector<int>& subset);

// True iff the two partitions restricted to `subset` are equal as
// set-partitions.
bool is_compatible(const std::vector<int>& prev, const std::vector<int>& curr,
                   const std::vector<int>& subset);

}  // namespace htrpm
