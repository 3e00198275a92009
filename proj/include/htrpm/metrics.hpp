#pragma once

#include <vector>

namespace htrpm {

// Variation of information between two partitions of the same ground set,
// in nats: VI = H(p1) + H(p2) - 2 I(p1, p2). Zero iff equal set-partitions.
double variation_of_information(const std::vector<int>& p1, const std::vector<int>& p2);

// Pair-counting adjusted Rand index with the expected-index correction;
// 1 for identical partitions, can be negative for antagonistic pairs.
double adjusted_rand_index(const std::vector<int>& p1, const std::vector<int>& p2);

// Mean squared error between estimated and true smooth values over all
// observation points.
double mse_smooth(const std::vector<std::vector<double>>& estimates,
                  const std::vector<std::vector<double>>& truth);

// Mean over retained draws and (i, j >= 2) of 1[drawn gamma == truth].
// gamma layout per draw: i * n_periods + j with period 0 entries ignored.
double gamma_accuracy(const std::vector<std::vector<unsigned char>>& gamma_draws,
                      const std::vector<unsigned char>& truth, int n_participants,
                      int n_periods);

}  // namespace htrpm
