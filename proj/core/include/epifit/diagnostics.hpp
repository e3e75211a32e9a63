#pragma once

#include <vector>

namespace epifit {

// Chains-by-iterations draws of a single scalar parameter.
using ChainDraws = std::vector<std::vector<double>>;

// Rank-normalized split R-hat. NaN when the draws are (numerically) constant.
double split_rhat(const ChainDraws& chains);

// Rank-normalized split bulk effective sample size (Geyer initial monotone
// sequence on the averaged autocorrelations).
double bulk_ess(const ChainDraws& chains);

struct SummaryStats {
  double mean = 0, sd = 0;
  double q2_5 = 0, q25 = 0, q50 = 0, q75 = 0, q97_5 = 0;
  double rhat = 0, ess_bulk = 0;
  double mcse_mean = 0;  // sd / sqrt(ess)
};

SummaryStats summarize(const ChainDraws& chains);

}  // namespace epifit
