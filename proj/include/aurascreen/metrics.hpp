#pragma once

#include <vector>

#include "aurascreen/common.hpp"

namespace aura::metrics {

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

// n_top = ceil(fraction * N); ranking is score-descending with stable input
// order for ties; EF = (positives in top / total positives) / fraction
double enrichment_factor(const std::vector<ScoredLabel>& entries, double fraction);

// step-wise precision at each recall increment (ties grouped by threshold)
double aupr(const std::vector<ScoredLabel>& entries);

// rank-statistic AUROC; tied scores contribute 0.5
double auroc(const std::vector<ScoredLabel>& entries);

double hit_rate(int actives, int tested);
double hit_rate(const std::vector<bool>& outcomes);

}  // namespace aura::metrics
