#include "aurascreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aura::metrics {

double enrichment_factor(const std::vector<ScoredLabel>& entries, double fraction) {
  if (entries.empty()) throw Error(Err::EmptyInput, "no scored entries");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(Err::ConfigInvalid, "fraction must be in (0,1]");
  size_t n = entries.size();
  long positives = 0;
  for (const auto& e : entries) positives += e.label ? 1 : 0;
  if (positives == 0) throw Error(Err::NoPositives, "enrichment factor needs a positive");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&entries](size_t a, size_t b) {
    return entries[a].score > entries[b].score;
  });
  size_t n_top = static_cast<size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-12));
  if (n_top == 0) n_top = 1;
  if (n_top > n) n_top = n;
  long hits = 0;
  for (size_t k = 0; k < n_top; ++k) hits += entries[order[k]].label ? 1 : 0;
  return (static_cast<double>(hits) / static_cast<double>(positives)) / fraction;
}

namespace {

struct Counts {
  long tp = 0;
  long fp = 0;
};

// cumulative counts per distinct threshold, highest score first
std::vector<Counts> threshold_sweep(const std::vector<ScoredLabel>& entries) {
  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&entries](size_t a, size_t b) {
    return entries[a].score > entries[b].score;
  });
  std::vector<Counts> sweep;
  long tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    double threshold = entries[order[i]].score;
    while (i < order.size() && entries[order[i]].score == threshold) {
      if (entries[order[i]].label)
        ++tp;
      else
        ++fp;
      ++i;
    }
    sweep.push_back({tp, fp});
  }
  return sweep;
}

std::pair<long, long> class_counts(const std::vector<ScoredLabel>& entries) {
  long pos = 0, neg = 0;
  for (const auto& e : entries) (e.label ? pos : neg) += 1;
  return {pos, neg};
}

}  // namespace

double aupr(const std::vector<ScoredLabel>& entries) {
  if (entries.empty()) throw Error(Err::EmptyInput, "no scored entries");
  auto [pos, neg] = class_counts(entries);
  if (pos == 0 || neg == 0) throw Error(Err::SingleClass, "aupr needs both classes");
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& c : threshold_sweep(entries)) {
    double recall = static_cast<double>(c.tp) / static_cast<double>(pos);
    double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

double auroc(const std::vector<ScoredLabel>& entries) {
  if (entries.empty()) throw Error(Err::EmptyInput, "no scored entries");
  auto [pos, neg] = class_counts(entries);
  if (pos == 0 || neg == 0) throw Error(Err::SingleClass, "auroc needs both classes");
  // average ranks with ties shared
  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&entries](size_t a, size_t b) {
    return entries[a].score < entries[b].score;
  });
  std::vector<double> rank(entries.size(), 0.0);
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && entries[order[j]].score == entries[order[i]].score) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (size_t k = i; k < j; ++k) rank[order[k]] = avg;
    i = j;
  }
  double pos_rank_sum = 0.0;
  for (size_t k = 0; k < entries.size(); ++k)
    if (entries[k].label) pos_rank_sum += rank[k];
  double p = static_cast<double>(pos);
  double n = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double hit_rate(int actives, int tested) {
  if (tested <= 0) throw Error(Err::EmptyInput, "no compounds tested");
  if (actives < 0 || actives > tested) throw Error(Err::ConfigInvalid, "bad active count");
  return static_cast<double>(actives) / static_cast<double>(tested);
}

double hit_rate(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) throw Error(Err::EmptyInput, "no compounds tested");
  int actives = 0;
  for (bool hit : outcomes) actives += hit ? 1 : 0;
  return hit_rate(actives, static_cast<int>(outcomes.size()));
}

}  // namespace aura::metrics
