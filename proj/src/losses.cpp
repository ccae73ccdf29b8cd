#include "aurascreen/losses.hpp"

#include <algorithm>
#include <cmath>

namespace aura::losses {

SftResult sft_loss(const SftBatch& batch) {
  size_t b = batch.y_pred.size();
  if (b == 0 || batch.y_true.size() != b) throw Error(Err::DimensionMismatch, "sft batch");
  std::vector<double> sigma = batch.sigma_exp;
  if (sigma.empty()) sigma.assign(b, 1.0);
  if (sigma.size() != b) throw Error(Err::DimensionMismatch, "sigma_exp");
  for (double s : sigma)
    if (!(s > 0.0)) throw Error(Err::NonPositiveSigma, "sigma_exp must be positive");

  SftResult result;
  result.grad.assign(b, 0.0);
  for (size_t i = 0; i < b; ++i) {
    double r = (batch.y_pred[i] - batch.y_true[i]) / sigma[i];
    result.loss += r * r;
    result.grad[i] = 2.0 * r / (sigma[i] * static_cast<double>(b));
  }
  result.loss /= static_cast<double>(b);
  if (!batch.input_grad_norms.empty()) {
    double mean = 0.0;
    for (double g : batch.input_grad_norms) mean += g;
    mean /= static_cast<double>(batch.input_grad_norms.size());
    result.loss += batch.lambda * mean;
  }
  return result;
}

namespace {

void validate_group(const RankingGroup& group) {
  size_t k = group.scores.size();
  if (k == 0) throw Error(Err::DimensionMismatch, "empty ranking group");
  if (group.true_order.size() != k) throw Error(Err::DimensionMismatch, "true_order size");
  if (!(group.tau > 0.0)) throw Error(Err::ConfigInvalid, "tau must be positive");
  std::vector<bool> seen(k, false);
  for (int idx : group.true_order) {
    if (idx < 0 || static_cast<size_t>(idx) >= k || seen[static_cast<size_t>(idx)])
      throw Error(Err::DimensionMismatch, "true_order is not a permutation");
    seen[static_cast<size_t>(idx)] = true;
  }
}

}  // namespace

double plackett_luce_log_prob(const RankingGroup& group) {
  validate_group(group);
  size_t k = group.scores.size();
  double log_prob = 0.0;
  for (size_t pos = 0; pos < k; ++pos) {
    double mx = -1e300;
    for (size_t m = pos; m < k; ++m)
      mx = std::max(mx, group.scores[static_cast<size_t>(group.true_order[m])] / group.tau);
    double denom = 0.0;
    for (size_t m = pos; m < k; ++m)
      denom += std::exp(group.scores[static_cast<size_t>(group.true_order[m])] / group.tau - mx);
    double top = group.scores[static_cast<size_t>(group.true_order[pos])] / group.tau - mx;
    log_prob += top - std::log(denom);
  }
  return log_prob;
}

double plackett_luce_prob(const RankingGroup& group) {
  return std::exp(plackett_luce_log_prob(group));
}

DpoResult dpo_loss(const std::vector<RankingGroup>& groups) {
  if (groups.empty()) throw Error(Err::DimensionMismatch, "no ranking groups");
  DpoResult result;
  double b = static_cast<double>(groups.size());
  for (const auto& group : groups) {
    validate_group(group);
    size_t k = group.scores.size();
    result.loss -= group.confidence * plackett_luce_log_prob(group) / b;

    // d logP / d s_i = (1/tau) [1 - sum over stages where i is still in the
    // pool of its softmax weight]; items leave the pool once ranked
    std::vector<double> grad(k, 0.0);
    for (size_t pos = 0; pos < k; ++pos) {
      double mx = -1e300;
      for (size_t m = pos; m < k; ++m)
        mx = std::max(mx, group.scores[static_cast<size_t>(group.true_order[m])] / group.tau);
      double denom = 0.0;
      for (size_t m = pos; m < k; ++m)
        denom += std::exp(group.scores[static_cast<size_t>(group.true_order[m])] / group.tau - mx);
      for (size_t m = pos; m < k; ++m) {
        size_t item = static_cast<size_t>(group.true_order[m]);
        double p = std::exp(group.scores[item] / group.tau - mx) / denom;
        grad[item] -= p / group.tau;
      }
      grad[static_cast<size_t>(group.true_order[pos])] += 1.0 / group.tau;
    }
    // loss contribution is -confidence/b * logP
    for (double& g : grad) g *= -group.confidence / b;
    result.grads.push_back(std::move(grad));
  }
  return result;
}

DistillResult distill_loss(const DistillPair& pair) {
  if (pair.h_pred.size() != pair.h_main.size())
    throw Error(Err::DimensionMismatch, "h_pred vs h_main");
  if (pair.alpha < 0.0 || pair.beta < 0.0)
    throw Error(Err::ConfigInvalid, "alpha and beta must be non-negative");
  DistillResult result;
  result.grad_h.assign(pair.h_pred.size(), 0.0);
  double sq = 0.0;
  for (size_t i = 0; i < pair.h_pred.size(); ++i) {
    double d = pair.h_pred[i] - pair.h_main[i];
    sq += d * d;
  }
  double norm = std::sqrt(sq);
  double abs_err = std::abs(pair.y_pred - pair.y_true);
  result.loss = pair.alpha * norm + pair.beta * abs_err;
  if (norm > 0.0)
    for (size_t i = 0; i < pair.h_pred.size(); ++i)
      result.grad_h[i] = pair.alpha * (pair.h_pred[i] - pair.h_main[i]) / norm;
  if (pair.y_pred > pair.y_true)
    result.grad_y = pair.beta;
  else if (pair.y_pred < pair.y_true)
    result.grad_y = -pair.beta;
  return result;
}

}  // namespace aura::losses
