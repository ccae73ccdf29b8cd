#pragma once

#include <vector>

#include "aurascreen/common.hpp"

namespace aura::losses {

struct SftBatch {
  std::vector<double> y_pred;
  std::vector<double> y_true;
  std::vector<double> sigma_exp;         // defaults to 1.0 per example
  std::vector<double> input_grad_norms;  // ||d y_pred / d x||_2, supplied by the model
  double lambda = 0.01;
};

struct SftResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d y_pred
};

// (1/B) sum ((y_pred - y_true)/sigma)^2 + lambda * mean(input_grad_norms)
SftResult sft_loss(const SftBatch& batch);

struct RankingGroup {
  std::vector<double> scores;   // predicted fitness per item
  std::vector<int> true_order;  // permutation; true_order[k] = index ranked k-th
  double tau = 0.1;
  double confidence = 1.0;
};

// product over k of exp(s_{r_k}/tau) / sum_{m>=k} exp(s_{r_m}/tau),
// evaluated in log space with max subtraction
double plackett_luce_log_prob(const RankingGroup& group);
double plackett_luce_prob(const RankingGroup& group);

struct DpoResult {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // per group, d loss / d scores
};

// -(1/B) sum_j confidence_j * log P(R_true | scores_j)
DpoResult dpo_loss(const std::vector<RankingGroup>& groups);

struct DistillPair {
  std::vector<double> h_pred;
  std::vector<double> h_main;
  double y_pred = 0.0;
  double y_true = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
};

struct DistillResult {
  double loss = 0.0;
  std::vector<double> grad_h;  // d loss / d h_pred
  double grad_y = 0.0;         // d loss / d y_pred
};

// alpha * ||h_pred - h_main||_2 + beta * |y_pred - y_true|; subgradient 0 at
// the kinks
DistillResult distill_loss(const DistillPair& pair);

}  // namespace aura::losses
