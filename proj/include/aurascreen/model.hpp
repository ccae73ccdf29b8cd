#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aurascreen/fingerprint.hpp"
#include "aurascreen/tensor.hpp"

namespace aura::model {

struct ModelConfig {
  // pair-aware encoder + affinity head (the rescoring path)
  int d_single = 16;
  int d_pair = 8;
  int d_transition = 32;
  int encoder_blocks = 4;
  double temperature = 1.0;  // T in the affinity-head weight softmax
  double ligand_weight_ratio = 2.0;

  // student scorer
  int fp_width = 1024;
  int d_model = 32;
  int student_blocks = 2;
  int d_protein = 32;

  // synthesized token representations
  int protein_tokens = 6;
  int ligand_tokens = 6;

  int d_prior() const { return d_single; }  // trunk/prior embedding dimension
};

struct TokenReps {
  int n = 0;
  nn::Tensor s;                      // [N, d_single]
  nn::Tensor z;                      // [N*N, d_pair]
  std::vector<uint8_t> single_mask;  // [N]
  std::vector<uint8_t> pair_mask;    // [N*N], symmetric
  std::vector<uint8_t> is_ligand;    // [N]
  int num_protein = 0;
  int num_ligand = 0;

  bool pair(int i, int j) const { return pair_mask[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] != 0; }
  void validate(const ModelConfig& cfg) const;
};

struct FitnessOutput {
  std::vector<double> per_token_affinity;
  std::vector<double> raw_weights;   // 0 at masked tokens
  std::vector<double> norm_weights;  // softmax(raw / T) over unmasked tokens
  double affinity = 0.0;
};

nn::ParamStore init_params(const ModelConfig& cfg, uint64_t seed);

struct EncoderNodes {
  nn::NodeId s;
  nn::NodeId z;
};
EncoderNodes encoder_forward(nn::Tape& tape, nn::Binder& params, const TokenReps& reps,
                             const ModelConfig& cfg);

struct HeadNodes {
  nn::NodeId affinity;   // [1]
  nn::NodeId per_token;  // [N]
  nn::Tensor raw_weights;
  nn::Tensor norm_weights;
};
HeadNodes affinity_head_forward(nn::Tape& tape, nn::Binder& params, nn::NodeId s, nn::NodeId z,
                                const TokenReps& reps, const ModelConfig& cfg);

// value-level wrappers (fresh tape per call; safe to run concurrently with a
// shared read-only ParamStore)
FitnessOutput affinity_head(const TokenReps& reps, const nn::ParamStore& params,
                            const ModelConfig& cfg);
double teacher_score(const TokenReps& reps, const nn::ParamStore& params, const ModelConfig& cfg);

struct StudentInput {
  fp::Fingerprint fingerprint;
  std::vector<double> protein_embedding;  // [d_protein]
  std::vector<double> prior_embedding;    // [d_prior]
};

struct StudentNodes {
  nn::NodeId h;  // [d_prior]
  nn::NodeId y;  // [1]
  nn::NodeId protein_leaf;
  nn::NodeId prior_leaf;
  nn::NodeId fp_projection;
};
StudentNodes student_forward(nn::Tape& tape, nn::Binder& params, const StudentInput& input,
                             const ModelConfig& cfg);

struct StudentOutput {
  std::vector<double> h;
  double y = 0.0;
};
StudentOutput student_score(const StudentInput& input, const nn::ParamStore& params,
                            const ModelConfig& cfg);

// L2 norm of d y_pred / d x where x is the student's input feature vector
// (fingerprint bits, protein embedding, prior embedding); feeds the
// supervised loss's gradient-penalty term.
double student_input_grad_norm(const StudentInput& input, const nn::ParamStore& params,
                               const ModelConfig& cfg);

TokenReps synthesize_token_reps(const std::vector<double>& protein_embedding,
                                const fp::Fingerprint& fingerprint, const ModelConfig& cfg);

// mean of the encoder's single representation over unmasked tokens
std::vector<double> trunk_embedding(const TokenReps& reps, const nn::ParamStore& params,
                                    const ModelConfig& cfg);

struct GradEval {
  double value = 0.0;
  std::map<std::string, nn::Tensor> grads;
};
using GradFn = std::function<GradEval(nn::ParamStore&)>;

// central finite differences vs analytic gradients; returns the max relative
// error |a - n| / max(|a|, |n|, 1e-8) over every parameter element
double gradcheck(const GradFn& f, nn::ParamStore& params, double eps = 1e-4);

// checkpoint: magic "AURO", version u32, named tensors
// (name length u16 + name + rank u8 + dims u32[] + little-endian f32 data)
void save_checkpoint(const std::string& path, const nn::ParamStore& params);
nn::ParamStore load_checkpoint(const std::string& path);

// header `dim=<D>` then D whitespace-separated decimal floats
std::vector<double> load_protein_embedding(const std::string& path);
void save_protein_embedding(const std::string& path, const std::vector<double>& embedding);

}  // namespace aura::model
