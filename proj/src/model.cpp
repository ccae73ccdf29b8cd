#include "aurascreen/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aura::model {

using nn::Binder;
using nn::NodeId;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor;

void TokenReps::validate(const ModelConfig& cfg) const {
  if (n <= 0) throw Error(Err::ShapeMismatch, "no tokens");
  size_t nn_ = static_cast<size_t>(n);
  if (s.shape != std::vector<int>{n, cfg.d_single}) throw Error(Err::ShapeMismatch, "s shape");
  if (z.shape != std::vector<int>{n * n, cfg.d_pair}) throw Error(Err::ShapeMismatch, "z shape");
  if (single_mask.size() != nn_ || is_ligand.size() != nn_ || pair_mask.size() != nn_ * nn_)
    throw Error(Err::ShapeMismatch, "mask sizes");
  if (!s.finite() || !z.finite()) throw Error(Err::NonFiniteActivation, "token reps");
  int unmasked = 0;
  for (uint8_t m : single_mask) unmasked += m ? 1 : 0;
  if (num_protein + num_ligand != unmasked)
    throw Error(Err::ShapeMismatch, "num_protein + num_ligand != unmasked tokens");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (pair(i, j) != pair(j, i)) throw Error(Err::ShapeMismatch, "pair_mask not symmetric");
}

// ---------------------------------------------------------------------------
// parameters

namespace {

struct ParamSpec {
  std::string name;
  std::vector<int> shape;
  enum Kind { Weight, Bias, Gain } kind;
};

std::vector<ParamSpec> param_specs(const ModelConfig& cfg) {
  std::vector<ParamSpec> specs;
  auto weight = [&specs](const std::string& name, std::vector<int> shape) {
    specs.push_back({name, std::move(shape), ParamSpec::Weight});
  };
  auto bias = [&specs](const std::string& name, std::vector<int> shape) {
    specs.push_back({name, std::move(shape), ParamSpec::Bias});
  };
  auto gain = [&specs](const std::string& name, std::vector<int> shape) {
    specs.push_back({name, std::move(shape), ParamSpec::Gain});
  };

  int ds = cfg.d_single, dp = cfg.d_pair, dt = cfg.d_transition;
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    std::string p = "enc" + std::to_string(b) + ".";
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) weight(p + w, {ds, ds});
    for (const char* w : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) bias(p + w, {ds});
    weight(p + "attn.wz", {dp, 1});
    weight(p + "trans.w1", {ds, dt});
    bias(p + "trans.b1", {dt});
    weight(p + "trans.w2", {dt, ds});
    bias(p + "trans.b2", {ds});
    weight(p + "outer.wa", {ds, dp});
    bias(p + "outer.ba", {dp});
    weight(p + "outer.wb", {ds, dp});
    bias(p + "outer.bb", {dp});
    weight(p + "outer.wp", {dp, dp});
    bias(p + "outer.bp", {dp});
    weight(p + "pair_trans.w1", {dp, 2 * dp});
    bias(p + "pair_trans.b1", {2 * dp});
    weight(p + "pair_trans.w2", {2 * dp, dp});
    bias(p + "pair_trans.b2", {dp});
  }

  gain("head.ln_s.g", {ds});
  bias("head.ln_s.b", {ds});
  weight("head.gate_s.w", {ds, 1});
  bias("head.gate_s.b", {1});
  weight("head.mlp_s.w1", {ds, ds});
  bias("head.mlp_s.b1", {ds});
  weight("head.mlp_s.w2", {ds, 1});
  bias("head.mlp_s.b2", {1});
  gain("head.ln_z.g", {dp});
  bias("head.ln_z.b", {dp});
  weight("head.gate_z.w", {dp, 1});
  bias("head.gate_z.b", {1});
  weight("head.mlp_z.w1", {dp, dp});
  bias("head.mlp_z.b1", {dp});
  weight("head.mlp_z.w2", {dp, 1});
  bias("head.mlp_z.b2", {1});

  int dm = cfg.d_model;
  weight("stu.fp.w", {cfg.fp_width, dm});
  bias("stu.fp.b", {dm});
  weight("stu.prot.w", {cfg.d_protein, dm});
  bias("stu.prot.b", {dm});
  weight("stu.prior.w", {cfg.d_prior(), dm});
  bias("stu.prior.b", {dm});
  for (int b = 0; b < cfg.student_blocks; ++b) {
    std::string p = "stu.blk" + std::to_string(b) + ".";
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) weight(p + w, {dm, dm});
    for (const char* w : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) bias(p + w, {dm});
    weight(p + "trans.w1", {dm, 2 * dm});
    bias(p + "trans.b1", {2 * dm});
    weight(p + "trans.w2", {2 * dm, dm});
    bias(p + "trans.b2", {dm});
  }
  weight("stu.head_h.w", {dm, cfg.d_prior()});
  bias("stu.head_h.b", {cfg.d_prior()});
  weight("stu.head_y.w", {dm, 1});
  bias("stu.head_y.b", {1});
  return specs;
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, uint64_t seed) {
  ParamStore params;
  auto specs = param_specs(cfg);
  std::sort(specs.begin(), specs.end(),
            [](const ParamSpec& a, const ParamSpec& b) { return a.name < b.name; });
  Rng rng(seed);
  for (const auto& spec : specs) {
    Tensor t(spec.shape);
    if (spec.kind == ParamSpec::Weight) {
      double fan_in = static_cast<double>(spec.shape[0]);
      double sd = 0.4 / std::sqrt(fan_in);
      for (double& x : t.v) x = rng.normal() * sd;
    } else if (spec.kind == ParamSpec::Gain) {
      for (double& x : t.v) x = 1.0;
    }
    params.put(spec.name, std::move(t));
  }
  return params;
}

// ---------------------------------------------------------------------------
// encoder

namespace {

// additive attention mask and update gates derived from the token masks
struct MaskSet {
  Tensor attn_mask;   // [N,N]: 0 allowed, -1e9 blocked
  Tensor attn_gate;   // [N,ds]: rows zeroed when masked or nothing to attend to
  Tensor row_gate;    // [N,ds]: rows zeroed when masked
  Tensor pair_gate;   // [N*N,dp]
};

MaskSet build_masks(const TokenReps& reps, const ModelConfig& cfg) {
  int n = reps.n, ds = cfg.d_single, dp = cfg.d_pair;
  MaskSet m{Tensor({n, n}), Tensor({n, ds}), Tensor({n, ds}), Tensor({n * n, dp})};
  for (int i = 0; i < n; ++i) {
    bool any_target = false;
    for (int j = 0; j < n; ++j) {
      bool allowed = reps.single_mask[static_cast<size_t>(j)] && reps.pair(i, j);
      m.attn_mask.at(i, j) = allowed ? 0.0 : -1e9;
      any_target = any_target || allowed;
    }
    bool active = reps.single_mask[static_cast<size_t>(i)] != 0;
    for (int f = 0; f < ds; ++f) {
      m.attn_gate.at(i, f) = active && any_target ? 1.0 : 0.0;
      m.row_gate.at(i, f) = active ? 1.0 : 0.0;
    }
    for (int j = 0; j < n; ++j) {
      bool pair_active = active && reps.single_mask[static_cast<size_t>(j)] && reps.pair(i, j);
      for (int f = 0; f < dp; ++f)
        m.pair_gate.at(i * n + j, f) = pair_active ? 1.0 : 0.0;
    }
  }
  return m;
}

NodeId attention_block(Tape& tape, Binder& P, const std::string& prefix, NodeId x, int dim,
                       NodeId pair_bias /*-1 if none*/, const Tensor* attn_mask,
                       const Tensor* attn_gate) {
  NodeId q = tape.linear(x, P(prefix + "wq"), P(prefix + "bq"));
  NodeId k = tape.linear(x, P(prefix + "wk"), P(prefix + "bk"));
  NodeId v = tape.linear(x, P(prefix + "wv"), P(prefix + "bv"));
  NodeId logits = tape.scale(tape.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dim)));
  if (pair_bias >= 0) logits = tape.add(logits, pair_bias);
  if (attn_mask) logits = tape.add_const(logits, *attn_mask);
  NodeId attn = tape.softmax_rows(logits);
  NodeId out = tape.linear(tape.matmul(attn, v), P(prefix + "wo"), P(prefix + "bo"));
  if (attn_gate) out = tape.mul_const(out, *attn_gate);
  return out;
}

NodeId transition_block(Tape& tape, Binder& P, const std::string& prefix, NodeId x,
                        const Tensor* gate) {
  NodeId hidden = tape.gelu(tape.linear(x, P(prefix + "w1"), P(prefix + "b1")));
  NodeId out = tape.linear(hidden, P(prefix + "w2"), P(prefix + "b2"));
  if (gate) out = tape.mul_const(out, *gate);
  return out;
}

}  // namespace

EncoderNodes encoder_forward(Tape& tape, Binder& P, const TokenReps& reps,
                             const ModelConfig& cfg) {
  reps.validate(cfg);
  int n = reps.n;
  MaskSet masks = build_masks(reps, cfg);
  NodeId s = tape.constant(reps.s);
  NodeId z = tape.constant(reps.z);
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    std::string p = "enc" + std::to_string(b) + ".";
    // single update: pair-biased masked attention plus transition
    NodeId bias = tape.reshape(tape.linear(z, P(p + "attn.wz"), -1), {n, n});
    NodeId attn_out = attention_block(tape, P, p + "attn.", s, cfg.d_single, bias,
                                      &masks.attn_mask, &masks.attn_gate);
    s = tape.add(s, attn_out);
    s = tape.add(s, transition_block(tape, P, p + "trans.", s, &masks.row_gate));
    // pair update: gated outer product plus pair transition
    NodeId a = tape.linear(s, P(p + "outer.wa"), P(p + "outer.ba"));
    NodeId bb = tape.linear(s, P(p + "outer.wb"), P(p + "outer.bb"));
    NodeId outer = tape.outer_rows(a, bb);
    NodeId pair_update = tape.linear(outer, P(p + "outer.wp"), P(p + "outer.bp"));
    z = tape.add(z, tape.mul_const(pair_update, masks.pair_gate));
    z = tape.add(z, transition_block(tape, P, p + "pair_trans.", z, &masks.pair_gate));
  }
  if (!tape.value(s).finite() || !tape.value(z).finite())
    throw Error(Err::NonFiniteActivation, "encoder output");
  return {s, z};
}

// ---------------------------------------------------------------------------
// affinity head

HeadNodes affinity_head_forward(Tape& tape, Binder& P, NodeId s, NodeId z, const TokenReps& reps,
                                const ModelConfig& cfg) {
  if (reps.num_ligand < 1) throw Error(Err::ZeroLigandTokens, "affinity head");
  if (reps.num_protein < 1) throw Error(Err::ZeroProteinTokens, "affinity head");
  int n = reps.n;

  // token-level contribution
  NodeId ln_s = tape.layernorm(s, P("head.ln_s.g"), P("head.ln_s.b"));
  NodeId gate_s = tape.sigmoid(tape.linear(ln_s, P("head.gate_s.w"), P("head.gate_s.b")));
  NodeId val_s = tape.linear(tape.gelu(tape.linear(ln_s, P("head.mlp_s.w1"), P("head.mlp_s.b1"))),
                             P("head.mlp_s.w2"), P("head.mlp_s.b2"));
  NodeId s_affinity = tape.reshape(tape.mul(gate_s, val_s), {n});

  // pair-level aggregation over protein-ligand and ligand-ligand pairs only
  NodeId ln_z = tape.layernorm(z, P("head.ln_z.g"), P("head.ln_z.b"));
  NodeId gate_z = tape.sigmoid(tape.linear(ln_z, P("head.gate_z.w"), P("head.gate_z.b")));
  NodeId val_z = tape.linear(tape.gelu(tape.linear(ln_z, P("head.mlp_z.w1"), P("head.mlp_z.b1"))),
                             P("head.mlp_z.w2"), P("head.mlp_z.b2"));
  NodeId pair_scores = tape.reshape(tape.mul(gate_z, val_z), {n, n});

  Tensor pair_weight({n, n});  // 1/rowcount at retained pairs
  for (int i = 0; i < n; ++i) {
    if (!reps.single_mask[static_cast<size_t>(i)]) continue;
    int count = 0;
    for (int j = 0; j < n; ++j) {
      bool retained = reps.single_mask[static_cast<size_t>(j)] && reps.pair(i, j) &&
                      !(reps.is_ligand[static_cast<size_t>(i)] == 0 &&
                        reps.is_ligand[static_cast<size_t>(j)] == 0);
      if (retained) ++count;
    }
    if (count == 0) continue;
    for (int j = 0; j < n; ++j) {
      bool retained = reps.single_mask[static_cast<size_t>(j)] && reps.pair(i, j) &&
                      !(reps.is_ligand[static_cast<size_t>(i)] == 0 &&
                        reps.is_ligand[static_cast<size_t>(j)] == 0);
      if (retained) pair_weight.at(i, j) = 1.0 / count;
    }
  }
  NodeId z_affinity = tape.row_sum(tape.mul_const(pair_scores, pair_weight));

  NodeId batch_affinity = tape.add(s_affinity, z_affinity);

  // ligand-specific weighting; the weights are data, not parameters
  double ratio = cfg.ligand_weight_ratio * static_cast<double>(reps.num_protein) /
                 static_cast<double>(reps.num_ligand);
  Tensor raw({n}), norm({n});
  for (int i = 0; i < n; ++i) {
    if (!reps.single_mask[static_cast<size_t>(i)]) continue;
    raw.v[static_cast<size_t>(i)] = reps.is_ligand[static_cast<size_t>(i)] ? ratio : 1.0;
  }
  double mx = -1e300;
  for (int i = 0; i < n; ++i)
    if (reps.single_mask[static_cast<size_t>(i)])
      mx = std::max(mx, raw.v[static_cast<size_t>(i)] / cfg.temperature);
  double denom = 0.0;
  for (int i = 0; i < n; ++i)
    if (reps.single_mask[static_cast<size_t>(i)])
      denom += std::exp(raw.v[static_cast<size_t>(i)] / cfg.temperature - mx);
  for (int i = 0; i < n; ++i)
    if (reps.single_mask[static_cast<size_t>(i)])
      norm.v[static_cast<size_t>(i)] =
          std::exp(raw.v[static_cast<size_t>(i)] / cfg.temperature - mx) / denom;

  NodeId affinity = tape.dot(batch_affinity, tape.constant(norm));
  return {affinity, batch_affinity, std::move(raw), std::move(norm)};
}

FitnessOutput affinity_head(const TokenReps& reps, const ParamStore& params,
                            const ModelConfig& cfg) {
  Tape tape;
  Binder P(tape, params);
  EncoderNodes enc = encoder_forward(tape, P, reps, cfg);
  HeadNodes head = affinity_head_forward(tape, P, enc.s, enc.z, reps, cfg);
  FitnessOutput out;
  out.per_token_affinity = tape.value(head.per_token).v;
  out.raw_weights = head.raw_weights.v;
  out.norm_weights = head.norm_weights.v;
  out.affinity = tape.scalar(head.affinity);
  return out;
}

double teacher_score(const TokenReps& reps, const ParamStore& params, const ModelConfig& cfg) {
  return affinity_head(reps, params, cfg).affinity;
}

// ---------------------------------------------------------------------------
// student

StudentNodes student_forward(Tape& tape, Binder& P, const StudentInput& input,
                             const ModelConfig& cfg) {
  if (static_cast<int>(input.protein_embedding.size()) != cfg.d_protein)
    throw Error(Err::ShapeMismatch, "protein embedding dimension");
  if (static_cast<int>(input.prior_embedding.size()) != cfg.d_prior())
    throw Error(Err::ShapeMismatch, "prior embedding dimension");
  if (input.fingerprint.width() != cfg.fp_width)
    throw Error(Err::ShapeMismatch, "fingerprint width");

  NodeId fp_proj = tape.bits_linear(input.fingerprint, P("stu.fp.w"), P("stu.fp.b"));
  NodeId prot_leaf = tape.leaf(Tensor({cfg.d_protein}, input.protein_embedding), true);
  NodeId prior_leaf = tape.leaf(Tensor({cfg.d_prior()}, input.prior_embedding), true);
  NodeId prot_proj = tape.linear(prot_leaf, P("stu.prot.w"), P("stu.prot.b"));
  NodeId prior_proj = tape.linear(prior_leaf, P("stu.prior.w"), P("stu.prior.b"));
  NodeId tokens = tape.concat_rows({fp_proj, prot_proj, prior_proj});

  for (int b = 0; b < cfg.student_blocks; ++b) {
    std::string p = "stu.blk" + std::to_string(b) + ".";
    NodeId attn_out = attention_block(tape, P, p + "attn.", tokens, cfg.d_model, -1, nullptr, nullptr);
    tokens = tape.add(tokens, attn_out);
    tokens = tape.add(tokens, transition_block(tape, P, p + "trans.", tokens, nullptr));
  }
  NodeId pooled = tape.mean_rows(tokens);
  NodeId h = tape.linear(pooled, P("stu.head_h.w"), P("stu.head_h.b"));
  NodeId y = tape.linear(pooled, P("stu.head_y.w"), P("stu.head_y.b"));
  return {h, y, prot_leaf, prior_leaf, fp_proj};
}

StudentOutput student_score(const StudentInput& input, const ParamStore& params,
                            const ModelConfig& cfg) {
  Tape tape;
  Binder P(tape, params);
  StudentNodes nodes = student_forward(tape, P, input, cfg);
  StudentOutput out;
  out.h = tape.value(nodes.h).v;
  out.y = tape.scalar(nodes.y);
  if (!std::isfinite(out.y)) throw Error(Err::NonFiniteActivation, "student output");
  return out;
}

double student_input_grad_norm(const StudentInput& input, const ParamStore& params,
                               const ModelConfig& cfg) {
  Tape tape;
  Binder P(tape, params);
  StudentNodes nodes = student_forward(tape, P, input, cfg);
  tape.backward(nodes.y);
  double sq = 0.0;
  for (double g : tape.grad(nodes.protein_leaf).v) sq += g * g;
  for (double g : tape.grad(nodes.prior_leaf).v) sq += g * g;
  // d y / d bit_b = W_fp[b,:] . (grad at the fp projection)
  const Tensor& gproj = tape.grad(nodes.fp_projection);
  const Tensor& wfp = params.at("stu.fp.w");
  if (!gproj.v.empty()) {
    for (int bit = 0; bit < cfg.fp_width; ++bit) {
      double acc = 0.0;
      for (int j = 0; j < cfg.d_model; ++j)
        acc += wfp.at(bit, j) * gproj.v[static_cast<size_t>(j)];
      sq += acc * acc;
    }
  }
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------
// synthesized token reps and trunk embedding

TokenReps synthesize_token_reps(const std::vector<double>& protein_embedding,
                                const fp::Fingerprint& fingerprint, const ModelConfig& cfg) {
  if (protein_embedding.empty()) throw Error(Err::ShapeMismatch, "empty protein embedding");
  int P = cfg.protein_tokens, L = cfg.ligand_tokens;
  int n = P + L, ds = cfg.d_single, dp = cfg.d_pair;
  TokenReps reps;
  reps.n = n;
  reps.num_protein = P;
  reps.num_ligand = L;
  reps.s = Tensor({n, ds});
  reps.z = Tensor({n * n, dp});
  reps.single_mask.assign(static_cast<size_t>(n), 1);
  reps.pair_mask.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 1);
  reps.is_ligand.assign(static_cast<size_t>(n), 0);
  for (int t = 0; t < L; ++t) reps.is_ligand[static_cast<size_t>(P + t)] = 1;

  size_t pd = protein_embedding.size();
  for (int t = 0; t < P; ++t)
    for (int f = 0; f < ds; ++f)
      reps.s.at(t, f) = protein_embedding[(static_cast<size_t>(t) * static_cast<size_t>(ds) +
                                           static_cast<size_t>(f)) % pd];

  // ligand features: folded sums of fingerprint bits, centered so typical
  // values sit near zero
  int width = fingerprint.width();
  int stride = L * ds;
  int folds = std::max(1, width / stride);
  for (int t = 0; t < L; ++t)
    for (int f = 0; f < ds; ++f) {
      int m = t * ds + f;
      int set = 0;
      for (int r = 0; r < folds; ++r)
        if (fingerprint.test((m + r * stride) % width)) ++set;
      reps.s.at(P + t, f) = 0.35 * set - 0.8;
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < dp; ++c)
        reps.z.at(i * n + j, c) =
            0.2 * reps.s.at(i, c % ds) * reps.s.at(j, (c * 5 + 3) % ds);
  return reps;
}

std::vector<double> trunk_embedding(const TokenReps& reps, const ParamStore& params,
                                    const ModelConfig& cfg) {
  Tape tape;
  Binder P(tape, params);
  EncoderNodes enc = encoder_forward(tape, P, reps, cfg);
  const Tensor& s = tape.value(enc.s);
  std::vector<double> out(static_cast<size_t>(cfg.d_single), 0.0);
  int count = 0;
  for (int i = 0; i < reps.n; ++i) {
    if (!reps.single_mask[static_cast<size_t>(i)]) continue;
    ++count;
    for (int f = 0; f < cfg.d_single; ++f) out[static_cast<size_t>(f)] += s.at(i, f);
  }
  for (double& x : out) x /= std::max(1, count);
  return out;
}

// ---------------------------------------------------------------------------
// gradcheck

double gradcheck(const GradFn& f, ParamStore& params, double eps) {
  GradEval base = f(params);
  if (!std::isfinite(base.value)) throw Error(Err::NonFiniteGradient, "non-finite value");
  for (const auto& [name, g] : base.grads)
    if (!g.finite()) throw Error(Err::NonFiniteGradient, "gradient of " + name);
  double max_rel = 0.0;
  for (auto& [name, tensor] : params.tensors()) {
    for (size_t i = 0; i < tensor.v.size(); ++i) {
      double orig = tensor.v[i];
      tensor.v[i] = orig + eps;
      double up = f(params).value;
      tensor.v[i] = orig - eps;
      double down = f(params).value;
      tensor.v[i] = orig;
      double numeric = (up - down) / (2.0 * eps);
      double analytic = 0.0;
      auto it = base.grads.find(name);
      if (it != base.grads.end() && !it->second.v.empty()) analytic = it->second.v[i];
      double rel = std::abs(analytic - numeric) /
                   std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// files

namespace {

void write_u16(std::ofstream& out, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v & 0xff), static_cast<uint8_t>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ofstream& out, uint32_t v) {
  uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}


uint32_t read_u32(std::ifstream& in) {
  uint8_t b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(Err::IoError, "truncated checkpoint");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write checkpoint '" + path + "'");
  out.write("AURO", 4);
  write_u32(out, 1);
  for (const auto& [name, tensor] : params.tensors()) {
    write_u16(out, static_cast<uint16_t>(name.size()));
    out.write(name.data(), static_cast<long>(name.size()));
    uint8_t rank = static_cast<uint8_t>(tensor.shape.size());
    out.write(reinterpret_cast<const char*>(&rank), 1);
    for (int d : tensor.shape) write_u32(out, static_cast<uint32_t>(d));
    for (double x : tensor.v) {
      float f = static_cast<float>(x);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      write_u32(out, bits);
    }
  }
}

ParamStore load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open checkpoint '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "AURO")
    throw Error(Err::IoError, "bad checkpoint magic");
  uint32_t version = read_u32(in);
  if (version != 1) throw Error(Err::IoError, "unsupported checkpoint version");
  ParamStore params;
  while (true) {
    uint8_t len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) break;
    uint16_t len = static_cast<uint16_t>(len_bytes[0] | (len_bytes[1] << 8));
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw Error(Err::IoError, "truncated checkpoint");
    uint8_t rank;
    if (!in.read(reinterpret_cast<char*>(&rank), 1)) throw Error(Err::IoError, "truncated checkpoint");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(read_u32(in));
    Tensor t(shape);
    for (double& x : t.v) {
      uint32_t bits = read_u32(in);
      float f;
      std::memcpy(&f, &bits, 4);
      x = static_cast<double>(f);
    }
    params.put(name, std::move(t));
  }
  return params;
}

std::vector<double> load_protein_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open protein embedding '" + path + "'");
  std::string header;
  if (!(in >> header) || header.rfind("dim=", 0) != 0)
    throw Error(Err::IoError, "protein embedding needs a dim=<D> header");
  int dim = std::stoi(header.substr(4));
  std::vector<double> out;
  out.reserve(static_cast<size_t>(dim));
  double v;
  while (in >> v) out.push_back(v);
  if (static_cast<int>(out.size()) != dim)
    throw Error(Err::IoError, "protein embedding has " + std::to_string(out.size()) +
                                  " values, header says " + std::to_string(dim));
  return out;
}

void save_protein_embedding(const std::string& path, const std::vector<double>& embedding) {
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write protein embedding '" + path + "'");
  out << "dim=" << embedding.size() << "\n";
  out.precision(17);
  for (size_t i = 0; i < embedding.size(); ++i) {
    if (i) out << ' ';
    out << embedding[i];
  }
  out << "\n";
}

}  // namespace aura::model
