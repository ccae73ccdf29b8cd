#include "aurascreen/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "aurascreen/crippen.hpp"
#include "aurascreen/losses.hpp"
#include "json.hpp"

namespace aura::harness {

using chem::Atom;
using chem::Bond;
using chem::BondOrder;
using chem::Molecule;

// ---------------------------------------------------------------------------
// molecule generator

namespace {

struct Budget {
  std::vector<int> remaining;  // spare single-bond slots per atom
};

int add_atom(Molecule& mol, Budget& budget, int element, bool aromatic, int capacity) {
  Atom atom;
  atom.element = element;
  atom.aromatic = aromatic;
  mol.atoms.push_back(atom);
  budget.remaining.push_back(capacity);
  return static_cast<int>(mol.atoms.size()) - 1;
}

void add_bond(Molecule& mol, Budget& budget, int a, int b, BondOrder order) {
  Bond bond;
  bond.a = a;
  bond.b = b;
  bond.order = order;
  mol.bonds.push_back(bond);
  int cost = order == BondOrder::Double ? 2 : order == BondOrder::Triple ? 3 : 1;
  if (order == BondOrder::Aromatic) cost = 1;
  budget.remaining[static_cast<size_t>(a)] -= cost;
  budget.remaining[static_cast<size_t>(b)] -= cost;
}

// ring motifs return the index of one substitutable ring atom; atom
// capacities include the two ring bonds each member carries
int attach_ring(Molecule& mol, Budget& budget, Rng& rng) {
  int kind = static_cast<int>(rng.below(5));
  std::vector<int> ring;
  auto aromatic_ring = [&](const std::vector<int>& elements,
                           const std::vector<int>& substituent_slots) {
    for (size_t i = 0; i < elements.size(); ++i)
      ring.push_back(add_atom(mol, budget, elements[i], true, substituent_slots[i] + 2));
    for (size_t i = 0; i < ring.size(); ++i)
      add_bond(mol, budget, ring[i], ring[(i + 1) % ring.size()], BondOrder::Aromatic);
  };
  auto saturated_ring = [&](int members) {
    for (int i = 0; i < members; ++i) ring.push_back(add_atom(mol, budget, 6, false, 4));
    for (size_t i = 0; i < ring.size(); ++i)
      add_bond(mol, budget, ring[i], ring[(i + 1) % ring.size()], BondOrder::Single);
  };
  switch (kind) {
    case 0: aromatic_ring({6, 6, 6, 6, 6, 6}, {1, 1, 1, 1, 1, 1}); break;
    case 1: aromatic_ring({7, 6, 6, 6, 6, 6}, {0, 1, 1, 1, 1, 1}); break;  // pyridine
    case 2: aromatic_ring({16, 6, 6, 6, 6}, {0, 1, 1, 1, 1}); break;       // thiophene
    case 3: saturated_ring(6); break;
    default: saturated_ring(5); break;
  }
  std::vector<int> eligible;
  for (int idx : ring)
    if (budget.remaining[static_cast<size_t>(idx)] > 0) eligible.push_back(idx);
  return eligible[static_cast<size_t>(rng.below(eligible.size()))];
}

int sample_element(Rng& rng) {
  int r = static_cast<int>(rng.below(100));
  if (r < 62) return 6;
  if (r < 73) return 7;
  if (r < 84) return 8;
  if (r < 88) return 16;
  if (r < 94) return 9;
  return 17;
}

int capacity_for(int element) {
  switch (element) {
    case 6: return 4;
    case 7: return 3;
    case 8: return 2;
    case 16: return 2;
    default: return 1;  // halogens
  }
}

}  // namespace

Molecule random_molecule(Rng& rng) {
  Molecule mol;
  Budget budget;
  int target_heavy = 8 + static_cast<int>(rng.below(19));  // 8..26
  int rings = 0;
  if (rng.below(100) < 35) {
    attach_ring(mol, budget, rng);
    ++rings;
  } else {
    add_atom(mol, budget, 6, false, 4);
  }
  while (static_cast<int>(mol.atoms.size()) < target_heavy) {
    std::vector<int> parents;
    for (size_t i = 0; i < mol.atoms.size(); ++i)
      if (budget.remaining[i] > 0) parents.push_back(static_cast<int>(i));
    if (parents.empty()) break;
    int parent = parents[static_cast<size_t>(rng.below(parents.size()))];
    bool want_ring = rings < 3 && rng.below(100) < 16 &&
                     static_cast<int>(mol.atoms.size()) + 6 <= target_heavy + 4;
    if (want_ring) {
      int anchor = attach_ring(mol, budget, rng);
      add_bond(mol, budget, parent, anchor, BondOrder::Single);
      ++rings;
      continue;
    }
    int element = sample_element(rng);
    int child = add_atom(mol, budget, element, false, capacity_for(element));
    bool can_double = budget.remaining[static_cast<size_t>(parent)] >= 2 &&
                      capacity_for(element) >= 2 && !mol.atoms[static_cast<size_t>(parent)].aromatic &&
                      rng.below(100) < 12;
    add_bond(mol, budget, parent, child, can_double ? BondOrder::Double : BondOrder::Single);
  }
  chem::finalize_graph(mol);
  return mol;
}

// ---------------------------------------------------------------------------
// synthetic world

SyntheticWorld generate_world(uint64_t seed, size_t size, double noise, int fp_width,
                              int d_protein) {
  SyntheticWorld world;
  world.seed = seed;
  world.noise = noise;
  Rng rng(seed);

  world.planted_weights.resize(static_cast<size_t>(fp_width));
  for (double& w : world.planted_weights) w = rng.normal();
  world.protein_embedding.resize(static_cast<size_t>(d_protein));
  for (double& x : world.protein_embedding) x = 0.5 * rng.normal();

  world.library.reserve(size);
  world.fingerprints.reserve(size);
  std::vector<double> raw(size, 0.0);
  for (size_t i = 0; i < size; ++i) {
    Molecule mol = random_molecule(rng);
    std::string smiles = chem::write_smiles(mol, rng);
    Molecule reparsed = chem::parse_smiles(smiles);
    fp::Fingerprint fingerprint = fp::ecfp(reparsed, 2, fp_width);
    char id[32];
    std::snprintf(id, sizeof(id), "CPD-%07zu", i);
    world.library.push_back({id, smiles});
    double score = 0.0;
    for (int bit = 0; bit < fp_width; ++bit)
      if (fingerprint.test(bit)) score += world.planted_weights[static_cast<size_t>(bit)];
    raw[i] = score;
    world.fingerprints.push_back(std::move(fingerprint));
  }
  if (size > 0) {
    double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(size);
    double var = 0.0;
    for (double x : raw) var += (x - mean) * (x - mean);
    var /= static_cast<double>(size);
    double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    world.labels.resize(size);
    for (size_t i = 0; i < size; ++i)
      world.labels[i] = (raw[i] - mean) / sd + noise * rng.normal();
  }
  return world;
}

void save_world_library(const SyntheticWorld& world, const std::string& path) {
  chem::save_library(path, world.library);
}

// ---------------------------------------------------------------------------
// student training

namespace {

cluster::CentroidIndex build_world_prior_index(const SyntheticWorld& world,
                                               const nn::ParamStore& params,
                                               const model::ModelConfig& cfg,
                                               size_t cluster_sample) {
  size_t n = world.library.size();
  size_t sample = std::min(cluster_sample == 0 ? n : cluster_sample, n);
  size_t stride = sample > 0 ? (n + sample - 1) / sample : 1;
  std::vector<fp::CacheEntry> entries;
  for (size_t i = 0; i < n; i += stride)
    entries.push_back({world.library[i].id, world.fingerprints[i]});
  auto clusters = cluster::butina_cluster(entries, 0.6, 1);
  std::map<std::string, fp::Fingerprint> fps;
  for (const auto& e : entries) fps.emplace(e.id, e.fp);
  std::map<std::string, std::vector<double>> embeddings;
  for (const auto& cl : clusters) {
    model::TokenReps reps =
        model::synthesize_token_reps(world.protein_embedding, fps.at(cl.centroid_id), cfg);
    embeddings[cl.centroid_id] = model::trunk_embedding(reps, params, cfg);
  }
  return cluster::build_prior_index(clusters, fps, embeddings, 100000,
                                    static_cast<long>(n));
}

struct MomentumSgd {
  double lr;
  double momentum;
  std::map<std::string, nn::Tensor> velocity;

  void step(nn::ParamStore& params, const std::map<std::string, nn::Tensor>& grads, double scale) {
    for (const auto& [name, grad] : grads) {
      nn::Tensor& p = params.at(name);
      nn::Tensor& vel = velocity[name];
      if (vel.v.size() != p.v.size()) {
        vel.shape = p.shape;
        vel.v.assign(p.v.size(), 0.0);
      }
      for (size_t i = 0; i < p.v.size(); ++i) {
        vel.v[i] = momentum * vel.v[i] - lr * grad.v[i] * scale;
        p.v[i] += vel.v[i];
      }
    }
  }
};

void accumulate_bound_grads(const nn::Tape& tape, const nn::Binder& binder,
                            std::map<std::string, nn::Tensor>& acc) {
  for (const auto& [name, id] : binder.bound()) {
    const nn::Tensor& g = tape.grad(id);
    if (g.v.empty()) continue;
    nn::Tensor& slot = acc[name];
    if (slot.v.size() != g.v.size()) {
      slot.shape = g.shape;
      slot.v.assign(g.v.size(), 0.0);
    }
    for (size_t i = 0; i < g.v.size(); ++i) slot.v[i] += g.v[i];
  }
}

}  // namespace

StudentTrainResult train_student(const SyntheticWorld& world, const StudentTrainOptions& opt) {
  size_t n = world.library.size();
  if (n == 0) throw Error(Err::EmptyLibrary, "empty synthetic world");
  if (opt.train_count == 0 || opt.train_count > n)
    throw Error(Err::ConfigInvalid, "train_count out of range");

  StudentTrainResult result;
  result.params = model::init_params(opt.model, opt.seed);
  result.prior_index = build_world_prior_index(world, result.params, opt.model, opt.cluster_sample);

  Rng rng(opt.seed ^ 0x5eedULL);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  result.train_indices.assign(order.begin(), order.begin() + static_cast<long>(opt.train_count));
  result.holdout_indices.assign(order.begin() + static_cast<long>(opt.train_count), order.end());

  // fixed per-example inputs (and teacher targets when distilling)
  struct Example {
    size_t index;
    std::vector<double> prior;
    std::vector<double> teacher_h;
    double target_y = 0.0;
  };
  std::vector<Example> examples;
  examples.reserve(opt.train_count);
  for (size_t idx : result.train_indices) {
    Example ex;
    ex.index = idx;
    ex.prior =
        cluster::nearest_centroid(world.fingerprints[idx], result.prior_index).prior_embedding;
    if (opt.distill_from_teacher) {
      model::TokenReps reps =
          model::synthesize_token_reps(world.protein_embedding, world.fingerprints[idx], opt.model);
      ex.teacher_h = model::trunk_embedding(reps, result.params, opt.model);
      ex.target_y = model::teacher_score(reps, result.params, opt.model);
    } else {
      ex.target_y = world.labels[idx];
    }
    examples.push_back(std::move(ex));
  }

  MomentumSgd sgd{opt.lr, opt.momentum, {}};
  std::vector<size_t> epoch_order(examples.size());
  std::iota(epoch_order.begin(), epoch_order.end(), 0);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(epoch_order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < epoch_order.size();
         start += static_cast<size_t>(opt.batch_size)) {
      size_t end = std::min(epoch_order.size(), start + static_cast<size_t>(opt.batch_size));
      std::map<std::string, nn::Tensor> grad_acc;
      for (size_t k = start; k < end; ++k) {
        const Example& ex = examples[epoch_order[k]];
        nn::Tape tape;
        nn::Binder binder(tape, result.params);
        model::StudentInput input{world.fingerprints[ex.index], world.protein_embedding, ex.prior};
        model::StudentNodes nodes = model::student_forward(tape, binder, input, opt.model);

        losses::DistillPair pair;
        pair.h_pred = tape.value(nodes.h).v;
        pair.h_main = opt.distill_from_teacher ? ex.teacher_h : pair.h_pred;
        pair.y_pred = tape.scalar(nodes.y);
        pair.y_true = ex.target_y;
        pair.alpha = opt.distill_from_teacher ? opt.alpha : 0.0;
        pair.beta = opt.beta;
        losses::DistillResult loss = losses::distill_loss(pair);
        epoch_loss += loss.loss;

        nn::Tensor seed_h({static_cast<int>(pair.h_pred.size())}, loss.grad_h);
        nn::Tensor seed_y({1});
        seed_y.v[0] = loss.grad_y;
        tape.backward({{nodes.h, seed_h}, {nodes.y, seed_y}});
        accumulate_bound_grads(tape, binder, grad_acc);
      }
      sgd.step(result.params, grad_acc, 1.0 / static_cast<double>(end - start));
    }
    epoch_loss /= static_cast<double>(examples.size());
    if (!std::isfinite(epoch_loss)) throw Error(Err::DivergenceDetected, "student loss");
    result.loss_curve.push_back(epoch_loss);
  }
  return result;
}

std::vector<double> score_compounds(const SyntheticWorld& world, const std::vector<size_t>& indices,
                                    const nn::ParamStore& params,
                                    const cluster::CentroidIndex& prior_index,
                                    const model::ModelConfig& cfg, int workers) {
  std::vector<double> scores(indices.size(), 0.0);
  parallel_for(indices.size(), workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      size_t idx = indices[i];
      const auto& centroid = cluster::nearest_centroid(world.fingerprints[idx], prior_index);
      model::StudentInput input{world.fingerprints[idx], world.protein_embedding,
                                centroid.prior_embedding};
      scores[i] = model::student_score(input, params, cfg).y;
    }
  });
  return scores;
}

// ---------------------------------------------------------------------------
// DPO head training

namespace {

std::vector<double> group_scores(const sampler::DpoGroup& group,
                                 const std::map<std::string, fp::Fingerprint>& fingerprints,
                                 const std::vector<double>& protein_embedding,
                                 const nn::ParamStore& params, const model::ModelConfig& cfg) {
  std::vector<double> scores;
  scores.reserve(group.records.size());
  for (const auto& rec : group.records) {
    auto it = fingerprints.find(rec.compound_id);
    if (it == fingerprints.end())
      throw Error(Err::ConfigInvalid, "no fingerprint for '" + rec.compound_id + "'");
    model::TokenReps reps = model::synthesize_token_reps(protein_embedding, it->second, cfg);
    scores.push_back(model::teacher_score(reps, params, cfg));
  }
  return scores;
}

}  // namespace

HeadTrainResult train_head_dpo(const std::vector<sampler::DpoGroup>& groups,
                               const std::map<std::string, fp::Fingerprint>& fingerprints,
                               const std::vector<double>& protein_embedding,
                               const HeadTrainOptions& opt) {
  if (groups.empty()) throw Error(Err::EmptyLibrary, "no ranking groups");
  HeadTrainResult result;
  result.params = model::init_params(opt.model, opt.seed);
  MomentumSgd sgd{opt.lr, opt.momentum, {}};
  Rng rng(opt.seed ^ 0xd0ULL);

  std::vector<size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    double epoch_prob = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opt.batch_groups)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(opt.batch_groups));
      size_t batch = end - start;

      std::vector<nn::Tape> tapes(batch);
      std::vector<nn::Binder> binders;
      binders.reserve(batch);
      std::vector<std::vector<nn::NodeId>> score_nodes(batch);
      std::vector<losses::RankingGroup> ranking(batch);
      for (size_t g = 0; g < batch; ++g) {
        const sampler::DpoGroup& group = groups[order[start + g]];
        binders.emplace_back(tapes[g], result.params);
        losses::RankingGroup rg;
        rg.tau = opt.tau;
        rg.true_order = group.true_order;
        for (const auto& rec : group.records) {
          auto it = fingerprints.find(rec.compound_id);
          if (it == fingerprints.end())
            throw Error(Err::ConfigInvalid, "no fingerprint for '" + rec.compound_id + "'");
          model::TokenReps reps =
              model::synthesize_token_reps(protein_embedding, it->second, opt.model);
          model::EncoderNodes enc = model::encoder_forward(tapes[g], binders[g], reps, opt.model);
          model::HeadNodes head =
              model::affinity_head_forward(tapes[g], binders[g], enc.s, enc.z, reps, opt.model);
          score_nodes[g].push_back(head.affinity);
          rg.scores.push_back(tapes[g].scalar(head.affinity));
        }
        ranking[g] = std::move(rg);
      }

      losses::DpoResult dpo = losses::dpo_loss(ranking);
      epoch_loss += dpo.loss * static_cast<double>(batch);
      for (const auto& rg : ranking) epoch_prob += losses::plackett_luce_prob(rg);

      std::map<std::string, nn::Tensor> grad_acc;
      for (size_t g = 0; g < batch; ++g) {
        std::vector<std::pair<nn::NodeId, nn::Tensor>> seeds;
        for (size_t k = 0; k < score_nodes[g].size(); ++k) {
          nn::Tensor seed({1});
          seed.v[0] = dpo.grads[g][k];
          seeds.emplace_back(score_nodes[g][k], std::move(seed));
        }
        tapes[g].backward(seeds);
        accumulate_bound_grads(tapes[g], binders[g], grad_acc);
      }
      sgd.step(result.params, grad_acc, 1.0);
    }
    epoch_loss /= static_cast<double>(groups.size());
    if (!std::isfinite(epoch_loss)) throw Error(Err::DivergenceDetected, "dpo loss");
    result.loss_curve.push_back(epoch_loss);
    result.mean_prob_curve.push_back(epoch_prob / static_cast<double>(groups.size()));
  }
  return result;
}

double mean_group_probability(const std::vector<sampler::DpoGroup>& groups,
                              const std::map<std::string, fp::Fingerprint>& fingerprints,
                              const std::vector<double>& protein_embedding,
                              const nn::ParamStore& params, const model::ModelConfig& cfg,
                              double tau) {
  if (groups.empty()) throw Error(Err::EmptyLibrary, "no ranking groups");
  double total = 0.0;
  for (const auto& group : groups) {
    losses::RankingGroup rg;
    rg.scores = group_scores(group, fingerprints, protein_embedding, params, cfg);
    rg.true_order = group.true_order;
    rg.tau = tau;
    total += losses::plackett_luce_prob(rg);
  }
  return total / static_cast<double>(groups.size());
}

void write_manifest(const std::string& path, uint64_t seed, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["version"] = kVersion;
  j["crippen_table"] = chem::kCrippenTableVersion;
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write manifest '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace aura::harness
