// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aurascreen/chem.hpp"
#include "aurascreen/cluster.hpp"
#include "aurascreen/crippen.hpp"
#include "aurascreen/fingerprint.hpp"
#include "aurascreen/harness.hpp"
#include "aurascreen/losses.hpp"
#include "aurascreen/metrics.hpp"
#include "aurascreen/model.hpp"
#include "aurascreen/sampler.hpp"
#include "aurascreen/screening.hpp"
#include "oracles/metrics_reference.hpp"

using namespace aura;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define REQUIRE_MSG(cond, ...)                                   \
  do {                                                           \
    if (!(cond)) {                                               \
      char buf_[512];                                            \
      std::snprintf(buf_, sizeof(buf_), __VA_ARGS__);            \
      throw CheckFailure(std::string(#cond) + " -- " + buf_);    \
    }                                                            \
  } while (0)

struct Runner {
  int failures = 0;

  void criterion(int number, const std::string& name, const std::function<void()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      body();
      double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("PASS criterion %2d: %s (%.1fs)\n", number, name.c_str(), dt);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL criterion %2d: %s -- %s\n", number, name.c_str(), e.what());
    }
    std::fflush(stdout);
  }
};

model::ModelConfig tiny_config() {
  model::ModelConfig cfg;
  cfg.d_single = 8;
  cfg.d_pair = 4;
  cfg.d_transition = 12;
  cfg.encoder_blocks = 2;
  cfg.fp_width = 128;
  cfg.d_model = 8;
  cfg.student_blocks = 2;
  cfg.d_protein = 8;
  cfg.protein_tokens = 2;
  cfg.ligand_tokens = 2;
  return cfg;
}

model::TokenReps random_reps(const model::ModelConfig& cfg, int np, int nl, Rng& rng) {
  model::TokenReps reps;
  reps.n = np + nl;
  reps.num_protein = np;
  reps.num_ligand = nl;
  reps.s = nn::Tensor({reps.n, cfg.d_single});
  reps.z = nn::Tensor({reps.n * reps.n, cfg.d_pair});
  for (double& x : reps.s.v) x = rng.normal();
  for (double& x : reps.z.v) x = 0.5 * rng.normal();
  reps.single_mask.assign(static_cast<size_t>(reps.n), 1);
  reps.pair_mask.assign(static_cast<size_t>(reps.n) * static_cast<size_t>(reps.n), 1);
  reps.is_ligand.assign(static_cast<size_t>(reps.n), 0);
  for (int i = np; i < np + nl; ++i) reps.is_ligand[static_cast<size_t>(i)] = 1;
  return reps;
}

// the 100k synthetic world shared by criteria 8 and 10
const harness::SyntheticWorld& big_world() {
  static harness::SyntheticWorld world = harness::generate_world(20250810, 100000, 0.05, 1024, 32);
  return world;
}

// ---------------------------------------------------------------------------

void criterion_gradients() {
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    // sft_loss wrt predictions
    {
      nn::ParamStore params;
      nn::Tensor y({6});
      for (double& v : y.v) v = rng.normal();
      params.put("y_pred", y);
      losses::SftBatch base;
      base.y_true = {0.1, -0.4, 1.2, 0.0, 2.0, -1.1};
      base.sigma_exp = {1.0, 2.0, 0.5, 1.5, 1.0, 0.8};
      base.input_grad_norms = {0.3, 0.1, 0.2, 0.4, 0.1, 0.2};
      base.lambda = 0.01;
      auto f = [&](nn::ParamStore& p) {
        losses::SftBatch batch = base;
        batch.y_pred = p.at("y_pred").v;
        auto r = losses::sft_loss(batch);
        model::GradEval eval;
        eval.value = r.loss;
        eval.grads["y_pred"] = nn::Tensor({6}, r.grad);
        return eval;
      };
      worst = std::max(worst, model::gradcheck(f, params));
    }
    // dpo_loss wrt every group's scores
    {
      nn::ParamStore params;
      std::vector<losses::RankingGroup> groups(3);
      groups[0] = {{}, {2, 0, 3, 1}, 0.1, 0.9};
      groups[1] = {{}, {1, 0}, 0.5, 1.0};
      groups[2] = {{}, {0, 2, 1}, 1.0, 0.4};
      for (size_t g = 0; g < groups.size(); ++g) {
        nn::Tensor t({static_cast<int>(groups[g].true_order.size())});
        // keep score gaps small relative to tau: in the saturated softmax
        // tail the true gradient underflows past what central differences
        // can resolve, which would measure noise rather than the gradient
        double scale = 2.0 * groups[g].tau;
        for (double& v : t.v) v = scale * rng.normal();
        params.put("scores" + std::to_string(g), t);
      }
      auto f = [&](nn::ParamStore& p) {
        auto copy = groups;
        for (size_t g = 0; g < copy.size(); ++g)
          copy[g].scores = p.at("scores" + std::to_string(g)).v;
        auto r = losses::dpo_loss(copy);
        model::GradEval eval;
        eval.value = r.loss;
        for (size_t g = 0; g < copy.size(); ++g)
          eval.grads["scores" + std::to_string(g)] =
              nn::Tensor({static_cast<int>(r.grads[g].size())}, r.grads[g]);
        return eval;
      };
      worst = std::max(worst, model::gradcheck(f, params));
    }
    // distill_loss wrt h_pred and y_pred
    {
      nn::ParamStore params;
      nn::Tensor h({5}), y({1});
      for (double& v : h.v) v = rng.normal();
      y.v[0] = rng.normal();
      params.put("h_pred", h);
      params.put("y_pred", y);
      losses::DistillPair base;
      base.h_main = {0.3, -0.2, 0.8, 0.0, 1.4};
      base.y_true = -0.7;
      base.alpha = 1.3;
      base.beta = 0.8;
      auto f = [&](nn::ParamStore& p) {
        losses::DistillPair pair = base;
        pair.h_pred = p.at("h_pred").v;
        pair.y_pred = p.at("y_pred").v[0];
        auto r = losses::distill_loss(pair);
        model::GradEval eval;
        eval.value = r.loss;
        eval.grads["h_pred"] = nn::Tensor({5}, r.grad_h);
        nn::Tensor gy({1});
        gy.v[0] = r.grad_y;
        eval.grads["y_pred"] = gy;
        return eval;
      };
      worst = std::max(worst, model::gradcheck(f, params));
    }
    // affinity head wrt all head weights
    {
      model::ModelConfig cfg = tiny_config();
      cfg.encoder_blocks = 0;
      model::TokenReps reps = random_reps(cfg, 2, 2, rng);
      nn::ParamStore full = model::init_params(cfg, seed * 7 + 1);
      nn::ParamStore head_only;
      for (const auto& [name, tensor] : full.tensors())
        if (name.rfind("head.", 0) == 0) head_only.put(name, tensor);
      auto f = [&](nn::ParamStore& p) {
        nn::Tape tape;
        nn::Binder binder(tape, p);
        auto head = model::affinity_head_forward(tape, binder, tape.constant(reps.s),
                                                 tape.constant(reps.z), reps, cfg);
        tape.backward(head.affinity);
        model::GradEval eval;
        eval.value = tape.scalar(head.affinity);
        for (const auto& [name, id] : binder.bound()) eval.grads[name] = tape.grad(id);
        return eval;
      };
      worst = std::max(worst, model::gradcheck(f, head_only));
    }
    // student forward wrt all student weights
    {
      model::ModelConfig cfg = tiny_config();
      model::StudentInput input;
      input.fingerprint = fp::Fingerprint(cfg.fp_width);
      for (int i = 0; i < 16; ++i)
        input.fingerprint.set(static_cast<int>(rng.below(static_cast<uint64_t>(cfg.fp_width))));
      input.protein_embedding.resize(static_cast<size_t>(cfg.d_protein));
      for (double& x : input.protein_embedding) x = rng.normal();
      input.prior_embedding.resize(static_cast<size_t>(cfg.d_prior()));
      for (double& x : input.prior_embedding) x = rng.normal();
      nn::ParamStore full = model::init_params(cfg, seed * 11 + 3);
      nn::ParamStore student_only;
      for (const auto& [name, tensor] : full.tensors())
        if (name.rfind("stu.", 0) == 0) student_only.put(name, tensor);
      auto f = [&](nn::ParamStore& p) {
        nn::Tape tape;
        nn::Binder binder(tape, p);
        auto nodes = model::student_forward(tape, binder, input, cfg);
        tape.backward(nodes.y);
        model::GradEval eval;
        eval.value = tape.scalar(nodes.y);
        for (const auto& [name, id] : binder.bound()) eval.grads[name] = tape.grad(id);
        return eval;
      };
      worst = std::max(worst, model::gradcheck(f, student_only));
    }
  }
  REQUIRE_MSG(worst < 1e-4, "max relative error %.3e", worst);
}

void criterion_plackett_luce() {
  Rng rng(17);
  for (size_t k = 2; k <= 5; ++k) {
    std::vector<double> scores(k);
    for (double& s : scores) s = 2.0 * rng.normal();
    for (double tau : {1.0, 0.1}) {
      std::vector<int> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      double total = 0.0;
      do {
        total += losses::plackett_luce_prob({scores, perm, tau, 1.0});
      } while (std::next_permutation(perm.begin(), perm.end()));
      REQUIRE_MSG(std::abs(total - 1.0) <= 1e-9, "K=%zu tau=%.1f sum=%.12f", k, tau, total);
    }
  }
  // shift invariance
  losses::RankingGroup g{{0.3, -1.2, 0.9, 0.1, 2.2}, {2, 0, 3, 4, 1}, 0.1, 1.0};
  double base = losses::plackett_luce_log_prob(g);
  for (double shift : {1.0, -7.5, 1234.0}) {
    auto shifted = g;
    for (double& s : shifted.scores) s += shift;
    REQUIRE_MSG(std::abs(losses::plackett_luce_log_prob(shifted) - base) <= 1e-9,
                "shift %.1f broke invariance", shift);
  }
}

void criterion_algorithm1() {
  model::ModelConfig cfg = tiny_config();
  // exact 2:1 raw-weight split for representable token counts
  for (auto [np, nl] : {std::pair<int, int>{1, 1}, {1, 2}, {2, 1}, {3, 2}, {3, 4}, {5, 2},
                        {3, 3}, {4, 8}, {3, 6}, {7, 14}, {1, 8}, {6, 4}}) {
    Rng rng(static_cast<uint64_t>(np * 37 + nl));
    model::TokenReps reps = random_reps(cfg, np, nl, rng);
    nn::ParamStore params = model::init_params(cfg, 3);
    auto out = model::affinity_head(reps, params, cfg);
    double ligand = 0.0, protein = 0.0;
    for (int i = 0; i < reps.n; ++i)
      (reps.is_ligand[static_cast<size_t>(i)] ? ligand : protein) +=
          out.raw_weights[static_cast<size_t>(i)];
    REQUIRE_MSG(ligand == 2.0 * protein, "np=%d nl=%d: %.17g vs %.17g", np, nl, ligand,
                2.0 * protein);
    double total = 0.0;
    for (double w : out.norm_weights) total += w;
    REQUIRE_MSG(std::abs(total - 1.0) <= 1e-6, "norm weights sum %.9f", total);
  }
  // protein-protein pair entries of z have no effect
  {
    Rng rng(91);
    model::ModelConfig head_cfg = cfg;
    head_cfg.encoder_blocks = 0;
    model::TokenReps reps = random_reps(head_cfg, 3, 1, rng);
    nn::ParamStore params = model::init_params(head_cfg, 5);
    double base = model::teacher_score(reps, params, head_cfg);
    auto perturbed = reps;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < head_cfg.d_pair; ++c)
          perturbed.z.at(i * reps.n + j, c) += 3.0 + i - j + c;
    double after = model::teacher_score(perturbed, params, head_cfg);
    REQUIRE_MSG(base == after, "pp perturbation moved %.17g -> %.17g", base, after);
  }
  // token-permutation equivariance through the full encoder + head
  {
    Rng rng(92);
    model::TokenReps reps = random_reps(cfg, 2, 2, rng);
    nn::ParamStore params = model::init_params(cfg, 6);
    double base = model::teacher_score(reps, params, cfg);
    std::vector<int> perm{3, 1, 0, 2};
    model::TokenReps permuted = reps;
    for (int i = 0; i < reps.n; ++i) {
      int src = perm[static_cast<size_t>(i)];
      for (int f = 0; f < cfg.d_single; ++f) permuted.s.at(i, f) = reps.s.at(src, f);
      permuted.is_ligand[static_cast<size_t>(i)] = reps.is_ligand[static_cast<size_t>(src)];
      permuted.single_mask[static_cast<size_t>(i)] = reps.single_mask[static_cast<size_t>(src)];
    }
    for (int i = 0; i < reps.n; ++i)
      for (int j = 0; j < reps.n; ++j) {
        int si = perm[static_cast<size_t>(i)], sj = perm[static_cast<size_t>(j)];
        for (int c = 0; c < cfg.d_pair; ++c)
          permuted.z.at(i * reps.n + j, c) = reps.z.at(si * reps.n + sj, c);
        permuted.pair_mask[static_cast<size_t>(i * reps.n + j)] =
            reps.pair_mask[static_cast<size_t>(si * reps.n + sj)];
      }
    double after = model::teacher_score(permuted, params, cfg);
    REQUIRE_MSG(std::abs(after - base) <= 1e-8, "permutation moved %.12g -> %.12g", base, after);
  }
}

void criterion_enrichment_oracle() {
  Rng rng(23);
  // agreement with the counting oracle on 1,000 random instances
  for (int trial = 0; trial < 1000; ++trial) {
    size_t n = 20 + rng.below(300);
    std::vector<metrics::ScoredLabel> entries(n);
    long positives = 0;
    for (auto& e : entries) {
      e.score = rng.normal();
      e.label = rng.below(6) == 0;
      positives += e.label;
    }
    if (positives == 0) entries[static_cast<size_t>(rng.below(n))].label = true;
    double fraction = 0.01 + 0.3 * rng.uniform();
    double lib = metrics::enrichment_factor(entries, fraction);
    double ref = metrics_ref::ef_oracle(entries, fraction);
    REQUIRE_MSG(std::abs(lib - ref) <= 1e-12, "trial %d: %.12f vs %.12f", trial, lib, ref);
  }
  // random labels: mean EF1% within [0.9, 1.1] over 10,000 trials
  double total = 0.0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<metrics::ScoredLabel> entries(1000);
    for (auto& e : entries) {
      e.score = rng.normal();
      e.label = false;
    }
    std::vector<size_t> idx(1000);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (int i = 0; i < 100; ++i) entries[idx[static_cast<size_t>(i)]].label = true;
    total += metrics::enrichment_factor(entries, 0.01);
  }
  double mean = total / trials;
  REQUIRE_MSG(mean >= 0.9 && mean <= 1.1, "null mean EF1%% = %.4f", mean);
  // the N=200 / 4-positive fixture yields exactly 50
  std::vector<metrics::ScoredLabel> fixture;
  fixture.push_back({100.0, true});
  fixture.push_back({99.0, true});
  for (int i = 0; i < 196; ++i) fixture.push_back({50.0 - 0.01 * i, false});
  fixture.push_back({1.0, true});
  fixture.push_back({0.5, true});
  REQUIRE_MSG(metrics::enrichment_factor(fixture, 0.01) == 50.0, "fixture EF != 50");
}

void criterion_fingerprint_invariance() {
  Rng gen(20240808);
  std::vector<chem::Molecule> molecules;
  while (molecules.size() < 100) molecules.push_back(harness::random_molecule(gen));
  Rng respell(99);
  for (auto& mol : molecules) {
    auto reference = fp::ecfp(mol, 2, 1024);
    for (int trial = 0; trial < 10; ++trial) {
      std::string spelled = chem::write_smiles(mol, respell);
      auto again = fp::ecfp(chem::parse_smiles(spelled), 2, 1024);
      REQUIRE_MSG(again == reference, "respelling changed bits: %s", spelled.c_str());
    }
  }
  // tanimoto symmetry and bounds on 10,000 random bitset pairs
  Rng rng(7711);
  for (int trial = 0; trial < 10000; ++trial) {
    fp::Fingerprint a(256), b(256);
    int ka = static_cast<int>(rng.below(50));
    int kb = static_cast<int>(rng.below(50));
    for (int i = 0; i < ka; ++i) a.set(static_cast<int>(rng.below(256)));
    for (int i = 0; i < kb; ++i) b.set(static_cast<int>(rng.below(256)));
    double ab = fp::tanimoto(a, b);
    REQUIRE_MSG(ab == fp::tanimoto(b, a), "asymmetric at trial %d", trial);
    REQUIRE_MSG(ab >= 0.0 && ab <= 1.0, "out of bounds at trial %d", trial);
    if (a.popcount() > 0)
      REQUIRE_MSG(fp::tanimoto(a, a) == 1.0, "self-similarity != 1 at trial %d", trial);
  }
}

void criterion_descriptor_fixtures() {
  struct Row {
    const char* smiles;
    double mw;     // hand sum over the molecular formula, IUPAC 2021 weights
    int hbd, hba, rotatable, rings;
    double clogp;  // frozen reference-toolkit value
    double ap;     // aromatic heavy atoms / heavy atoms, by hand
  };
  const Row panel[] = {
      {"O", 18.015, 1, 1, 0, 0, -0.8247, 0.0},
      {"C", 16.043, 0, 0, 0, 0, 0.6361, 0.0},
      {"CCO", 46.069, 1, 1, 0, 0, -0.0014, 0.0},
      {"c1ccccc1", 78.114, 0, 0, 0, 1, 1.6866, 1.0},
      {"Cc1ccccc1", 92.141, 0, 0, 0, 1, 1.99502, 6.0 / 7.0},
      {"Oc1ccccc1", 94.113, 1, 1, 0, 1, 1.39219, 6.0 / 7.0},
      {"Nc1ccccc1", 93.129, 1, 1, 0, 1, 1.2688, 6.0 / 7.0},
      {"c1ccncc1", 79.102, 0, 1, 0, 1, 1.0816, 1.0},
      {"NC(=O)C", 59.068, 1, 2, 0, 0, -0.5084, 0.0},
      {"CC(=O)O", 60.052, 1, 2, 0, 0, 0.09089, 0.0},
      {"CCCC", 58.124, 0, 0, 1, 0, 1.8064, 0.0},
      {"CCCCCC", 86.178, 0, 0, 3, 0, 2.5866, 0.0},
      {"c1ccc2ccccc2c1", 128.174, 0, 0, 0, 2, 2.8398, 1.0},
      {"CC(=O)Oc1ccccc1C(=O)O", 180.159, 1, 4, 3, 1, 1.3101, 6.0 / 13.0},
      {"CC(C)Cc1ccc(cc1)C(C)C(=O)O", 206.285, 1, 2, 4, 1, 3.0732, 6.0 / 13.0},
      {"Cn1cnc2c1c(=O)n(C)c(=O)n2C", 194.194, 0, 6, 0, 2, -1.0293, 9.0 / 14.0},
      {"CC(=O)Nc1ccc(O)cc1", 151.165, 2, 3, 2, 1, 1.35059, 6.0 / 11.0},
      {"CN1CCCC1c1cccnc1", 162.236, 0, 2, 1, 2, 1.8483, 0.5},
      {"O=C(O)c1ccccc1O", 138.122, 2, 3, 1, 1, 1.09039, 0.6},
      {"CCOCC", 74.123, 0, 1, 2, 0, 1.0428, 0.0},
  };
  for (const auto& row : panel) {
    auto mol = chem::parse_smiles(row.smiles);
    double mw = chem::molecular_weight(mol);
    REQUIRE_MSG(std::abs(mw - row.mw) <= 0.02, "%s MW %.4f vs %.4f", row.smiles, mw, row.mw);
    REQUIRE_MSG(chem::hbd_count(mol) == row.hbd, "%s HBD", row.smiles);
    REQUIRE_MSG(chem::hba_count(mol) == row.hba, "%s HBA", row.smiles);
    REQUIRE_MSG(chem::rotatable_bond_count(mol) == row.rotatable, "%s RB", row.smiles);
    REQUIRE_MSG(chem::ring_count(mol) == row.rings, "%s rings", row.smiles);
    double clogp = chem::clogp(mol);
    REQUIRE_MSG(std::abs(clogp - row.clogp) <= 0.3, "%s cLogP %.4f vs %.4f", row.smiles, clogp,
                row.clogp);
    double esol_expected =
        0.16 - 0.63 * row.clogp - 0.0062 * row.mw + 0.066 * row.rotatable - 0.74 * row.ap;
    double esol = chem::esol_logs(mol);
    REQUIRE_MSG(std::abs(esol - esol_expected) <= 0.3, "%s ESOL %.4f vs %.4f", row.smiles, esol,
                esol_expected);
  }
  // aspirin fails the MW >= 200 window
  auto verdict = screen::property_filter(chem::parse_smiles("CC(=O)Oc1ccccc1C(=O)O"),
                                         screen::FilterThresholds{});
  REQUIRE_MSG(!verdict.pass, "aspirin passed");
  REQUIRE_MSG(verdict.reasons == std::vector<std::string>{"mw"}, "aspirin reasons");
}

void criterion_pipeline_determinism() {
  fs::path dir = fs::temp_directory_path() / "aurascreen_acceptance_campaign";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto world = harness::generate_world(777, 10000, 0.0, 1024, 32);
  harness::save_world_library(world, (dir / "library.tsv").string());
  model::save_protein_embedding((dir / "protein.emb").string(), world.protein_embedding);

  screen::CampaignConfig config;
  config.target_id = "SYNTH";
  config.library_path = (dir / "library.tsv").string();
  config.protein_embedding_path = (dir / "protein.emb").string();
  config.stage1_keep = 800;
  config.stage2_keep = 300;
  config.shortlist_size = 50;
  config.seed = 777;
  config.cluster_max = 1200;
  config.worker_count = 1;
  config.output_dir = (dir / "w1").string();

  auto t0 = std::chrono::steady_clock::now();
  auto report = screen::run_campaign(config);
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE_MSG(elapsed < 120.0, "campaign took %.1fs", elapsed);

  // size and containment invariants
  REQUIRE_MSG(report.stage1.size() == std::min<size_t>(800, report.parsed_count), "stage1 size");
  REQUIRE_MSG(report.stage2.size() == std::min<size_t>(300, report.stage1.size()), "stage2 size");
  std::set<std::string> library_ids, stage1_ids, stage2_ids;
  for (const auto& rec : world.library) library_ids.insert(rec.id);
  for (const auto& r : report.stage1) stage1_ids.insert(r.id);
  for (const auto& r : report.stage2) stage2_ids.insert(r.id);
  for (const auto& id : stage1_ids) REQUIRE_MSG(library_ids.count(id), "stage1 not in library");
  for (const auto& id : stage2_ids) REQUIRE_MSG(stage1_ids.count(id), "stage2 not in stage1");
  size_t pass_count = 0;
  for (const auto& v : report.verdicts) pass_count += v.pass ? 1 : 0;
  REQUIRE_MSG(report.shortlist.size() == std::min<size_t>(50, pass_count), "shortlist size");
  for (const auto& id : report.shortlist)
    REQUIRE_MSG(stage2_ids.count(id), "shortlist not in stage2");
  for (size_t i = 1; i < report.stage1.size(); ++i)
    REQUIRE_MSG(report.stage1[i - 1].score >= report.stage1[i].score, "stage1 order");
  for (const auto& v : report.verdicts)
    REQUIRE_MSG(v.pass == (v.property.reasons.empty() && v.novelty.keep && v.allowlisted),
                "reasons do not reproduce verdict for %s", v.id.c_str());

  screen::write_report_files(report, config);
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string baseline = read(dir / "w1" / "report.json");
  std::string baseline_short = read(dir / "w1" / "shortlist.csv");
  std::string baseline_dist = read(dir / "w1" / "score_distributions.csv");
  REQUIRE_MSG(!baseline.empty(), "empty report");

  // rerun with the same seed, then with 4 and 8 workers
  for (int workers : {1, 4, 8}) {
    auto cfg = config;
    cfg.worker_count = workers;
    cfg.output_dir = (dir / ("w_" + std::to_string(workers))).string();
    auto again = screen::run_campaign(cfg);
    screen::write_report_files(again, cfg);
    REQUIRE_MSG(read(fs::path(cfg.output_dir) / "report.json") == baseline,
                "report.json differs at %d workers", workers);
    REQUIRE_MSG(read(fs::path(cfg.output_dir) / "shortlist.csv") == baseline_short,
                "shortlist.csv differs at %d workers", workers);
    REQUIRE_MSG(read(fs::path(cfg.output_dir) / "score_distributions.csv") == baseline_dist,
                "score_distributions.csv differs at %d workers", workers);
  }
  fs::remove_all(dir);
}

void criterion_throughput() {
  const auto& world = big_world();
  model::ModelConfig cfg;  // default production-size student
  nn::ParamStore params = model::init_params(cfg, 4242);

  // prior index over a stride sample, as stage 1 does
  std::vector<fp::CacheEntry> sample;
  for (size_t i = 0; i < world.library.size(); i += 100)
    sample.push_back({world.library[i].id, world.fingerprints[i]});
  auto clusters = cluster::butina_cluster(sample, 0.6, 2);
  std::map<std::string, fp::Fingerprint> fps;
  for (const auto& e : sample) fps.emplace(e.id, e.fp);
  std::map<std::string, std::vector<double>> embeddings;
  for (const auto& cl : clusters) {
    auto reps = model::synthesize_token_reps(world.protein_embedding, fps.at(cl.centroid_id), cfg);
    embeddings[cl.centroid_id] = model::trunk_embedding(reps, params, cfg);
  }
  auto index = cluster::build_prior_index(clusters, fps, embeddings, 100000,
                                          static_cast<long>(world.library.size()));

  // time single-core scoring over the full library with the cached embedding
  auto t0 = std::chrono::steady_clock::now();
  double checksum = 0.0;
  for (size_t i = 0; i < world.library.size(); ++i) {
    const auto& centroid = cluster::nearest_centroid(world.fingerprints[i], index);
    model::StudentInput input{world.fingerprints[i], world.protein_embedding,
                              centroid.prior_embedding};
    checksum += model::student_score(input, params, cfg).y;
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double rate = static_cast<double>(world.library.size()) / elapsed;
  REQUIRE_MSG(std::isfinite(checksum), "non-finite scores");
  REQUIRE_MSG(rate >= 500.0, "%.0f compounds/sec/core (< 500)", rate);
  std::printf("        throughput: %.0f compounds/sec/core\n", rate);
}

void criterion_sampler_invariants() {
  std::vector<sampler::ActivityRecord> records;
  auto add = [&records](const std::string& target, const std::string& compound, double label) {
    sampler::ActivityRecord r;
    r.target_id = target;
    r.compound_id = compound;
    r.pxc50 = label;
    records.push_back(r);
  };
  for (int i = 0; i < 9; ++i) add("SMALL", "S" + std::to_string(i), 5.0 + 0.2 * i);
  for (int i = 0; i < 7; ++i) add("DENSE", "D" + std::to_string(i), 6.0);  // one bin
  for (int i = 0; i < 4; ++i) add("DENSE", "E" + std::to_string(i), 7.0);
  // bins anchor at the per-target minimum: 5.0..5.145 together, 5.15 apart
  for (int i = 0; i < 6; ++i) add("EDGE", "G" + std::to_string(i), 5.0 + 0.029 * i);
  for (int i = 0; i < 8; ++i) add("EDGE", "H" + std::to_string(i), 5.15 + 0.01 * i);

  auto curated = sampler::curate(records, 99);
  for (const auto& r : curated) REQUIRE_MSG(r.target_id != "SMALL", "small target kept");
  long dense_low = 0;
  for (const auto& r : curated)
    if (r.target_id == "DENSE" && *r.pxc50 < 6.5) ++dense_low;
  REQUIRE_MSG(dense_low == 5, "dense bin kept %ld", dense_low);
  std::map<std::string, std::vector<double>> by_target;
  for (const auto& r : curated) by_target[r.target_id].push_back(*r.pxc50);
  for (auto& [target, labels] : by_target) {
    double min_label = *std::min_element(labels.begin(), labels.end());
    std::map<long, int> bins;
    for (double l : labels) bins[static_cast<long>(std::floor((l - min_label) / 0.15))] += 1;
    for (auto& [bin, count] : bins)
      REQUIRE_MSG(count <= 5, "%s bin %ld has %d", target.c_str(), bin, count);
  }
  long edge_low = 0, edge_high = 0;
  for (const auto& r : curated) {
    if (r.target_id != "EDGE") continue;
    (*r.pxc50 < 5.15 ? edge_low : edge_high) += 1;
  }
  REQUIRE_MSG(edge_low == 5 && edge_high == 5, "edge bins %ld/%ld", edge_low, edge_high);

  auto batches = sampler::group_batches(curated, 3, 1);
  size_t covered = 0;
  for (const auto& batch : batches) {
    REQUIRE_MSG(!batch.empty(), "empty batch");
    for (const auto& r : batch) {
      REQUIRE_MSG(r.target_id == batch[0].target_id, "mixed-target batch");
      ++covered;
    }
  }
  REQUIRE_MSG(covered == curated.size(), "batches cover %zu of %zu", covered, curated.size());

  struct Case {
    sampler::DistillCandidate c;
    bool accept;
  };
  const Case table[] = {
      {{0.9, 0.6, 80.0, 0.3, 500.0}, true},
      {{0.8, 0.6, 80.0, 0.3, 500.0}, false},
      {{0.9, 0.5, 80.0, 0.3, 500.0}, false},
      {{0.9, 0.6, 70.0, 0.3, 500.0}, false},
      {{0.9, 0.6, 80.0, 0.61, 500.0}, false},
      {{0.9, 0.6, 80.0, 0.3, 99.9}, false},
  };
  for (const auto& c : table)
    REQUIRE_MSG(sampler::distill_accept(c.c) == c.accept,
                "distill_accept(%g, %g, %g, %g, %g) != %d", c.c.iptm, c.c.ligand_ptm,
                c.c.protein_plddt, c.c.max_seq_identity_to_holdout, c.c.ic50_nm, c.accept);
}

void criterion_end_to_end() {
  const auto& world = big_world();
  harness::StudentTrainOptions opt;
  opt.model = model::ModelConfig{};  // production-size student
  opt.train_count = 5000;
  opt.epochs = 25;
  opt.lr = 1.8e-3;
  opt.seed = 8;
  opt.cluster_sample = 1000;
  auto result = harness::train_student(world, opt);

  auto scores = harness::score_compounds(world, result.holdout_indices, result.params,
                                         result.prior_index, opt.model, 2);
  // planted actives: top 1% of labels across the whole library
  std::vector<double> all_labels = world.labels;
  std::sort(all_labels.begin(), all_labels.end());
  double cut = all_labels[static_cast<size_t>(0.99 * static_cast<double>(all_labels.size()))];
  std::vector<metrics::ScoredLabel> entries;
  long positives = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    bool active = world.labels[result.holdout_indices[i]] >= cut;
    positives += active;
    entries.push_back({scores[i], active});
  }
  double base_rate = static_cast<double>(positives) / static_cast<double>(entries.size());
  double ef = metrics::enrichment_factor(entries, 0.01);
  double pr = metrics::aupr(entries);
  std::printf("        EF1%% = %.2f, AUPR = %.4f (base rate %.4f)\n", ef, pr, base_rate);
  REQUIRE_MSG(ef >= 5.0, "EF1%% = %.3f < 5", ef);
  REQUIRE_MSG(pr >= 5.0 * base_rate, "AUPR %.4f < 5x base rate %.4f", pr, 5.0 * base_rate);
}

void criterion_hit_rate() {
  REQUIRE_MSG(metrics::hit_rate(23, 33) == 23.0 / 33.0, "23/33");
  REQUIRE_MSG(metrics::hit_rate(2, 30) == 2.0 / 30.0, "2/30");
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.3f", metrics::hit_rate(23, 33));
  REQUIRE_MSG(std::string(buf) == "0.697", "rounded 23/33 = %s", buf);
  std::snprintf(buf, sizeof(buf), "%.3f", metrics::hit_rate(2, 30));
  REQUIRE_MSG(std::string(buf) == "0.067", "rounded 2/30 = %s", buf);
}

}  // namespace

int main() {
  Runner runner;
  auto suite_start = std::chrono::steady_clock::now();

  {
    auto t0 = std::chrono::steady_clock::now();
    runner.criterion(1, "analytic gradients match finite differences (< 1e-4, 5 seeds)",
                     criterion_gradients);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt >= 60.0) {
      std::printf("FAIL criterion  1: gradient suite exceeded 60s (%.1fs)\n", dt);
      ++runner.failures;
    }
  }
  runner.criterion(2, "Plackett-Luce permutation sums and shift invariance (1e-9)",
                   criterion_plackett_luce);
  runner.criterion(3, "affinity-head weighting invariants", criterion_algorithm1);
  runner.criterion(4, "enrichment factor vs counting oracle, null mean, exact fixture",
                   criterion_enrichment_oracle);
  runner.criterion(5, "fingerprint respelling invariance and tanimoto properties",
                   criterion_fingerprint_invariance);
  runner.criterion(6, "descriptor fixtures (MW +-0.02, counts exact, cLogP/ESOL +-0.3)",
                   criterion_descriptor_fixtures);
  runner.criterion(7, "pipeline determinism, containment, worker independence",
                   criterion_pipeline_determinism);
  runner.criterion(8, "stage-1 throughput >= 500 compounds/sec/core on 100k library",
                   criterion_throughput);
  runner.criterion(9, "sampler curation, batching, distillation predicate",
                   criterion_sampler_invariants);
  runner.criterion(10, "end-to-end enrichment on the 100k synthetic world (EF1% >= 5)",
                   criterion_end_to_end);
  runner.criterion(11, "hit-rate arithmetic", criterion_hit_rate);

  double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%s (%d criteria failed, %.1fs total)\n",
              runner.failures == 0 ? "ALL PASS" : "FAILURES", runner.failures, total);
  return runner.failures == 0 ? 0 : 1;
}
