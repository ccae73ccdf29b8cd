#pragma once

#include <map>
#include <string>
#include <vector>

#include "aurascreen/chem.hpp"
#include "aurascreen/cluster.hpp"
#include "aurascreen/fingerprint.hpp"
#include "aurascreen/model.hpp"
#include "aurascreen/sampler.hpp"

namespace aura::harness {

// valence-safe random molecular graph: chains, ring motifs, heteroatom
// substitutions, halogen terminals
chem::Molecule random_molecule(Rng& rng);

struct SyntheticWorld {
  uint64_t seed = 0;
  double noise = 0.0;
  std::vector<chem::LibraryRecord> library;
  std::vector<fp::Fingerprint> fingerprints;
  std::vector<double> labels;           // standardized planted score + noise
  std::vector<double> planted_weights;  // hidden from trained models
  std::vector<double> protein_embedding;
};

SyntheticWorld generate_world(uint64_t seed, size_t size, double noise = 0.0, int fp_width = 1024,
                              int d_protein = 32);

void save_world_library(const SyntheticWorld& world, const std::string& path);

struct StudentTrainOptions {
  model::ModelConfig model;
  size_t train_count = 1000;
  int epochs = 30;
  double lr = 1.8e-3;  // stage-1 default
  double momentum = 0.9;
  int batch_size = 32;
  uint64_t seed = 0;
  bool distill_from_teacher = false;  // otherwise trains against planted labels
  double alpha = 1.0;
  double beta = 1.0;
  size_t cluster_sample = 512;  // stride subsample used to build the prior index
};

struct StudentTrainResult {
  nn::ParamStore params;
  std::vector<double> loss_curve;  // mean loss per epoch
  cluster::CentroidIndex prior_index;
  std::vector<size_t> train_indices;
  std::vector<size_t> holdout_indices;
};

StudentTrainResult train_student(const SyntheticWorld& world, const StudentTrainOptions& opt);

// student scores for the given compound indices, through the same
// nearest-centroid prior path used during training
std::vector<double> score_compounds(const SyntheticWorld& world, const std::vector<size_t>& indices,
                                    const nn::ParamStore& params,
                                    const cluster::CentroidIndex& prior_index,
                                    const model::ModelConfig& cfg, int workers = 1);

struct HeadTrainOptions {
  model::ModelConfig model;
  int epochs = 30;
  double lr = 2e-4;  // stage-2 default
  double momentum = 0.9;
  int batch_groups = 8;
  double tau = 0.1;
  uint64_t seed = 0;
};

struct HeadTrainResult {
  nn::ParamStore params;
  std::vector<double> loss_curve;
  std::vector<double> mean_prob_curve;  // mean P(R_true) per epoch
};

HeadTrainResult train_head_dpo(const std::vector<sampler::DpoGroup>& groups,
                               const std::map<std::string, fp::Fingerprint>& fingerprints,
                               const std::vector<double>& protein_embedding,
                               const HeadTrainOptions& opt);

// mean Plackett-Luce probability of the true orders under the given params
double mean_group_probability(const std::vector<sampler::DpoGroup>& groups,
                              const std::map<std::string, fp::Fingerprint>& fingerprints,
                              const std::vector<double>& protein_embedding,
                              const nn::ParamStore& params, const model::ModelConfig& cfg,
                              double tau);

// {seed, config_hash, version, crippen_table} as JSON
void write_manifest(const std::string& path, uint64_t seed, const std::string& config_hash);

}  // namespace aura::harness
