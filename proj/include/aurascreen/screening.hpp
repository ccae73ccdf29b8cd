#pragma once

#include <map>
#include <string>
#include <vector>

#include "aurascreen/chem.hpp"
#include "aurascreen/cluster.hpp"
#include "aurascreen/crippen.hpp"
#include "aurascreen/fingerprint.hpp"
#include "aurascreen/model.hpp"

namespace aura::screen {

struct FilterThresholds {
  double mw_min = 200.0;
  double clogp_max = 6.0;
  int hbd_max = 4;
  int hba_max = 10;
  double esol_min = -9.0;
  double novelty_cutoff = 0.6;
};

struct CampaignConfig {
  std::string target_id;
  std::string protein_embedding_path;
  std::string library_path;
  std::string known_actives_path;  // optional
  std::string allowlist_path;      // optional id allowlist (availability filter)
  std::string student_checkpoint;  // optional; seeded init otherwise
  std::string teacher_checkpoint;  // optional
  std::string prior_index_path;    // optional; built from the library if absent
  std::string output_dir = ".";
  long stage1_keep = 10000;
  long stage2_keep = 500;
  long shortlist_size = 50;
  FilterThresholds thresholds;
  uint64_t seed = 0;
  int worker_count = 1;
  long compounds_per_center = 100000;
  long cluster_max = 200000;  // larger libraries are stride-sampled for clustering
  double cluster_threshold = 0.6;
  model::ModelConfig model;

  void validate() const;
  static CampaignConfig from_json_file(const std::string& path);
  static CampaignConfig from_json_text(const std::string& text);
  // semantic fields only: excludes worker_count and output_dir, so reports
  // hash identically across worker counts
  std::string canonical_json() const;
  std::string config_hash() const;
};

struct PropertyVerdict {
  bool pass = false;
  std::vector<std::string> reasons;  // mw / clogp / hbd / hba / esol / valence / mixture
  double mw = 0.0;
  double clogp = 0.0;
  double esol = 0.0;
  int hbd = 0;
  int hba = 0;
  int rotatable_bonds = 0;
  int ring_count = 0;
  bool clogp_flagged = false;  // untyped atoms defaulted to 0.0
};

PropertyVerdict property_filter(const chem::Molecule& mol, const FilterThresholds& thresholds);

struct NoveltyVerdict {
  bool keep = true;
  std::string nearest_id;
  double similarity = 0.0;
};

// reject iff max tanimoto to a known active is strictly above the cutoff
NoveltyVerdict novelty_filter(const fp::Fingerprint& fingerprint,
                              const std::vector<fp::CacheEntry>& known_actives,
                              double cutoff = 0.6);

struct ParsedCompound {
  std::string id;
  std::string smiles;
  chem::Molecule mol;
  fp::Fingerprint fingerprint;
};

struct RankedCompound {
  std::string id;
  double score = 0.0;
};

// scores every compound with the student (fingerprint + protein embedding +
// nearest-centroid prior) and keeps the top `keep`, score descending with id
// ascending on ties
std::vector<RankedCompound> stage1_triage(const std::vector<ParsedCompound>& compounds,
                                          const std::vector<double>& protein_embedding,
                                          const cluster::CentroidIndex& prior_index,
                                          const nn::ParamStore& params,
                                          const model::ModelConfig& cfg, long keep, int workers);

// rescoring by the encoder + affinity head over synthesized token reps
std::vector<RankedCompound> stage2_rescore(const std::vector<ParsedCompound>& compounds,
                                           const std::vector<std::string>& candidate_ids,
                                           const std::vector<double>& protein_embedding,
                                           const nn::ParamStore& params,
                                           const model::ModelConfig& cfg, long keep, int workers);

struct CompoundVerdict {
  std::string id;
  std::string smiles;
  double stage1_score = 0.0;
  double stage2_score = 0.0;
  PropertyVerdict property;
  NoveltyVerdict novelty;
  bool allowlisted = true;
  bool pass = false;
};

struct ScreenReport {
  std::string target_id;
  std::string config_hash;
  uint64_t seed = 0;
  size_t library_size = 0;
  size_t parsed_count = 0;
  std::vector<std::pair<std::string, std::string>> parse_failures;  // id, error
  std::vector<RankedCompound> stage1;
  std::vector<RankedCompound> stage2;
  std::vector<CompoundVerdict> verdicts;  // stage-2 survivors, in rank order
  std::vector<std::string> shortlist;
  std::map<std::string, double> timings_sec;  // sidecar only, never in report.json
};

ScreenReport run_campaign(const CampaignConfig& config);

// report.json + shortlist.csv + score_distributions.csv (+ timings.json)
void write_report_files(const ScreenReport& report, const CampaignConfig& config);
std::string report_to_json(const ScreenReport& report);
std::string shortlist_to_csv(const ScreenReport& report);
std::string distributions_to_csv(const ScreenReport& report);

}  // namespace aura::screen
