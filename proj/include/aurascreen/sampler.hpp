#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aurascreen/common.hpp"
#include "aurascreen/losses.hpp"

namespace aura::sampler {

enum class AssayKind { DoseResponse, Screening };

struct ActivityRecord {
  std::string target_id;
  std::string compound_id;
  std::optional<double> pxc50;
  std::optional<double> activity_value_nm;
  std::optional<double> pchembl;
  AssayKind assay_kind = AssayKind::DoseResponse;

  // pxc50 when present, else derived from the nanomolar value, else pChEMBL
  double label() const;
};

// CSV with header target_id,compound_id,pxc50,activity_value_nm,pchembl,assay_kind;
// empty fields mean absent
std::vector<ActivityRecord> load_activity_csv(const std::string& path);
void save_activity_csv(const std::string& path, const std::vector<ActivityRecord>& records);

// (i) drop targets with fewer than 10 records; (ii) bin labels per target
// into half-open 0.15-wide intervals anchored at the target minimum;
// (iii) keep at most 5 records per bin, sampled with the run seed.
std::vector<ActivityRecord> curate(const std::vector<ActivityRecord>& records, uint64_t seed,
                                   int min_records_per_target = 10, double bin_width = 0.15,
                                   int max_per_bin = 5);

// single-target batches; target order and within-group order shuffled by seed
std::vector<std::vector<ActivityRecord>> group_batches(const std::vector<ActivityRecord>& records,
                                                       int batch_size, uint64_t seed);

struct DpoGroup {
  std::vector<ActivityRecord> records;  // listed in descending-label order
  std::vector<int> true_order;          // permutation (identity under that listing)
};

// per target: sorted by label descending (ties by compound_id ascending),
// consecutive windows of K records whose label span is <= window
std::vector<DpoGroup> build_dpo_groups(const std::vector<ActivityRecord>& records, int group_size,
                                       double window = 1.0);

enum class ActivityLabel { Active, Inactive, Unlabeled };

// inactive: activity > 20000 nM or pChEMBL < 4.5; active: dose-response with
// activity <= 10000 nM; otherwise unlabeled
ActivityLabel label_activity(const ActivityRecord& record);

struct DistillCandidate {
  double iptm = 0.0;
  double ligand_ptm = 0.0;
  double protein_plddt = 0.0;
  double max_seq_identity_to_holdout = 0.0;
  double ic50_nm = 0.0;
};

// ic50 >= 100 nM, ipTM > 0.8, ligand_pTM > 0.5, pLDDT > 70, identity <= 0.6
bool distill_accept(const DistillCandidate& candidate);

struct LabeledExample {
  std::string id;
  bool positive = false;
};

// duplicates the minority class (with replacement, seeded) until classes
// balance; throws EmptyClass when one side is empty
std::vector<LabeledExample> upsample_minority(const std::vector<LabeledExample>& examples,
                                              uint64_t seed);

}  // namespace aura::sampler
