#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "aurascreen/sampler.hpp"

using namespace aura;
using sampler::ActivityRecord;
using sampler::AssayKind;
using sampler::DistillCandidate;

namespace {

ActivityRecord rec(const std::string& target, const std::string& compound, double pxc50) {
  ActivityRecord r;
  r.target_id = target;
  r.compound_id = compound;
  r.pxc50 = pxc50;
  return r;
}

std::vector<ActivityRecord> target_with(const std::string& target, std::vector<double> labels) {
  std::vector<ActivityRecord> out;
  for (size_t i = 0; i < labels.size(); ++i)
    out.push_back(rec(target, target + "-C" + std::to_string(i), labels[i]));
  return out;
}

}  // namespace

TEST_CASE("curate drops small targets") {
  auto records = target_with("T1", {1, 2, 3, 4, 5, 6, 7, 8, 9});  // 9 records
  auto curated = sampler::curate(records, 1);
  CHECK(curated.empty());

  std::vector<double> ten(10);
  for (size_t i = 0; i < 10; ++i) ten[i] = 5.0 + static_cast<double>(i);
  auto kept = sampler::curate(target_with("T2", ten), 1);
  CHECK(kept.size() == 10);
}

TEST_CASE("curate caps identical-label bins at five") {
  std::vector<double> labels(12, 6.0);  // one bin
  auto curated = sampler::curate(target_with("T", labels), 7);
  CHECK(curated.size() == 5);
}

TEST_CASE("curate bins anchor at the target minimum") {
  // labels 5.00, 5.10, 5.20 with min 5.00: bins [5.00,5.15) and [5.15,5.30)
  std::vector<ActivityRecord> records = target_with("T", {5.00, 5.10, 5.20});
  // pad to pass the >= 10 filter without touching those bins
  for (int i = 0; i < 9; ++i) records.push_back(rec("T", "PAD" + std::to_string(i), 20.0 + i));
  auto curated = sampler::curate(records, 3);
  int low = 0, mid = 0;
  for (const auto& r : curated) {
    if (*r.pxc50 < 5.15) ++low;
    else if (*r.pxc50 < 5.30) ++mid;
  }
  CHECK(low == 2);
  CHECK(mid == 1);
}

TEST_CASE("curate never grows and is reproducible") {
  Rng noise(5);
  std::vector<ActivityRecord> records;
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 40; ++i)
      records.push_back(rec("T" + std::to_string(t), "C" + std::to_string(t * 100 + i),
                            5.0 + 0.05 * static_cast<double>(noise.below(40))));
  auto a = sampler::curate(records, 42);
  auto b = sampler::curate(records, 42);
  CHECK(a.size() <= records.size());
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].compound_id == b[i].compound_id);

  // bin occupancy after curation never exceeds five
  std::map<std::string, std::vector<double>> by_target;
  for (const auto& r : a) by_target[r.target_id].push_back(*r.pxc50);
  for (auto& [target, labels] : by_target) {
    double min_label = *std::min_element(labels.begin(), labels.end());
    std::map<long, int> bins;
    for (double l : labels) bins[static_cast<long>(std::floor((l - min_label) / 0.15))]++;
    for (auto& [bin, count] : bins) CHECK(count <= 5);
  }
}

TEST_CASE("group batches are single-target and cover everything once") {
  std::vector<ActivityRecord> records;
  auto t1 = target_with("T1", {1, 2, 3, 4});
  auto t2 = target_with("T2", {5, 6, 7, 8});
  records.insert(records.end(), t1.begin(), t1.end());
  records.insert(records.end(), t2.begin(), t2.end());

  auto batches = sampler::group_batches(records, 4, 9);
  CHECK(batches.size() == 2);
  for (const auto& batch : batches) {
    std::set<std::string> targets;
    for (const auto& r : batch) targets.insert(r.target_id);
    CHECK(targets.size() == 1);
  }

  auto uneven = sampler::group_batches(target_with("T", std::vector<double>(10, 1.0)), 4, 9);
  REQUIRE(uneven.size() == 3);
  CHECK(uneven[0].size() == 4);
  CHECK(uneven[2].size() == 2);

  // identical across runs with the same seed; coverage is exact
  auto again = sampler::group_batches(records, 4, 9);
  REQUIRE(again.size() == batches.size());
  std::multiset<std::string> seen;
  for (size_t i = 0; i < batches.size(); ++i)
    for (size_t j = 0; j < batches[i].size(); ++j) {
      CHECK(batches[i][j].compound_id == again[i][j].compound_id);
      seen.insert(batches[i][j].compound_id);
    }
  CHECK(seen.size() == records.size());
}

TEST_CASE("dpo group construction windows") {
  auto one = sampler::build_dpo_groups(target_with("T", {6.0, 6.1, 9.0}), 2, 0.5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].records[0].pxc50 == 6.1);  // descending within the group
  CHECK(one[0].records[1].pxc50 == 6.0);
  CHECK(one[0].true_order == std::vector<int>{0, 1});

  auto ties = sampler::build_dpo_groups(target_with("T", {5.0, 5.0, 5.0, 5.0}), 2, 0.5);
  CHECK(ties.size() == 2);  // identical labels, tie-broken by compound id
  CHECK(ties[0].records[0].compound_id < ties[0].records[1].compound_id);

  auto none = sampler::build_dpo_groups(target_with("T", {5.0, 6.0}), 3, 1.0);
  CHECK(none.empty());
}

TEST_CASE("activity labels") {
  ActivityRecord high;
  high.activity_value_nm = 25000.0;
  CHECK(sampler::label_activity(high) == sampler::ActivityLabel::Inactive);

  ActivityRecord low_pchembl;
  low_pchembl.pchembl = 4.4;
  low_pchembl.activity_value_nm = 500.0;
  CHECK(sampler::label_activity(low_pchembl) == sampler::ActivityLabel::Inactive);

  ActivityRecord active;
  active.assay_kind = AssayKind::DoseResponse;
  active.activity_value_nm = 500.0;
  CHECK(sampler::label_activity(active) == sampler::ActivityLabel::Active);

  ActivityRecord boundary;
  boundary.assay_kind = AssayKind::DoseResponse;
  boundary.activity_value_nm = 10000.0;
  CHECK(sampler::label_activity(boundary) == sampler::ActivityLabel::Active);

  ActivityRecord neither;
  neither.activity_value_nm = 15000.0;
  CHECK(sampler::label_activity(neither) == sampler::ActivityLabel::Unlabeled);

  ActivityRecord screening_only;
  screening_only.assay_kind = AssayKind::Screening;
  screening_only.activity_value_nm = 500.0;
  CHECK(sampler::label_activity(screening_only) == sampler::ActivityLabel::Unlabeled);
}

TEST_CASE("distill acceptance thresholds") {
  CHECK(sampler::distill_accept({0.9, 0.6, 80.0, 0.3, 500.0}));
  CHECK(!sampler::distill_accept({0.9, 0.6, 80.0, 0.3, 50.0}));   // potent pair excluded
  CHECK(!sampler::distill_accept({0.79, 0.6, 80.0, 0.3, 500.0}));  // boundary below
}

TEST_CASE("distill acceptance boundary table") {
  struct Case {
    DistillCandidate candidate;
    bool accept;
  };
  const Case cases[] = {
      {{0.9, 0.6, 80.0, 0.3, 500.0}, true},
      {{0.8, 0.6, 80.0, 0.3, 500.0}, false},   // iptm exactly at threshold: strict >
      {{0.9, 0.5, 80.0, 0.3, 500.0}, false},   // ligand_ptm exactly 0.5
      {{0.9, 0.6, 70.0, 0.3, 500.0}, false},   // plddt exactly 70
      {{0.9, 0.6, 80.0, 0.6, 500.0}, true},    // identity exactly 0.6 is allowed
      {{0.9, 0.6, 80.0, 0.61, 500.0}, false},  // identity just above
      {{0.9, 0.6, 80.0, 0.3, 100.0}, true},    // ic50 exactly 100 kept
      {{0.9, 0.6, 80.0, 0.3, 99.9}, false},
  };
  for (const auto& c : cases) CHECK(sampler::distill_accept(c.candidate) == c.accept);
}

TEST_CASE("distill acceptance is monotone in quality") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    DistillCandidate c{rng.uniform(), rng.uniform(), 100.0 * rng.uniform(), rng.uniform(),
                       20000.0 * rng.uniform()};
    if (!sampler::distill_accept(c)) continue;
    DistillCandidate better = c;
    better.iptm += 0.01;
    better.ligand_ptm += 0.01;
    better.protein_plddt += 1.0;
    better.ic50_nm += 10.0;
    CHECK(sampler::distill_accept(better));
  }
}

TEST_CASE("upsampling balances classes") {
  std::vector<sampler::LabeledExample> balanced;
  for (int i = 0; i < 10; ++i) balanced.push_back({"P" + std::to_string(i), true});
  for (int i = 0; i < 10; ++i) balanced.push_back({"N" + std::to_string(i), false});
  CHECK(sampler::upsample_minority(balanced, 1).size() == 20);

  std::vector<sampler::LabeledExample> skewed;
  for (int i = 0; i < 3; ++i) skewed.push_back({"P" + std::to_string(i), true});
  for (int i = 0; i < 9; ++i) skewed.push_back({"N" + std::to_string(i), false});
  auto up = sampler::upsample_minority(skewed, 1);
  long pos = 0, neg = 0;
  for (const auto& ex : up) (ex.positive ? pos : neg) += 1;
  CHECK(pos == 9);
  CHECK(neg == 9);

  std::vector<sampler::LabeledExample> empty_class;
  empty_class.push_back({"N0", false});
  CHECK_THROWS_AS(sampler::upsample_minority(empty_class, 1), Error);
}

TEST_CASE("activity csv round trip") {
  std::vector<ActivityRecord> records;
  ActivityRecord full = rec("P10000", "CHEMBL1", 6.5);
  full.activity_value_nm = 316.0;
  full.pchembl = 6.5;
  records.push_back(full);
  ActivityRecord sparse;
  sparse.target_id = "P10001";
  sparse.compound_id = "CHEMBL2";
  sparse.activity_value_nm = 42.0;
  sparse.assay_kind = AssayKind::Screening;
  records.push_back(sparse);

  std::string path = "test_activity.csv";
  sampler::save_activity_csv(path, records);
  auto loaded = sampler::load_activity_csv(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].pxc50 == 6.5);
  CHECK(!loaded[1].pxc50.has_value());
  CHECK(loaded[1].activity_value_nm == 42.0);
  CHECK(loaded[1].assay_kind == AssayKind::Screening);
  std::remove(path.c_str());
}

TEST_CASE("derived labels fall back in order") {
  ActivityRecord nm;
  nm.activity_value_nm = 1000.0;  // 1 uM -> pXC50 6
  CHECK(nm.label() == doctest::Approx(6.0));
  ActivityRecord pc;
  pc.pchembl = 7.5;
  CHECK(pc.label() == doctest::Approx(7.5));
}
