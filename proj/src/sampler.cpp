#include "aurascreen/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace aura::sampler {

double ActivityRecord::label() const {
  if (pxc50) return *pxc50;
  if (activity_value_nm) return 9.0 - std::log10(*activity_value_nm);  // nM -> pXC50
  if (pchembl) return *pchembl;
  throw Error(Err::ConfigInvalid,
              "record " + target_id + "/" + compound_id + " carries no activity value");
}

std::vector<ActivityRecord> load_activity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open activity table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(Err::IoError, "empty activity table");
  std::vector<ActivityRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < 6) fields.emplace_back();
    ActivityRecord rec;
    rec.target_id = fields[0];
    rec.compound_id = fields[1];
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    rec.pxc50 = opt(fields[2]);
    rec.activity_value_nm = opt(fields[3]);
    rec.pchembl = opt(fields[4]);
    if (fields[5] == "screening")
      rec.assay_kind = AssayKind::Screening;
    else if (fields[5] == "dose_response" || fields[5].empty())
      rec.assay_kind = AssayKind::DoseResponse;
    else
      throw Error(Err::IoError, "line " + std::to_string(line_no) + ": bad assay_kind '" + fields[5] + "'");
    if (!rec.pxc50 && !rec.activity_value_nm && !rec.pchembl)
      throw Error(Err::IoError, "line " + std::to_string(line_no) + ": no activity value");
    records.push_back(std::move(rec));
  }
  return records;
}

void save_activity_csv(const std::string& path, const std::vector<ActivityRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write activity table '" + path + "'");
  out << "target_id,compound_id,pxc50,activity_value_nm,pchembl,assay_kind\n";
  out.precision(17);
  for (const auto& rec : records) {
    out << rec.target_id << ',' << rec.compound_id << ',';
    if (rec.pxc50) out << *rec.pxc50;
    out << ',';
    if (rec.activity_value_nm) out << *rec.activity_value_nm;
    out << ',';
    if (rec.pchembl) out << *rec.pchembl;
    out << ',' << (rec.assay_kind == AssayKind::Screening ? "screening" : "dose_response") << "\n";
  }
}

namespace {

std::map<std::string, std::vector<ActivityRecord>> by_target(
    const std::vector<ActivityRecord>& records) {
  std::map<std::string, std::vector<ActivityRecord>> groups;
  for (const auto& rec : records) groups[rec.target_id].push_back(rec);
  return groups;
}

}  // namespace

std::vector<ActivityRecord> curate(const std::vector<ActivityRecord>& records, uint64_t seed,
                                   int min_records_per_target, double bin_width, int max_per_bin) {
  Rng rng(seed);
  std::vector<ActivityRecord> out;
  for (auto& [target, group] : by_target(records)) {
    if (static_cast<int>(group.size()) < min_records_per_target) continue;
    double min_label = group[0].label();
    for (const auto& rec : group) min_label = std::min(min_label, rec.label());
    // half-open bins [min + k*w, min + (k+1)*w)
    std::map<long, std::vector<const ActivityRecord*>> bins;
    for (const auto& rec : group) {
      long bin = static_cast<long>(std::floor((rec.label() - min_label) / bin_width));
      bins[bin].push_back(&rec);
    }
    for (auto& [bin, members] : bins) {
      (void)bin;
      if (static_cast<int>(members.size()) <= max_per_bin) {
        for (const auto* rec : members) out.push_back(*rec);
        continue;
      }
      std::vector<size_t> order(members.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      order.resize(static_cast<size_t>(max_per_bin));
      std::sort(order.begin(), order.end());  // keep original relative order
      for (size_t i : order) out.push_back(*members[i]);
    }
  }
  return out;
}

std::vector<std::vector<ActivityRecord>> group_batches(const std::vector<ActivityRecord>& records,
                                                       int batch_size, uint64_t seed) {
  if (batch_size < 1) throw Error(Err::ConfigInvalid, "batch_size must be >= 1");
  Rng rng(seed);
  auto groups = by_target(records);
  std::vector<std::string> targets;
  targets.reserve(groups.size());
  for (const auto& [target, group] : groups) targets.push_back(target);
  rng.shuffle(targets);
  std::vector<std::vector<ActivityRecord>> batches;
  for (const auto& target : targets) {
    auto& group = groups[target];
    rng.shuffle(group);
    for (size_t start = 0; start < group.size(); start += static_cast<size_t>(batch_size)) {
      size_t end = std::min(group.size(), start + static_cast<size_t>(batch_size));
      batches.emplace_back(group.begin() + static_cast<long>(start),
                           group.begin() + static_cast<long>(end));
    }
  }
  return batches;
}

std::vector<DpoGroup> build_dpo_groups(const std::vector<ActivityRecord>& records, int group_size,
                                       double window) {
  if (group_size < 2) throw Error(Err::ConfigInvalid, "group_size must be >= 2");
  std::vector<DpoGroup> out;
  for (auto& [target, group] : by_target(records)) {
    (void)target;
    std::sort(group.begin(), group.end(), [](const ActivityRecord& a, const ActivityRecord& b) {
      if (a.label() != b.label()) return a.label() > b.label();
      return a.compound_id < b.compound_id;
    });
    size_t k = static_cast<size_t>(group_size);
    size_t i = 0;
    while (i + k <= group.size()) {
      double span = group[i].label() - group[i + k - 1].label();
      if (span <= window) {
        DpoGroup g;
        g.records.assign(group.begin() + static_cast<long>(i),
                         group.begin() + static_cast<long>(i + k));
        g.true_order.resize(k);
        for (size_t j = 0; j < k; ++j) g.true_order[j] = static_cast<int>(j);
        out.push_back(std::move(g));
        i += k;
      } else {
        ++i;
      }
    }
  }
  return out;
}

ActivityLabel label_activity(const ActivityRecord& record) {
  if ((record.activity_value_nm && *record.activity_value_nm > 20000.0) ||
      (record.pchembl && *record.pchembl < 4.5))
    return ActivityLabel::Inactive;
  if (record.assay_kind == AssayKind::DoseResponse && record.activity_value_nm &&
      *record.activity_value_nm <= 10000.0)
    return ActivityLabel::Active;
  return ActivityLabel::Unlabeled;
}

bool distill_accept(const DistillCandidate& candidate) {
  return candidate.ic50_nm >= 100.0 && candidate.iptm > 0.8 && candidate.ligand_ptm > 0.5 &&
         candidate.protein_plddt > 70.0 && candidate.max_seq_identity_to_holdout <= 0.6;
}

std::vector<LabeledExample> upsample_minority(const std::vector<LabeledExample>& examples,
                                              uint64_t seed) {
  std::vector<LabeledExample> positives, negatives;
  for (const auto& ex : examples) (ex.positive ? positives : negatives).push_back(ex);
  if (positives.empty() || negatives.empty())
    throw Error(Err::EmptyClass, "both classes must be non-empty");
  if (positives.size() == negatives.size()) return examples;
  const auto& minority = positives.size() < negatives.size() ? positives : negatives;
  size_t deficit = (positives.size() < negatives.size() ? negatives.size() : positives.size()) -
                   minority.size();
  Rng rng(seed);
  std::vector<LabeledExample> out = examples;
  for (size_t i = 0; i < deficit; ++i)
    out.push_back(minority[static_cast<size_t>(rng.below(minority.size()))]);
  return out;
}

}  // namespace aura::sampler
