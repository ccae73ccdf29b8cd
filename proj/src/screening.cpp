#include "aurascreen/screening.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aura::screen {

using json = nlohmann::ordered_json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void sort_ranked(std::vector<RankedCompound>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedCompound& a, const RankedCompound& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
}

}  // namespace

void CampaignConfig::validate() const {
  if (target_id.empty()) throw Error(Err::ConfigInvalid, "target_id is required");
  if (library_path.empty()) throw Error(Err::ConfigInvalid, "library_path is required");
  if (protein_embedding_path.empty())
    throw Error(Err::ConfigInvalid, "protein_embedding_path is required");
  if (!(stage1_keep >= stage2_keep && stage2_keep >= shortlist_size && shortlist_size >= 1))
    throw Error(Err::ConfigInvalid, "need stage1_keep >= stage2_keep >= shortlist_size >= 1");
  if (worker_count < 1) throw Error(Err::ConfigInvalid, "worker_count must be >= 1");
  if (!(cluster_threshold > 0.0 && cluster_threshold <= 1.0))
    throw Error(Err::ConfigInvalid, "cluster_threshold must be in (0,1]");
  for (double t : {thresholds.mw_min, thresholds.clogp_max, thresholds.esol_min,
                   thresholds.novelty_cutoff})
    if (!std::isfinite(t)) throw Error(Err::ConfigInvalid, "thresholds must be finite");
}

namespace {

CampaignConfig config_from_json(const json& j) {
  CampaignConfig cfg;
  cfg.target_id = j.value("target_id", "");
  cfg.protein_embedding_path = j.value("protein_embedding_path", "");
  cfg.library_path = j.value("library_path", "");
  cfg.known_actives_path = j.value("known_actives_path", "");
  cfg.allowlist_path = j.value("allowlist_path", "");
  cfg.student_checkpoint = j.value("student_checkpoint", "");
  cfg.teacher_checkpoint = j.value("teacher_checkpoint", "");
  cfg.prior_index_path = j.value("prior_index_path", "");
  cfg.output_dir = j.value("output_dir", ".");
  cfg.stage1_keep = j.value("stage1_keep", cfg.stage1_keep);
  cfg.stage2_keep = j.value("stage2_keep", cfg.stage2_keep);
  cfg.shortlist_size = j.value("shortlist_size", cfg.shortlist_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.worker_count = j.value("worker_count", cfg.worker_count);
  cfg.compounds_per_center = j.value("compounds_per_center", cfg.compounds_per_center);
  cfg.cluster_max = j.value("cluster_max", cfg.cluster_max);
  cfg.cluster_threshold = j.value("cluster_threshold", cfg.cluster_threshold);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.thresholds.mw_min = t.value("mw_min", cfg.thresholds.mw_min);
    cfg.thresholds.clogp_max = t.value("clogp_max", cfg.thresholds.clogp_max);
    cfg.thresholds.hbd_max = t.value("hbd_max", cfg.thresholds.hbd_max);
    cfg.thresholds.hba_max = t.value("hba_max", cfg.thresholds.hba_max);
    cfg.thresholds.esol_min = t.value("esol_min", cfg.thresholds.esol_min);
    cfg.thresholds.novelty_cutoff = t.value("novelty_cutoff", cfg.thresholds.novelty_cutoff);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.model.d_single = m.value("d_single", cfg.model.d_single);
    cfg.model.d_pair = m.value("d_pair", cfg.model.d_pair);
    cfg.model.d_transition = m.value("d_transition", cfg.model.d_transition);
    cfg.model.encoder_blocks = m.value("encoder_blocks", cfg.model.encoder_blocks);
    cfg.model.temperature = m.value("temperature", cfg.model.temperature);
    cfg.model.ligand_weight_ratio = m.value("ligand_weight_ratio", cfg.model.ligand_weight_ratio);
    cfg.model.fp_width = m.value("fp_width", cfg.model.fp_width);
    cfg.model.d_model = m.value("d_model", cfg.model.d_model);
    cfg.model.student_blocks = m.value("student_blocks", cfg.model.student_blocks);
    cfg.model.d_protein = m.value("d_protein", cfg.model.d_protein);
    cfg.model.protein_tokens = m.value("protein_tokens", cfg.model.protein_tokens);
    cfg.model.ligand_tokens = m.value("ligand_tokens", cfg.model.ligand_tokens);
  }
  return cfg;
}

}  // namespace

CampaignConfig CampaignConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(Err::ConfigInvalid, std::string("config JSON: ") + e.what());
  }
  CampaignConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

CampaignConfig CampaignConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string CampaignConfig::canonical_json() const {
  json j;
  j["target_id"] = target_id;
  j["protein_embedding_path"] = protein_embedding_path;
  j["library_path"] = library_path;
  j["known_actives_path"] = known_actives_path;
  j["allowlist_path"] = allowlist_path;
  j["student_checkpoint"] = student_checkpoint;
  j["teacher_checkpoint"] = teacher_checkpoint;
  j["prior_index_path"] = prior_index_path;
  j["stage1_keep"] = stage1_keep;
  j["stage2_keep"] = stage2_keep;
  j["shortlist_size"] = shortlist_size;
  j["seed"] = seed;
  j["compounds_per_center"] = compounds_per_center;
  j["cluster_max"] = cluster_max;
  j["cluster_threshold"] = cluster_threshold;
  j["thresholds"] = {{"mw_min", thresholds.mw_min},
                     {"clogp_max", thresholds.clogp_max},
                     {"hbd_max", thresholds.hbd_max},
                     {"hba_max", thresholds.hba_max},
                     {"esol_min", thresholds.esol_min},
                     {"novelty_cutoff", thresholds.novelty_cutoff}};
  j["model"] = {{"d_single", model.d_single},
                {"d_pair", model.d_pair},
                {"d_transition", model.d_transition},
                {"encoder_blocks", model.encoder_blocks},
                {"temperature", model.temperature},
                {"ligand_weight_ratio", model.ligand_weight_ratio},
                {"fp_width", model.fp_width},
                {"d_model", model.d_model},
                {"student_blocks", model.student_blocks},
                {"d_protein", model.d_protein},
                {"protein_tokens", model.protein_tokens},
                {"ligand_tokens", model.ligand_tokens}};
  return j.dump();
}

std::string CampaignConfig::config_hash() const { return to_hex(fnv1a64(canonical_json())); }

// ---------------------------------------------------------------------------
// filters

PropertyVerdict property_filter(const chem::Molecule& mol, const FilterThresholds& thresholds) {
  PropertyVerdict v;
  v.mw = chem::molecular_weight(mol);
  auto clogp_result = chem::clogp_detailed(mol);
  v.clogp = clogp_result.value;
  v.clogp_flagged = clogp_result.flagged();
  v.hbd = chem::hbd_count(mol);
  v.hba = chem::hba_count(mol);
  v.rotatable_bonds = chem::rotatable_bond_count(mol);
  v.ring_count = chem::ring_count(mol);
  v.esol = chem::esol_logs(mol);
  if (v.mw < thresholds.mw_min) v.reasons.push_back("mw");
  if (v.clogp > thresholds.clogp_max) v.reasons.push_back("clogp");
  if (v.hbd > thresholds.hbd_max) v.reasons.push_back("hbd");
  if (v.hba > thresholds.hba_max) v.reasons.push_back("hba");
  if (v.esol < thresholds.esol_min) v.reasons.push_back("esol");
  if (chem::validate_valence(mol)) v.reasons.push_back("valence");
  if (mol.fragment_count > 1) v.reasons.push_back("mixture");
  v.pass = v.reasons.empty();
  return v;
}

NoveltyVerdict novelty_filter(const fp::Fingerprint& fingerprint,
                              const std::vector<fp::CacheEntry>& known_actives, double cutoff) {
  NoveltyVerdict v;
  if (known_actives.empty()) return v;  // keep, nothing to compare against
  v.similarity = -1.0;
  for (const auto& active : known_actives) {
    double sim = fp::tanimoto(fingerprint, active.fp);
    if (sim > v.similarity || (sim == v.similarity && active.id < v.nearest_id)) {
      v.similarity = sim;
      v.nearest_id = active.id;
    }
  }
  v.keep = !(v.similarity > cutoff);  // strict inequality rejects
  return v;
}

// ---------------------------------------------------------------------------
// stages

std::vector<RankedCompound> stage1_triage(const std::vector<ParsedCompound>& compounds,
                                          const std::vector<double>& protein_embedding,
                                          const cluster::CentroidIndex& prior_index,
                                          const nn::ParamStore& params,
                                          const model::ModelConfig& cfg, long keep, int workers) {
  if (compounds.empty()) throw Error(Err::EmptyLibrary, "stage-1 has no compounds");
  if (prior_index.centroids.empty()) throw Error(Err::EmptyIndex, "prior index is empty");
  std::vector<RankedCompound> ranked(compounds.size());
  parallel_for(compounds.size(), workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const auto& centroid = cluster::nearest_centroid(compounds[i].fingerprint, prior_index);
      model::StudentInput input{compounds[i].fingerprint, protein_embedding,
                                centroid.prior_embedding};
      ranked[i] = {compounds[i].id, model::student_score(input, params, cfg).y};
    }
  });
  sort_ranked(ranked);
  if (keep >= 0 && ranked.size() > static_cast<size_t>(keep)) ranked.resize(static_cast<size_t>(keep));
  return ranked;
}

std::vector<RankedCompound> stage2_rescore(const std::vector<ParsedCompound>& compounds,
                                           const std::vector<std::string>& candidate_ids,
                                           const std::vector<double>& protein_embedding,
                                           const nn::ParamStore& params,
                                           const model::ModelConfig& cfg, long keep, int workers) {
  if (candidate_ids.empty()) throw Error(Err::EmptyLibrary, "stage-2 has no candidates");
  std::map<std::string, const ParsedCompound*> by_id;
  for (const auto& c : compounds) by_id[c.id] = &c;
  std::vector<const ParsedCompound*> candidates;
  candidates.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Err::ConfigInvalid, "unknown stage-2 candidate '" + id + "'");
    candidates.push_back(it->second);
  }
  std::vector<RankedCompound> ranked(candidates.size());
  parallel_for(candidates.size(), workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      model::TokenReps reps =
          model::synthesize_token_reps(protein_embedding, candidates[i]->fingerprint, cfg);
      ranked[i] = {candidates[i]->id, model::teacher_score(reps, params, cfg)};
    }
  });
  sort_ranked(ranked);
  if (keep >= 0 && ranked.size() > static_cast<size_t>(keep)) ranked.resize(static_cast<size_t>(keep));
  return ranked;
}

// ---------------------------------------------------------------------------
// campaign

namespace {

std::vector<std::string> load_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open id list '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

void merge_params(nn::ParamStore& base, const nn::ParamStore& loaded, const std::string& prefix) {
  for (const auto& [name, tensor] : loaded.tensors())
    if (name.rfind(prefix, 0) == 0) base.put(name, tensor);
}

}  // namespace

ScreenReport run_campaign(const CampaignConfig& config) {
  config.validate();
  ScreenReport report;
  report.target_id = config.target_id;
  report.config_hash = config.config_hash();
  report.seed = config.seed;

  double t0 = now_seconds();
  auto library = chem::load_library(config.library_path);
  if (library.empty()) throw Error(Err::EmptyLibrary, "library has no records");
  report.library_size = library.size();
  auto protein_embedding = model::load_protein_embedding(config.protein_embedding_path);
  if (static_cast<int>(protein_embedding.size()) != config.model.d_protein)
    throw Error(Err::ConfigInvalid, "protein embedding dim != model d_protein");

  // parse + fingerprint; failures are logged and skipped
  std::vector<ParsedCompound> parsed_slots(library.size());
  std::vector<std::string> errors(library.size());
  parallel_for(library.size(), config.worker_count, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        ParsedCompound pc;
        pc.id = library[i].id;
        pc.smiles = library[i].smiles;
        pc.mol = chem::parse_smiles(library[i].smiles);
        pc.fingerprint = fp::ecfp(pc.mol, 2, config.model.fp_width);
        parsed_slots[i] = std::move(pc);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  });
  std::vector<ParsedCompound> compounds;
  compounds.reserve(library.size());
  for (size_t i = 0; i < library.size(); ++i) {
    if (errors[i].empty())
      compounds.push_back(std::move(parsed_slots[i]));
    else
      report.parse_failures.emplace_back(library[i].id, errors[i]);
  }
  report.parsed_count = compounds.size();
  if (compounds.empty()) throw Error(Err::EmptyLibrary, "no parseable compounds");
  report.timings_sec["parse_and_fingerprint"] = now_seconds() - t0;

  // model parameters
  nn::ParamStore params = model::init_params(config.model, config.seed);
  if (!config.teacher_checkpoint.empty()) {
    auto loaded = model::load_checkpoint(config.teacher_checkpoint);
    merge_params(params, loaded, "enc");
    merge_params(params, loaded, "head.");
  }
  if (!config.student_checkpoint.empty()) {
    auto loaded = model::load_checkpoint(config.student_checkpoint);
    merge_params(params, loaded, "stu.");
  }

  // prior index
  double t1 = now_seconds();
  cluster::CentroidIndex prior_index;
  if (!config.prior_index_path.empty()) {
    prior_index = cluster::load_prior_index(config.prior_index_path);
  } else {
    std::vector<fp::CacheEntry> cluster_set;
    cluster_set.reserve(compounds.size());
    for (const auto& c : compounds) cluster_set.push_back({c.id, c.fingerprint});
    std::sort(cluster_set.begin(), cluster_set.end(),
              [](const fp::CacheEntry& a, const fp::CacheEntry& b) { return a.id < b.id; });
    if (config.cluster_max > 0 && cluster_set.size() > static_cast<size_t>(config.cluster_max)) {
      // deterministic stride subsample over the id-sorted library
      size_t stride = (cluster_set.size() + static_cast<size_t>(config.cluster_max) - 1) /
                      static_cast<size_t>(config.cluster_max);
      std::vector<fp::CacheEntry> sampled;
      for (size_t i = 0; i < cluster_set.size(); i += stride) sampled.push_back(cluster_set[i]);
      cluster_set = std::move(sampled);
    }
    auto clusters =
        cluster::butina_cluster(cluster_set, config.cluster_threshold, config.worker_count);
    std::map<std::string, fp::Fingerprint> fps;
    for (const auto& entry : cluster_set) fps.emplace(entry.id, entry.fp);
    std::map<std::string, std::vector<double>> embeddings;
    for (const auto& cl : clusters) {
      model::TokenReps reps = model::synthesize_token_reps(
          protein_embedding, fps.at(cl.centroid_id), config.model);
      embeddings[cl.centroid_id] = model::trunk_embedding(reps, params, config.model);
    }
    prior_index = cluster::build_prior_index(clusters, fps, embeddings,
                                             config.compounds_per_center,
                                             static_cast<long>(compounds.size()));
  }
  report.timings_sec["prior_index"] = now_seconds() - t1;

  // stage 1: student triage
  double t2 = now_seconds();
  report.stage1 = stage1_triage(compounds, protein_embedding, prior_index, params, config.model,
                                config.stage1_keep, config.worker_count);
  report.timings_sec["stage1"] = now_seconds() - t2;

  // stage 2: rescoring
  double t3 = now_seconds();
  std::vector<std::string> stage1_ids;
  stage1_ids.reserve(report.stage1.size());
  for (const auto& r : report.stage1) stage1_ids.push_back(r.id);
  report.stage2 = stage2_rescore(compounds, stage1_ids, protein_embedding, params, config.model,
                                 config.stage2_keep, config.worker_count);
  report.timings_sec["stage2"] = now_seconds() - t3;

  // filter cascade over stage-2 survivors
  double t4 = now_seconds();
  std::vector<fp::CacheEntry> known_actives;
  if (!config.known_actives_path.empty()) {
    for (const auto& rec : chem::load_library(config.known_actives_path)) {
      try {
        known_actives.push_back(
            {rec.id, fp::ecfp(chem::parse_smiles(rec.smiles), 2, config.model.fp_width)});
      } catch (const Error&) {
        // unusable reference actives are skipped
      }
    }
  }
  std::set<std::string> allowlist;
  bool use_allowlist = !config.allowlist_path.empty();
  if (use_allowlist)
    for (const auto& id : load_id_list(config.allowlist_path)) allowlist.insert(id);

  std::map<std::string, double> stage1_scores;
  for (const auto& r : report.stage1) stage1_scores[r.id] = r.score;
  std::map<std::string, const ParsedCompound*> by_id;
  for (const auto& c : compounds) by_id[c.id] = &c;

  for (const auto& ranked : report.stage2) {
    const ParsedCompound& pc = *by_id.at(ranked.id);
    CompoundVerdict verdict;
    verdict.id = pc.id;
    verdict.smiles = pc.smiles;
    verdict.stage1_score = stage1_scores.at(pc.id);
    verdict.stage2_score = ranked.score;
    verdict.property = property_filter(pc.mol, config.thresholds);
    verdict.novelty =
        novelty_filter(pc.fingerprint, known_actives, config.thresholds.novelty_cutoff);
    verdict.allowlisted = !use_allowlist || allowlist.count(pc.id) > 0;
    verdict.pass = verdict.property.pass && verdict.novelty.keep && verdict.allowlisted;
    report.verdicts.push_back(std::move(verdict));
  }
  for (const auto& verdict : report.verdicts) {
    if (!verdict.pass) continue;
    if (static_cast<long>(report.shortlist.size()) >= config.shortlist_size) break;
    report.shortlist.push_back(verdict.id);
  }
  report.timings_sec["filters"] = now_seconds() - t4;
  report.timings_sec["total"] = now_seconds() - t0;
  return report;
}

// ---------------------------------------------------------------------------
// report emission

std::string report_to_json(const ScreenReport& report) {
  json j;
  j["target_id"] = report.target_id;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["library_size"] = report.library_size;
  j["parsed_count"] = report.parsed_count;
  json failures = json::array();
  for (const auto& [id, error] : report.parse_failures)
    failures.push_back({{"id", id}, {"error", error}});
  j["parse_failures"] = failures;
  auto stage_json = [](const std::vector<RankedCompound>& stage) {
    json arr = json::array();
    int rank = 1;
    for (const auto& r : stage) arr.push_back({{"rank", rank++}, {"id", r.id}, {"score", r.score}});
    return arr;
  };
  j["stage1"] = stage_json(report.stage1);
  j["stage2"] = stage_json(report.stage2);
  json verdicts = json::array();
  for (const auto& v : report.verdicts) {
    json vj;
    vj["id"] = v.id;
    vj["smiles"] = v.smiles;
    vj["stage1_score"] = v.stage1_score;
    vj["stage2_score"] = v.stage2_score;
    vj["pass"] = v.pass;
    vj["reasons"] = v.property.reasons;
    if (!v.novelty.keep) vj["reasons"].push_back("novelty");
    if (!v.allowlisted) vj["reasons"].push_back("availability");
    vj["descriptors"] = {{"mw", v.property.mw},
                         {"clogp", v.property.clogp},
                         {"clogp_flagged", v.property.clogp_flagged},
                         {"hbd", v.property.hbd},
                         {"hba", v.property.hba},
                         {"rotatable_bonds", v.property.rotatable_bonds},
                         {"ring_count", v.property.ring_count},
                         {"esol", v.property.esol}};
    vj["novelty"] = {{"keep", v.novelty.keep},
                     {"nearest_id", v.novelty.nearest_id},
                     {"similarity", v.novelty.similarity}};
    verdicts.push_back(std::move(vj));
  }
  j["verdicts"] = verdicts;
  j["shortlist"] = report.shortlist;
  return j.dump(2) + "\n";
}

std::string shortlist_to_csv(const ScreenReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "id,smiles,stage1_score,stage2_score,mw,clogp,hbd,hba,rotatable_bonds,ring_count,esol,"
         "nearest_active_similarity\n";
  std::map<std::string, const CompoundVerdict*> by_id;
  for (const auto& v : report.verdicts) by_id[v.id] = &v;
  for (const auto& id : report.shortlist) {
    const CompoundVerdict& v = *by_id.at(id);
    out << v.id << ',' << v.smiles << ',' << v.stage1_score << ',' << v.stage2_score << ','
        << v.property.mw << ',' << v.property.clogp << ',' << v.property.hbd << ','
        << v.property.hba << ',' << v.property.rotatable_bonds << ',' << v.property.ring_count
        << ',' << v.property.esol << ',' << v.novelty.similarity << '\n';
  }
  return out.str();
}

std::string distributions_to_csv(const ScreenReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "stage,rank,id,score\n";
  int rank = 1;
  for (const auto& r : report.stage1) out << "stage1," << rank++ << ',' << r.id << ',' << r.score << '\n';
  rank = 1;
  for (const auto& r : report.stage2) out << "stage2," << rank++ << ',' << r.id << ',' << r.score << '\n';
  return out.str();
}

void write_report_files(const ScreenReport& report, const CampaignConfig& config) {
  namespace fs = std::filesystem;
  fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto write = [&dir](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(Err::IoError, "cannot write report file '" + name + "'");
    out << content;
  };
  write("report.json", report_to_json(report));
  write("shortlist.csv", shortlist_to_csv(report));
  write("score_distributions.csv", distributions_to_csv(report));
  json timings;
  for (const auto& [k, v] : report.timings_sec) timings[k] = v;
  write("timings.json", timings.dump(2) + "\n");
}

}  // namespace aura::screen
