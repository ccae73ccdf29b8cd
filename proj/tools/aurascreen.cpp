#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "aurascreen/chem.hpp"
#include "aurascreen/cluster.hpp"
#include "aurascreen/crippen.hpp"
#include "aurascreen/fingerprint.hpp"
#include "aurascreen/harness.hpp"
#include "aurascreen/metrics.hpp"
#include "aurascreen/model.hpp"
#include "aurascreen/sampler.hpp"
#include "aurascreen/screening.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aura::Error(aura::Err::IoError, "cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

aura::model::ModelConfig model_config_from(const json& j) {
  aura::model::ModelConfig cfg;
  if (!j.contains("model")) return cfg;
  const auto& m = j.at("model");
  cfg.d_single = m.value("d_single", cfg.d_single);
  cfg.d_pair = m.value("d_pair", cfg.d_pair);
  cfg.d_transition = m.value("d_transition", cfg.d_transition);
  cfg.encoder_blocks = m.value("encoder_blocks", cfg.encoder_blocks);
  cfg.temperature = m.value("temperature", cfg.temperature);
  cfg.ligand_weight_ratio = m.value("ligand_weight_ratio", cfg.ligand_weight_ratio);
  cfg.fp_width = m.value("fp_width", cfg.fp_width);
  cfg.d_model = m.value("d_model", cfg.d_model);
  cfg.student_blocks = m.value("student_blocks", cfg.student_blocks);
  cfg.d_protein = m.value("d_protein", cfg.d_protein);
  cfg.protein_tokens = m.value("protein_tokens", cfg.protein_tokens);
  cfg.ligand_tokens = m.value("ligand_tokens", cfg.ligand_tokens);
  return cfg;
}

void write_loss_curve(const std::string& path, const std::vector<double>& curve) {
  std::ofstream out(path);
  if (!out) throw aura::Error(aura::Err::IoError, "cannot write '" + path + "'");
  out.precision(17);
  out << "epoch,loss\n";
  for (size_t i = 0; i < curve.size(); ++i) out << i << ',' << curve[i] << '\n';
}

std::map<std::string, double> read_id_value_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aura::Error(aura::Err::IoError, "cannot open '" + path + "'");
  std::map<std::string, double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw aura::Error(aura::Err::IoError, "bad csv line '" + line + "'");
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

int cmd_parse(const std::string& library_path, int workers) {
  auto library = aura::chem::load_library(library_path);
  std::vector<std::string> errors(library.size());
  std::vector<int> heavy(library.size(), 0);
  aura::parallel_for(library.size(), workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        auto mol = aura::chem::parse_smiles(library[i].smiles);
        heavy[i] = static_cast<int>(mol.atoms.size());
      } catch (const aura::Error& e) {
        errors[i] = e.what();
      }
    }
  });
  size_t failures = 0;
  long total_heavy = 0;
  for (size_t i = 0; i < library.size(); ++i) {
    if (errors[i].empty()) {
      total_heavy += heavy[i];
    } else {
      ++failures;
      std::cout << "FAIL\t" << library[i].id << "\t" << errors[i] << "\n";
    }
  }
  size_t ok = library.size() - failures;
  std::cout << "records: " << library.size() << "\nparsed: " << ok << "\nfailed: " << failures;
  if (ok > 0)
    std::cout << "\nmean_heavy_atoms: " << static_cast<double>(total_heavy) / static_cast<double>(ok);
  std::cout << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_fp(const std::string& library_path, const std::string& out_path, int radius, int width,
           int workers) {
  auto library = aura::chem::load_library(library_path);
  std::vector<aura::fp::CacheEntry> entries(library.size());
  std::vector<uint8_t> ok(library.size(), 0);
  aura::parallel_for(library.size(), workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        auto mol = aura::chem::parse_smiles(library[i].smiles);
        entries[i] = {library[i].id, aura::fp::ecfp(mol, radius, width)};
        ok[i] = 1;
      } catch (const aura::Error&) {
      }
    }
  });
  std::vector<aura::fp::CacheEntry> kept;
  for (size_t i = 0; i < entries.size(); ++i)
    if (ok[i]) kept.push_back(std::move(entries[i]));
  aura::fp::save_cache(out_path, kept);
  std::cout << "fingerprints: " << kept.size() << " of " << library.size() << " -> " << out_path
            << "\n";
  return 0;
}

int cmd_cluster(const std::string& library_path, const std::string& embedding_path,
                const std::string& out_path, double threshold, long compounds_per_center,
                long cluster_max, uint64_t seed, const std::string& checkpoint, int workers) {
  auto library = aura::chem::load_library(library_path);
  auto protein = aura::model::load_protein_embedding(embedding_path);
  aura::model::ModelConfig cfg;
  cfg.d_protein = static_cast<int>(protein.size());
  aura::nn::ParamStore params = checkpoint.empty() ? aura::model::init_params(cfg, seed)
                                                   : aura::model::load_checkpoint(checkpoint);
  std::vector<aura::fp::CacheEntry> entries;
  for (const auto& rec : library) {
    try {
      entries.push_back({rec.id, aura::fp::ecfp(aura::chem::parse_smiles(rec.smiles), 2, cfg.fp_width)});
    } catch (const aura::Error&) {
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const aura::fp::CacheEntry& a, const aura::fp::CacheEntry& b) { return a.id < b.id; });
  if (cluster_max > 0 && entries.size() > static_cast<size_t>(cluster_max)) {
    size_t stride = (entries.size() + static_cast<size_t>(cluster_max) - 1) /
                    static_cast<size_t>(cluster_max);
    std::vector<aura::fp::CacheEntry> sampled;
    for (size_t i = 0; i < entries.size(); i += stride) sampled.push_back(entries[i]);
    entries = std::move(sampled);
  }
  auto clusters = aura::cluster::butina_cluster(entries, threshold, workers);
  std::map<std::string, aura::fp::Fingerprint> fps;
  for (const auto& e : entries) fps.emplace(e.id, e.fp);
  std::map<std::string, std::vector<double>> embeddings;
  for (const auto& cl : clusters) {
    auto reps = aura::model::synthesize_token_reps(protein, fps.at(cl.centroid_id), cfg);
    embeddings[cl.centroid_id] = aura::model::trunk_embedding(reps, params, cfg);
  }
  auto index = aura::cluster::build_prior_index(clusters, fps, embeddings, compounds_per_center,
                                                static_cast<long>(library.size()));
  aura::cluster::save_prior_index(out_path, index);
  std::cout << "clusters: " << clusters.size() << "\ncentroids kept: " << index.centroids.size()
            << "\n-> " << out_path << "\n";
  return 0;
}

int cmd_train_student(const std::string& config_path) {
  json j = read_json_file(config_path);
  const auto& w = j.at("world");
  auto cfg = model_config_from(j);
  auto world = aura::harness::generate_world(w.value("seed", 1UL), w.value("size", 2000UL),
                                             w.value("noise", 0.0), cfg.fp_width, cfg.d_protein);
  aura::harness::StudentTrainOptions opt;
  opt.model = cfg;
  opt.train_count = j.value("train_count", 1000UL);
  opt.epochs = j.value("epochs", 30);
  opt.lr = j.value("lr", 1.8e-3);
  opt.momentum = j.value("momentum", 0.9);
  opt.batch_size = j.value("batch_size", 32);
  opt.seed = j.value("seed", 0UL);
  opt.distill_from_teacher = j.value("distill_from_teacher", false);
  opt.cluster_sample = j.value("cluster_sample", 512UL);

  auto result = aura::harness::train_student(world, opt);
  std::string out_dir = j.value("out_dir", ".");
  fs::create_directories(out_dir);
  aura::model::save_checkpoint(out_dir + "/student.auro", result.params);
  write_loss_curve(out_dir + "/loss_curve.csv", result.loss_curve);
  aura::cluster::save_prior_index(out_dir + "/prior.idx", result.prior_index);
  aura::harness::write_manifest(out_dir + "/manifest.json", opt.seed,
                                aura::to_hex(aura::fnv1a64(j.dump())));
  std::cout << "final loss: " << result.loss_curve.back() << "\n-> " << out_dir << "\n";
  return 0;
}

int cmd_train_head(const std::string& config_path) {
  json j = read_json_file(config_path);
  auto cfg = model_config_from(j);
  std::map<std::string, aura::fp::Fingerprint> fps;
  std::vector<aura::sampler::ActivityRecord> records;
  std::vector<double> protein;

  if (j.contains("world")) {
    const auto& w = j.at("world");
    auto world = aura::harness::generate_world(w.value("seed", 1UL), w.value("size", 400UL),
                                               w.value("noise", 0.0), cfg.fp_width, cfg.d_protein);
    protein = world.protein_embedding;
    for (size_t i = 0; i < world.library.size(); ++i) {
      fps.emplace(world.library[i].id, world.fingerprints[i]);
      aura::sampler::ActivityRecord rec;
      rec.target_id = "SYNTH";
      rec.compound_id = world.library[i].id;
      rec.pxc50 = 6.0 + world.labels[i];
      records.push_back(std::move(rec));
    }
  } else {
    records = aura::sampler::load_activity_csv(j.at("activity_csv").get<std::string>());
    auto library = aura::chem::load_library(j.at("library").get<std::string>());
    for (const auto& rec : library) {
      try {
        fps.emplace(rec.id, aura::fp::ecfp(aura::chem::parse_smiles(rec.smiles), 2, cfg.fp_width));
      } catch (const aura::Error&) {
      }
    }
    protein = aura::model::load_protein_embedding(j.at("protein_embedding").get<std::string>());
    cfg.d_protein = static_cast<int>(protein.size());
  }

  auto groups = aura::sampler::build_dpo_groups(records, j.value("group_size", 2),
                                                j.value("window", 1.0));
  if (groups.empty()) throw aura::Error(aura::Err::EmptyLibrary, "no DPO groups formed");
  aura::harness::HeadTrainOptions opt;
  opt.model = cfg;
  opt.epochs = j.value("epochs", 30);
  opt.lr = j.value("lr", 2e-4);
  opt.momentum = j.value("momentum", 0.9);
  opt.batch_groups = j.value("batch_groups", 8);
  opt.tau = j.value("tau", 0.1);
  opt.seed = j.value("seed", 0UL);

  auto result = aura::harness::train_head_dpo(groups, fps, protein, opt);
  std::string out_dir = j.value("out_dir", ".");
  fs::create_directories(out_dir);
  aura::model::save_checkpoint(out_dir + "/head.auro", result.params);
  write_loss_curve(out_dir + "/loss_curve.csv", result.loss_curve);
  aura::harness::write_manifest(out_dir + "/manifest.json", opt.seed,
                                aura::to_hex(aura::fnv1a64(j.dump())));
  std::cout << "groups: " << groups.size() << "\nfinal loss: " << result.loss_curve.back()
            << "\nmean P(true order): " << result.mean_prob_curve.back() << "\n-> " << out_dir
            << "\n";
  return 0;
}

int cmd_campaign(const std::string& config_path) {
  auto config = aura::screen::CampaignConfig::from_json_file(config_path);
  auto report = aura::screen::run_campaign(config);
  aura::screen::write_report_files(report, config);
  aura::harness::write_manifest(fs::path(config.output_dir) / "manifest.json", config.seed,
                                config.config_hash());
  std::cout << "library: " << report.library_size << "\nparsed: " << report.parsed_count
            << "\nstage1: " << report.stage1.size() << "\nstage2: " << report.stage2.size()
            << "\nshortlist: " << report.shortlist.size() << "\n-> " << config.output_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path,
             const std::string& fractions_arg, const std::string& out_path) {
  auto scores = read_id_value_csv(scores_path);
  auto labels = read_id_value_csv(labels_path);
  std::vector<aura::metrics::ScoredLabel> entries;
  for (const auto& [id, score] : scores) {
    auto it = labels.find(id);
    if (it == labels.end())
      throw aura::Error(aura::Err::IoError, "no label for id '" + id + "'");
    entries.push_back({score, it->second != 0.0});
  }
  json out;
  out["n"] = entries.size();
  long positives = 0;
  for (const auto& e : entries) positives += e.label ? 1 : 0;
  out["positives"] = positives;
  json ef = json::object();
  std::stringstream ss(fractions_arg);
  std::string token;
  while (std::getline(ss, token, ',')) {
    double fraction = std::stod(token);
    ef[token] = aura::metrics::enrichment_factor(entries, fraction);
  }
  out["enrichment_factor"] = ef;
  out["aupr"] = aura::metrics::aupr(entries);
  out["auroc"] = aura::metrics::auroc(entries);
  std::string text = out.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << text;
  }
  std::cout << text;
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir) {
  json j = read_json_file(report_path);
  fs::create_directories(out_dir);
  // shortlist.csv
  {
    std::map<std::string, json> verdicts;
    for (const auto& v : j.at("verdicts")) verdicts[v.at("id").get<std::string>()] = v;
    std::ofstream out(fs::path(out_dir) / "shortlist.csv");
    out.precision(17);
    out << "id,smiles,stage1_score,stage2_score,mw,clogp,hbd,hba,rotatable_bonds,ring_count,esol,"
           "nearest_active_similarity\n";
    for (const auto& id : j.at("shortlist")) {
      const json& v = verdicts.at(id.get<std::string>());
      const json& d = v.at("descriptors");
      out << v.at("id").get<std::string>() << ',' << v.at("smiles").get<std::string>() << ','
          << v.at("stage1_score").get<double>() << ',' << v.at("stage2_score").get<double>() << ','
          << d.at("mw").get<double>() << ',' << d.at("clogp").get<double>() << ','
          << d.at("hbd").get<int>() << ',' << d.at("hba").get<int>() << ','
          << d.at("rotatable_bonds").get<int>() << ',' << d.at("ring_count").get<int>() << ','
          << d.at("esol").get<double>() << ',' << v.at("novelty").at("similarity").get<double>()
          << '\n';
    }
  }
  // score_distributions.csv
  {
    std::ofstream out(fs::path(out_dir) / "score_distributions.csv");
    out.precision(17);
    out << "stage,rank,id,score\n";
    for (const char* stage : {"stage1", "stage2"})
      for (const auto& r : j.at(stage))
        out << stage << ',' << r.at("rank").get<int>() << ',' << r.at("id").get<std::string>()
            << ',' << r.at("score").get<double>() << '\n';
  }
  std::cout << "-> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage virtual screening toolkit"};
  app.require_subcommand(1);

  std::string library_path, out_path, embedding_path, config_path, checkpoint;
  std::string scores_path, labels_path, fractions = "0.01,0.05", out_dir = ".";
  int workers = 1, radius = 2, width = 1024;
  double threshold = 0.6;
  long compounds_per_center = 100000, cluster_max = 200000;
  uint64_t seed = 0;

  auto* parse_cmd = app.add_subcommand("parse", "parse a compound library and report failures");
  parse_cmd->add_option("--library", library_path)->required();
  parse_cmd->add_option("--workers", workers);

  auto* fp_cmd = app.add_subcommand("fp", "write a binary fingerprint cache");
  fp_cmd->add_option("--library", library_path)->required();
  fp_cmd->add_option("--out", out_path)->required();
  fp_cmd->add_option("--radius", radius);
  fp_cmd->add_option("--width", width);
  fp_cmd->add_option("--workers", workers);

  auto* cluster_cmd = app.add_subcommand("cluster", "cluster a library and write a prior index");
  cluster_cmd->add_option("--library", library_path)->required();
  cluster_cmd->add_option("--protein-embedding", embedding_path)->required();
  cluster_cmd->add_option("--out", out_path)->required();
  cluster_cmd->add_option("--threshold", threshold);
  cluster_cmd->add_option("--compounds-per-center", compounds_per_center);
  cluster_cmd->add_option("--cluster-max", cluster_max);
  cluster_cmd->add_option("--seed", seed);
  cluster_cmd->add_option("--checkpoint", checkpoint);
  cluster_cmd->add_option("--workers", workers);

  auto* ts_cmd = app.add_subcommand("train-student", "train the student scorer");
  ts_cmd->add_option("--config", config_path)->required();

  auto* th_cmd = app.add_subcommand("train-head", "preference-train the affinity head");
  th_cmd->add_option("--config", config_path)->required();

  auto* campaign_cmd = app.add_subcommand("campaign", "run the full screening pipeline");
  campaign_cmd->add_option("--config", config_path)->required();
  auto* screen_cmd = app.add_subcommand("screen", "alias of campaign");
  screen_cmd->add_option("--config", config_path)->required();

  auto* eval_cmd = app.add_subcommand("eval", "screening metrics from score/label tables");
  eval_cmd->add_option("--scores", scores_path)->required();
  eval_cmd->add_option("--labels", labels_path)->required();
  eval_cmd->add_option("--fractions", fractions);
  eval_cmd->add_option("--out", out_path);

  auto* report_cmd = app.add_subcommand("report", "re-emit CSV views from a report.json");
  report_cmd->add_option("--in", config_path)->required();
  report_cmd->add_option("--out-dir", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse_cmd->parsed()) return cmd_parse(library_path, workers);
    if (fp_cmd->parsed()) return cmd_fp(library_path, out_path, radius, width, workers);
    if (cluster_cmd->parsed())
      return cmd_cluster(library_path, embedding_path, out_path, threshold, compounds_per_center,
                         cluster_max, seed, checkpoint, workers);
    if (ts_cmd->parsed()) return cmd_train_student(config_path);
    if (th_cmd->parsed()) return cmd_train_head(config_path);
    if (campaign_cmd->parsed() || screen_cmd->parsed()) return cmd_campaign(config_path);
    if (eval_cmd->parsed()) return cmd_eval(scores_path, labels_path, fractions, out_path);
    if (report_cmd->parsed()) return cmd_report(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
