#include "aurascreen/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace aura::cluster {

std::vector<Cluster> butina_cluster(const std::vector<fp::CacheEntry>& fps, double threshold,
                                    int workers) {
  if (fps.empty()) throw Error(Err::EmptyLibrary, "no fingerprints to cluster");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(Err::ConfigInvalid, "clustering threshold must be in (0,1]");

  std::vector<fp::CacheEntry> items(fps.begin(), fps.end());
  std::sort(items.begin(), items.end(),
            [](const fp::CacheEntry& a, const fp::CacheEntry& b) { return a.id < b.id; });
  size_t n = items.size();

  std::vector<std::vector<int>> neighbors(n);
  parallel_for(n, workers, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i)
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        if (fp::tanimoto(items[i].fp, items[j].fp) > threshold)
          neighbors[i].push_back(static_cast<int>(j));
      }
  });

  std::vector<bool> assigned(n, false);
  std::vector<Cluster> clusters;
  size_t remaining = n;
  while (remaining > 0) {
    int seed = -1;
    int best_count = -1;
    for (size_t i = 0; i < n; ++i) {
      if (assigned[i]) continue;
      int count = 0;
      for (int j : neighbors[i])
        if (!assigned[static_cast<size_t>(j)]) ++count;
      if (count > best_count) {  // ids are sorted, so first max wins ties
        best_count = count;
        seed = static_cast<int>(i);
      }
    }
    Cluster cluster;
    cluster.member_ids.push_back(items[static_cast<size_t>(seed)].id);
    assigned[static_cast<size_t>(seed)] = true;
    --remaining;
    for (int j : neighbors[static_cast<size_t>(seed)]) {
      if (assigned[static_cast<size_t>(j)]) continue;
      cluster.member_ids.push_back(items[static_cast<size_t>(j)].id);
      assigned[static_cast<size_t>(j)] = true;
      --remaining;
    }
    std::sort(cluster.member_ids.begin(), cluster.member_ids.end());
    clusters.push_back(std::move(cluster));
  }

  // centroid: member maximizing mean tanimoto to the others, ties by id
  std::map<std::string, const fp::Fingerprint*> by_id;
  for (const auto& item : items) by_id[item.id] = &item.fp;
  for (auto& cluster : clusters) {
    double best = -1.0;
    std::string best_id;
    for (const auto& candidate : cluster.member_ids) {
      double total = 0.0;
      for (const auto& other : cluster.member_ids) {
        if (other == candidate) continue;
        total += fp::tanimoto(*by_id.at(candidate), *by_id.at(other));
      }
      double mean = cluster.member_ids.size() > 1
                        ? total / static_cast<double>(cluster.member_ids.size() - 1)
                        : 0.0;
      if (mean > best + 1e-12 || (std::abs(mean - best) <= 1e-12 && candidate < best_id)) {
        best = mean;
        best_id = candidate;
      }
    }
    cluster.centroid_id = best_id;
  }
  return clusters;
}

CentroidIndex build_prior_index(const std::vector<Cluster>& clusters,
                                const std::map<std::string, fp::Fingerprint>& fps,
                                const std::map<std::string, std::vector<double>>& embeddings,
                                long compounds_per_center, long library_size) {
  if (clusters.empty()) throw Error(Err::EmptyLibrary, "no clusters");
  if (compounds_per_center <= 0)
    throw Error(Err::ConfigInvalid, "compounds_per_center must be positive");
  long budget = std::max<long>(
      1, (library_size + compounds_per_center - 1) / compounds_per_center);

  std::vector<const Cluster*> order;
  order.reserve(clusters.size());
  for (const auto& c : clusters) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Cluster* a, const Cluster* b) {
    if (a->member_ids.size() != b->member_ids.size())
      return a->member_ids.size() > b->member_ids.size();
    return a->centroid_id < b->centroid_id;
  });

  CentroidIndex index;
  index.budget = static_cast<int>(budget);
  size_t keep = std::min<size_t>(static_cast<size_t>(budget), order.size());
  size_t dim = 0;
  for (size_t i = 0; i < keep; ++i) {
    const std::string& id = order[i]->centroid_id;
    auto emb = embeddings.find(id);
    if (emb == embeddings.end()) throw Error(Err::MissingEmbedding, "centroid '" + id + "'");
    auto fp_it = fps.find(id);
    if (fp_it == fps.end()) throw Error(Err::MissingEmbedding, "no fingerprint for '" + id + "'");
    if (i == 0)
      dim = emb->second.size();
    else if (emb->second.size() != dim)
      throw Error(Err::DimensionMismatch, "prior embeddings differ in dimension");
    index.centroids.push_back({id, fp_it->second, emb->second});
  }
  return index;
}

const Centroid& nearest_centroid(const fp::Fingerprint& fingerprint, const CentroidIndex& index) {
  if (index.centroids.empty()) throw Error(Err::EmptyIndex, "no centroids");
  const Centroid* best = nullptr;
  double best_sim = -1.0;
  for (const auto& centroid : index.centroids) {
    double sim = fp::tanimoto(fingerprint, centroid.fingerprint);
    if (sim > best_sim + 1e-15 ||
        (std::abs(sim - best_sim) <= 1e-15 && best && centroid.id < best->id)) {
      best_sim = sim;
      best = &centroid;
    }
  }
  return *best;
}

void save_prior_index(const std::string& path, const CentroidIndex& index) {
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write prior index '" + path + "'");
  out << "dim=" << index.dim() << " count=" << index.centroids.size() << "\n";
  out.precision(17);
  for (const auto& centroid : index.centroids) {
    out << centroid.id << '\t' << centroid.fingerprint.to_hex() << '\t';
    for (size_t i = 0; i < centroid.prior_embedding.size(); ++i) {
      if (i) out << ' ';
      out << centroid.prior_embedding[i];
    }
    out << '\n';
  }
}

CentroidIndex load_prior_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot open prior index '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw Error(Err::IoError, "empty prior index");
  int dim = 0;
  size_t count = 0;
  if (std::sscanf(header.c_str(), "dim=%d count=%zu", &dim, &count) != 2)
    throw Error(Err::IoError, "bad prior index header '" + header + "'");
  CentroidIndex index;
  index.budget = static_cast<int>(count);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream parts(line);
    Centroid centroid;
    std::string hex;
    if (!std::getline(parts, centroid.id, '\t') || !std::getline(parts, hex, '\t'))
      throw Error(Err::IoError, "bad prior index record");
    centroid.fingerprint = fp::Fingerprint::from_hex(hex);
    double v;
    while (parts >> v) centroid.prior_embedding.push_back(v);
    if (static_cast<int>(centroid.prior_embedding.size()) != dim)
      throw Error(Err::IoError, "prior index record has wrong dimension");
    index.centroids.push_back(std::move(centroid));
  }
  if (index.centroids.size() != count)
    throw Error(Err::IoError, "prior index count mismatch");
  return index;
}

}  // namespace aura::cluster
