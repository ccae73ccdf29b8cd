#pragma once

#include <map>
#include <string>
#include <vector>

#include "aurascreen/fingerprint.hpp"

namespace aura::cluster {

struct Cluster {
  std::vector<std::string> member_ids;
  std::string centroid_id;  // maximizes mean Tanimoto to the other members
};

struct Centroid {
  std::string id;
  fp::Fingerprint fingerprint;
  std::vector<double> prior_embedding;
};

struct CentroidIndex {
  std::vector<Centroid> centroids;
  int budget = 0;
  int dim() const {
    return centroids.empty() ? 0 : static_cast<int>(centroids[0].prior_embedding.size());
  }
};

// Taylor-Butina sphere exclusion. Neighbors are pairs with tanimoto strictly
// above `threshold`; seeds are picked by most unassigned neighbors (ties by
// id ascending) until everything is assigned. Deterministic for any worker
// count; `workers` only parallelizes the similarity pass.
std::vector<Cluster> butina_cluster(const std::vector<fp::CacheEntry>& fps,
                                    double threshold = 0.6, int workers = 1);

// budget = max(1, ceil(library_size / compounds_per_center)); keeps centroids
// of the `budget` largest clusters (ties by centroid id ascending).
CentroidIndex build_prior_index(const std::vector<Cluster>& clusters,
                                const std::map<std::string, fp::Fingerprint>& fps,
                                const std::map<std::string, std::vector<double>>& embeddings,
                                long compounds_per_center, long library_size);

// centroid with maximum tanimoto; ties by smallest id
const Centroid& nearest_centroid(const fp::Fingerprint& fingerprint, const CentroidIndex& index);

// Header `dim=<D> count=<K>`, then one line per centroid:
// `<id>\t<hex fingerprint>\t<D space-separated floats>`.
void save_prior_index(const std::string& path, const CentroidIndex& index);
CentroidIndex load_prior_index(const std::string& path);

}  // namespace aura::cluster
