#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "aurascreen/cluster.hpp"

using namespace aura;

namespace {

fp::Fingerprint bits(std::initializer_list<int> set, int width = 64) {
  fp::Fingerprint f(width);
  for (int b : set) f.set(b);
  return f;
}

// brute-force reference: recompute every pairwise similarity and check the
// sphere-exclusion invariants directly
void check_partition(const std::vector<fp::CacheEntry>& entries,
                     const std::vector<cluster::Cluster>& clusters, double threshold) {
  std::map<std::string, const fp::Fingerprint*> by_id;
  for (const auto& e : entries) by_id[e.id] = &e.fp;
  std::set<std::string> seen;
  for (const auto& cl : clusters) {
    CHECK(!cl.member_ids.empty());
    CHECK(std::count(cl.member_ids.begin(), cl.member_ids.end(), cl.centroid_id) == 1);
    for (const auto& id : cl.member_ids) CHECK(seen.insert(id).second);
    // some member (the seed) is within threshold of every other member
    if (cl.member_ids.size() > 1) {
      bool seed_exists = false;
      for (const auto& candidate : cl.member_ids) {
        bool covers_all = true;
        for (const auto& other : cl.member_ids) {
          if (other == candidate) continue;
          if (!(fp::tanimoto(*by_id.at(candidate), *by_id.at(other)) > threshold))
            covers_all = false;
        }
        seed_exists = seed_exists || covers_all;
      }
      CHECK(seed_exists);
    }
  }
  CHECK(seen.size() == entries.size());
}

}  // namespace

TEST_CASE("identical fingerprints collapse to one cluster") {
  std::vector<fp::CacheEntry> entries;
  for (int i = 0; i < 5; ++i) entries.push_back({"C" + std::to_string(i), bits({1, 2, 3})});
  auto clusters = cluster::butina_cluster(entries, 0.6);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].member_ids.size() == 5);
  CHECK(clusters[0].centroid_id == "C0");  // all tie, smallest id wins
}

TEST_CASE("disjoint fingerprints stay singletons") {
  std::vector<fp::CacheEntry> entries;
  for (int i = 0; i < 4; ++i) entries.push_back({"C" + std::to_string(i), bits({i * 8, i * 8 + 1})});
  auto clusters = cluster::butina_cluster(entries, 0.6);
  CHECK(clusters.size() == 4);
  for (const auto& cl : clusters) CHECK(cl.member_ids.size() == 1);
}

TEST_CASE("known 3+2 neighbor structure splits accordingly") {
  // A,B,C mutually similar; D,E mutually similar; the two groups disjoint
  std::vector<fp::CacheEntry> entries{
      {"A", bits({1, 2, 3, 4})},
      {"B", bits({1, 2, 3, 5})},
      {"C", bits({1, 2, 3, 6})},
      {"D", bits({40, 41, 42})},
      {"E", bits({40, 41, 42, 43})},
  };
  // brute force: sim within {A,B,C} = 3/5 = 0.6 > 0.5, sim(D,E) = 3/4 = 0.75,
  // cross-group sims are 0
  auto clusters = cluster::butina_cluster(entries, 0.5);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].member_ids.size() + clusters[1].member_ids.size() == 5);
  std::set<std::string> first(clusters[0].member_ids.begin(), clusters[0].member_ids.end());
  CHECK(first == std::set<std::string>{"A", "B", "C"});
  check_partition(entries, clusters, 0.5);
}

TEST_CASE("every member is within threshold of its seed") {
  Rng rng(99);
  std::vector<fp::CacheEntry> entries;
  for (int i = 0; i < 60; ++i) {
    fp::Fingerprint f(128);
    int base = static_cast<int>(rng.below(4)) * 24;
    for (int k = 0; k < 10; ++k) f.set(base + static_cast<int>(rng.below(20)));
    char id[16];
    std::snprintf(id, sizeof(id), "R%03d", i);
    entries.push_back({id, f});
  }
  auto clusters = cluster::butina_cluster(entries, 0.4);
  check_partition(entries, clusters, 0.4);
  // determinism across worker counts
  auto again = cluster::butina_cluster(entries, 0.4, 4);
  REQUIRE(again.size() == clusters.size());
  for (size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].member_ids == clusters[i].member_ids);
    CHECK(again[i].centroid_id == clusters[i].centroid_id);
  }
}

TEST_CASE("centroid maximizes mean similarity") {
  // B overlaps both A and C strongly; A and C overlap each other less
  std::vector<fp::CacheEntry> entries{
      {"A", bits({1, 2, 3, 4})},
      {"B", bits({2, 3, 4, 5})},
      {"C", bits({3, 4, 5, 6})},
  };
  auto clusters = cluster::butina_cluster(entries, 0.3);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].centroid_id == "B");
}

TEST_CASE("empty library throws") {
  CHECK_THROWS_AS(cluster::butina_cluster({}, 0.6), Error);
}

TEST_CASE("prior index budget arithmetic") {
  std::vector<cluster::Cluster> clusters;
  std::map<std::string, fp::Fingerprint> fps;
  std::map<std::string, std::vector<double>> embeddings;
  // five clusters of sizes 10, 8, 8, 2, 1 with centroids K0..K4
  std::vector<int> sizes{10, 8, 8, 2, 1};
  for (int c = 0; c < 5; ++c) {
    cluster::Cluster cl;
    cl.centroid_id = "K" + std::to_string(c);
    for (int m = 0; m < sizes[static_cast<size_t>(c)]; ++m)
      cl.member_ids.push_back("K" + std::to_string(c) + "_" + std::to_string(m));
    cl.member_ids.push_back(cl.centroid_id);
    clusters.push_back(cl);
    fps.emplace(cl.centroid_id, bits({c}));
    embeddings[cl.centroid_id] = {1.0 * c, 2.0 * c};
  }
  CHECK(cluster::build_prior_index(clusters, fps, embeddings, 100000, 50000).budget == 1);
  CHECK(cluster::build_prior_index(clusters, fps, embeddings, 100000, 250000).budget == 3);
  auto two = cluster::build_prior_index(clusters, fps, embeddings, 100000, 150000);
  REQUIRE(two.centroids.size() == 2);
  CHECK(two.centroids[0].id == "K0");  // largest cluster
  CHECK(two.centroids[1].id == "K1");  // size tie with K2, smaller id
}

TEST_CASE("missing embedding is reported") {
  cluster::Cluster cl;
  cl.centroid_id = "X";
  cl.member_ids = {"X"};
  std::map<std::string, fp::Fingerprint> fps{{"X", bits({1})}};
  CHECK_THROWS_AS(cluster::build_prior_index({cl}, fps, {}, 100000, 10), Error);
}

TEST_CASE("nearest centroid by exhaustive comparison") {
  cluster::CentroidIndex index;
  index.centroids.push_back({"A", bits({1, 2, 3, 4}, 128), {0.0}});
  index.centroids.push_back({"B", bits({20, 21, 22, 23}, 128), {1.0}});
  index.centroids.push_back({"C", bits({40, 41}, 128), {2.0}});
  index.budget = 3;

  CHECK(cluster::nearest_centroid(bits({1, 2, 3, 4}, 128), index).id == "A");
  CHECK(cluster::nearest_centroid(bits({20, 21, 99}, 128), index).id == "B");
  // brute force over a probe: {40, 41, 1} -> sims A 1/7, B 0, C 2/3
  CHECK(cluster::nearest_centroid(bits({40, 41, 1}, 128), index).id == "C");

  cluster::CentroidIndex single;
  single.centroids.push_back({"only", bits({5}), {0.0}});
  CHECK(cluster::nearest_centroid(bits({60}), single).id == "only");

  cluster::CentroidIndex empty;
  CHECK_THROWS_AS(cluster::nearest_centroid(bits({1}), empty), Error);
}

TEST_CASE("prior index file round trip") {
  cluster::CentroidIndex index;
  index.centroids.push_back({"A", bits({1, 2, 3}, 128), {0.5, -1.25, 3.0}});
  index.centroids.push_back({"B", bits({9}, 128), {1.0, 2.0, -0.125}});
  index.budget = 2;
  std::string path = "test_prior.idx";
  cluster::save_prior_index(path, index);
  auto loaded = cluster::load_prior_index(path);
  REQUIRE(loaded.centroids.size() == 2);
  CHECK(loaded.centroids[0].id == "A");
  CHECK(loaded.centroids[0].fingerprint == index.centroids[0].fingerprint);
  CHECK(loaded.centroids[0].prior_embedding == index.centroids[0].prior_embedding);
  CHECK(loaded.centroids[1].prior_embedding == index.centroids[1].prior_embedding);
  std::remove(path.c_str());
}
