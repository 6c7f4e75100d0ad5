#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fish.hpp"
#include "vec3.hpp"

namespace hf {

struct Cluster {
  Vec3 centroid;
  std::vector<std::uint32_t> member_ids; // ascending fish ids
  double radius = 0.0;                   // max member distance to centroid
};

// Connected components of the graph joining contacts at distance <= link_distance
// (single linkage). link_distance == 0 merges only coincident points. Clusters
// come out ordered by their lowest member fish id.
std::vector<Cluster> cluster_contacts(std::span<const ContactPoint> points, double link_distance);

struct SweepRow {
  double link_distance;
  std::size_t cluster_count;
};

// Requires a non-empty ascending range of distances.
std::vector<SweepRow> cluster_count_sweep(std::span<const ContactPoint> points,
                                          std::span<const double> link_distances);

// Number of single-linkage components without building the clusters.
std::size_t count_clusters(std::span<const Vec3> points, double link_distance);

} // namespace hf
