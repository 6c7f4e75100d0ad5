#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace hf {

namespace {

class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0), sets_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    --sets_;
  }

  std::size_t sets() const { return sets_; }

private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
  std::size_t sets_;
};

// Sweep over points sorted by x; only pairs within link_distance in x can link.
template <class Pos> void link_pairs(std::size_t n, Pos &&pos, double link, DisjointSet &sets) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pos(a).x < pos(b).x || (pos(a).x == pos(b).x && a < b);
  });
  const double link2 = link * link;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 &p = pos(order[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 &q = pos(order[j]);
      if (q.x - p.x > link) break;
      if (distance_squared(p, q) <= link2) sets.unite(order[i], order[j]);
    }
  }
}

} // namespace

std::vector<Cluster> cluster_contacts(std::span<const ContactPoint> points, double link_distance) {
  if (!(link_distance >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "cluster link distance must be non-negative");
  }
  const std::size_t n = points.size();
  DisjointSet sets(n);
  link_pairs(n, [&](std::size_t i) -> const Vec3 & { return points[i].position; },
             link_distance, sets);

  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);

  std::vector<Cluster> out;
  out.reserve(sets.sets());
  for (const auto &members : groups) {
    if (members.empty()) continue;
    Cluster c;
    Vec3 sum;
    for (std::size_t i : members) {
      sum += points[i].position;
      c.member_ids.push_back(points[i].fish_id);
    }
    c.centroid = sum / static_cast<double>(members.size());
    for (std::size_t i : members) {
      c.radius = std::fmax(c.radius, distance(points[i].position, c.centroid));
    }
    std::sort(c.member_ids.begin(), c.member_ids.end());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Cluster &a, const Cluster &b) {
    return a.member_ids.front() < b.member_ids.front();
  });
  return out;
}

std::size_t count_clusters(std::span<const Vec3> points, double link_distance) {
  DisjointSet sets(points.size());
  link_pairs(points.size(), [&](std::size_t i) -> const Vec3 & { return points[i]; },
             link_distance, sets);
  return sets.sets();
}

std::vector<SweepRow> cluster_count_sweep(std::span<const ContactPoint> points,
                                          std::span<const double> link_distances) {
  if (link_distances.empty()) fail(ErrorCode::InvalidArgument, "sweep range is empty");
  if (!std::is_sorted(link_distances.begin(), link_distances.end())) {
    fail(ErrorCode::InvalidArgument, "sweep range must be ascending");
  }
  std::vector<Vec3> positions;
  positions.reserve(points.size());
  for (const auto &p : points) positions.push_back(p.position);

  std::vector<SweepRow> rows;
  rows.reserve(link_distances.size());
  for (double d : link_distances) rows.push_back({d, count_clusters(positions, d)});
  return rows;
}

} // namespace hf
