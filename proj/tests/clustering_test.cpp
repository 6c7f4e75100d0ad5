#include <doctest.h>

#include <algorithm>
#include <set>

#include "clustering.hpp"
#include "error.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace hf;

namespace {

std::vector<ContactPoint> random_contacts(Rng &rng, std::size_t n, double extent) {
  std::vector<ContactPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({rng.in_box({{-extent, -extent, 195}, {extent, extent, 205}}),
                   static_cast<std::uint32_t>(i), 0});
  }
  return out;
}

std::set<std::set<std::uint32_t>> as_partition(const std::vector<Cluster> &clusters) {
  std::set<std::set<std::uint32_t>> out;
  for (const auto &c : clusters) out.insert({c.member_ids.begin(), c.member_ids.end()});
  return out;
}

std::set<std::set<std::uint32_t>> oracle_partition(const std::vector<ContactPoint> &pts, double d) {
  std::vector<Vec3> pos;
  std::vector<std::uint32_t> ids;
  for (const auto &p : pts) {
    pos.push_back(p.position);
    ids.push_back(p.fish_id);
  }
  return oracle::partition(pos, ids, d);
}

} // namespace

TEST_SUITE("contact-clustering") {

TEST_CASE("points farther apart than the link distance stay singletons") {
  const std::vector<ContactPoint> pts{{{0, 0, 200}, 4, 0}, {{30, 0, 200}, 1, 0}, {{0, 30, 200}, 9, 0}};
  const auto c = cluster_contacts(pts, 10.0);
  REQUIRE(c.size() == 3);
  CHECK(c[0].member_ids == std::vector<std::uint32_t>{1});
  CHECK(c[0].centroid == Vec3{30, 0, 200});
  CHECK(c[0].radius == 0.0);
  CHECK(c[1].member_ids == std::vector<std::uint32_t>{4});
  CHECK(c[2].member_ids == std::vector<std::uint32_t>{9});
}

TEST_CASE("single linkage is transitive along a chain") {
  const std::vector<ContactPoint> pts{{{0, 0, 0}, 0, 0}, {{8, 0, 0}, 1, 0}, {{16, 0, 0}, 2, 0}};
  const auto c = cluster_contacts(pts, 10.0);
  REQUIRE(c.size() == 1);
  CHECK(c[0].member_ids == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(c[0].centroid.x == doctest::Approx(8.0));
  CHECK(c[0].radius == doctest::Approx(8.0));
}

TEST_CASE("link distance is inclusive") {
  const std::vector<ContactPoint> pts{{{0, 0, 0}, 0, 0}, {{10, 0, 0}, 1, 0}};
  CHECK(cluster_contacts(pts, 10.0).size() == 1);
  CHECK(cluster_contacts(pts, 9.999).size() == 2);
}

TEST_CASE("zero link distance gives one cluster per distinct point") {
  const std::vector<ContactPoint> pts{
      {{1, 2, 3}, 0, 0}, {{1, 2, 3}, 5, 0}, {{1, 2, 3.0001}, 2, 0}, {{7, 7, 7}, 3, 0}};
  const auto c = cluster_contacts(pts, 0.0);
  REQUIRE(c.size() == 3);
  CHECK(c[0].member_ids == std::vector<std::uint32_t>{0, 5});
}

TEST_CASE("empty input, negative distance") {
  CHECK(cluster_contacts({}, 5.0).empty());
  CHECK_THROWS_AS(cluster_contacts({}, -1.0), Error);
}

TEST_CASE("output is ordered by lowest member id") {
  Rng rng(4);
  auto pts = random_contacts(rng, 60, 80);
  std::reverse(pts.begin(), pts.end());
  const auto c = cluster_contacts(pts, 12.0);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i - 1].member_ids.front() < c[i].member_ids.front());
  for (const auto &cl : c) CHECK(std::is_sorted(cl.member_ids.begin(), cl.member_ids.end()));
}

TEST_CASE("matches the brute-force union-find on random inputs up to n = 200") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform() * 201);
    const double extent = rng.uniform(5.0, 120.0);
    const auto pts = random_contacts(rng, n, extent);
    const double d = rng.uniform(0.0, 25.0);
    const auto clusters = cluster_contacts(pts, d);
    CHECK(as_partition(clusters) == oracle_partition(pts, d));
  }
}

TEST_CASE("partition, centroid and radius are consistent with the members") {
  Rng rng(12);
  const auto pts = random_contacts(rng, 150, 90);
  const auto clusters = cluster_contacts(pts, 9.0);
  std::vector<int> seen(pts.size(), 0);
  for (const auto &c : clusters) {
    REQUIRE(!c.member_ids.empty());
    Vec3 sum{};
    for (auto id : c.member_ids) {
      ++seen[id];
      sum += pts[id].position;
    }
    const Vec3 mean = sum / static_cast<double>(c.member_ids.size());
    CHECK(distance(mean, c.centroid) < 1e-9);
    double r = 0.0;
    for (auto id : c.member_ids) r = std::max(r, distance(pts[id].position, c.centroid));
    CHECK(c.radius == doctest::Approx(r).epsilon(1e-12));
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("input order does not change the clusters") {
  Rng rng(31);
  auto pts = random_contacts(rng, 120, 70);
  const auto ref = as_partition(cluster_contacts(pts, 8.0));
  for (int shuffle = 0; shuffle < 20; ++shuffle) {
    for (std::size_t i = pts.size() - 1; i > 0; --i) {
      std::swap(pts[i], pts[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    }
    CHECK(as_partition(cluster_contacts(pts, 8.0)) == ref);
  }
}

TEST_CASE("sweep extremes: below the closest pair and above the widest") {
  Rng rng(8);
  const auto pts = random_contacts(rng, 40, 60);
  double lo = 1e9, hi = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = distance(pts[i].position, pts[j].position);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  const std::vector<double> range{lo * 0.5, hi * 1.01};
  const auto rows = cluster_count_sweep(pts, range);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].cluster_count == pts.size());
  CHECK(rows[1].cluster_count == 1);
}

TEST_CASE("sweep counts never increase with distance") {
  Rng rng(99);
  std::vector<double> range;
  for (double d = 0.0; d <= 40.0; d += 0.5) range.push_back(d);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_contacts(rng, 1 + static_cast<std::size_t>(rng.uniform() * 100), 80);
    const auto rows = cluster_count_sweep(pts, range);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].cluster_count <= rows[i - 1].cluster_count);
    for (const auto &row : rows) {
      std::vector<Vec3> pos;
      for (const auto &p : pts) pos.push_back(p.position);
      CHECK(row.cluster_count == count_clusters(pos, row.link_distance));
    }
  }
}

TEST_CASE("sweep rejects empty or descending ranges") {
  const std::vector<ContactPoint> pts{{{0, 0, 0}, 0, 0}};
  CHECK_THROWS_AS(cluster_count_sweep(pts, std::vector<double>{}), Error);
  CHECK_THROWS_AS(cluster_count_sweep(pts, std::vector<double>{5.0, 2.0}), Error);
}

} // TEST_SUITE
