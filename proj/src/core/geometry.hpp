#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vec3.hpp"

namespace hf {

struct PointCloud {
  std::vector<Vec3> points;
  double timestamp_ms = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

enum class HandKind { FlatPalm, IndexFinger, EllipsoidBlob };

std::string_view to_string(HandKind kind);
// Throws InvalidArgument for anything other than the three kind names.
HandKind parse_hand_kind(std::string_view name);

struct HandPose {
  Vec3 position;
  double yaw = 0.0; // radians about +z
};

struct HandModel {
  HandKind kind = HandKind::FlatPalm;
  HandPose pose;
  std::size_t sample_count = 5000;
  std::uint64_t seed = 0;
};

// Nominal surface extents in the hand's local frame.
inline constexpr double kPalmLength = 180.0;
inline constexpr double kPalmWidth = 100.0;
inline constexpr double kFingerLength = 80.0;
inline constexpr double kFingerRadius = 9.0;
inline constexpr double kBlobSemiAxes[3] = {70.0, 45.0, 25.0};

// Generated coordinates lie on a 1e-6 mm grid so they survive a text
// round trip through save_cloud/load_cloud unchanged.
inline constexpr double kCoordinateResolution = 1e-6;

// Stratified surface samples with seeded in-cell jitter, then yawed about +z
// and translated to pose.position.
PointCloud generate_hand(const HandModel &model);

inline constexpr std::size_t kDefaultHandThreshold = 200;

// True iff the cloud holds strictly more than `threshold` points.
bool hand_present(const PointCloud &cloud, std::size_t threshold);

// Keeps only the points inside `region`; order preserved.
PointCloud crop(const PointCloud &cloud, const Box &region);

PointCloud load_cloud(const std::filesystem::path &path);
PointCloud parse_cloud(std::string_view text);
void save_cloud(const PointCloud &cloud, const std::filesystem::path &path);
std::string format_cloud(const PointCloud &cloud);

struct NearestHit {
  Vec3 point;
  std::size_t index = 0;
  double distance = 0.0;
};

// Static k-d tree over a cloud. Answers exact nearest-neighbour queries with
// ties resolved toward the lowest point index.
class SpatialIndex {
public:
  SpatialIndex() = default;
  explicit SpatialIndex(const PointCloud &cloud);

  std::optional<NearestHit> nearest(const Vec3 &query) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

private:
  struct Node {
    // Leaves: [begin, end) into order_. Inner nodes: split axis/value, children.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3 &q, double &best_d2, std::size_t &best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

SpatialIndex build_index(const PointCloud &cloud);

inline std::optional<NearestHit> nearest_point(const SpatialIndex &index, const Vec3 &query) {
  return index.nearest(query);
}

} // namespace hf
