#include "geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace hf {

std::string_view to_string(HandKind kind) {
  switch (kind) {
  case HandKind::FlatPalm:
    return "flat-palm";
  case HandKind::IndexFinger:
    return "index-finger";
  case HandKind::EllipsoidBlob:
    return "ellipsoid-blob";
  }
  return "?";
}

HandKind parse_hand_kind(std::string_view name) {
  for (auto kind : {HandKind::FlatPalm, HandKind::IndexFinger, HandKind::EllipsoidBlob}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::InvalidArgument, "unknown hand kind '" + std::string(name) + "'");
}

namespace {

struct Grid2 {
  std::size_t cols;
  std::size_t rows;
};

// Roughly square strata over a (u_extent x v_extent) parameter rectangle,
// at least n cells.
Grid2 strata(std::size_t n, double u_extent, double v_extent) {
  const double ideal = std::sqrt(static_cast<double>(n) * u_extent / v_extent);
  const auto cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ideal)));
  const std::size_t rows = (n + cols - 1) / cols;
  return {cols, rows};
}

// n stratified samples in [0,1)^2, spread evenly over the cells of the grid.
template <class F> void for_each_stratified(std::size_t n, Grid2 g, Rng &rng, F &&emit) {
  const std::size_t cells = g.cols * g.rows;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = i * cells / n;
    const double cu = static_cast<double>(cell % g.cols);
    const double cv = static_cast<double>(cell / g.cols);
    const double u = (cu + rng.uniform()) / static_cast<double>(g.cols);
    const double v = (cv + rng.uniform()) / static_cast<double>(g.rows);
    emit(u, v);
  }
}

std::int64_t to_grid(double v) { return std::llround(v / kCoordinateResolution); }
double from_grid(std::int64_t q) { return static_cast<double>(q) / 1e6; }

} // namespace

PointCloud generate_hand(const HandModel &model) {
  if (model.sample_count == 0) {
    fail(ErrorCode::InvalidArgument, "hand sample count must be at least 1");
  }
  Rng rng(model.seed);
  std::vector<Vec3> local;
  local.reserve(model.sample_count);
  const std::size_t n = model.sample_count;

  switch (model.kind) {
  case HandKind::FlatPalm: {
    for_each_stratified(n, strata(n, kPalmLength, kPalmWidth), rng, [&](double u, double v) {
      local.push_back({(u - 0.5) * kPalmLength, (v - 0.5) * kPalmWidth, 0.0});
    });
    break;
  }
  case HandKind::IndexFinger: {
    // Underside half-cylinder, the side facing the array.
    const double arc = std::numbers::pi * kFingerRadius;
    for_each_stratified(n, strata(n, kFingerLength, arc), rng, [&](double u, double v) {
      const double theta = v * std::numbers::pi;
      local.push_back({(u - 0.5) * kFingerLength, kFingerRadius * std::cos(theta),
                       -kFingerRadius * std::sin(theta)});
    });
    break;
  }
  case HandKind::EllipsoidBlob: {
    // Uniform in (cos polar, azimuth) is area-uniform on the unit sphere.
    const auto &a = kBlobSemiAxes;
    for_each_stratified(n, strata(n, 2.0 * std::numbers::pi, 2.0), rng, [&](double u, double v) {
      const double phi = u * 2.0 * std::numbers::pi;
      const double cz = 2.0 * v - 1.0;
      const double sz = std::sqrt(std::fmax(0.0, 1.0 - cz * cz));
      local.push_back({a[0] * sz * std::cos(phi), a[1] * sz * std::sin(phi), a[2] * cz});
    });
    break;
  }
  }

  const double c = std::cos(model.pose.yaw);
  const double s = std::sin(model.pose.yaw);
  const Vec3 &t = model.pose.position;
  const std::int64_t tx = to_grid(t.x), ty = to_grid(t.y), tz = to_grid(t.z);

  PointCloud cloud;
  cloud.points.reserve(n);
  for (const Vec3 &p : local) {
    const double rx = c * p.x - s * p.y;
    const double ry = s * p.x + c * p.y;
    cloud.points.push_back({from_grid(to_grid(rx) + tx), from_grid(to_grid(ry) + ty),
                            from_grid(to_grid(p.z) + tz)});
  }
  return cloud;
}

bool hand_present(const PointCloud &cloud, std::size_t threshold) {
  return cloud.size() > threshold;
}

PointCloud crop(const PointCloud &cloud, const Box &region) {
  PointCloud out;
  out.timestamp_ms = cloud.timestamp_ms;
  for (const Vec3 &p : cloud.points) {
    if (region.contains(p)) out.points.push_back(p);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_error(std::size_t line, const std::string &why) {
  fail(ErrorCode::Parse, "point cloud line " + std::to_string(line) + ": " + why);
}

double parse_coordinate(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    parse_error(line, "'" + std::string(field) + "' is not a number");
  }
  if (!std::isfinite(v)) parse_error(line, "non-finite coordinate");
  return v;
}

} // namespace

PointCloud parse_cloud(std::string_view text) {
  PointCloud cloud;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::string_view fields[3];
    std::size_t count = 0;
    while (true) {
      const auto comma = line.find(',');
      if (count == 3) parse_error(line_no, "expected 3 fields x,y,z");
      fields[count++] = line.substr(0, comma);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (count != 3) parse_error(line_no, "expected 3 fields x,y,z");
    cloud.points.push_back({parse_coordinate(fields[0], line_no),
                            parse_coordinate(fields[1], line_no),
                            parse_coordinate(fields[2], line_no)});
  }
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open point cloud '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cloud(buf.str());
}

std::string format_cloud(const PointCloud &cloud) {
  std::string out;
  out.reserve(cloud.size() * 36);
  char line[128];
  for (const Vec3 &p : cloud.points) {
    const int n = std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", p.x, p.y, p.z);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

void save_cloud(const PointCloud &cloud, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write point cloud '" + path.string() + "'");
  out << format_cloud(cloud);
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

// --- SpatialIndex -----------------------------------------------------------

namespace {
constexpr std::uint32_t kLeafSize = 8;

double coord(const Vec3 &p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }
} // namespace

SpatialIndex::SpatialIndex(const PointCloud &cloud) : points_(cloud.points) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::InvalidArgument, "point cloud too large to index");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    root_ = build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3 &p = points_[order_[i]];
    lo = {std::fmin(lo.x, p.x), std::fmin(lo.y, p.y), std::fmin(lo.z, p.z)};
    hi = {std::fmax(hi.x, p.x), std::fmax(hi.y, p.y), std::fmax(hi.z, p.z)};
  }
  const Vec3 ext = hi - lo;
  const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
  if (coord(ext, axis) <= 0.0) return id; // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = coord(points_[order_[mid]], axis);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node &node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void SpatialIndex::search(std::int32_t id, const Vec3 &q, double &best_d2,
                          std::size_t &best) const {
  const Node &node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = distance_squared(points_[idx], q);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double delta = coord(q, node.axis) - node.split;
  const std::int32_t near = delta <= 0.0 ? node.left : node.right;
  const std::int32_t far = delta <= 0.0 ? node.right : node.left;
  search(near, q, best_d2, best);
  // Equal distance must still be visited so lower indices can win ties.
  if (delta * delta <= best_d2) search(far, q, best_d2, best);
}

std::optional<NearestHit> SpatialIndex::nearest(const Vec3 &query) const {
  if (root_ < 0) return std::nullopt;
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  search(root_, query, best_d2, best);
  return NearestHit{points_[best], best, std::sqrt(best_d2)};
}

SpatialIndex build_index(const PointCloud &cloud) { return SpatialIndex(cloud); }

} // namespace hf
