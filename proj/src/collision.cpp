#include "t2m/collision.hpp"

#include "t2m/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace t2m::bvh {

namespace {

using Vec2 = Eigen::Vector2d;

bool lex_less(const Triangle& a, const Triangle& b) {
  for (int v = 0; v < 3; ++v) {
    for (int k = 0; k < 3; ++k) {
      if (a[v][k] != b[v][k]) return a[v][k] < b[v][k];
    }
  }
  return false;
}

// Signed distances of `tri` to the plane (n, p0), snapped to 0 within tolerance.
std::array<double, 3> plane_distances(const Triangle& tri, const Vec3& n, const Vec3& p0) {
  std::array<double, 3> d{};
  for (int i = 0; i < 3; ++i) {
    d[i] = n.dot(tri[i] - p0);
    if (std::abs(d[i]) <= kTolerance) d[i] = 0.0;
  }
  return d;
}

bool same_strict_side(const std::array<double, 3>& d) {
  return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
}

bool all_zero(const std::array<double, 3>& d) { return d[0] == 0 && d[1] == 0 && d[2] == 0; }

// Interval of tri ∩ plane projected onto `dir`. Returns false when empty.
bool plane_interval(const Triangle& tri, const std::array<double, 3>& d, const Vec3& dir,
                    double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  bool any = false;
  auto add = [&](const Vec3& p) {
    const double s = dir.dot(p);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    any = true;
  };
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) add(tri[i]);
    const int j = (i + 1) % 3;
    if ((d[i] < 0 && d[j] > 0) || (d[i] > 0 && d[j] < 0)) {
      add(tri[i] + (tri[j] - tri[i]) * (d[i] / (d[i] - d[j])));
    }
  }
  return any;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double polygon_area2(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * s;
}

// Positive-area overlap of two coplanar triangles: clip a against b
// (Sutherland-Hodgman) and compare the clipped area with a sliver of width
// kTolerance along the longest edge.
bool coplanar_overlap(const Triangle& a, const Triangle& b, const Vec3& normal) {
  int drop = 0;
  normal.cwiseAbs().maxCoeff(&drop);
  const int u = (drop + 1) % 3;
  const int v = (drop + 2) % 3;
  auto proj = [&](const Vec3& p) { return Vec2(p[u], p[v]); };

  std::vector<Vec2> poly = {proj(a[0]), proj(a[1]), proj(a[2])};
  std::array<Vec2, 3> clip = {proj(b[0]), proj(b[1]), proj(b[2])};
  if (cross2(clip[1] - clip[0], clip[2] - clip[0]) < 0) std::swap(clip[1], clip[2]);

  std::vector<Vec2> next;
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const Vec2& c0 = clip[e];
    const Vec2 edge = clip[(e + 1) % 3] - c0;
    next.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& p = poly[i];
      const Vec2& q = poly[(i + 1) % poly.size()];
      const double sp = cross2(edge, p - c0);
      const double sq = cross2(edge, q - c0);
      if (sp >= 0) next.push_back(p);
      if ((sp >= 0) != (sq >= 0)) next.push_back(p + (q - p) * (sp / (sp - sq)));
    }
    poly.swap(next);
  }
  if (poly.size() < 3) return false;

  // projected area scales by |n[drop]| relative to the true area
  const double area = std::abs(polygon_area2(poly)) / std::abs(normal[drop]);
  double longest = 0.0;
  for (const Triangle* t : {&a, &b}) {
    for (int i = 0; i < 3; ++i) longest = std::max(longest, ((*t)[(i + 1) % 3] - (*t)[i]).norm());
  }
  return area > kTolerance * longest;
}

bool intersect_ordered(const Triangle& a, const Triangle& b) {
  Vec3 na = (a[1] - a[0]).cross(a[2] - a[0]);
  Vec3 nb = (b[1] - b[0]).cross(b[2] - b[0]);
  const double la = na.norm();
  const double lb = nb.norm();
  if (!(la > 1e-20) || !(lb > 1e-20)) return false;
  na /= la;
  nb /= lb;

  const auto db = plane_distances(b, na, a[0]);
  if (same_strict_side(db)) return false;
  const auto da = plane_distances(a, nb, b[0]);
  if (same_strict_side(da)) return false;

  Vec3 dir = na.cross(nb);
  const double dl = dir.norm();
  if (all_zero(da) || all_zero(db) || dl < 1e-12) return coplanar_overlap(a, b, na);
  dir /= dl;

  double alo, ahi, blo, bhi;
  if (!plane_interval(a, da, dir, alo, ahi)) return false;
  if (!plane_interval(b, db, dir, blo, bhi)) return false;
  return std::min(ahi, bhi) - std::max(alo, blo) > kTolerance;
}

Triangle make_triangle(std::span<const Vec3> vertices, const Face& f) {
  return {vertices[f[0]], vertices[f[1]], vertices[f[2]]};
}

Aabb triangle_bounds(const Triangle& t) {
  Aabb box;
  for (const Vec3& p : t) box.extend(p);
  return box;
}

}  // namespace

int Aabb::longest_axis() const {
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  return axis;
}

bool triangles_intersect(const Triangle& a, const Triangle& b) {
  // evaluate in a canonical order so the predicate is exactly symmetric
  return lex_less(b, a) ? intersect_ordered(b, a) : intersect_ordered(a, b);
}

bool shares_vertex(const Face& a, const Face& b) noexcept {
  for (auto i : a) {
    for (auto j : b) {
      if (i == j) return true;
    }
  }
  return false;
}

std::size_t count_degenerate_faces(std::span<const Vec3> vertices, std::span<const Face> faces,
                                   double area_floor) {
  std::size_t n = 0;
  for (const Face& f : faces) {
    const double area2 = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).norm();
    if (0.5 * area2 < area_floor) ++n;
  }
  return n;
}

TriangleBVH::TriangleBVH(std::span<const Vec3> vertices, std::span<const Face> faces)
    : faces_(faces.begin(), faces.end()) {
  if (faces.empty()) throw Error(Errc::DegenerateMesh, "mesh has no faces");
  for (const Face& f : faces) {
    for (auto idx : f) {
      if (idx >= vertices.size()) throw Error(Errc::InvariantViolation, "face index out of range");
    }
  }
  const std::size_t degenerate = count_degenerate_faces(vertices, faces);
  if (static_cast<double>(degenerate) > kMaxDegenerateFraction * static_cast<double>(faces.size())) {
    throw Error(Errc::DegenerateMesh, std::to_string(degenerate) + " of " +
                                          std::to_string(faces.size()) + " faces have zero area");
  }

  const std::size_t F = faces.size();
  tris_.reserve(F);
  boxes_.reserve(F);
  centroids_.reserve(F);
  for (const Face& f : faces) {
    tris_.push_back(make_triangle(vertices, f));
    boxes_.push_back(triangle_bounds(tris_.back()));
    centroids_.push_back((tris_.back()[0] + tris_.back()[1] + tris_.back()[2]) / 3.0);
  }
  order_.resize(F);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * (F / kLeafSize + 1));
  build(0, static_cast<std::uint32_t>(F), 1);
}

std::uint32_t TriangleBVH::build(std::uint32_t begin, std::uint32_t end, std::size_t depth) {
  depth_ = std::max(depth_, depth);
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(boxes_[order_[i]]);
  nodes_[id].box = box;

  if (end - begin <= kLeafSize) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  const int axis = box.longest_axis();
  std::sort(order_.begin() + begin, order_.begin() + end,
            [&](std::uint32_t x, std::uint32_t y) {
              const double cx = centroids_[x][axis];
              const double cy = centroids_[y][axis];
              return cx != cy ? cx < cy : x < y;
            });
  const std::uint32_t mid = begin + (end - begin) / 2;
  const std::uint32_t left = build(begin, mid, depth + 1);
  const std::uint32_t right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <class Visit>
void TriangleBVH::test_pair(std::uint32_t i, std::uint32_t j, Visit& visit) const {
  if (shares_vertex(faces_[i], faces_[j])) return;
  if (!boxes_[i].overlaps(boxes_[j])) return;
  if (triangles_intersect(tris_[i], tris_[j])) visit(std::min(i, j), std::max(i, j));
}

template <class Visit>
void TriangleBVH::collide(std::uint32_t a, std::uint32_t b, Visit& visit) const {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (!na.box.overlaps(nb.box)) return;
  if (na.leaf() && nb.leaf()) {
    for (std::uint32_t x = na.first; x < na.first + na.count; ++x) {
      for (std::uint32_t y = nb.first; y < nb.first + nb.count; ++y) {
        test_pair(order_[x], order_[y], visit);
      }
    }
    return;
  }
  if (!na.leaf()) {
    collide(na.left, b, visit);
    collide(na.right, b, visit);
  } else {
    collide(a, nb.left, visit);
    collide(a, nb.right, visit);
  }
}

template <class Visit>
void TriangleBVH::self_collide(std::uint32_t n, Visit& visit) const {
  const Node& node = nodes_[n];
  if (node.leaf()) {
    for (std::uint32_t x = node.first; x < node.first + node.count; ++x) {
      for (std::uint32_t y = x + 1; y < node.first + node.count; ++y) {
        test_pair(order_[x], order_[y], visit);
      }
    }
    return;
  }
  self_collide(node.left, visit);
  self_collide(node.right, visit);
  collide(node.left, node.right, visit);
}

std::size_t TriangleBVH::count_colliding_pairs() const {
  std::size_t n = 0;
  auto visit = [&n](std::uint32_t, std::uint32_t) { ++n; };
  self_collide(0, visit);
  return n;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> TriangleBVH::colliding_pairs() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  auto visit = [&out](std::uint32_t i, std::uint32_t j) { out.emplace_back(i, j); };
  self_collide(0, visit);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_colliding_pairs_brute_force(std::span<const Vec3> vertices,
                                              std::span<const Face> faces) {
  std::vector<Triangle> tris;
  tris.reserve(faces.size());
  for (const Face& f : faces) tris.push_back(make_triangle(vertices, f));
  std::size_t n = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      if (!shares_vertex(faces[i], faces[j]) && triangles_intersect(tris[i], tris[j])) ++n;
    }
  }
  return n;
}

}  // namespace t2m::bvh
