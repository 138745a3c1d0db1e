#pragma once

// Axis-aligned BVH over a triangle mesh with exact pairwise triangle
// intersection, used to count self-colliding triangle pairs per frame.

#include "t2m/motion.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace t2m::bvh {

/// Geometric tolerance in meters. Contacts thinner than this (touching at a
/// point or along an edge) are not intersections.
inline constexpr double kTolerance = 1e-9;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  /// Closed-interval overlap on all three axes.
  bool overlaps(const Aabb& b) const {
    return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
  }
  bool contains(const Aabb& b, double slack = 0.0) const {
    return (lo.array() <= b.lo.array() + slack).all() && (b.hi.array() <= hi.array() + slack).all();
  }
  int longest_axis() const;
};

using Triangle = std::array<Vec3, 3>;

/// True when the triangles share a region of positive length (crossing) or
/// positive area (coplanar overlap) beyond kTolerance. Symmetric in its
/// arguments; degenerate (zero-area) triangles never intersect.
bool triangles_intersect(const Triangle& a, const Triangle& b);

bool shares_vertex(const Face& a, const Face& b) noexcept;

/// Number of faces whose area is below `area_floor`.
std::size_t count_degenerate_faces(std::span<const Vec3> vertices, std::span<const Face> faces,
                                   double area_floor = 1e-14);

class TriangleBVH {
 public:
  static constexpr std::size_t kLeafSize = 4;
  static constexpr std::size_t kMaxDepth = 64;
  // DegenerateMesh is raised when more than this fraction of faces has
  // (near) zero area.
  static constexpr double kMaxDegenerateFraction = 0.01;

  struct Node {
    Aabb box;
    std::uint32_t left = 0;   // child indices for inner nodes
    std::uint32_t right = 0;
    std::uint32_t first = 0;  // range into leaf_order() for leaves
    std::uint32_t count = 0;
    bool leaf() const noexcept { return count > 0; }
  };

  /// Median split over the longest box axis until leaves hold <= kLeafSize
  /// triangles. Throws InvariantViolation for bad indices and DegenerateMesh
  /// for empty or mostly zero-area meshes.
  TriangleBVH(std::span<const Vec3> vertices, std::span<const Face> faces);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::uint32_t>& leaf_order() const noexcept { return order_; }
  std::size_t triangle_count() const noexcept { return tris_.size(); }
  std::size_t depth() const noexcept { return depth_; }
  const Triangle& triangle(std::size_t i) const { return tris_[i]; }
  const Aabb& triangle_box(std::size_t i) const { return boxes_[i]; }

  /// Unordered pairs (i < j) sharing no vertex index whose triangles intersect.
  std::size_t count_colliding_pairs() const;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> colliding_pairs() const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t depth);
  template <class Visit>
  void self_collide(std::uint32_t n, Visit& visit) const;
  template <class Visit>
  void collide(std::uint32_t a, std::uint32_t b, Visit& visit) const;
  template <class Visit>
  void test_pair(std::uint32_t i, std::uint32_t j, Visit& visit) const;

  std::vector<Triangle> tris_;
  std::vector<Aabb> boxes_;
  std::vector<Vec3> centroids_;
  std::vector<Face> faces_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
};

/// O(F^2) reference: every pair tested directly, no pruning.
std::size_t count_colliding_pairs_brute_force(std::span<const Vec3> vertices,
                                              std::span<const Face> faces);

}  // namespace t2m::bvh
