#pragma once

// In-memory containers shared by every evaluation module.
//
// Axis convention: +Y is up and the ground plane is y = 0. Joint 0 is the
// root (pelvis). Horizontal quantities use the x/z plane.

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace t2m {

using Vec3 = Eigen::Vector3d;

inline constexpr std::size_t kHumanMLJoints = 22;
inline constexpr std::size_t kFeatureDim = 263;
inline constexpr double kDefaultFps = 20.0;

/// Per-frame 3D joint positions in meters, frame-major (T x J).
class MotionClip {
 public:
  MotionClip() = default;
  /// `positions` holds frames * joints entries in frame-major order. Throws
  /// InvariantViolation on a size mismatch, non-finite entries or fps <= 0.
  MotionClip(std::size_t frames, std::size_t joints, std::vector<Vec3> positions,
             double fps = kDefaultFps);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t joints() const noexcept { return joints_; }
  double fps() const noexcept { return fps_; }

  const Vec3& at(std::size_t t, std::size_t j) const { return positions_[t * joints_ + j]; }
  const Vec3& root(std::size_t t) const { return at(t, 0); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }

  /// Copy with `offset` added to every joint of every frame.
  MotionClip translated(const Vec3& offset) const;

  std::string clip_id;
  std::string prompt_id;
  std::string baseline_id;

 private:
  std::size_t frames_ = 0;
  std::size_t joints_ = 0;
  double fps_ = kDefaultFps;
  std::vector<Vec3> positions_;
};

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// T x 263 HumanML/MDM features.
struct FeatureClip {
  FeatureMatrix features;
  bool normalized = true;

  /// Throws InvariantViolation unless the matrix is T x 263 with finite entries.
  void validate() const;
};

struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  /// Rejects dimension mismatches, non-finite entries and std <= 0.
  FeatureStats(Eigen::VectorXd mean_, Eigen::VectorXd std_);
};

using Face = std::array<std::uint32_t, 3>;

/// Vertex positions over a fixed triangle topology, frame-major (T x V).
class MeshSequence {
 public:
  MeshSequence() = default;
  MeshSequence(std::size_t frames, std::size_t vertex_count, std::vector<Vec3> vertices,
               std::vector<Face> faces);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t face_count() const noexcept { return faces_.size(); }
  const std::vector<Face>& faces() const noexcept { return faces_; }

  /// Vertices of frame `t`, `vertex_count()` entries.
  const Vec3* frame(std::size_t t) const { return vertices_.data() + t * vertex_count_; }

 private:
  std::size_t frames_ = 0;
  std::size_t vertex_count_ = 0;
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

/// Per-frame pose-manifold distances produced by an external distance field.
struct PoseDistanceSeries {
  std::vector<double> distances;
};

// --- fine-grained targets -------------------------------------------------

struct YawTarget {
  double angle = 0.0;  // radians
};

struct VelocityTarget {
  double speed = 0.0;  // m/s
  Vec3 direction = Vec3::UnitZ();
  double duration = 0.0;  // seconds
};

struct TranslationTarget {
  Vec3 displacement = Vec3::Zero();
};

struct BodyPartTarget {
  int base_joint = 0;
  int target_joint = 0;
  Vec3 offset = Vec3::Zero();
};

enum class TargetKind { YawRotation, DirectionalVelocity, RootTranslation, BodyPartOffset };

struct TargetSpec {
  std::string prompt_id;
  std::variant<YawTarget, VelocityTarget, TranslationTarget, BodyPartTarget> target;

  TargetKind kind() const noexcept { return static_cast<TargetKind>(target.index()); }
};

std::string_view to_string(TargetKind kind) noexcept;

}  // namespace t2m
