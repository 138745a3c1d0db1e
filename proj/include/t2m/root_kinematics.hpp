#pragma once

#include "t2m/motion.hpp"

#include <Eigen/Core>

#include <vector>

namespace t2m::kinematics {

/// Root trajectory: positions in meters and unwrapped (cumulative) yaw.
struct RootTrack {
  std::vector<Vec3> positions;
  std::vector<double> yaw;

  std::size_t frames() const noexcept { return positions.size(); }
};

/// x * std + mean, elementwise per row. Requires a normalized clip whose
/// width matches the statistics.
FeatureClip denormalize(const FeatureClip& clip, const FeatureStats& stats);

/// Inverse of denormalize, used by tests and synthetic-data tooling.
FeatureClip normalize(const FeatureClip& clip, const FeatureStats& stats);

struct RootRecoveryOptions {
  // Multiplier on feature channel 0 before integration. HumanML3D stores the
  // half-angle increment there; set 2.0 to recover true yaw from such data.
  double yaw_channel_scale = 1.0;
};

/// Integrates the root channels of denormalized 263-dim features:
///   yaw[0] = 0, yaw[t] = yaw[t-1] + scale * x[t-1][0]
///   p[0].xz = 0, p[t].xz = p[t-1].xz + R_y(yaw[t]) * (x[t-1][1], 0, x[t-1][2])
///   p[t].y = x[t][3]
RootTrack recover_root(const FeatureClip& clip, const RootRecoveryOptions& options = {});

/// Root track of a joint clip: root joint positions, yaw from the facing
/// direction (hips and shoulders), unwrapped and shifted so yaw[0] = 0.
RootTrack root_from_joints(const MotionClip& clip);

/// theta wrapped into [-pi, pi).
double wrap_angle(double theta) noexcept;

/// Rotation about +Y by theta: rows (c, 0, s), (0, 1, 0), (-s, 0, c).
Eigen::Matrix3d yaw_matrix(double theta) noexcept;

}  // namespace t2m::kinematics
