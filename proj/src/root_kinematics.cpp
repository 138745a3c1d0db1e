#include "t2m/root_kinematics.hpp"

#include "t2m/error.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace t2m::kinematics {

namespace {

void check_dims(const FeatureClip& clip, const FeatureStats& stats) {
  if (clip.features.cols() != stats.mean.size()) {
    throw Error(Errc::DimensionMismatch,
                "features have " + std::to_string(clip.features.cols()) +
                    " channels, stats have " + std::to_string(stats.mean.size()));
  }
}

// HumanML joint indices used to estimate facing.
constexpr std::size_t kLeftHip = 1;
constexpr std::size_t kRightHip = 2;
constexpr std::size_t kLeftShoulder = 16;
constexpr std::size_t kRightShoulder = 17;

}  // namespace

FeatureClip denormalize(const FeatureClip& clip, const FeatureStats& stats) {
  if (!clip.normalized) throw Error(Errc::AlreadyDenormalized, "clip is already denormalized");
  check_dims(clip, stats);
  FeatureClip out;
  out.features = (clip.features.array().rowwise() * stats.std.transpose().array()).rowwise() +
                 stats.mean.transpose().array();
  out.normalized = false;
  return out;
}

FeatureClip normalize(const FeatureClip& clip, const FeatureStats& stats) {
  if (clip.normalized) throw Error(Errc::NormalizedInput, "clip is already normalized");
  check_dims(clip, stats);
  FeatureClip out;
  out.features = (clip.features.array().rowwise() - stats.mean.transpose().array()).rowwise() /
                 stats.std.transpose().array();
  out.normalized = true;
  return out;
}

RootTrack recover_root(const FeatureClip& clip, const RootRecoveryOptions& options) {
  if (clip.normalized) throw Error(Errc::NormalizedInput, "denormalize features before root recovery");
  if (clip.features.cols() < 4) throw Error(Errc::DimensionMismatch, "need at least 4 feature channels");
  const auto T = static_cast<std::size_t>(clip.features.rows());
  RootTrack track;
  track.positions.resize(T, Vec3::Zero());
  track.yaw.resize(T, 0.0);
  if (T == 0) return track;

  track.positions[0].y() = clip.features(0, 3);
  for (std::size_t t = 1; t < T; ++t) {
    const auto prev = static_cast<Eigen::Index>(t - 1);
    track.yaw[t] = track.yaw[t - 1] + options.yaw_channel_scale * clip.features(prev, 0);
    const Vec3 local(clip.features(prev, 1), 0.0, clip.features(prev, 2));
    track.positions[t] = track.positions[t - 1] + yaw_matrix(track.yaw[t]) * local;
    track.positions[t].y() = clip.features(static_cast<Eigen::Index>(t), 3);
  }
  return track;
}

RootTrack root_from_joints(const MotionClip& clip) {
  if (clip.joints() <= kRightShoulder) {
    throw Error(Errc::BadJoints, "facing estimation needs the 22-joint skeleton");
  }
  const std::size_t T = clip.frames();
  RootTrack track;
  track.positions.resize(T);
  track.yaw.resize(T, 0.0);
  double first = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    track.positions[t] = clip.root(t);
    const Vec3 across = (clip.at(t, kRightHip) - clip.at(t, kLeftHip)) +
                        (clip.at(t, kRightShoulder) - clip.at(t, kLeftShoulder));
    const Vec3 forward = Vec3::UnitY().cross(across);
    // R_y(psi) maps +Z onto (sin psi, 0, cos psi)
    const double raw = std::atan2(forward.x(), forward.z());
    if (t == 0) {
      first = raw;
      continue;
    }
    const double prev_raw = first + track.yaw[t - 1];
    track.yaw[t] = track.yaw[t - 1] + wrap_angle(raw - prev_raw);
  }
  return track;
}

double wrap_angle(double theta) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod can land exactly on 2*pi after the shift for tiny negative r
  if (r >= two_pi) r -= two_pi;
  return r - std::numbers::pi;
}

Eigen::Matrix3d yaw_matrix(double theta) noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

}  // namespace t2m::kinematics
