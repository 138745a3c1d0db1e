#pragma once

#include "t2m/contact.hpp"
#include "t2m/corpus.hpp"
#include "t2m/motion.hpp"

#include <optional>
#include <string>

namespace t2m::physical {

/// Ground penetration tolerance (5 mm).
inline constexpr double kPenetrationTolerance = 0.005;
/// Pose-quality scale factor applied to the mean manifold distance.
inline constexpr double kPoseQualityScale = 10.0;

enum class GroundMode {
  Penetration,  // count samples with h < -tolerance
  Literal,      // count samples with h < +tolerance
};

struct PhysicalConfig {
  contact::ContactConfig contact;
  GroundMode ground_mode = GroundMode::Penetration;
};

/// Per-clip physical metrics. Absent entries were not computable for the clip
/// (missing input or too few frames); they are never reported as zero.
struct PhysicalReport {
  std::optional<double> jd;  // m/frame^2
  std::optional<double> gp;  // m
  std::optional<double> ff;  // fraction of frames
  std::optional<double> fs;  // m/frame
  std::optional<double> dd;  // m/frame
  std::optional<double> pq;  // scaled manifold distance
  std::optional<double> bp;  // percent
};

/// Mean over (T-2)*J samples of |a_global| + |a_local|, where velocities are
/// frame differences and local positions subtract the root of each frame.
double jitter_degree(const MotionClip& clip);

/// (1/(T*J)) * sum |h| over samples penetrating beyond the tolerance.
double ground_penetration(const MotionClip& clip, GroundMode mode = GroundMode::Penetration);

/// (N_invalid + L_soft / 2 + L_hard) / T.
double foot_floating(const MotionClip& clip, const contact::ContactConfig& cfg);
double foot_floating(const contact::FloatingSummary& summary, std::size_t frames);

/// Average over both feet of the contact-weighted mean horizontal speed.
double foot_sliding(const MotionClip& clip, const contact::ContactConfig& cfg);
double foot_sliding(const contact::ContactTrack& track);

/// Mean over (T-1)*J samples of |v_global| + |v_local|.
double dynamic_degree(const MotionClip& clip);

double pose_quality(const PoseDistanceSeries& series);

/// Percentage of colliding non-adjacent triangle pairs relative to the face
/// count, averaged over frames. Serial per-frame evaluation.
double body_penetration(const MeshSequence& mesh);
std::size_t colliding_pairs_in_frame(const MeshSequence& mesh, std::size_t frame);

/// All computable metrics of one clip.
PhysicalReport evaluate_clip(const ClipRecord& clip, const PhysicalConfig& cfg);

}  // namespace t2m::physical
