#include "t2m/physical.hpp"

#include "t2m/collision.hpp"
#include "t2m/error.hpp"

#include <cmath>
#include <span>

namespace t2m::physical {

double jitter_degree(const MotionClip& clip) {
  const std::size_t T = clip.frames();
  const std::size_t J = clip.joints();
  if (T < 3) throw Error(Errc::TooShort, "jitter degree needs T >= 3");
  double sum = 0.0;
  for (std::size_t t = 0; t + 2 < T; ++t) {
    const Vec3 root_acc = clip.root(t + 2) - 2.0 * clip.root(t + 1) + clip.root(t);
    for (std::size_t j = 0; j < J; ++j) {
      const Vec3 acc = clip.at(t + 2, j) - 2.0 * clip.at(t + 1, j) + clip.at(t, j);
      sum += acc.norm() + (acc - root_acc).norm();
    }
  }
  return sum / static_cast<double>((T - 2) * J);
}

double ground_penetration(const MotionClip& clip, GroundMode mode) {
  const std::size_t N = clip.frames() * clip.joints();
  if (N == 0) throw Error(Errc::TooShort, "ground penetration needs at least one sample");
  const double threshold =
      mode == GroundMode::Penetration ? -kPenetrationTolerance : kPenetrationTolerance;
  double sum = 0.0;
  for (const Vec3& p : clip.positions()) {
    if (p.y() < threshold) sum += std::abs(p.y());
  }
  return sum / static_cast<double>(N);
}

double foot_floating(const contact::FloatingSummary& s, std::size_t frames) {
  double soft = 0.0;
  double hard = 0.0;
  for (auto len : s.soft_intervals) soft += static_cast<double>(len);
  for (auto len : s.hard_intervals) hard += static_cast<double>(len);
  return (static_cast<double>(s.invalid_frames) + 0.5 * soft + hard) / static_cast<double>(frames);
}

double foot_floating(const MotionClip& clip, const contact::ContactConfig& cfg) {
  const auto track = contact::detect_contacts(clip, cfg);
  return foot_floating(contact::floating_intervals(track, cfg), clip.frames());
}

double foot_sliding(const contact::ContactTrack& track) {
  auto side = [](const std::vector<double>& speed, const std::vector<std::uint8_t>& c) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < speed.size(); ++t) {
      num += speed[t] * c[t];
      den += c[t];
    }
    return num / (den + contact::kEpsilon);
  };
  return 0.5 * (side(track.left_speed, track.left_contact) +
                side(track.right_speed, track.right_contact));
}

double foot_sliding(const MotionClip& clip, const contact::ContactConfig& cfg) {
  return foot_sliding(contact::detect_contacts(clip, cfg));
}

double dynamic_degree(const MotionClip& clip) {
  const std::size_t T = clip.frames();
  const std::size_t J = clip.joints();
  if (T < 2) throw Error(Errc::TooShort, "dynamic degree needs T >= 2");
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const Vec3 root_vel = clip.root(t + 1) - clip.root(t);
    for (std::size_t j = 0; j < J; ++j) {
      const Vec3 vel = clip.at(t + 1, j) - clip.at(t, j);
      sum += vel.norm() + (vel - root_vel).norm();
    }
  }
  return sum / static_cast<double>((T - 1) * J);
}

double pose_quality(const PoseDistanceSeries& series) {
  if (series.distances.empty()) throw Error(Errc::EmptySeries, "no pose distances");
  double sum = 0.0;
  for (double d : series.distances) sum += d;
  return kPoseQualityScale * sum / static_cast<double>(series.distances.size());
}

std::size_t colliding_pairs_in_frame(const MeshSequence& mesh, std::size_t frame) {
  const std::span<const Vec3> verts(mesh.frame(frame), mesh.vertex_count());
  return bvh::TriangleBVH(verts, mesh.faces()).count_colliding_pairs();
}

double body_penetration(const MeshSequence& mesh) {
  if (mesh.frames() == 0) throw Error(Errc::TooShort, "mesh has no frames");
  const auto F = static_cast<double>(mesh.face_count());
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.frames(); ++t) {
    sum += static_cast<double>(colliding_pairs_in_frame(mesh, t)) / F * 100.0;
  }
  return sum / static_cast<double>(mesh.frames());
}

PhysicalReport evaluate_clip(const ClipRecord& clip, const PhysicalConfig& cfg) {
  PhysicalReport r;
  if (clip.motion) {
    const MotionClip& m = *clip.motion;
    if (m.frames() >= 1) r.gp = ground_penetration(m, cfg.ground_mode);
    if (m.frames() >= 2) {
      r.dd = dynamic_degree(m);
      const auto track = contact::detect_contacts(m, cfg.contact);
      r.fs = foot_sliding(track);
      r.ff = foot_floating(contact::floating_intervals(track, cfg.contact), m.frames());
    }
    if (m.frames() >= 3) r.jd = jitter_degree(m);
  }
  if (clip.pose_distances && !clip.pose_distances->distances.empty()) {
    r.pq = pose_quality(*clip.pose_distances);
  }
  if (clip.mesh && clip.mesh->frames() > 0) r.bp = body_penetration(*clip.mesh);
  return r;
}

}  // namespace t2m::physical
