#include "t2m/contact.hpp"

#include "t2m/error.hpp"

#include <algorithm>
#include <cmath>

namespace t2m::contact {

void ContactConfig::validate(std::size_t joints) const {
  const bool ok = contact_height > 0.0 && contact_speed > 0.0 && float_height > 0.0 &&
                  min_velocity_ratio > 0.0 && min_interval > 0 && float_height > contact_height;
  if (!ok) {
    throw Error(Errc::InvariantViolation,
                "contact thresholds must be positive with float_height > contact_height");
  }
  if (left_foot >= joints || right_foot >= joints) {
    throw Error(Errc::BadJoints, "foot joint index out of range");
  }
}

namespace {

Vec3 forward_velocity(const MotionClip& clip, std::size_t t, std::size_t j) {
  const std::size_t a = (t + 1 < clip.frames()) ? t : t - 1;
  return clip.at(a + 1, j) - clip.at(a, j);
}

double horizontal_norm(const Vec3& v) { return std::hypot(v.x(), v.z()); }

// Marks maximal runs of `candidate` frames no shorter than min_len with
// `label` (only on frames still Normal) and records their lengths.
void mark_runs(const std::vector<bool>& candidate, std::size_t min_len, FrameClass label,
               std::vector<FrameClass>& classes, std::vector<std::size_t>& lengths) {
  const std::size_t T = candidate.size();
  std::size_t t = 0;
  while (t < T) {
    if (!candidate[t]) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < T && candidate[end]) ++end;
    if (end - t >= min_len) {
      lengths.push_back(end - t);
      for (std::size_t k = t; k < end; ++k) classes[k] = label;
    }
    t = end;
  }
}

}  // namespace

ContactTrack detect_contacts(const MotionClip& clip, const ContactConfig& cfg) {
  if (clip.frames() < 2) throw Error(Errc::TooShort, "contact detection needs T >= 2");
  cfg.validate(clip.joints());
  const std::size_t T = clip.frames();

  ContactTrack tr;
  tr.left_contact.resize(T);
  tr.right_contact.resize(T);
  tr.left_height.resize(T);
  tr.right_height.resize(T);
  tr.left_speed.resize(T);
  tr.right_speed.resize(T);
  tr.velocity_ratio.resize(T);

  for (std::size_t t = 0; t < T; ++t) {
    const Vec3 vl = forward_velocity(clip, t, cfg.left_foot);
    const Vec3 vr = forward_velocity(clip, t, cfg.right_foot);
    const Vec3 vroot = forward_velocity(clip, t, 0);

    tr.left_height[t] = clip.at(t, cfg.left_foot).y();
    tr.right_height[t] = clip.at(t, cfg.right_foot).y();
    tr.left_speed[t] = horizontal_norm(vl);
    tr.right_speed[t] = horizontal_norm(vr);
    tr.left_contact[t] = tr.left_height[t] < cfg.contact_height && vl.norm() < cfg.contact_speed;
    tr.right_contact[t] = tr.right_height[t] < cfg.contact_height && vr.norm() < cfg.contact_speed;

    const Vec3 vrel = 0.5 * (vl + vr) - vroot;
    tr.velocity_ratio[t] = vrel.norm() / (vroot.norm() + kEpsilon);
  }
  return tr;
}

FloatingSummary floating_intervals(const ContactTrack& track, const ContactConfig& cfg) {
  const std::size_t T = track.frames();
  FloatingSummary out;
  out.classes.assign(T, FrameClass::Normal);

  std::vector<bool> hard(T), soft(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double h = std::min(track.left_height[t], track.right_height[t]);
    hard[t] = h > cfg.float_height;
    soft[t] = h > cfg.contact_height && h <= cfg.float_height;
  }
  mark_runs(hard, cfg.min_interval, FrameClass::HardFloat, out.classes, out.hard_intervals);
  mark_runs(soft, cfg.min_interval, FrameClass::SoftFloat, out.classes, out.soft_intervals);

  for (std::size_t t = 0; t < T; ++t) {
    if (out.classes[t] != FrameClass::Normal) continue;
    const bool airborne = !track.left_contact[t] && !track.right_contact[t];
    if (airborne && track.velocity_ratio[t] < cfg.min_velocity_ratio) {
      out.classes[t] = FrameClass::Invalid;
      ++out.invalid_frames;
    }
  }
  return out;
}

}  // namespace t2m::contact
