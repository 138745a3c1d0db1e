#pragma once

// Foot-contact estimation and floating-interval classification, shared by
// the Foot Sliding and Foot Floating metrics.

#include "t2m/motion.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace t2m::contact {

inline constexpr std::size_t kLeftFoot = 10;
inline constexpr std::size_t kRightFoot = 11;
inline constexpr double kEpsilon = 1e-6;

struct ContactConfig {
  double contact_height = 0.05;   // h_contact, m
  double contact_speed = 0.01;    // v_contact, m/frame
  double float_height = 0.12;     // h_float, m
  double min_velocity_ratio = 0.1;  // r_min
  std::size_t min_interval = 5;   // L_min, frames
  std::size_t left_foot = kLeftFoot;
  std::size_t right_foot = kRightFoot;

  /// Throws InvariantViolation on non-positive thresholds or bad indices.
  void validate(std::size_t joints) const;
};

struct ContactTrack {
  std::vector<std::uint8_t> left_contact;
  std::vector<std::uint8_t> right_contact;
  std::vector<double> left_height;
  std::vector<double> right_height;
  std::vector<double> left_speed;   // horizontal, m/frame
  std::vector<double> right_speed;  // horizontal, m/frame
  std::vector<double> velocity_ratio;

  std::size_t frames() const noexcept { return left_contact.size(); }
};

/// Per-frame velocities are forward differences p[t+1] - p[t]; the last frame
/// reuses the final difference. A foot is in contact when its height is below
/// contact_height and its 3D displacement is below contact_speed. The velocity
/// ratio compares the feet midpoint velocity relative to the root against the
/// root velocity. Requires T >= 2.
ContactTrack detect_contacts(const MotionClip& clip, const ContactConfig& cfg);

enum class FrameClass : std::uint8_t { Normal, Invalid, SoftFloat, HardFloat };

struct FloatingSummary {
  std::size_t invalid_frames = 0;
  std::vector<std::size_t> soft_intervals;  // lengths L_r
  std::vector<std::size_t> hard_intervals;  // lengths L_m
  std::vector<FrameClass> classes;          // one per frame
};

/// Classifies each frame once, in precedence order hard > soft > invalid:
///   hard: inside a run of >= min_interval frames whose lower foot is above
///         float_height
///   soft: inside a run of >= min_interval frames whose lower foot height is
///         in (contact_height, float_height]
///   invalid: any other frame with neither foot in contact and a velocity
///         ratio below min_velocity_ratio
FloatingSummary floating_intervals(const ContactTrack& track, const ContactConfig& cfg);

}  // namespace t2m::contact
