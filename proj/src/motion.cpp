#include "t2m/motion.hpp"

#include "t2m/error.hpp"

#include <cmath>

namespace t2m {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MagicMismatch: return "MagicMismatch";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::FortranOrderUnsupported: return "FortranOrderUnsupported";
    case Errc::ShapeHeaderMalformed: return "ShapeHeaderMalformed";
    case Errc::MissingFile: return "MissingFile";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::MissingField: return "MissingField";
    case Errc::NonUnitDirection: return "NonUnitDirection";
    case Errc::AlreadyDenormalized: return "AlreadyDenormalized";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NormalizedInput: return "NormalizedInput";
    case Errc::TooShort: return "TooShort";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::DegenerateMesh: return "DegenerateMesh";
    case Errc::BadK: return "BadK";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::InsufficientOutputs: return "InsufficientOutputs";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::Empty: return "Empty";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::BadJoints: return "BadJoints";
    case Errc::UnresolvedPrompt: return "UnresolvedPrompt";
    case Errc::Transport: return "Transport";
    case Errc::RateLimited: return "RateLimited";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::BandMismatch: return "BandMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::Misaligned: return "Misaligned";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::MissingMetric: return "MissingMetric";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

std::string_view to_string(TargetKind kind) noexcept {
  switch (kind) {
    case TargetKind::YawRotation: return "yaw_rotation";
    case TargetKind::DirectionalVelocity: return "directional_velocity";
    case TargetKind::RootTranslation: return "root_translation";
    case TargetKind::BodyPartOffset: return "body_part_offset";
  }
  return "unknown";
}

MotionClip::MotionClip(std::size_t frames, std::size_t joints, std::vector<Vec3> positions,
                       double fps)
    : frames_(frames), joints_(joints), fps_(fps), positions_(std::move(positions)) {
  if (positions_.size() != frames_ * joints_) {
    throw Error(Errc::InvariantViolation, "joint array size does not match T x J");
  }
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
    throw Error(Errc::InvariantViolation, "fps must be positive");
  }
  for (const Vec3& p : positions_) {
    if (!p.allFinite()) throw Error(Errc::InvariantViolation, "non-finite joint coordinate");
  }
}

MotionClip MotionClip::translated(const Vec3& offset) const {
  std::vector<Vec3> moved = positions_;
  for (Vec3& p : moved) p += offset;
  MotionClip out(frames_, joints_, std::move(moved), fps_);
  out.clip_id = clip_id;
  out.prompt_id = prompt_id;
  out.baseline_id = baseline_id;
  return out;
}

void FeatureClip::validate() const {
  if (features.cols() != static_cast<Eigen::Index>(kFeatureDim)) {
    throw Error(Errc::InvariantViolation,
                "feature width " + std::to_string(features.cols()) + " != 263");
  }
  if (!features.allFinite()) throw Error(Errc::InvariantViolation, "non-finite feature entry");
}

FeatureStats::FeatureStats(Eigen::VectorXd mean_, Eigen::VectorXd std_)
    : mean(std::move(mean_)), std(std::move(std_)) {
  if (mean.size() != std.size()) {
    throw Error(Errc::DimensionMismatch, "mean and std lengths differ");
  }
  if (!mean.allFinite() || !std.allFinite()) {
    throw Error(Errc::InvariantViolation, "non-finite feature statistics");
  }
  for (Eigen::Index k = 0; k < std.size(); ++k) {
    if (!(std[k] > 0.0)) {
      throw Error(Errc::InvariantViolation,
                  "std[" + std::to_string(k) + "] is not positive");
    }
  }
}

MeshSequence::MeshSequence(std::size_t frames, std::size_t vertex_count,
                           std::vector<Vec3> vertices, std::vector<Face> faces)
    : frames_(frames),
      vertex_count_(vertex_count),
      vertices_(std::move(vertices)),
      faces_(std::move(faces)) {
  if (vertices_.size() != frames_ * vertex_count_) {
    throw Error(Errc::InvariantViolation, "vertex array size does not match T x V");
  }
  if (faces_.empty()) throw Error(Errc::InvariantViolation, "mesh has no faces");
  for (const Face& f : faces_) {
    for (auto idx : f) {
      if (idx >= vertex_count_) {
        throw Error(Errc::InvariantViolation,
                    "face index " + std::to_string(idx) + " >= V");
      }
    }
  }
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw Error(Errc::InvariantViolation, "non-finite vertex");
  }
}

}  // namespace t2m
