#pragma once

// Whole-body (root rotation, directional velocity, root translation) and
// body-part offset accuracy against target files, plus the per-baseline
// mean-RMSE table.

#include "t2m/corpus.hpp"
#include "t2m/root_kinematics.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2m::finegrained {

inline constexpr std::size_t kWindowFrames = 30;

struct Window {
  std::size_t t0 = 0;
  std::size_t te = 0;
};

/// t0 = 0, te = min(T-1, max(0, T-N)).
Window eval_window(std::size_t frames, std::size_t n = kWindowFrames);

/// ||R_y(wrap(yaw[te] - yaw[t0])) - R_y(target)||_F
double rotation_error(const kinematics::RootTrack& track, double target_yaw, Window w);

/// |mean_{t < t_d} <(p[t+1] - p[t]) * fps, u> - speed| with
/// t_d = clamp(round(duration * fps), 1, T-1), rounding half away from zero.
double velocity_error(const kinematics::RootTrack& track, double speed, const Vec3& direction,
                      double duration, double fps);

/// sqrt(sum_axis (dp - target)^2 / 3) with dp = p[te] - p[t0].
double translation_error(const kinematics::RootTrack& track, const Vec3& target, Window w);

/// RMSE of (J[t, target] - J[t, base]) - offset over the last n frames, or
/// all frames when the clip is shorter.
double body_part_error(const MotionClip& clip, const BodyPartTarget& target,
                       std::size_t n = kWindowFrames);

struct AccuracyResult {
  std::string prompt_id;
  std::string baseline_id;
  TargetKind kind = TargetKind::YawRotation;
  double error = 0.0;        // mean over the baseline's clips for this prompt
  std::size_t clips = 0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;  // of the first clip
  bool degenerate_window = false;  // some clip had te == 0
};

struct RmseRow {
  std::string method;
  // rotation, velocity, translation, body-part; empty when no case exists
  std::array<std::optional<double>, 4> cells;
};

struct RmseTable {
  std::vector<RmseRow> rows;
};

struct Unresolved {
  std::string prompt_id;
  std::string baseline_id;
};

struct FineGrainedOptions {
  std::size_t window = kWindowFrames;
  kinematics::RootRecoveryOptions recovery;
  bool strict = true;  // unresolved prompts throw instead of being listed
};

struct FineGrainedReport {
  std::vector<AccuracyResult> cases;  // (baseline, kind, prompt) order
  std::vector<Unresolved> unresolved;
  RmseTable table;                    // baselines in lexicographic order
};

/// Root track used for whole-body targets: features when present
/// (denormalized with `stats` if needed, then integrated), else joints.
kinematics::RootTrack clip_root_track(const ClipRecord& clip, const FeatureStats* stats,
                                      const kinematics::RootRecoveryOptions& recovery = {});

FineGrainedReport evaluate_targets(const Corpus& corpus, std::span<const TargetSpec> targets,
                                   const FeatureStats* stats, const FineGrainedOptions& options = {});

/// CSV with columns method, root_rotation, root_velocity, root_translation,
/// body_part_translation; values printed with four decimals.
std::string format_rmse_csv(const RmseTable& table);

/// Rows of a LaTeX tabular shaped like the published table: data lines
/// between \midrule and \bottomrule, five '&'-separated cells each.
RmseTable parse_rmse_latex(std::string_view latex);

}  // namespace t2m::finegrained
