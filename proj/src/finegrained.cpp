#include "t2m/finegrained.hpp"

#include "t2m/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace t2m::finegrained {

namespace {

void check_window(const kinematics::RootTrack& track, Window w) {
  if (track.frames() <= w.te || w.t0 > w.te) {
    throw Error(Errc::WindowOutOfRange, "window end " + std::to_string(w.te) + " for " +
                                            std::to_string(track.frames()) + " frames");
  }
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Window eval_window(std::size_t frames, std::size_t n) {
  if (frames < 1 || n < 1) throw Error(Errc::OutOfRange, "window needs T >= 1 and N >= 1");
  const std::size_t te = frames > n ? frames - n : 0;
  return {0, std::min(frames - 1, te)};
}

double rotation_error(const kinematics::RootTrack& track, double target_yaw, Window w) {
  check_window(track, w);
  const double dpsi = kinematics::wrap_angle(track.yaw[w.te] - track.yaw[w.t0]);
  return (kinematics::yaw_matrix(dpsi) - kinematics::yaw_matrix(target_yaw)).norm();
}

double velocity_error(const kinematics::RootTrack& track, double speed, const Vec3& direction,
                      double duration, double fps) {
  const std::size_t T = track.frames();
  if (T < 2) throw Error(Errc::TooShort, "velocity error needs T >= 2");
  if (!(duration > 0.0) || !(fps > 0.0)) {
    throw Error(Errc::OutOfRange, "duration and fps must be positive");
  }
  const auto rounded = std::llround(duration * fps);
  const std::size_t td =
      std::clamp<std::size_t>(rounded > 0 ? static_cast<std::size_t>(rounded) : 0, 1, T - 1);
  double sum = 0.0;
  for (std::size_t t = 0; t < td; ++t) {
    sum += ((track.positions[t + 1] - track.positions[t]) * fps).dot(direction);
  }
  return std::abs(sum / static_cast<double>(td) - speed);
}

double translation_error(const kinematics::RootTrack& track, const Vec3& target, Window w) {
  check_window(track, w);
  const Vec3 dp = track.positions[w.te] - track.positions[w.t0];
  return std::sqrt((dp - target).squaredNorm() / 3.0);
}

double body_part_error(const MotionClip& clip, const BodyPartTarget& target, std::size_t n) {
  const auto J = static_cast<int>(clip.joints());
  if (target.base_joint < 0 || target.target_joint < 0 || target.base_joint >= J ||
      target.target_joint >= J) {
    throw Error(Errc::BadJoints, "joint index outside a " + std::to_string(J) + "-joint clip");
  }
  const std::size_t T = clip.frames();
  if (T == 0) throw Error(Errc::TooShort, "body-part error of an empty clip");
  if (n < 1) throw Error(Errc::OutOfRange, "window must hold at least one frame");
  const std::size_t first = T > n ? T - n : 0;
  double sum = 0.0;
  for (std::size_t t = first; t < T; ++t) {
    const Vec3 delta = clip.at(t, static_cast<std::size_t>(target.target_joint)) -
                       clip.at(t, static_cast<std::size_t>(target.base_joint));
    sum += (delta - target.offset).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(T - first));
}

kinematics::RootTrack clip_root_track(const ClipRecord& clip, const FeatureStats* stats,
                                      const kinematics::RootRecoveryOptions& recovery) {
  if (clip.features) {
    if (!clip.features->normalized) return kinematics::recover_root(*clip.features, recovery);
    if (!stats) {
      throw Error(Errc::NormalizedInput, clip.clip_id + " has normalized features but no stats");
    }
    return kinematics::recover_root(kinematics::denormalize(*clip.features, *stats), recovery);
  }
  if (clip.motion) return kinematics::root_from_joints(*clip.motion);
  throw Error(Errc::MissingField, clip.clip_id + " has neither features nor joints");
}

namespace {

struct CaseError {
  double error;
  Window window;
};

CaseError evaluate_case(const ClipRecord& clip, const TargetSpec& spec, const FeatureStats* stats,
                        const FineGrainedOptions& opt) {
  if (const auto* bp = std::get_if<BodyPartTarget>(&spec.target)) {
    if (!clip.motion) throw Error(Errc::MissingField, clip.clip_id + " has no joints");
    const std::size_t T = clip.motion->frames();
    const Window w{T > opt.window ? T - opt.window : 0, T == 0 ? 0 : T - 1};
    return {body_part_error(*clip.motion, *bp, opt.window), w};
  }
  const auto track = clip_root_track(clip, stats, opt.recovery);
  if (track.frames() == 0) throw Error(Errc::TooShort, clip.clip_id + " has no frames");
  const Window w = eval_window(track.frames(), opt.window);
  if (const auto* y = std::get_if<YawTarget>(&spec.target)) {
    return {rotation_error(track, y->angle, w), w};
  }
  if (const auto* v = std::get_if<VelocityTarget>(&spec.target)) {
    return {velocity_error(track, v->speed, v->direction, v->duration, clip.fps), w};
  }
  const auto& tr = std::get<TranslationTarget>(spec.target);
  return {translation_error(track, tr.displacement, w), w};
}

}  // namespace

FineGrainedReport evaluate_targets(const Corpus& corpus, std::span<const TargetSpec> targets,
                                   const FeatureStats* stats, const FineGrainedOptions& options) {
  FineGrainedReport report;
  const auto baselines = corpus.baselines();

  // stable (kind, prompt_id) order for the reduction
  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_tuple(targets[a].kind(), std::cref(targets[a].prompt_id)) <
           std::make_tuple(targets[b].kind(), std::cref(targets[b].prompt_id));
  });

  for (const auto& baseline : baselines) {
    RmseRow row;
    row.method = baseline;
    std::array<double, 4> sums{};
    std::array<std::size_t, 4> counts{};
    for (std::size_t idx : order) {
      const TargetSpec& spec = targets[idx];
      std::vector<const ClipRecord*> clips;
      if (auto it = corpus.by_prompt().find(spec.prompt_id); it != corpus.by_prompt().end()) {
        for (std::size_t ci : it->second) {
          if (corpus.clips()[ci].baseline_id == baseline) clips.push_back(&corpus.clips()[ci]);
        }
      }
      if (clips.empty()) {
        if (options.strict) {
          throw Error(Errc::UnresolvedPrompt, spec.prompt_id + " for baseline " + baseline);
        }
        report.unresolved.push_back({spec.prompt_id, baseline});
        continue;
      }
      AccuracyResult res;
      res.prompt_id = spec.prompt_id;
      res.baseline_id = baseline;
      res.kind = spec.kind();
      res.clips = clips.size();
      double sum = 0.0;
      for (std::size_t c = 0; c < clips.size(); ++c) {
        const CaseError ce = evaluate_case(*clips[c], spec, stats, options);
        sum += ce.error;
        if (c == 0) {
          res.first_frame = ce.window.t0;
          res.last_frame = ce.window.te;
        }
        if (spec.kind() != TargetKind::BodyPartOffset && ce.window.te == 0) {
          res.degenerate_window = true;
        }
      }
      res.error = sum / static_cast<double>(clips.size());
      const auto k = static_cast<std::size_t>(res.kind);
      sums[k] += res.error;
      ++counts[k];
      report.cases.push_back(std::move(res));
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (counts[k] > 0) row.cells[k] = sums[k] / static_cast<double>(counts[k]);
    }
    report.table.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_rmse_csv(const RmseTable& table) {
  std::string out =
      "method,root_rotation,root_velocity,root_translation,body_part_translation\n";
  for (const auto& row : table.rows) {
    out += row.method;
    for (const auto& cell : row.cells) {
      out += ',';
      if (cell) out += fixed4(*cell);
    }
    out += '\n';
  }
  return out;
}

RmseTable parse_rmse_latex(std::string_view latex) {
  RmseTable table;
  std::istringstream in{std::string(latex)};
  std::string line;
  bool body = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.rfind("\\midrule", 0) == 0) {
      body = true;
      continue;
    }
    if (t.rfind("\\bottomrule", 0) == 0) break;
    if (!body || t.find('&') == std::string::npos) continue;

    std::string content = t;
    if (auto end = content.rfind("\\\\"); end != std::string::npos) content.resize(end);
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto amp = content.find('&', start);
      cells.push_back(trim(std::string_view(content).substr(start, amp - start)));
      if (amp == std::string::npos) break;
      start = amp + 1;
    }
    if (cells.size() != 5) {
      throw Error(Errc::InvariantViolation, "expected 5 cells in table row: " + t);
    }
    RmseRow row;
    for (char c : cells[0]) {
      if (c != '\\') row.method += c;  // \_ -> _
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string& cell = cells[k + 1];
      if (cell.empty() || cell == "-") continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) {
        throw Error(Errc::InvariantViolation, "non-numeric table cell '" + cell + "'");
      }
      row.cells[k] = v;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace t2m::finegrained
