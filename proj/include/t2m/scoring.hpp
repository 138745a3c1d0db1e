#pragma once

// Normalizations, physical and semantic attribute scores, best-per-prompt
// selection and radar-chart tables.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace t2m::scoring {

inline constexpr double kLogEpsilon = 1e-6;

enum class Direction { LowerBetter, HigherBetter };

/// (v - lo) / (hi - lo), or (hi - v) / (hi - lo) when reversed, clipped to
/// [0, 1]. Requires hi > lo.
double minmax_norm(double v, double lo, double hi, bool reversed = false);

/// (floor(min), ceil(max)), widened to (lo, lo + 1) when both bounds agree.
std::pair<double, double> integer_bounded_range(std::span<const double> values);

/// Linear interpolation at index (n - 1) * q / 100 of the sorted values.
double percentile(std::span<const double> values, double q);

/// clip((p95 - x) / (p95 - p5)) for lower-better, clip((x - p5) / (p95 - p5))
/// otherwise. Requires p95 > p5.
double percentile_clip_norm(double x, double p5, double p95, bool lower_better);

// Metric names shared by the score models, the matrix builder and the CLI.
namespace metric {
inline constexpr const char* kJitter = "jitter_degree";
inline constexpr const char* kGroundPenetration = "ground_penetration";
inline constexpr const char* kFootFloating = "foot_floating";
inline constexpr const char* kFootSliding = "foot_sliding";
inline constexpr const char* kDynamicDegree = "dynamic_degree";
inline constexpr const char* kPoseQuality = "pose_quality";
inline constexpr const char* kBodyPenetration = "body_penetration";
inline constexpr const char* kPhysicalPlausibility = "physical_plausibility";
inline constexpr const char* kExtraActions = "extra_non_instruction_actions";
inline constexpr const char* kCompleteness = "action_completeness";
inline constexpr const char* kStageOrder = "multi_stage_order_correctness";
inline constexpr const char* kBodyPart = "body_part_understanding";
inline constexpr const char* kMatchingScore = "matching_score";
inline constexpr const char* kRPrecision1 = "r_precision_1";
inline constexpr const char* kRPrecision2 = "r_precision_2";
inline constexpr const char* kRPrecision3 = "r_precision_3";
inline constexpr const char* kAsr = "asr";
}  // namespace metric

using WeightTable = std::map<std::string, double>;

/// Throws InvariantViolation unless weights are nonnegative and sum to 1.
void validate_weights(const WeightTable& weights);

enum class Aggregate { GeometricMean, WeightedSum };

struct MetricRule {
  Direction direction = Direction::LowerBetter;
  std::optional<double> max_score;  // set: g = x / max_score instead of percentile clipping
};

struct ScoreModel {
  std::string name;
  Aggregate aggregate = Aggregate::WeightedSum;
  WeightTable weights;
  std::map<std::string, MetricRule> rules;  // one per weighted metric
};

ScoreModel physical_model();
ScoreModel semantic_model();

/// exp(sum_j w_j ln(g_j + 1e-6)).
double physical_score(const std::map<std::string, double>& g, const WeightTable& weights);

/// sum_j w_j g_j.
double semantic_score(const std::map<std::string, double>& g, const WeightTable& weights);

struct Candidate {
  std::string clip_id;
  std::string baseline_id;
  std::map<std::string, double> values;  // absent key = missing cell
};

struct MetricMatrix {
  std::map<std::string, Direction> directions;
  std::vector<Candidate> rows;
};

struct ScoredRow {
  std::optional<double> score;  // empty when a weighted metric is missing
  std::map<std::string, double> normalized;
  std::string reason;           // why the row was not scored
};

/// Normalizes every weighted metric over the rows holding it (percentile
/// population) and aggregates. When P5 == P95 the clip degenerates to a step:
/// 1 when x is at least as good as the shared percentile, else 0.
std::vector<ScoredRow> score_rows(const MetricMatrix& matrix, const ScoreModel& model);

struct Selection {
  std::string prompt_id;
  std::string clip_id;
  std::string baseline_id;
  double score = 0.0;
  std::vector<std::pair<std::string, std::string>> excluded;  // (clip_id, reason)
};

using Scorer = std::function<std::vector<ScoredRow>(const MetricMatrix&)>;

/// Argmax of the scorer; ties go to the smallest baseline_id, then clip_id.
Selection select_best(const std::string& prompt_id, const MetricMatrix& matrix,
                      const Scorer& scorer);

std::map<std::string, Selection> select_best(const std::map<std::string, MetricMatrix>& per_prompt,
                                             const Scorer& scorer);

struct RadarEntry {
  std::string metric;
  std::string baseline_id;
  double value = 0.0;       // baseline mean
  double normalized = 0.0;  // min-max over the integer-bounded range
};

/// Per-metric baseline means normalized over their integer-bounded range.
/// Lower-better metrics use the reversed form so larger is always better.
std::vector<RadarEntry> radar_table(const MetricMatrix& matrix);

}  // namespace t2m::scoring
