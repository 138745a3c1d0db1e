#include "t2m/scoring.hpp"

#include "t2m/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace t2m::scoring {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

const double& weighted(const std::map<std::string, double>& g, const std::string& name) {
  auto it = g.find(name);
  if (it == g.end()) throw Error(Errc::MissingMetric, name);
  return it->second;
}

}  // namespace

double minmax_norm(double v, double lo, double hi, bool reversed) {
  if (!(hi > lo)) throw Error(Errc::DegenerateRange, "min-max range needs hi > lo");
  return clip01(reversed ? (hi - v) / (hi - lo) : (v - lo) / (hi - lo));
}

std::pair<double, double> integer_bounded_range(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::Empty, "range of no values");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = std::floor(*mn);
  double hi = std::ceil(*mx);
  if (hi == lo) hi = lo + 1.0;
  return {lo, hi};
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(Errc::Empty, "percentile of no values");
  if (!(q >= 0.0 && q <= 100.0)) throw Error(Errc::OutOfRange, "percentile outside [0, 100]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = static_cast<double>(v.size() - 1) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double percentile_clip_norm(double x, double p5, double p95, bool lower_better) {
  if (!(p95 > p5)) throw Error(Errc::DegenerateRange, "percentile range needs P95 > P5");
  return clip01(lower_better ? (p95 - x) / (p95 - p5) : (x - p5) / (p95 - p5));
}

void validate_weights(const WeightTable& weights) {
  double sum = 0.0;
  for (const auto& [name, w] : weights) {
    if (!(w >= 0.0)) throw Error(Errc::InvariantViolation, "negative weight for " + name);
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::InvariantViolation, "weights sum to " + std::to_string(sum));
  }
}

ScoreModel physical_model() {
  using namespace metric;
  ScoreModel m;
  m.name = "physical";
  m.aggregate = Aggregate::GeometricMean;
  m.weights = {{kGroundPenetration, 0.15}, {kFootSliding, 0.15},   {kBodyPenetration, 0.15},
               {kJitter, 0.15},            {kFootFloating, 0.10},  {kPoseQuality, 0.10},
               {kDynamicDegree, 0.10},     {kPhysicalPlausibility, 0.10}};
  const MetricRule lower{Direction::LowerBetter, std::nullopt};
  const MetricRule higher{Direction::HigherBetter, std::nullopt};
  m.rules = {{kGroundPenetration, lower}, {kFootSliding, lower},  {kBodyPenetration, lower},
             {kJitter, lower},            {kFootFloating, lower}, {kPoseQuality, higher},
             {kDynamicDegree, higher},
             {kPhysicalPlausibility, {Direction::HigherBetter, 10.0}}};
  return m;
}

ScoreModel semantic_model() {
  using namespace metric;
  ScoreModel m;
  m.name = "semantic";
  m.aggregate = Aggregate::WeightedSum;
  m.weights = {{kExtraActions, 0.1}, {kCompleteness, 0.1}, {kStageOrder, 0.1},
               {kBodyPart, 0.1},     {kMatchingScore, 0.1}, {kRPrecision1, 0.1},
               {kRPrecision2, 0.1},  {kRPrecision3, 0.1},  {kAsr, 0.2}};
  const MetricRule higher{Direction::HigherBetter, std::nullopt};
  m.rules = {{kExtraActions, {Direction::HigherBetter, 10.0}},
             {kCompleteness, {Direction::HigherBetter, 20.0}},
             {kStageOrder, {Direction::HigherBetter, 10.0}},
             {kBodyPart, {Direction::HigherBetter, 10.0}},
             {kMatchingScore, {Direction::LowerBetter, std::nullopt}},
             {kRPrecision1, higher},
             {kRPrecision2, higher},
             {kRPrecision3, higher},
             {kAsr, higher}};
  return m;
}

double physical_score(const std::map<std::string, double>& g, const WeightTable& weights) {
  double acc = 0.0;
  for (const auto& [name, w] : weights) acc += w * std::log(weighted(g, name) + kLogEpsilon);
  return std::exp(acc);
}

double semantic_score(const std::map<std::string, double>& g, const WeightTable& weights) {
  double acc = 0.0;
  for (const auto& [name, w] : weights) acc += w * weighted(g, name);
  return acc;
}

std::vector<ScoredRow> score_rows(const MetricMatrix& matrix, const ScoreModel& model) {
  validate_weights(model.weights);
  std::vector<ScoredRow> out(matrix.rows.size());

  for (const auto& [name, w] : model.weights) {
    auto rule_it = model.rules.find(name);
    if (rule_it == model.rules.end()) throw Error(Errc::MissingMetric, "no rule for " + name);
    const MetricRule& rule = rule_it->second;

    std::vector<double> population;
    for (const auto& row : matrix.rows) {
      if (auto it = row.values.find(name); it != row.values.end()) population.push_back(it->second);
    }
    double p5 = 0.0;
    double p95 = 0.0;
    if (!rule.max_score && !population.empty()) {
      p5 = percentile(population, 5.0);
      p95 = percentile(population, 95.0);
    }
    const bool lower = rule.direction == Direction::LowerBetter;

    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      auto it = matrix.rows[i].values.find(name);
      if (it == matrix.rows[i].values.end()) {
        if (out[i].reason.empty()) out[i].reason = "missing " + name;
        continue;
      }
      const double x = it->second;
      double g;
      if (rule.max_score) {
        g = clip01(x / *rule.max_score);
      } else if (p95 > p5) {
        g = percentile_clip_norm(x, p5, p95, lower);
      } else {
        g = (lower ? x <= p5 : x >= p5) ? 1.0 : 0.0;
      }
      out[i].normalized[name] = g;
    }
  }
  for (auto& row : out) {
    if (!row.reason.empty()) continue;
    row.score = model.aggregate == Aggregate::GeometricMean
                    ? physical_score(row.normalized, model.weights)
                    : semantic_score(row.normalized, model.weights);
  }
  return out;
}

Selection select_best(const std::string& prompt_id, const MetricMatrix& matrix,
                      const Scorer& scorer) {
  const auto scored = scorer(matrix);
  if (scored.size() != matrix.rows.size()) {
    throw Error(Errc::InvariantViolation, "scorer returned a mismatched row count");
  }
  Selection sel;
  sel.prompt_id = prompt_id;
  const Candidate* best = nullptr;
  double best_score = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const Candidate& c = matrix.rows[i];
    if (!scored[i].score) {
      sel.excluded.emplace_back(c.clip_id, scored[i].reason);
      continue;
    }
    const double s = *scored[i].score;
    const bool better =
        !best || s > best_score ||
        (s == best_score && std::tie(c.baseline_id, c.clip_id) <
                                std::tie(best->baseline_id, best->clip_id));
    if (better) {
      best = &c;
      best_score = s;
    }
  }
  if (!best) throw Error(Errc::NoCandidates, prompt_id);
  std::sort(sel.excluded.begin(), sel.excluded.end());
  sel.clip_id = best->clip_id;
  sel.baseline_id = best->baseline_id;
  sel.score = best_score;
  return sel;
}

std::map<std::string, Selection> select_best(const std::map<std::string, MetricMatrix>& per_prompt,
                                             const Scorer& scorer) {
  std::map<std::string, Selection> out;
  for (const auto& [prompt_id, matrix] : per_prompt) {
    out.emplace(prompt_id, select_best(prompt_id, matrix, scorer));
  }
  return out;
}

std::vector<RadarEntry> radar_table(const MetricMatrix& matrix) {
  std::vector<RadarEntry> out;
  for (const auto& [name, direction] : matrix.directions) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& row : matrix.rows) {
      if (auto it = row.values.find(name); it != row.values.end()) {
        auto& [sum, n] = acc[row.baseline_id];
        sum += it->second;
        ++n;
      }
    }
    if (acc.empty()) continue;
    std::vector<double> means;
    for (const auto& [baseline, sn] : acc) {
      means.push_back(sn.first / static_cast<double>(sn.second));
    }
    const auto [lo, hi] = integer_bounded_range(means);
    std::size_t k = 0;
    for (const auto& [baseline, sn] : acc) {
      const double v = means[k++];
      out.push_back({name, baseline, v,
                     minmax_norm(v, lo, hi, direction == Direction::LowerBetter)});
    }
  }
  return out;
}

}  // namespace t2m::scoring
