#include "t2m/cli.hpp"

#include "t2m/corpus.hpp"
#include "t2m/finegrained.hpp"
#include "t2m/judge.hpp"
#include "t2m/kernels.hpp"
#include "t2m/scoring.hpp"
#include "t2m/semantic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace t2m::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolName = "t2m_eval";
constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- output

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Quotes a CSV field only when it needs it.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Config, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Errc::Config, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

// Everything that shapes results. The worker count and output directory are
// left out so reports from different runs compare byte for byte.
json effective_config(const RunConfig& c, const char* command) {
  auto opt_path = [](const std::optional<fs::path>& p) {
    return p ? json(p->generic_string()) : json(nullptr);
  };
  json targets = json::array();
  for (const auto& t : c.targets) targets.push_back(t.filename().generic_string());
  return {
      {"tool", kToolName},
      {"version", kVersion},
      {"command", command},
      {"corpus", c.corpus.filename().generic_string()},
      {"targets", targets},
      {"feature_stats", c.stats_mean ? json{{"mean", c.stats_mean->filename().generic_string()},
                                            {"std", c.stats_std->filename().generic_string()}}
                                     : json(nullptr)},
      {"text_embeddings", c.text_embeddings ? json(c.text_embeddings->filename().generic_string())
                                            : json(nullptr)},
      {"judge_results", opt_path(c.judge_results ? std::optional<fs::path>(c.judge_results->filename())
                                                 : std::nullopt)},
      {"human_scores", opt_path(c.human_scores ? std::optional<fs::path>(c.human_scores->filename())
                                               : std::nullopt)},
      {"seed", c.seed},
      {"bootstrap_replicates", c.bootstrap_replicates},
      {"strict", c.strict},
      {"contact",
       {{"contact_height", c.contact.contact_height},
        {"contact_speed", c.contact.contact_speed},
        {"float_height", c.contact.float_height},
        {"min_velocity_ratio", c.contact.min_velocity_ratio},
        {"min_interval", c.contact.min_interval},
        {"left_foot", c.contact.left_foot},
        {"right_foot", c.contact.right_foot}}},
      {"ground_mode", c.ground_mode == physical::GroundMode::Penetration ? "penetration" : "literal"},
      {"penetration_tolerance", physical::kPenetrationTolerance},
      {"pose_quality_scale", physical::kPoseQualityScale},
      {"semantic",
       {{"pool_size", c.pool_size},
        {"mm_pairs", c.mm_pairs},
        {"diversity_draws", c.diversity_draws},
        {"asr_threshold", c.asr_threshold},
        {"space", c.joint_space ? "joints" : "embedding"},
        {"joint_frames", c.joint_frames}}},
      {"finegrained", {{"window", c.window}, {"yaw_channel_scale", c.yaw_channel_scale}}},
      {"judge",
       {{"endpoint", c.judge_endpoint},
        {"model", c.judge_model},
        {"concurrency", c.judge_concurrency},
        {"timeout_seconds", c.judge_timeout_seconds},
        {"max_attempts", c.judge_max_attempts},
        {"base_delay_ms", c.judge_base_delay_ms}}},
  };
}

// ---------------------------------------------------------------- corpus

struct Loaded {
  Corpus corpus;
  std::vector<ClipFailure> failures;
};

Loaded load(const RunConfig& c) {
  auto res = load_corpus(c.corpus, c.strict ? LoadPolicy::Strict : LoadPolicy::Lenient);
  if (res.corpus.empty() && res.failures.empty()) throw Error(Errc::Config, "no clips");
  return {std::move(res.corpus), std::move(res.failures)};
}

json failure_json(const ClipFailure& f) {
  return {{"clip_id", f.clip_id}, {"code", std::string(to_string(f.code))}, {"error", f.reason}};
}

physical::PhysicalConfig physical_config(const RunConfig& c) {
  physical::PhysicalConfig p;
  p.contact = c.contact;
  p.ground_mode = c.ground_mode;
  return p;
}

std::map<std::string, double> physical_values(const physical::PhysicalReport& r) {
  using namespace scoring::metric;
  std::map<std::string, double> m;
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) m[k] = *v;
  };
  put(kJitter, r.jd);
  put(kGroundPenetration, r.gp);
  put(kFootFloating, r.ff);
  put(kFootSliding, r.fs);
  put(kDynamicDegree, r.dd);
  put(kPoseQuality, r.pq);
  put(kBodyPenetration, r.bp);
  return m;
}

const std::vector<const char*>& physical_columns() {
  using namespace scoring::metric;
  static const std::vector<const char*> cols = {kJitter,       kGroundPenetration, kFootFloating,
                                                kFootSliding,  kDynamicDegree,     kPoseQuality,
                                                kBodyPenetration};
  return cols;
}

// ---------------------------------------------------------------- semantic

struct ClipSemantics {
  std::optional<double> matching;
  std::array<std::optional<double>, 3> r_precision;
  std::optional<double> asr;
  std::string error;
};

struct SemanticInputs {
  EmbeddingSet embeddings;
  std::vector<ClipSemantics> clips;  // corpus order
};

SemanticInputs clip_semantics(const Corpus& corpus, const RunConfig& c) {
  if (!c.text_embeddings) throw Error(Errc::Config, "semantic metrics need 'text_embeddings'");
  SemanticInputs in;
  in.embeddings = make_embedding_set(corpus, load_text_embeddings(*c.text_embeddings));
  in.embeddings.validate();
  const auto pools = semantic::build_pools(corpus, in.embeddings, c.pool_size,
                                           semantic::substream_seed(c.seed, "retrieval"));
  std::map<std::string, const semantic::RetrievalPool*> pool_of;
  for (const auto& pc : pools) pool_of[pc.clip_id] = &pc.pool;

  const auto& clips = corpus.clips();
  in.clips.resize(clips.size());
  kernels::parallel_for(clips.size(), c.jobs, [&](std::size_t i) {
    const ClipRecord& clip = clips[i];
    ClipSemantics& out = in.clips[i];
    try {
      auto m = in.embeddings.motion.find(clip.clip_id);
      auto t = in.embeddings.text.find(clip.prompt_id);
      if (m == in.embeddings.motion.end()) {
        out.error = "no motion embedding";
      } else if (t == in.embeddings.text.end()) {
        out.error = "no text embedding for " + clip.prompt_id;
      } else {
        out.matching = semantic::matching_score(t->second, m->second);
        const std::size_t rank = semantic::retrieval_rank(*pool_of.at(clip.clip_id));
        for (std::size_t k = 0; k < 3; ++k) out.r_precision[k] = rank < k + 1 ? 1.0 : 0.0;
      }
      if (auto a = in.embeddings.atomic_pairs.find(clip.clip_id);
          a != in.embeddings.atomic_pairs.end() && !a->second.empty()) {
        out.asr = semantic::asr(a->second, c.asr_threshold);
      }
    } catch (const Error& e) {
      out = ClipSemantics{};
      out.error = e.what();
    }
  });
  return in;
}

json stat_json(const semantic::StatSummary& s) {
  return {{"mean", s.mean}, {"half_width", s.half_width}, {"replicates", s.replicates},
          {"seed", s.seed}};
}

// ---------------------------------------------------------------- commands

int cmd_physical(const RunConfig& c) {
  Loaded L = load(c);
  const auto outcomes = kernels::evaluate_physical_omp(L.corpus, physical_config(c), c.jobs);

  struct Row {
    std::string clip_id;
    json doc;
    std::string csv;
  };
  std::vector<Row> rows;
  bool failed = !L.failures.empty();
  const auto& clips = L.corpus.clips();
  // group key (baseline, dataset_type) -> metric -> values in clip order
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>> groups;

  for (std::size_t i = 0; i < clips.size(); ++i) {
    const ClipRecord& clip = clips[i];
    const auto& o = outcomes[i];
    json doc = {{"clip_id", clip.clip_id},
                {"baseline_id", clip.baseline_id},
                {"prompt_id", clip.prompt_id},
                {"dataset_type", clip.dataset_type}};
    std::string csv = csv_field(clip.clip_id) + "," + csv_field(clip.baseline_id) + "," +
                      csv_field(clip.prompt_id) + "," + csv_field(clip.dataset_type);
    if (o.report) {
      const auto values = physical_values(*o.report);
      json metrics = json::object();
      for (const char* col : physical_columns()) {
        auto it = values.find(col);
        const std::optional<double> v =
            it == values.end() ? std::nullopt : std::optional<double>(it->second);
        metrics[col] = opt_json(v);
        csv += "," + cell(v);
        if (v) groups[{clip.baseline_id, clip.dataset_type}][col].push_back(*v);
      }
      doc["metrics"] = metrics;
      csv += ",";
    } else {
      failed = true;
      doc["code"] = std::string(to_string(o.code));
      doc["error"] = o.error;
      for (std::size_t k = 0; k < physical_columns().size(); ++k) csv += ",";
      csv += "," + csv_field(o.error);
    }
    rows.push_back({clip.clip_id, std::move(doc), std::move(csv)});
  }
  for (const auto& f : L.failures) {
    std::string csv = csv_field(f.clip_id) + ",,,";
    for (std::size_t k = 0; k < physical_columns().size(); ++k) csv += ",";
    csv += "," + csv_field(std::string(to_string(f.code)) + ": " + f.reason);
    rows.push_back({f.clip_id, failure_json(f), std::move(csv)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.clip_id < b.clip_id; });

  json clip_docs = json::array();
  std::string csv = "clip_id,baseline_id,prompt_id,dataset_type";
  for (const char* col : physical_columns()) csv += std::string(",") + col;
  csv += ",error\n";
  for (auto& r : rows) {
    clip_docs.push_back(std::move(r.doc));
    csv += r.csv + "\n";
  }

  json group_docs = json::array();
  std::string gcsv = "baseline_id,dataset_type,metric,n,mean,half_width\n";
  for (const auto& [key, metrics] : groups) {
    for (const char* col : physical_columns()) {
      auto it = metrics.find(col);
      if (it == metrics.end()) continue;
      const auto s = semantic::bootstrap(
          it->second, c.bootstrap_replicates,
          semantic::substream_seed(c.seed, "physical/" + key.first + "/" + key.second + "/" + col));
      group_docs.push_back({{"baseline_id", key.first},
                            {"dataset_type", key.second},
                            {"metric", col},
                            {"n", it->second.size()},
                            {"summary", stat_json(s)}});
      gcsv += csv_field(key.first) + "," + csv_field(key.second) + "," + col + "," +
              std::to_string(it->second.size()) + "," + fmt6(s.mean) + "," + fmt6(s.half_width) +
              "\n";
    }
  }

  write_json(c.out / "physical_report.json", {{"config", effective_config(c, "eval-physical")},
                                              {"clips", clip_docs},
                                              {"groups", group_docs}});
  write_file(c.out / "physical_report.csv", csv);
  write_file(c.out / "physical_groups.csv", gcsv);
  return failed ? kDataError : kOk;
}

int cmd_semantic(const RunConfig& c) {
  Loaded L = load(c);
  SemanticInputs S = clip_semantics(L.corpus, c);
  const auto& clips = L.corpus.clips();
  bool failed = !L.failures.empty();

  std::vector<std::pair<std::string, json>> clip_rows;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& s = S.clips[i];
    json doc = {{"clip_id", clips[i].clip_id},
                {"baseline_id", clips[i].baseline_id},
                {"prompt_id", clips[i].prompt_id},
                {"matching_score", opt_json(s.matching)},
                {"r_precision_1", opt_json(s.r_precision[0])},
                {"r_precision_2", opt_json(s.r_precision[1])},
                {"r_precision_3", opt_json(s.r_precision[2])},
                {"asr", opt_json(s.asr)}};
    if (!s.error.empty()) {
      doc["error"] = s.error;
      failed = true;
    }
    clip_rows.emplace_back(clips[i].clip_id, std::move(doc));
  }
  for (const auto& f : L.failures) clip_rows.emplace_back(f.clip_id, failure_json(f));
  std::sort(clip_rows.begin(), clip_rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  json clip_docs = json::array();
  for (auto& [id, doc] : clip_rows) clip_docs.push_back(std::move(doc));

  json baseline_docs = json::array();
  std::string csv =
      "baseline_id,clips,matching_score,matching_score_hw,r_precision_1,r_precision_2,"
      "r_precision_3,asr,multimodality,multimodality_hw,diversity,diversity_hw,error\n";
  for (const auto& baseline : L.corpus.baselines()) {
    std::vector<double> matching;
    std::array<double, 3> hits{};
    std::size_t ranked = 0;
    std::vector<AtomicPair> pairs;
    std::map<std::string, std::vector<Eigen::VectorXd>> per_prompt;
    std::vector<Eigen::VectorXd> outputs;
    std::size_t n = 0;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const ClipRecord& clip = clips[i];
      if (clip.baseline_id != baseline) continue;
      ++n;
      const auto& s = S.clips[i];
      if (s.matching) {
        matching.push_back(*s.matching);
        ++ranked;
        for (std::size_t k = 0; k < 3; ++k) hits[k] += *s.r_precision[k];
      }
      if (auto a = S.embeddings.atomic_pairs.find(clip.clip_id); a != S.embeddings.atomic_pairs.end()) {
        pairs.insert(pairs.end(), a->second.begin(), a->second.end());
      }
      std::optional<Eigen::VectorXd> v;
      if (c.joint_space) {
        if (clip.motion && clip.motion->frames() > 0) {
          v = semantic::flatten_joints(*clip.motion, c.joint_frames);
        }
      } else if (auto m = S.embeddings.motion.find(clip.clip_id); m != S.embeddings.motion.end()) {
        v = m->second;
      }
      if (v) {
        per_prompt[clip.prompt_id].push_back(*v);
        outputs.push_back(std::move(*v));
      }
    }

    json doc = {{"baseline_id", baseline}, {"clips", n}};
    std::vector<std::string> notes;
    std::optional<semantic::StatSummary> ms, mm, div;
    std::array<std::optional<double>, 3> rp;
    std::optional<double> asr;
    if (!matching.empty()) {
      ms = semantic::bootstrap(matching, c.bootstrap_replicates,
                               semantic::substream_seed(c.seed, "matching/" + baseline));
      for (std::size_t k = 0; k < 3; ++k) rp[k] = hits[k] / static_cast<double>(ranked);
    } else {
      notes.push_back("no matching scores");
    }
    try {
      if (!pairs.empty()) asr = semantic::asr(pairs, c.asr_threshold);
    } catch (const Error& e) {
      notes.push_back(e.what());
    }
    // multimodality over prompts with at least two outputs
    std::map<std::string, std::vector<Eigen::VectorXd>> multi;
    for (auto& [p, vs] : per_prompt) {
      if (vs.size() >= 2) multi.emplace(p, vs);
    }
    try {
      if (multi.empty()) throw Error(Errc::InsufficientOutputs, "no prompt has two outputs");
      mm = semantic::multimodality(multi, c.mm_pairs,
                                   semantic::substream_seed(c.seed, "multimodality/" + baseline),
                                   c.bootstrap_replicates);
    } catch (const Error& e) {
      notes.push_back(e.what());
    }
    try {
      div = semantic::diversity(outputs, c.diversity_draws,
                                semantic::substream_seed(c.seed, "diversity/" + baseline),
                                c.bootstrap_replicates);
    } catch (const Error& e) {
      notes.push_back(e.what());
    }
    doc["matching_score"] = ms ? stat_json(*ms) : json(nullptr);
    doc["r_precision_1"] = opt_json(rp[0]);
    doc["r_precision_2"] = opt_json(rp[1]);
    doc["r_precision_3"] = opt_json(rp[2]);
    doc["asr"] = opt_json(asr);
    doc["multimodality"] = mm ? stat_json(*mm) : json(nullptr);
    doc["diversity"] = div ? stat_json(*div) : json(nullptr);
    std::string note;
    for (const auto& s : notes) note += (note.empty() ? "" : "; ") + s;
    if (!note.empty()) doc["notes"] = note;
    baseline_docs.push_back(std::move(doc));

    auto stat_cells = [](const std::optional<semantic::StatSummary>& s) {
      return s ? fmt6(s->mean) + "," + fmt6(s->half_width) : std::string(",");
    };
    csv += csv_field(baseline) + "," + std::to_string(n) + "," + stat_cells(ms) + "," +
           cell(rp[0]) + "," + cell(rp[1]) + "," + cell(rp[2]) + "," + cell(asr) + "," +
           stat_cells(mm) + "," + stat_cells(div) + "," + csv_field(note) + "\n";
  }

  write_json(c.out / "semantic_report.json", {{"config", effective_config(c, "eval-semantic")},
                                              {"clips", clip_docs},
                                              {"baselines", baseline_docs}});
  write_file(c.out / "semantic_report.csv", csv);
  return failed ? kDataError : kOk;
}

int cmd_finegrained(const RunConfig& c) {
  if (c.targets.empty()) throw Error(Errc::Config, "fine-grained evaluation needs 'targets'");
  Loaded L = load(c);
  std::vector<TargetSpec> targets;
  for (const auto& path : c.targets) {
    auto t = load_targets(path);
    targets.insert(targets.end(), std::make_move_iterator(t.begin()),
                   std::make_move_iterator(t.end()));
  }
  std::optional<FeatureStats> stats;
  if (c.stats_mean) stats = load_feature_stats(*c.stats_mean, *c.stats_std);

  finegrained::FineGrainedOptions opt;
  opt.window = c.window;
  opt.recovery.yaw_channel_scale = c.yaw_channel_scale;
  opt.strict = c.strict;
  const auto report =
      finegrained::evaluate_targets(L.corpus, targets, stats ? &*stats : nullptr, opt);

  json cases = json::array();
  for (const auto& r : report.cases) {
    cases.push_back({{"baseline_id", r.baseline_id},
                     {"kind", std::string(to_string(r.kind))},
                     {"prompt_id", r.prompt_id},
                     {"error", r.error},
                     {"clips", r.clips},
                     {"frames_used", {r.first_frame, r.last_frame}},
                     {"degenerate_window", r.degenerate_window}});
  }
  json unresolved = json::array();
  for (const auto& u : report.unresolved) {
    unresolved.push_back({{"prompt_id", u.prompt_id}, {"baseline_id", u.baseline_id}});
  }
  static const char* kColumns[] = {"root_rotation", "root_velocity", "root_translation",
                                   "body_part_translation"};
  json table = json::array();
  for (const auto& row : report.table.rows) {
    json r = {{"method", row.method}};
    for (std::size_t k = 0; k < 4; ++k) r[kColumns[k]] = opt_json(row.cells[k]);
    table.push_back(std::move(r));
  }
  json failures = json::array();
  for (const auto& f : L.failures) failures.push_back(failure_json(f));

  write_json(c.out / "finegrained_report.json",
             {{"config", effective_config(c, "eval-finegrained")},
              {"cases", cases},
              {"unresolved", unresolved},
              {"load_failures", failures},
              {"table", table}});
  write_file(c.out / "finegrained_table.csv", finegrained::format_rmse_csv(report.table));
  return (L.failures.empty() && report.unresolved.empty()) ? kOk : kDataError;
}

std::string media_type_for(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

json result_json(const ClipRecord& clip, const judge::JudgeResult& r, int attempts) {
  json scores = json::object();
  for (std::size_t i = 0; i < 5; ++i) scores[judge::kSubScoreNames[i]] = r.scores[i];
  return {{"clip_id", clip.clip_id},
          {"baseline_id", clip.baseline_id},
          {"prompt_id", clip.prompt_id},
          {"dataset_type", clip.dataset_type},
          {"video_name", r.video_name},
          {"prompt_name", r.prompt_name},
          {"scores", scores},
          {"overall_score", r.overall},
          {"verdict", std::string(judge::to_string(r.verdict))},
          {"frame_observation", r.frame_observation},
          {"prompt_overlap", r.prompt_overlap},
          {"issues_found", r.issues_found},
          {"attempts", attempts}};
}

int cmd_judge(const RunConfig& c) {
  if (c.judge_endpoint.empty() || c.judge_model.empty()) {
    throw Error(Errc::Config, "judge needs 'judge.endpoint' and 'judge.model'");
  }
  Loaded L = load(c);
  const auto& clips = L.corpus.clips();
  std::vector<judge::JudgeRequest> requests;
  std::vector<const ClipRecord*> sent;
  json failures = json::array();
  for (const auto& f : L.failures) failures.push_back(failure_json(f));
  for (const auto& clip : clips) {
    std::string reason;
    judge::JudgeRequest req;
    if (!clip.strip_image) {
      reason = "no strip_image";
    } else if (clip.prompt_text.empty()) {
      reason = "no prompt_text";
    } else {
      std::ifstream in(*clip.strip_image, std::ios::binary);
      req.image.assign(std::istreambuf_iterator<char>(in), {});
      if (req.image.empty()) reason = "unreadable or empty strip image";
    }
    if (!reason.empty()) {
      failures.push_back({{"clip_id", clip.clip_id}, {"code", "InvariantViolation"}, {"error", reason}});
      continue;
    }
    req.video_name = clip.clip_id;
    req.prompt_text = clip.prompt_text;
    req.media_type = media_type_for(*clip.strip_image);
    req.model = c.judge_model;
    req.endpoint = c.judge_endpoint;
    req.timeout_seconds = c.judge_timeout_seconds;
    requests.push_back(std::move(req));
    sent.push_back(&clip);
  }

  judge::SubmitOptions opt;
  opt.retry.max_attempts = c.judge_max_attempts;
  opt.retry.base_delay = std::chrono::milliseconds(c.judge_base_delay_ms);
  opt.strict = c.strict;
  const auto outcomes = judge::submit_all(requests, opt, c.judge_concurrency);

  bool network = false;
  json results = json::array();
  json quarantine = json::array();
  std::map<std::pair<std::string, std::string>, std::vector<const judge::JudgeResult*>> groups;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const ClipRecord& clip = *sent[i];
    if (o.result) {
      results.push_back(result_json(clip, *o.result, o.attempts));
      groups[{clip.baseline_id, clip.dataset_type}].push_back(&*o.result);
    } else if (o.code == Errc::BandMismatch) {
      quarantine.push_back({{"clip_id", clip.clip_id}, {"error", o.error}, {"raw", o.raw}});
    } else {
      network = network || exit_code_for(o.code) == kNetworkError;
      failures.push_back({{"clip_id", clip.clip_id},
                          {"code", std::string(to_string(o.code))},
                          {"error", o.error},
                          {"attempts", o.attempts}});
    }
  }

  std::string table = "baseline_id,dataset_type,n,overall_score";
  for (const char* name : judge::kSubScoreNames) table += std::string(",") + name;
  table += "\n";
  for (const auto& [key, rs] : groups) {
    double overall = 0.0;
    std::array<double, 5> sub{};
    for (const auto* r : rs) {
      overall += r->overall;
      for (std::size_t k = 0; k < 5; ++k) sub[k] += r->scores[k];
    }
    const auto n = static_cast<double>(rs.size());
    table += csv_field(key.first) + "," + csv_field(key.second) + "," +
             std::to_string(rs.size()) + "," + fmt6(overall / n);
    for (double s : sub) table += "," + fmt6(s / n);
    table += "\n";
  }

  const json cfg = effective_config(c, "judge");
  write_json(c.out / "judge_results.json",
             {{"config", cfg}, {"results", results}, {"failures", failures}});
  write_json(c.out / "judge_quarantine.json", {{"config", cfg}, {"quarantined", quarantine}});
  write_file(c.out / "judge_table.csv", table);
  if (network) return kNetworkError;
  return failures.empty() && quarantine.empty() ? kOk : kDataError;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::InvariantViolation, path.string() + " is not JSON");
  return doc;
}

struct JudgedClip {
  std::string prompt_id;
  std::array<double, 5> scores{};
};

// clip_id -> accepted judge scores
std::map<std::string, JudgedClip> read_judge_results(const fs::path& path) {
  const json doc = read_json_file(path);
  if (!doc.contains("results") || !doc["results"].is_array()) {
    throw Error(Errc::MissingField, path.string() + " lacks a 'results' array");
  }
  std::map<std::string, JudgedClip> out;
  for (const auto& r : doc["results"]) {
    try {
      JudgedClip j;
      j.prompt_id = r.at("prompt_id").get<std::string>();
      for (std::size_t k = 0; k < 5; ++k) {
        j.scores[k] = r.at("scores").at(judge::kSubScoreNames[k]).get<double>();
      }
      out[r.at("clip_id").get<std::string>()] = j;
    } catch (const json::exception& e) {
      throw Error(Errc::MissingField, path.string() + ": " + e.what());
    }
  }
  return out;
}

int cmd_judge_gap(const RunConfig& c) {
  if (!c.judge_results || !c.human_scores) {
    throw Error(Errc::Config, "judge-gap needs 'judge_results' and 'human_scores'");
  }
  const auto judged = read_judge_results(*c.judge_results);
  std::map<std::string, std::pair<std::array<double, 5>, std::size_t>> llm_acc;
  for (const auto& [clip, j] : judged) {
    auto& [sum, n] = llm_acc[j.prompt_id];
    for (std::size_t k = 0; k < 5; ++k) sum[k] += j.scores[k];
    ++n;
  }
  const json human_doc = read_json_file(*c.human_scores);
  if (!human_doc.is_object()) throw Error(Errc::InvariantViolation, "human_scores must be an object");
  std::vector<judge::PromptScores> llm, human;
  for (const auto& [prompt_id, v] : human_doc.items()) {
    if (!v.is_array() || v.size() != 5) {
      throw Error(Errc::InvariantViolation, "human scores for " + prompt_id + " need 5 values");
    }
    judge::PromptScores h{prompt_id, {}};
    for (std::size_t k = 0; k < 5; ++k) h.scores[k] = v[k].get<double>();
    human.push_back(h);
    auto it = llm_acc.find(prompt_id);
    if (it == llm_acc.end()) throw Error(Errc::Misaligned, "no judge result for " + prompt_id);
    judge::PromptScores l{prompt_id, {}};
    for (std::size_t k = 0; k < 5; ++k) {
      l.scores[k] = it->second.first[k] / static_cast<double>(it->second.second);
    }
    llm.push_back(l);
  }
  if (llm_acc.size() != human.size()) {
    throw Error(Errc::Misaligned, "judge results cover prompts without human scores");
  }
  const auto gap = judge::llm_selection_gap(llm, human);
  json g = json::object();
  for (std::size_t k = 0; k < 5; ++k) g[judge::kSubScoreNames[k]] = gap[k];
  write_json(c.out / "judge_gap.json",
             {{"config", effective_config(c, "judge-gap")}, {"prompts", human.size()}, {"gap", g}});
  return kOk;
}

int cmd_score_select(const RunConfig& c) {
  if (!c.judge_results) throw Error(Errc::Config, "score-select needs 'judge_results'");
  Loaded L = load(c);
  const auto& clips = L.corpus.clips();
  const auto judged = read_judge_results(*c.judge_results);
  const auto outcomes = kernels::evaluate_physical_omp(L.corpus, physical_config(c), c.jobs);
  std::optional<SemanticInputs> S;
  if (c.text_embeddings) S = clip_semantics(L.corpus, c);

  using namespace scoring::metric;
  const auto phys = scoring::physical_model();
  const auto sem = scoring::semantic_model();
  scoring::MetricMatrix all;
  for (const auto* m : {&phys, &sem}) {
    for (const auto& [name, rule] : m->rules) all.directions[name] = rule.direction;
  }

  std::map<std::string, scoring::MetricMatrix> per_prompt;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const ClipRecord& clip = clips[i];
    scoring::Candidate cand{clip.clip_id, clip.baseline_id, {}};
    if (outcomes[i].report) cand.values = physical_values(*outcomes[i].report);
    if (auto j = judged.find(clip.clip_id); j != judged.end()) {
      static const char* kLlm[] = {kExtraActions, kCompleteness, kStageOrder, kBodyPart,
                                   kPhysicalPlausibility};
      for (std::size_t k = 0; k < 5; ++k) cand.values[kLlm[k]] = j->second.scores[k];
    }
    if (S) {
      const auto& s = S->clips[i];
      if (s.matching) cand.values[kMatchingScore] = *s.matching;
      if (s.r_precision[0]) cand.values[kRPrecision1] = *s.r_precision[0];
      if (s.r_precision[1]) cand.values[kRPrecision2] = *s.r_precision[1];
      if (s.r_precision[2]) cand.values[kRPrecision3] = *s.r_precision[2];
      if (s.asr) cand.values[kAsr] = *s.asr;
    }
    auto& m = per_prompt[clip.prompt_id];
    m.directions = all.directions;
    m.rows.push_back(cand);
    all.rows.push_back(std::move(cand));
  }

  std::vector<std::string> prompts;
  for (const auto& [p, m] : per_prompt) prompts.push_back(p);

  struct PromptOut {
    std::vector<scoring::ScoredRow> phys, sem;
    std::optional<scoring::Selection> best_phys, best_sem;
    std::string err_phys, err_sem;
  };
  std::vector<PromptOut> results(prompts.size());
  kernels::parallel_for(prompts.size(), c.jobs, [&](std::size_t i) {
    const auto& m = per_prompt.at(prompts[i]);
    PromptOut& o = results[i];
    o.phys = scoring::score_rows(m, phys);
    o.sem = scoring::score_rows(m, sem);
    auto fixed = [](const std::vector<scoring::ScoredRow>& rows) {
      return [&rows](const scoring::MetricMatrix&) { return rows; };
    };
    try {
      o.best_phys = scoring::select_best(prompts[i], m, fixed(o.phys));
    } catch (const Error& e) {
      o.err_phys = e.what();
    }
    try {
      o.best_sem = scoring::select_best(prompts[i], m, fixed(o.sem));
    } catch (const Error& e) {
      o.err_sem = e.what();
    }
  });

  bool failed = !L.failures.empty();
  const json cfg = effective_config(c, "score-select");
  auto emit = [&](bool physical_pick, const char* stem) {
    json sel = json::array();
    json errs = json::array();
    std::string csv = "prompt_id,clip_id,baseline_id,physical_score,semantic_score,error\n";
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const PromptOut& o = results[i];
      const auto& best = physical_pick ? o.best_phys : o.best_sem;
      if (!best) {
        failed = true;
        const std::string& err = physical_pick ? o.err_phys : o.err_sem;
        errs.push_back({{"prompt_id", prompts[i]}, {"error", err}});
        csv += csv_field(prompts[i]) + ",,,,," + csv_field(err) + "\n";
        continue;
      }
      const auto& rows = per_prompt.at(prompts[i]).rows;
      std::size_t idx = 0;
      while (rows[idx].clip_id != best->clip_id) ++idx;
      const std::optional<double> ps = o.phys[idx].score;
      const std::optional<double> ss = o.sem[idx].score;
      json excluded = json::array();
      for (const auto& [clip_id, reason] : best->excluded) {
        excluded.push_back({{"clip_id", clip_id}, {"reason", reason}});
      }
      sel.push_back({{"prompt_id", prompts[i]},
                     {"clip_id", best->clip_id},
                     {"baseline_id", best->baseline_id},
                     {"physical_score", opt_json(ps)},
                     {"semantic_score", opt_json(ss)},
                     {"excluded", excluded}});
      csv += csv_field(prompts[i]) + "," + csv_field(best->clip_id) + "," +
             csv_field(best->baseline_id) + "," + cell(ps) + "," + cell(ss) + ",\n";
    }
    write_json(c.out / (std::string(stem) + ".json"),
               {{"config", cfg}, {"selections", sel}, {"failures", errs}});
    write_file(c.out / (std::string(stem) + ".csv"), csv);
  };
  emit(true, "selection_physical");
  emit(false, "selection_semantic");

  std::string radar = "metric,baseline_id,value,normalized\n";
  for (const auto& e : scoring::radar_table(all)) {
    radar += e.metric + "," + csv_field(e.baseline_id) + "," + fmt6(e.value) + "," +
             fmt6(e.normalized) + "\n";
  }
  write_file(c.out / "radar.csv", radar);
  return failed ? kDataError : kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Deterministic evaluation of text-to-motion outputs", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string out_dir;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_flag("--strict", strict, "fail on the first invalid clip or reply");
  app.add_option("--out", out_dir, "output directory (overrides the config)");

  std::map<std::string, int (*)(const RunConfig&)> commands = {
      {"eval-physical", cmd_physical},       {"eval-semantic", cmd_semantic},
      {"eval-finegrained", cmd_finegrained}, {"judge", cmd_judge},
      {"judge-gap", cmd_judge_gap},          {"score-select", cmd_score_select},
  };
  const std::map<std::string, std::string> help = {
      {"eval-physical", "per-clip physical metrics and baseline means"},
      {"eval-semantic", "matching score, R-precision, ASR, diversity, multimodality"},
      {"eval-finegrained", "root and body-part control errors per baseline"},
      {"judge", "score keyframe strips with the vision-LLM judge"},
      {"judge-gap", "per-dimension gap between LLM and human selections"},
      {"score-select", "best clip per prompt by physical and semantic score"},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg = load_config(config_path);
    cfg.jobs = jobs;
    if (seed) cfg.seed = *seed;
    if (strict) cfg.strict = true;
    if (!out_dir.empty()) cfg.out = out_dir;
    for (const auto& [name, fn] : commands) {
      if (app.got_subcommand(name)) return fn(cfg);
    }
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << kToolName << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace t2m::cli
