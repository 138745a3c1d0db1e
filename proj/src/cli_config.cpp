#include "t2m/cli.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace t2m::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::Config:
      return kConfigError;
    case Errc::Transport:
    case Errc::RateLimited:
      return kNetworkError;
    default:
      return kDataError;
  }
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(Errc::Config, msg); }

fs::path existing(const fs::path& base, const json& v, const char* key) {
  if (!v.is_string()) bad(std::string(key) + " must be a path string");
  fs::path p = v.get<std::string>();
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) bad(std::string(key) + ": no such file " + p.string());
  return p.lexically_normal();
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("bad value for '") + key + "'");
  }
}

template <typename T>
void positive(const char* key, T v) {
  if (!(v > 0)) bad(std::string(key) + " must be positive");
}

}  // namespace

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    bad("config is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) bad("config must be a JSON object");
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();

  RunConfig c;
  if (!doc.contains("corpus")) bad("config lacks 'corpus'");
  c.corpus = existing(base, doc["corpus"], "corpus");
  if (auto it = doc.find("targets"); it != doc.end()) {
    if (it->is_string()) {
      c.targets.push_back(existing(base, *it, "targets"));
    } else if (it->is_array()) {
      for (const auto& t : *it) c.targets.push_back(existing(base, t, "targets"));
    } else {
      bad("targets must be a path or a list of paths");
    }
  }
  if (auto it = doc.find("feature_stats"); it != doc.end()) {
    if (!it->is_object() || !it->contains("mean") || !it->contains("std")) {
      bad("feature_stats needs 'mean' and 'std'");
    }
    c.stats_mean = existing(base, (*it)["mean"], "feature_stats.mean");
    c.stats_std = existing(base, (*it)["std"], "feature_stats.std");
  }
  if (doc.contains("text_embeddings")) {
    c.text_embeddings = existing(base, doc["text_embeddings"], "text_embeddings");
  }
  if (doc.contains("judge_results")) {
    c.judge_results = existing(base, doc["judge_results"], "judge_results");
  }
  if (doc.contains("human_scores")) {
    c.human_scores = existing(base, doc["human_scores"], "human_scores");
  }
  read(doc, "seed", c.seed);
  read(doc, "bootstrap_replicates", c.bootstrap_replicates);
  if (c.bootstrap_replicates < 100) bad("bootstrap_replicates must be at least 100");
  read(doc, "strict", c.strict);
  if (doc.contains("out")) {
    std::string out;
    read(doc, "out", out);
    c.out = fs::path(out).is_relative() ? base / out : fs::path(out);
  }

  if (auto it = doc.find("contact"); it != doc.end()) {
    if (!it->is_object()) bad("contact must be an object");
    read(*it, "contact_height", c.contact.contact_height);
    read(*it, "contact_speed", c.contact.contact_speed);
    read(*it, "float_height", c.contact.float_height);
    read(*it, "min_velocity_ratio", c.contact.min_velocity_ratio);
    read(*it, "min_interval", c.contact.min_interval);
    read(*it, "left_foot", c.contact.left_foot);
    read(*it, "right_foot", c.contact.right_foot);
  }
  try {
    c.contact.validate(kHumanMLJoints);
  } catch (const Error& e) {
    bad(std::string("contact: ") + e.what());
  }
  std::string ground = "penetration";
  read(doc, "ground_mode", ground);
  if (ground == "penetration") {
    c.ground_mode = physical::GroundMode::Penetration;
  } else if (ground == "literal") {
    c.ground_mode = physical::GroundMode::Literal;
  } else {
    bad("ground_mode must be 'penetration' or 'literal'");
  }

  if (auto it = doc.find("semantic"); it != doc.end()) {
    read(*it, "pool_size", c.pool_size);
    read(*it, "mm_pairs", c.mm_pairs);
    read(*it, "diversity_draws", c.diversity_draws);
    read(*it, "asr_threshold", c.asr_threshold);
    std::string space = "embedding";
    read(*it, "space", space);
    if (space != "embedding" && space != "joints") bad("semantic.space must be embedding|joints");
    c.joint_space = space == "joints";
    read(*it, "joint_frames", c.joint_frames);
  }
  if (c.pool_size < 2) bad("semantic.pool_size must be at least 2");
  positive("semantic.mm_pairs", c.mm_pairs);
  positive("semantic.diversity_draws", c.diversity_draws);
  positive("semantic.joint_frames", c.joint_frames);
  if (!(c.asr_threshold > 0.0 && c.asr_threshold < 1.0)) bad("semantic.asr_threshold outside (0,1)");

  if (auto it = doc.find("finegrained"); it != doc.end()) {
    read(*it, "window", c.window);
    read(*it, "yaw_channel_scale", c.yaw_channel_scale);
  }
  positive("finegrained.window", c.window);

  if (auto it = doc.find("judge"); it != doc.end()) {
    read(*it, "endpoint", c.judge_endpoint);
    read(*it, "model", c.judge_model);
    read(*it, "concurrency", c.judge_concurrency);
    read(*it, "timeout_seconds", c.judge_timeout_seconds);
    read(*it, "max_attempts", c.judge_max_attempts);
    read(*it, "base_delay_ms", c.judge_base_delay_ms);
  }
  positive("judge.concurrency", c.judge_concurrency);
  positive("judge.timeout_seconds", c.judge_timeout_seconds);
  positive("judge.max_attempts", c.judge_max_attempts);
  if (c.judge_base_delay_ms < 0) bad("judge.base_delay_ms must be nonnegative");
  return c;
}

}  // namespace t2m::cli
