#include "t2m/corpus.hpp"

#include "t2m/npy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace t2m {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvariantViolation, path.string() + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  return p.is_absolute() ? p : base / p;
}

void require_shape(const npy::Array& a, std::initializer_list<long> dims, const char* what) {
  // -1 marks a free dimension
  bool ok = a.rank() == dims.size();
  std::size_t i = 0;
  for (long d : dims) {
    if (!ok) break;
    if (d >= 0 && a.shape[i] != static_cast<std::size_t>(d)) ok = false;
    ++i;
  }
  if (!ok) {
    std::string got = "(";
    for (std::size_t k = 0; k < a.shape.size(); ++k) {
      got += (k ? "," : "") + std::to_string(a.shape[k]);
    }
    throw Error(Errc::InvariantViolation, std::string(what) + " has shape " + got + ")");
  }
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(Errc::InvariantViolation, std::string(what) + " is not finite");
  }
}

std::vector<Vec3> to_points(const std::vector<double>& flat) {
  std::vector<Vec3> pts(flat.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = Vec3(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
  }
  return pts;
}

Eigen::VectorXd to_vector(const std::vector<double>& flat) {
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

std::string str_field(const json& entry, const char* key, bool required) {
  auto it = entry.find(key);
  if (it == entry.end()) {
    if (required) throw Error(Errc::InvariantViolation, std::string("missing '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw Error(Errc::InvariantViolation, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

ClipRecord load_clip(const std::string& clip_id, const json& entry, const fs::path& base) {
  if (!entry.is_object()) throw Error(Errc::InvariantViolation, "entry is not an object");
  ClipRecord rec;
  rec.clip_id = clip_id;
  rec.prompt_id = str_field(entry, "prompt_id", true);
  rec.baseline_id = str_field(entry, "baseline_id", true);
  rec.dataset_type = str_field(entry, "dataset_type", false);
  rec.prompt_text = str_field(entry, "prompt_text", false);
  if (auto it = entry.find("fps"); it != entry.end()) {
    if (!it->is_number()) throw Error(Errc::InvariantViolation, "'fps' must be a number");
    rec.fps = it->get<double>();
    if (!(rec.fps > 0.0) || !std::isfinite(rec.fps)) {
      throw Error(Errc::InvariantViolation, "'fps' must be positive");
    }
  }

  if (auto p = str_field(entry, "joints", false); !p.empty()) {
    const npy::Array a = npy::load(resolve(base, p));
    require_shape(a, {-1, static_cast<long>(kHumanMLJoints), 3}, "joints");
    const auto flat = a.to_f64();
    require_finite(flat, "joints");
    rec.motion = MotionClip(a.shape[0], kHumanMLJoints, to_points(flat), rec.fps);
    rec.motion->clip_id = rec.clip_id;
    rec.motion->prompt_id = rec.prompt_id;
    rec.motion->baseline_id = rec.baseline_id;
  }

  if (auto p = str_field(entry, "features", false); !p.empty()) {
    const npy::Array a = npy::load(resolve(base, p));
    require_shape(a, {-1, static_cast<long>(kFeatureDim)}, "features");
    const auto flat = a.to_f64();
    FeatureClip fc;
    fc.features = Eigen::Map<const FeatureMatrix>(flat.data(), static_cast<Eigen::Index>(a.shape[0]),
                                                  static_cast<Eigen::Index>(kFeatureDim));
    fc.normalized = entry.value("features_normalized", true);
    fc.validate();
    rec.features = std::move(fc);
  }

  const std::string vpath = str_field(entry, "vertices", false);
  const std::string fpath = str_field(entry, "faces", false);
  if (vpath.empty() != fpath.empty()) {
    throw Error(Errc::InvariantViolation, "'vertices' and 'faces' must be given together");
  }
  if (!vpath.empty()) {
    const npy::Array va = npy::load(resolve(base, vpath));
    require_shape(va, {-1, -1, 3}, "vertices");
    const npy::Array fa = npy::load(resolve(base, fpath));
    require_shape(fa, {-1, 3}, "faces");
    const auto vflat = va.to_f64();
    require_finite(vflat, "vertices");
    const auto fflat = fa.to_f64();
    std::vector<Face> faces(fa.shape[0]);
    for (std::size_t i = 0; i < fflat.size(); ++i) {
      const double x = fflat[i];
      if (!(x >= 0.0) || x != std::floor(x) || x > 4.0e9) {
        throw Error(Errc::InvariantViolation, "face entries must be non-negative integers");
      }
      faces[i / 3][i % 3] = static_cast<std::uint32_t>(x);
    }
    rec.mesh = MeshSequence(va.shape[0], va.shape[1], to_points(vflat), std::move(faces));
  }

  if (auto p = str_field(entry, "pose_distances", false); !p.empty()) {
    const npy::Array a = npy::load(resolve(base, p));
    require_shape(a, {-1}, "pose_distances");
    PoseDistanceSeries s{a.to_f64()};
    for (double d : s.distances) {
      if (!std::isfinite(d) || d < 0.0) {
        throw Error(Errc::InvariantViolation, "pose distances must be finite and >= 0");
      }
    }
    if (rec.motion && s.distances.size() != rec.motion->frames()) {
      throw Error(Errc::InvariantViolation, "pose_distances length differs from joint frames");
    }
    rec.pose_distances = std::move(s);
  }

  if (auto p = str_field(entry, "motion_embedding", false); !p.empty()) {
    const npy::Array a = npy::load(resolve(base, p));
    require_shape(a, {-1}, "motion_embedding");
    const auto flat = a.to_f64();
    require_finite(flat, "motion_embedding");
    rec.motion_embedding = to_vector(flat);
  }

  if (auto p = str_field(entry, "atomic_pairs", false); !p.empty()) {
    const npy::Array a = npy::load(resolve(base, p));
    require_shape(a, {-1, 2, -1}, "atomic_pairs");
    const auto flat = a.to_f64();
    require_finite(flat, "atomic_pairs");
    const std::size_t d = a.shape[2];
    for (std::size_t k = 0; k < a.shape[0]; ++k) {
      AtomicPair pair;
      pair.ground_truth = Eigen::Map<const Eigen::VectorXd>(flat.data() + 2 * k * d, static_cast<Eigen::Index>(d));
      pair.output = Eigen::Map<const Eigen::VectorXd>(flat.data() + (2 * k + 1) * d, static_cast<Eigen::Index>(d));
      rec.atomic_pairs.push_back(std::move(pair));
    }
  }

  if (auto p = str_field(entry, "strip_image", false); !p.empty()) {
    rec.strip_image = resolve(base, p);
    if (!fs::exists(*rec.strip_image)) throw Error(Errc::MissingFile, rec.strip_image->string());
  }
  return rec;
}

double require_number(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw Error(Errc::MissingField, key);
  if (!it->is_number()) throw Error(Errc::MissingField, std::string(key) + " is not a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw Error(Errc::MissingField, std::string(key) + " is not finite");
  return v;
}

Vec3 require_vec3(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_array() || it->size() != 3) {
    throw Error(Errc::MissingField, std::string(key) + " (3-vector)");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) throw Error(Errc::MissingField, std::string(key) + " entry is not a number");
    v[i] = (*it)[i].get<double>();
  }
  if (!v.allFinite()) throw Error(Errc::MissingField, std::string(key) + " is not finite");
  return v;
}

int require_joint(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_number_integer()) {
    throw Error(Errc::MissingField, std::string(key) + " (integer joint index)");
  }
  return it->get<int>();
}

TargetSpec parse_target(const json& rec) {
  if (!rec.is_object()) throw Error(Errc::MissingField, "target record is not an object");
  TargetSpec spec;
  auto pid = rec.find("prompt_id");
  if (pid == rec.end() || !pid->is_string()) throw Error(Errc::MissingField, "prompt_id");
  spec.prompt_id = pid->get<std::string>();

  auto kind_it = rec.find("kind");
  if (kind_it == rec.end() || !kind_it->is_string()) throw Error(Errc::MissingField, "kind");
  const std::string kind = kind_it->get<std::string>();

  if (kind == "yaw_rotation") {
    spec.target = YawTarget{require_number(rec, "angle")};
  } else if (kind == "directional_velocity") {
    VelocityTarget v;
    v.speed = require_number(rec, "speed");
    v.direction = require_vec3(rec, "direction");
    v.duration = require_number(rec, "duration");
    if (!(v.duration > 0.0)) throw Error(Errc::MissingField, "duration must be positive");
    const double n = v.direction.norm();
    if (std::abs(n - 1.0) >= 1e-3) {
      throw Error(Errc::NonUnitDirection, "|u| = " + std::to_string(n));
    }
    v.direction /= n;
    spec.target = v;
  } else if (kind == "root_translation") {
    spec.target = TranslationTarget{require_vec3(rec, "target")};
  } else if (kind == "body_part_offset") {
    BodyPartTarget b;
    b.base_joint = require_joint(rec, "base_joint");
    b.target_joint = require_joint(rec, "target_joint");
    b.offset = require_vec3(rec, "target");
    const int hi = static_cast<int>(kHumanMLJoints) - 1;
    if (b.base_joint < 0 || b.base_joint > hi || b.target_joint < 0 || b.target_joint > hi ||
        b.base_joint == b.target_joint) {
      throw Error(Errc::BadJoints, "base/target joints must be distinct indices in [0, 21]");
    }
    spec.target = b;
  } else {
    throw Error(Errc::UnknownKind, kind);
  }
  return spec;
}

}  // namespace

Corpus::Corpus(std::vector<ClipRecord> clips) : clips_(std::move(clips)) {
  std::sort(clips_.begin(), clips_.end(),
            [](const ClipRecord& a, const ClipRecord& b) { return a.clip_id < b.clip_id; });
  for (std::size_t i = 0; i < clips_.size(); ++i) {
    if (i > 0 && clips_[i].clip_id == clips_[i - 1].clip_id) {
      throw Error(Errc::InvariantViolation, "duplicate clip_id " + clips_[i].clip_id);
    }
    by_prompt_[clips_[i].prompt_id].push_back(i);
  }
}

std::vector<std::string> Corpus::baselines() const {
  std::set<std::string> ids;
  for (const auto& c : clips_) ids.insert(c.baseline_id);
  return {ids.begin(), ids.end()};
}

const ClipRecord* Corpus::find(const std::string& clip_id) const {
  auto it = std::lower_bound(clips_.begin(), clips_.end(), clip_id,
                             [](const ClipRecord& c, const std::string& id) { return c.clip_id < id; });
  return (it != clips_.end() && it->clip_id == clip_id) ? &*it : nullptr;
}

CorpusLoad load_corpus(const fs::path& manifest, LoadPolicy policy) {
  const json doc = read_json(manifest);
  if (!doc.is_object()) {
    throw Error(Errc::InvariantViolation, manifest.string() + ": manifest must be a JSON object");
  }
  const fs::path base = manifest.parent_path();

  // nlohmann::json objects iterate in key order, which is the clip_id order
  std::vector<ClipRecord> clips;
  std::vector<ClipFailure> failures;
  for (const auto& [clip_id, entry] : doc.items()) {
    try {
      clips.push_back(load_clip(clip_id, entry, base));
    } catch (const Error& e) {
      if (policy == LoadPolicy::Strict) {
        throw Error(e.code(), clip_id + ": " + e.what());
      }
      failures.push_back({clip_id, e.code(), e.what()});
    }
  }
  return {Corpus(std::move(clips)), std::move(failures)};
}

std::vector<TargetSpec> parse_targets(const json& doc) {
  if (!doc.is_array()) throw Error(Errc::MissingField, "target file must hold a JSON array");
  std::vector<TargetSpec> out;
  out.reserve(doc.size());
  std::size_t i = 0;
  for (const auto& rec : doc) {
    try {
      out.push_back(parse_target(rec));
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(i) + ": " + e.what());
    }
    ++i;
  }
  return out;
}

std::vector<TargetSpec> load_targets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::MissingField, path.string() + ": " + e.what());
  }
  return parse_targets(doc);
}

FeatureStats load_feature_stats(const fs::path& mean_path, const fs::path& std_path) {
  const npy::Array m = npy::load(mean_path);
  const npy::Array s = npy::load(std_path);
  require_shape(m, {-1}, "feature mean");
  require_shape(s, {-1}, "feature std");
  return FeatureStats(to_vector(m.to_f64()), to_vector(s.to_f64()));
}

std::size_t EmbeddingSet::validate() const {
  std::size_t dim = 0;
  auto check = [&](const Eigen::VectorXd& v, const std::string& where) {
    if (!v.allFinite()) throw Error(Errc::InvariantViolation, where + ": non-finite embedding");
    const auto d = static_cast<std::size_t>(v.size());
    if (dim == 0) dim = d;
    if (d != dim) {
      throw Error(Errc::InvariantViolation, where + ": dimension " + std::to_string(d) +
                                                " != " + std::to_string(dim));
    }
  };
  for (const auto& [id, v] : text) check(v, "text " + id);
  for (const auto& [id, v] : motion) check(v, "motion " + id);
  for (const auto& [id, pairs] : atomic_pairs) {
    for (const auto& p : pairs) {
      check(p.ground_truth, "atomic " + id);
      check(p.output, "atomic " + id);
    }
  }
  return dim;
}

std::map<std::string, Eigen::VectorXd> load_text_embeddings(const fs::path& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw Error(Errc::InvariantViolation, "text embedding index must be an object");
  std::map<std::string, Eigen::VectorXd> out;
  for (const auto& [prompt_id, rel] : doc.items()) {
    if (!rel.is_string()) throw Error(Errc::InvariantViolation, prompt_id + ": expected NPY path");
    const npy::Array a = npy::load(resolve(path.parent_path(), rel.get<std::string>()));
    require_shape(a, {-1}, "text embedding");
    const auto flat = a.to_f64();
    require_finite(flat, "text embedding");
    out.emplace(prompt_id, to_vector(flat));
  }
  return out;
}

EmbeddingSet make_embedding_set(const Corpus& corpus, std::map<std::string, Eigen::VectorXd> text) {
  EmbeddingSet set;
  set.text = std::move(text);
  for (const auto& c : corpus.clips()) {
    if (c.motion_embedding) set.motion.emplace(c.clip_id, *c.motion_embedding);
    if (!c.atomic_pairs.empty()) set.atomic_pairs.emplace(c.clip_id, c.atomic_pairs);
  }
  set.validate();
  return set;
}

}  // namespace t2m
