#pragma once

// Corpus manifests, target files and embedding sets.
//
// A manifest is a JSON object mapping clip_id to an entry:
//
//   {
//     "clip_0001": {
//       "prompt_id": "p01", "baseline_id": "MDM", "fps": 20,
//       "dataset_type": "dynamics_long",            (optional)
//       "joints": "clip_0001_joints.npy",           T x 22 x 3
//       "features": "clip_0001_feat.npy",           T x 263
//       "features_normalized": true,
//       "vertices": "clip_0001_verts.npy",          T x V x 3
//       "faces": "smpl_faces.npy",                  F x 3, integral floats
//       "pose_distances": "clip_0001_nrdf.npy",     T
//       "motion_embedding": "clip_0001_memb.npy",   D
//       "atomic_pairs": "clip_0001_atomic.npy",     K x 2 x D
//       "strip_image": "clip_0001_strip.png",
//       "prompt_text": "a person jumps forward"
//     }
//   }
//
// Relative paths resolve against the manifest's directory. Iteration order is
// lexicographic by clip_id regardless of manifest order.

#include "t2m/error.hpp"
#include "t2m/motion.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace t2m {

struct AtomicPair {
  Eigen::VectorXd ground_truth;
  Eigen::VectorXd output;
};

struct ClipRecord {
  std::string clip_id;
  std::string prompt_id;
  std::string baseline_id;
  std::string dataset_type;
  double fps = kDefaultFps;

  std::optional<MotionClip> motion;
  std::optional<FeatureClip> features;
  std::optional<MeshSequence> mesh;
  std::optional<PoseDistanceSeries> pose_distances;
  std::optional<Eigen::VectorXd> motion_embedding;
  std::vector<AtomicPair> atomic_pairs;
  std::optional<std::filesystem::path> strip_image;
  std::string prompt_text;
};

class Corpus {
 public:
  Corpus() = default;
  /// Sorts by clip_id; duplicate ids raise InvariantViolation.
  explicit Corpus(std::vector<ClipRecord> clips);

  const std::vector<ClipRecord>& clips() const noexcept { return clips_; }
  std::size_t size() const noexcept { return clips_.size(); }
  bool empty() const noexcept { return clips_.empty(); }

  /// prompt_id -> indices into clips(), each list in clip_id order.
  const std::map<std::string, std::vector<std::size_t>>& by_prompt() const noexcept {
    return by_prompt_;
  }
  /// Sorted distinct baseline ids.
  std::vector<std::string> baselines() const;
  const ClipRecord* find(const std::string& clip_id) const;

 private:
  std::vector<ClipRecord> clips_;
  std::map<std::string, std::vector<std::size_t>> by_prompt_;
};

struct ClipFailure {
  std::string clip_id;
  Errc code;
  std::string reason;
};

enum class LoadPolicy {
  Strict,   // first invalid clip aborts the load
  Lenient,  // invalid clips are reported and skipped
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<ClipFailure> failures;  // clip_id order
};

CorpusLoad load_corpus(const std::filesystem::path& manifest,
                       LoadPolicy policy = LoadPolicy::Strict);

/// Parses target records (root_move.json / body_part.json schema).
std::vector<TargetSpec> parse_targets(const nlohmann::json& doc);
std::vector<TargetSpec> load_targets(const std::filesystem::path& path);

FeatureStats load_feature_stats(const std::filesystem::path& mean_path,
                                const std::filesystem::path& std_path);

/// Text/motion/atomic-action vectors in a shared latent space. Atomic pairs
/// are keyed by the clip whose generated caption they were extracted from.
struct EmbeddingSet {
  std::map<std::string, Eigen::VectorXd> text;
  std::map<std::string, Eigen::VectorXd> motion;
  std::map<std::string, std::vector<AtomicPair>> atomic_pairs;

  /// Common dimension, or 0 for an empty set. Throws InvariantViolation when
  /// vectors disagree in dimension or hold non-finite entries.
  std::size_t validate() const;
};

/// JSON object prompt_id -> NPY path of a D-vector.
std::map<std::string, Eigen::VectorXd> load_text_embeddings(const std::filesystem::path& path);

EmbeddingSet make_embedding_set(const Corpus& corpus,
                                std::map<std::string, Eigen::VectorXd> text);

}  // namespace t2m
