#pragma once

// Embedding-space metrics: matching score, R-Precision, ASR, multimodality,
// diversity, and the seeded bootstrap used for "mean +- interval" columns.
//
// All randomized operations draw from std::mt19937_64 streams derived from a
// master seed and a string key (substream_seed), so results depend only on
// (seed, inputs) and never on evaluation order or thread count.

#include "t2m/corpus.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2m::semantic {

inline constexpr double kAsrThreshold = 0.6;
inline constexpr std::size_t kPoolSize = 32;
inline constexpr std::size_t kDefaultReplicates = 1000;

struct StatSummary {
  double mean = 0.0;
  double half_width = 0.0;  // standard deviation of bootstrap replicate means
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
};

struct RetrievalPool {
  Eigen::VectorXd anchor;  // text embedding
  std::vector<std::pair<std::string, Eigen::VectorXd>> candidates;
  std::size_t ground_truth = 0;
};

/// splitmix64(master ^ fnv1a64(key)).
std::uint64_t substream_seed(std::uint64_t master, std::string_view key) noexcept;

double matching_score(const Eigen::VectorXd& text, const Eigen::VectorXd& motion);

/// Zero-based rank of the ground truth by ascending distance to the anchor;
/// equal distances keep candidate list order.
std::size_t retrieval_rank(const RetrievalPool& pool);

/// Fraction of pools whose ground truth ranks within the top k.
double r_precision(std::span<const RetrievalPool> pools, std::size_t k);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Fraction of pairs with cosine similarity strictly above `threshold`.
double asr(std::span<const AtomicPair> pairs, double threshold = kAsrThreshold);

/// Mean distance over `pairs` seeded draws of distinct outputs per prompt,
/// averaged across prompts; the interval bootstraps the per-prompt means.
StatSummary multimodality(const std::map<std::string, std::vector<Eigen::VectorXd>>& per_prompt,
                          std::size_t pairs, std::uint64_t seed,
                          std::size_t replicates = kDefaultReplicates);

/// Mean distance between two seeded groups of `draws` vectors. Groups are
/// disjoint draws without replacement when the corpus holds at least
/// 2 * draws vectors, otherwise independent draws with replacement.
StatSummary diversity(std::span<const Eigen::VectorXd> outputs, std::size_t draws,
                      std::uint64_t seed, std::size_t replicates = kDefaultReplicates);

/// Mean of `values` with the standard deviation of `replicates` resampled
/// means (with replacement) as half width. Requires replicates >= 100.
StatSummary bootstrap(std::span<const double> values, std::size_t replicates, std::uint64_t seed);

/// Row-concatenated joints of the first `frames` frames; shorter clips repeat
/// their final frame.
Eigen::VectorXd flatten_joints(const MotionClip& clip, std::size_t frames);

struct PoolCase {
  std::string clip_id;
  RetrievalPool pool;
};

/// One pool per clip that has both a motion embedding and a text embedding
/// for its prompt. Distractors are other clips of the same baseline with a
/// different prompt, sampled per clip from substream_seed(seed, clip_id);
/// the ground truth is placed at a seeded position.
std::vector<PoolCase> build_pools(const Corpus& corpus, const EmbeddingSet& embeddings,
                                  std::size_t pool_size, std::uint64_t seed);

}  // namespace t2m::semantic
