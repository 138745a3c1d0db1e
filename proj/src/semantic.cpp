#include "t2m/semantic.hpp"

#include "t2m/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace t2m::semantic {

namespace {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void check_dims(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::string_view key) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double matching_score(const Eigen::VectorXd& text, const Eigen::VectorXd& motion) {
  check_dims(text, motion);
  return (text - motion).norm();
}

std::size_t retrieval_rank(const RetrievalPool& pool) {
  if (pool.ground_truth >= pool.candidates.size()) {
    throw Error(Errc::OutOfRange, "ground-truth index outside the pool");
  }
  const double gt = matching_score(pool.anchor, pool.candidates[pool.ground_truth].second);
  std::size_t rank = 0;
  for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
    if (i == pool.ground_truth) continue;
    const double d = matching_score(pool.anchor, pool.candidates[i].second);
    if (d < gt || (d == gt && i < pool.ground_truth)) ++rank;
  }
  return rank;
}

double r_precision(std::span<const RetrievalPool> pools, std::size_t k) {
  if (pools.empty()) throw Error(Errc::Empty, "no retrieval pools");
  std::size_t hits = 0;
  for (const auto& pool : pools) {
    if (k < 1 || k > pool.candidates.size()) {
      throw Error(Errc::BadK, "k=" + std::to_string(k) + " for pool of " +
                                  std::to_string(pool.candidates.size()));
    }
    if (retrieval_rank(pool) < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pools.size());
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_dims(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return a.dot(b) / (na * nb);
}

double asr(std::span<const AtomicPair> pairs, double threshold) {
  if (pairs.empty()) throw Error(Errc::Empty, "no atomic-action pairs");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::OutOfRange, "ASR threshold must lie in (0, 1)");
  }
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    if (cosine_similarity(p.ground_truth, p.output) > threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

StatSummary bootstrap(std::span<const double> values, std::size_t replicates, std::uint64_t seed) {
  if (values.empty()) throw Error(Errc::Empty, "bootstrap of an empty sample");
  if (replicates < 100) throw Error(Errc::OutOfRange, "bootstrap needs at least 100 replicates");
  const std::size_t n = values.size();
  StatSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  s.replicates = replicates;
  s.seed = seed;

  std::mt19937_64 rng(seed);
  std::vector<double> means(replicates);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[uniform_index(rng, n)];
    m = sum / static_cast<double>(n);
  }
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(replicates);
  double ss = 0.0;
  for (double m : means) ss += (m - mu) * (m - mu);
  s.half_width = std::sqrt(ss / static_cast<double>(replicates));
  return s;
}

StatSummary multimodality(const std::map<std::string, std::vector<Eigen::VectorXd>>& per_prompt,
                          std::size_t pairs, std::uint64_t seed, std::size_t replicates) {
  if (per_prompt.empty()) throw Error(Errc::InsufficientOutputs, "no prompts");
  if (pairs == 0) throw Error(Errc::OutOfRange, "multimodality needs at least one pair");
  std::vector<double> prompt_means;
  prompt_means.reserve(per_prompt.size());
  for (const auto& [prompt_id, outputs] : per_prompt) {
    const std::size_t K = outputs.size();
    if (K < 2) {
      throw Error(Errc::InsufficientOutputs, prompt_id + " has " + std::to_string(K) + " outputs");
    }
    std::mt19937_64 rng(substream_seed(seed, prompt_id));
    double sum = 0.0;
    for (std::size_t m = 0; m < pairs; ++m) {
      const std::size_t i = uniform_index(rng, K);
      std::size_t j = uniform_index(rng, K - 1);
      if (j >= i) ++j;
      sum += matching_score(outputs[i], outputs[j]);
    }
    prompt_means.push_back(sum / static_cast<double>(pairs));
  }
  StatSummary s = bootstrap(prompt_means, replicates, substream_seed(seed, "multimodality"));
  s.seed = seed;
  return s;
}

StatSummary diversity(std::span<const Eigen::VectorXd> outputs, std::size_t draws,
                      std::uint64_t seed, std::size_t replicates) {
  const std::size_t N = outputs.size();
  if (N == 0) throw Error(Errc::EmptyCorpus, "diversity of an empty corpus");
  if (draws == 0) throw Error(Errc::OutOfRange, "diversity needs at least one draw");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> first(draws), second(draws);
  if (N >= 2 * draws) {
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // partial Fisher-Yates: the first 2*draws slots become a uniform sample
    for (std::size_t i = 0; i < 2 * draws; ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, N - i)]);
    }
    std::copy_n(idx.begin(), draws, first.begin());
    std::copy_n(idx.begin() + static_cast<std::ptrdiff_t>(draws), draws, second.begin());
  } else {
    for (auto& i : first) i = uniform_index(rng, N);
    for (auto& j : second) j = uniform_index(rng, N);
  }
  std::vector<double> dists(draws);
  for (std::size_t m = 0; m < draws; ++m) {
    dists[m] = matching_score(outputs[first[m]], outputs[second[m]]);
  }
  StatSummary s = bootstrap(dists, replicates, substream_seed(seed, "diversity"));
  s.seed = seed;
  return s;
}

Eigen::VectorXd flatten_joints(const MotionClip& clip, std::size_t frames) {
  if (clip.frames() == 0) throw Error(Errc::TooShort, "cannot flatten an empty clip");
  const std::size_t J = clip.joints();
  Eigen::VectorXd v(static_cast<Eigen::Index>(frames * J * 3));
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t src = std::min(t, clip.frames() - 1);
    for (std::size_t j = 0; j < J; ++j) {
      v.segment<3>(static_cast<Eigen::Index>((t * J + j) * 3)) = clip.at(src, j);
    }
  }
  return v;
}

std::vector<PoolCase> build_pools(const Corpus& corpus, const EmbeddingSet& embeddings,
                                  std::size_t pool_size, std::uint64_t seed) {
  if (pool_size < 2) throw Error(Errc::OutOfRange, "pool size must be at least 2");
  // eligible clips per baseline, clip_id order
  std::map<std::string, std::vector<const ClipRecord*>> by_baseline;
  for (const auto& c : corpus.clips()) {
    if (embeddings.motion.count(c.clip_id) && embeddings.text.count(c.prompt_id)) {
      by_baseline[c.baseline_id].push_back(&c);
    }
  }
  std::vector<PoolCase> out;
  for (const auto& c : corpus.clips()) {
    auto bit = by_baseline.find(c.baseline_id);
    if (bit == by_baseline.end() || !embeddings.motion.count(c.clip_id) ||
        !embeddings.text.count(c.prompt_id)) {
      continue;
    }
    std::vector<const ClipRecord*> distractors;
    for (const ClipRecord* d : bit->second) {
      if (d->prompt_id != c.prompt_id) distractors.push_back(d);
    }
    std::mt19937_64 rng(substream_seed(seed, c.clip_id));
    const std::size_t take = std::min(pool_size - 1, distractors.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(distractors[i], distractors[i + uniform_index(rng, distractors.size() - i)]);
    }
    distractors.resize(take);

    PoolCase pc;
    pc.clip_id = c.clip_id;
    pc.pool.anchor = embeddings.text.at(c.prompt_id);
    pc.pool.ground_truth = uniform_index(rng, take + 1);
    for (std::size_t i = 0, d = 0; i < take + 1; ++i) {
      if (i == pc.pool.ground_truth) {
        pc.pool.candidates.emplace_back(c.clip_id, embeddings.motion.at(c.clip_id));
      } else {
        pc.pool.candidates.emplace_back(distractors[d]->clip_id,
                                        embeddings.motion.at(distractors[d]->clip_id));
        ++d;
      }
    }
    out.push_back(std::move(pc));
  }
  return out;
}

}  // namespace t2m::semantic
