#include "t2m/kernels.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace t2m::kernels {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::exception_ptr first;
  std::size_t first_index = n;
  std::mutex mu;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mu);
      // keep the lowest failing index so the reported error is deterministic
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

namespace {

ClipOutcome evaluate_one(const ClipRecord& clip, const physical::PhysicalConfig& cfg) {
  ClipOutcome out;
  try {
    out.report = physical::evaluate_clip(clip, cfg);
  } catch (const Error& e) {
    out.code = e.code();
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<ClipOutcome> evaluate_physical_serial(const Corpus& corpus,
                                                  const physical::PhysicalConfig& cfg) {
  std::vector<ClipOutcome> out;
  out.reserve(corpus.size());
  for (const auto& clip : corpus.clips()) out.push_back(evaluate_one(clip, cfg));
  return out;
}

std::vector<ClipOutcome> evaluate_physical_omp(const Corpus& corpus,
                                               const physical::PhysicalConfig& cfg, int jobs) {
  std::vector<ClipOutcome> out(corpus.size());
  const auto& clips = corpus.clips();
  const auto n = static_cast<long long>(clips.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = evaluate_one(clips[static_cast<std::size_t>(i)], cfg);
  }
  return out;
}

double body_penetration_omp(const MeshSequence& mesh, int jobs) {
  if (mesh.frames() == 0) throw Error(Errc::TooShort, "mesh has no frames");
  std::vector<std::size_t> pairs(mesh.frames());
  parallel_for(mesh.frames(), jobs,
               [&](std::size_t t) { pairs[t] = physical::colliding_pairs_in_frame(mesh, t); });
  // same summation order as physical::body_penetration
  const auto F = static_cast<double>(mesh.face_count());
  double sum = 0.0;
  for (std::size_t p : pairs) sum += static_cast<double>(p) / F * 100.0;
  return sum / static_cast<double>(mesh.frames());
}

}  // namespace t2m::kernels
