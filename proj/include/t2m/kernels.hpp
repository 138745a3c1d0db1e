#pragma once

// Corpus-level kernels in two flavours: a serial reference and an OpenMP
// version. Parallel kernels write into per-index slots and reduce in index
// order, so their output is bitwise identical to the serial reference for
// any thread count.

#include "t2m/corpus.hpp"
#include "t2m/error.hpp"
#include "t2m/physical.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace t2m::kernels {

/// Runs fn(i) for i in [0, n) on `jobs` OpenMP threads (dynamic schedule).
/// The first exception thrown by any iteration is rethrown after the loop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

struct ClipOutcome {
  std::optional<physical::PhysicalReport> report;
  Errc code = Errc::InvariantViolation;
  std::string error;  // empty on success
};

std::vector<ClipOutcome> evaluate_physical_serial(const Corpus& corpus,
                                                  const physical::PhysicalConfig& cfg);
std::vector<ClipOutcome> evaluate_physical_omp(const Corpus& corpus,
                                               const physical::PhysicalConfig& cfg, int jobs);

/// Body penetration with frames distributed over threads.
double body_penetration_omp(const MeshSequence& mesh, int jobs);

}  // namespace t2m::kernels
