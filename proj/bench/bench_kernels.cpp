// Serial reference vs OpenMP kernels, and BVH vs brute-force collision.

#include "synthetic.hpp"
#include "t2m/collision.hpp"
#include "t2m/corpus.hpp"
#include "t2m/kernels.hpp"
#include "t2m/physical.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace t2m;

namespace {

struct Fixture {
  testing::TempDir dir;
  Corpus corpus;
};

const Corpus& corpus() {
  static const auto fx = [] {
    auto f = std::make_unique<Fixture>();
    testing::SyntheticOptions opt;
    opt.baselines = 4;
    opt.prompts = 12;
    opt.clips_per_prompt = 3;
    opt.frames = 120;
    const auto syn = testing::make_synthetic_corpus(f->dir.path(), opt);
    f->corpus = load_corpus(syn.manifest).corpus;
    return f;
  }();
  return fx->corpus;
}

MeshSequence soup_sequence(std::size_t frames, std::size_t F) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1), small(-0.15, 0.15);
  std::vector<Vec3> base;
  std::vector<Face> faces;
  for (std::size_t i = 0; i < F; ++i) {
    const Vec3 c(u(rng), u(rng), u(rng));
    const auto b = static_cast<std::uint32_t>(base.size());
    for (int k = 0; k < 3; ++k) base.push_back(c + Vec3(small(rng), small(rng), small(rng)));
    faces.push_back({b, b + 1, b + 2});
  }
  std::vector<Vec3> verts;
  for (std::size_t t = 0; t < frames; ++t) {
    const Vec3 drift(0.01 * double(t), 0, 0);
    for (const auto& v : base) verts.push_back(v + drift);
  }
  return MeshSequence(frames, base.size(), std::move(verts), std::move(faces));
}

void BM_PhysicalSerial(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::evaluate_physical_serial(c, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}
BENCHMARK(BM_PhysicalSerial)->Unit(benchmark::kMillisecond);

void BM_PhysicalOmp(benchmark::State& state) {
  const auto& c = corpus();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::evaluate_physical_omp(c, {}, jobs));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}
BENCHMARK(BM_PhysicalOmp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BodyPenetrationSerial(benchmark::State& state) {
  const auto mesh = soup_sequence(32, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(physical::body_penetration(mesh));
}
BENCHMARK(BM_BodyPenetrationSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_BodyPenetrationOmp(benchmark::State& state) {
  const auto mesh = soup_sequence(32, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::body_penetration_omp(mesh, 4));
}
BENCHMARK(BM_BodyPenetrationOmp)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_CollideBvh(benchmark::State& state) {
  const auto mesh = soup_sequence(1, static_cast<std::size_t>(state.range(0)));
  const std::span<const Vec3> v(mesh.frame(0), mesh.vertex_count());
  for (auto _ : state) benchmark::DoNotOptimize(bvh::TriangleBVH(v, mesh.faces()).count_colliding_pairs());
}
BENCHMARK(BM_CollideBvh)->Arg(200)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

void BM_CollideBruteForce(benchmark::State& state) {
  const auto mesh = soup_sequence(1, static_cast<std::size_t>(state.range(0)));
  const std::span<const Vec3> v(mesh.frame(0), mesh.vertex_count());
  for (auto _ : state) benchmark::DoNotOptimize(bvh::count_colliding_pairs_brute_force(v, mesh.faces()));
}
BENCHMARK(BM_CollideBruteForce)->Arg(200)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
