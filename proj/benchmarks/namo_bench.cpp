#include <benchmark/benchmark.h>

#include <numbers>
#include <random>
#include <string>

#include "namo/errors.hpp"
#include "namo/harness.hpp"
#include "namo/navigation.hpp"
#include "namo/perception.hpp"

namespace {

using namespace namo;

std::string scene_path(const char* name) { return std::string(NAMO_SOURCE_DIR) + "/scenes/" + name + ".scene"; }

nav::OccupancyGrid random_grid(int side, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nav::OccupancyGrid g({0.0, 0.0}, 0.05, side, side);
  for (std::size_t i = 0; i < g.size(); ++i) g.set(g.cell_at(i), u(rng) < density);
  g.set({0, 0}, false);
  g.set({side - 1, side - 1}, false);
  return g;
}

void BM_AStar(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const nav::OccupancyGrid g = random_grid(side, 0.2, 7);
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(nav::astar(g, nav::Cell{0, 0}, nav::Cell{side - 1, side - 1}));
    } catch (const NoPath&) {
    }
  }
}
BENCHMARK(BM_AStar)->RangeMultiplier(2)->Range(32, 256);

void BM_Inflate(benchmark::State& state) {
  const nav::OccupancyGrid g = random_grid(static_cast<int>(state.range(0)), 0.05, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nav::inflate(g, 0.30));
}
BENCHMARK(BM_Inflate)->Arg(64)->Arg(128)->Arg(256);

void BM_FilterPrimitive(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<perception::Primitive> psi(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < psi.size(); ++i) {
    perception::Primitive& p = psi[i];
    p.center = {u(rng), u(rng), 0.3};
    if (i % 2 == 0) {
      const double a = std::numbers::pi * u(rng);
      p.shape = perception::ShapeKind::Plane;
      p.width = 0.5;
      p.normal = {std::cos(a), std::sin(a)};
      p.normal3 = {std::cos(a), std::sin(a), 0.0};
    } else {
      p.shape = perception::ShapeKind::Cylinder;
      p.radius = 0.1;
    }
  }
  const Vec2 q{5.0, 5.0};  // misses every primitive, so all are scanned
  for (auto _ : state) benchmark::DoNotOptimize(nav::filter_primitive(psi, q, 0.4));
}
BENCHMARK(BM_FilterPrimitive)->Arg(4)->Arg(64);

void BM_RansacCylinder(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.005);
  std::vector<perception::Point3> pts;
  for (int i = 0; i < 2000; ++i) {
    const double a = 2.0 * std::numbers::pi * u(rng);
    pts.emplace_back(0.3 * std::cos(a) + g(rng), 0.3 * std::sin(a) + g(rng), 0.4 * u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(perception::ransac_fit(pts, perception::ShapeKind::Cylinder));
}
BENCHMARK(BM_RansacCylinder)->Unit(benchmark::kMillisecond);

void BM_CitoPush(benchmark::State& state) {
  const harness::SceneSpec scene = harness::load_scene(scene_path("push"));
  for (auto _ : state) benchmark::DoNotOptimize(harness::solve_cito(scene));
}
BENCHMARK(BM_CitoPush)->Unit(benchmark::kMillisecond);

void BM_RunTask2(benchmark::State& state) {
  const harness::SceneSpec scene = harness::load_scene(scene_path("task2"));
  for (auto _ : state) benchmark::DoNotOptimize(harness::run(scene));
}
BENCHMARK(BM_RunTask2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
