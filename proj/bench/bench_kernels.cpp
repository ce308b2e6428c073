// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <numbers>

#include "relmode/models.hpp"
#include "relmode/pipeline.hpp"
#include "relmode/rpo_search.hpp"

using namespace relmode;

namespace {

struct SpringCell {
  EquivariantHamiltonianModel model = spring_pendulum_3d();
  TaylorAnalysis ta;
  IsotropyCell cell;
  ConstrainedProblem problem;
  std::vector<Vec> starts;

  SpringCell() {
    const Mat a = model.space().hamiltonian_matrix(model.hess_h(Vec::Zero(model.dim())));
    const auto u = resonance_space(jordan_chevalley(a, model.space()), 1.0);
    const auto table = isotropy_table(model.action(), u);
    ta = taylor_analysis(model, table[0].fixed_space, u.semisimple / u.nu0);
    cell = make_cell(model.action(), "e", table[0].l_coords, Vec::Constant(1, 0.1));
    problem = objective_problem(model, ta, cell);
    starts = halton_starts(problem.dim, 256, 7);
  }
};

const SpringCell& spring_cell() {
  static const SpringCell c;
  return c;
}

void BM_multistart_serial(benchmark::State& state) {
  const auto& c = spring_cell();
  for (auto _ : state) benchmark::DoNotOptimize(multistart_serial(c.problem, c.starts));
}

void BM_multistart_parallel(benchmark::State& state) {
  const auto& c = spring_cell();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multistart_parallel(c.problem, c.starts, {}, jobs));
}

// Finite-difference shooting Jacobian columns are integrated independently per thread.
void BM_shoot(benchmark::State& state) {
  const auto model = spring_pendulum_3d();
  Vec m0(6);
  m0 << 0.03, 0.0, 0.0, 0.0, 0.03, 0.0;
  Mat basis(1, 1);
  basis << 1.0;
  ShootOptions so;
  so.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(shoot_rpo(model, m0, 2.0 * std::numbers::pi, Vec::Zero(1), basis, so));
    } catch (const std::exception&) {
      // relative equilibria and non-convergence cost the same iterations
    }
  }
}

void BM_pipeline(benchmark::State& state) {
  AnalysisConfig cfg;
  cfg.momentum_grid = {{-0.1}, {-0.05}, {0.05}, {0.1}};
  cfg.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmd_analyze(cfg));
}

}  // namespace

BENCHMARK(BM_multistart_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_multistart_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shoot)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pipeline)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
