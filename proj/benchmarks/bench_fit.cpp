#include "lsqtobit/estimator.hpp"
#include "lsqtobit/montecarlo.hpp"

#include <benchmark/benchmark.h>

using namespace lsqtobit;

namespace {

const GeneratorFamily kFamilies[] = {GeneratorFamily::log_normal(), GeneratorFamily::log_student_t(4.0),
                                     GeneratorFamily::log_power_exponential(0.3),
                                     GeneratorFamily::extended_birnbaum_saunders(0.5)};

void BM_Fit(benchmark::State& state) {
  const GeneratorFamily& f = kFamilies[state.range(0)];
  Scenario sc;
  sc.family = f;
  sc.n = state.range(1);
  sc.censor_prop = 0.1;
  sc.calibration_draws = 100000;
  const Dataset d = simulate_scenario(sc, calibrate_psi(sc), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit({f, 0.5, d.psi}, d));
  state.SetLabel(std::string(f.name()));
}

void BM_ProfileFit(benchmark::State& state) {
  const SyntheticSample s = make_labor_supply_sample(1);
  FitConfig config;
  config.xi_grid = default_xi_grid(FamilyKind::LogStudentT);
  const ModelSpec spec{GeneratorFamily::log_student_t(config.xi_grid.front()), 0.5, s.data.psi};
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, s.data, config));
}

}  // namespace

BENCHMARK(BM_Fit)->ArgsProduct({{0, 1, 2, 3}, {50, 600}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileFit)->Unit(benchmark::kMillisecond);
