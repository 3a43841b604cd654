#include "lsqtobit/generators.hpp"
#include "lsqtobit/model.hpp"
#include "lsqtobit/montecarlo.hpp"

#include <benchmark/benchmark.h>

using namespace lsqtobit;

namespace {

GeneratorFamily family_at(int index) {
  switch (index) {
    case 1: return GeneratorFamily::log_student_t(4.0);
    case 2: return GeneratorFamily::log_power_exponential(0.3);
    case 3: return GeneratorFamily::extended_birnbaum_saunders(0.5);
    default: return GeneratorFamily::log_normal();
  }
}

Dataset scenario_sample(const GeneratorFamily& f, Eigen::Index n) {
  Scenario sc;
  sc.family = f;
  sc.n = n;
  sc.censor_prop = 0.4;
  sc.calibration_draws = 100000;
  return simulate_scenario(sc, calibrate_psi(sc), 1);
}

void BM_LogLik(benchmark::State& state) {
  const auto f = family_at(static_cast<int>(state.range(0)));
  const Dataset d = scenario_sample(f, state.range(1));
  const TobitLikelihood lik({f, 0.5, d.psi}, d);
  const Eigen::Vector4d theta(1.0, 0.5, 1.0, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(lik.value(theta));
  state.SetLabel(std::string(f.name()));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_ValueAndGradient(benchmark::State& state) {
  const auto f = family_at(static_cast<int>(state.range(0)));
  const Dataset d = scenario_sample(f, state.range(1));
  const TobitLikelihood lik({f, 0.5, d.psi}, d);
  const Eigen::Vector4d theta(1.0, 0.5, 1.0, 1.5);
  Eigen::VectorXd grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lik.value_and_gradient(theta, grad));
    benchmark::ClobberMemory();
  }
  state.SetLabel(std::string(f.name()));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_Sample(benchmark::State& state) {
  const auto f = family_at(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(qls_sample(f, {0.5, 1.0, 1.0}, 1000, seed++));
  state.SetLabel(std::string(f.name()));
  state.SetItemsProcessed(state.iterations() * 1000);
}

}  // namespace

BENCHMARK(BM_LogLik)->ArgsProduct({{0, 1, 2, 3}, {50, 600}});
BENCHMARK(BM_ValueAndGradient)->ArgsProduct({{0, 1, 2, 3}, {50, 600}});
BENCHMARK(BM_Sample)->DenseRange(0, 3);
