#include <benchmark/benchmark.h>

#include "freeconv/density.hpp"
#include "freeconv/rmt.hpp"
#include "freeconv/subordination.hpp"
#include "freeconv/support.hpp"

using namespace freeconv;

namespace {

measure bernoulli() {
  return make_atomic(domain_kind::real_line, {{-1.0, 0.5}, {1.0, 0.5}});
}

void BM_cauchy_g_atoms(benchmark::State& state) {
  measure m = bernoulli();
  double t = 2.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cauchy_g_real(m, t));
    t = t == 2.5 ? 3.5 : 2.5;
  }
}
BENCHMARK(BM_cauchy_g_atoms);

void BM_cauchy_g_quadrature(benchmark::State& state) {
  measure m = validate(
      [] {
        measure raw;
        ac_component c;
        c.family = ac_family::jacobi;
        c.a = -1.0;
        c.b = 1.0;
        c.alpha = 0.5;
        c.beta = 0.5;
        c.normalizer = 8.0 / (pi * 4.0);
        raw.ac.push_back(c);
        return raw;
      }(),
      static_cast<int>(state.range(0)));
  double t = 1.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cauchy_g_real(m, t));
    t = t == 1.7 ? 2.9 : 1.7;
  }
}
BENCHMARK(BM_cauchy_g_quadrature)->Arg(50)->Arg(200)->Arg(800);

void BM_omega_additive(benchmark::State& state) {
  measure m = bernoulli();
  cdouble z(0.3, std::pow(10.0, -static_cast<double>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(omega_additive(m, m, z));
}
BENCHMARK(BM_omega_additive)->Arg(1)->Arg(4)->Arg(8);

void BM_support_additive(benchmark::State& state) {
  measure m = bernoulli();
  for (auto _ : state) benchmark::DoNotOptimize(support_additive(m, m));
}
BENCHMARK(BM_support_additive);

void BM_density_point(benchmark::State& state) {
  measure m = bernoulli();
  for (auto _ : state) benchmark::DoNotOptimize(density_additive(m, m, {0.25}));
}
BENCHMARK(BM_density_point);

void BM_oracle_trial(benchmark::State& state) {
  measure m = bernoulli();
  oracle_config cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.trials = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(empirical_spectrum(convolution_kind::additive, m, m, cfg));
}
BENCHMARK(BM_oracle_trial)->Arg(200)->Arg(500);

} // namespace

BENCHMARK_MAIN();
