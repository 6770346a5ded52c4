// Parallel adjoint Jacobian against the serial column-by-column reference,
// and the threaded forward sweep against one thread.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "scatterbench/forward.hpp"
#include "scatterbench/measurement.hpp"
#include "scatterbench/media.hpp"

namespace {

struct Case {
  sb::GridField q;
  std::vector<sb::IncidentWave> waves;
  sb::ReceiverRing ring{32, 3.0};
  std::vector<sb::Mode> modes;
};

Case make_case(int M) {
  Case c;
  c.q = sb::make_bumps(sb::square_grid(48));
  for (int m = 0; m < 8; ++m) c.waves.push_back({2.0, 2.0 * M_PI * m / 8});
  c.modes = sb::retained_modes(M, sb::TruncationRule::max_mode_rule(M), 2.0);
  return c;
}

void BM_JacobianAdjointParallel(benchmark::State& st) {
  const Case c = make_case(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    sb::FrequencyOperator op(c.q, 2.0, c.waves, c.ring);
    benchmark::DoNotOptimize(op.jacobian(c.modes));
  }
}

void BM_JacobianSerialReference(benchmark::State& st) {
  const Case c = make_case(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(sb::jacobian_reference(c.q, c.waves, c.ring, c.modes));
}

void BM_ForwardSweep(benchmark::State& st) {
  const Case c = make_case(2);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    sb::FrequencyOperator op(c.q, 2.0, c.waves, c.ring);
    benchmark::DoNotOptimize(op.data());
  }
  omp_set_num_threads(saved);
}

}  // namespace

BENCHMARK(BM_JacobianAdjointParallel)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobianSerialReference)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
