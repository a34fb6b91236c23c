// Wall-clock comparison of the OpenMP kernels against the serial references.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/dynamics.hpp"
#include "entmix/serial_ref.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double timed(F&& f) {
  const auto t0 = Clock::now();
  f();
  return seconds_since(t0);
}

void bench_case(const char* name, const entmix::RowSource& src, int n_starts, long steps) {
  using namespace entmix;
  const int n = src.dim();
  std::vector<DistVector> a, b;
  for (int s = 0; s < n_starts; ++s) {
    a.push_back(DistVector::delta(n, s % n));
    b.push_back(DistVector::delta(n, s % n));
  }
  const double t_par = timed([&] { propagate_batch(src, a, steps); });
  const double t_ser = timed([&] { serial::propagate_batch(src, b, steps); });
  double max_diff = 0.0;
  for (int s = 0; s < n_starts; ++s)
    for (int j = 0; j < n; ++j)
      max_diff = std::max(max_diff, std::fabs(a[static_cast<std::size_t>(s)][j] - b[static_cast<std::size_t>(s)][j]));
  std::printf("%-28s n=%-6d starts=%-3d steps=%-3ld  parallel %8.3fs  serial %8.3fs  speedup %5.2fx  max|diff| %.3g\n",
              name, n, n_starts, steps, t_par, t_ser, t_ser / t_par, max_diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled\n");
#endif
  using namespace entmix;

  {
    EnsembleSpec spec;
    spec.kind = EnsembleSpec::Kind::out_degrees;
    spec.n = 8192;
    spec.seed = 11;
    spec.out_degrees = {3};
    bench_case("sparse r-out batch", make_row_source(spec), 64, 16);
  }
  {
    EnsembleSpec spec;
    spec.kind = EnsembleSpec::Kind::pareto;
    spec.n = 2000;
    spec.seed = 12;
    spec.alpha = 0.5;
    bench_case("dense cached pareto batch", make_row_source(spec), 32, 10);
  }
  {
    // force the streamed path by denying the cache
    RowSource src(1500, 0.5, 13, /*cache_budget_bytes=*/0);
    bench_case("dense streamed pareto", src, 8, 4);
  }
  return 0;
}
