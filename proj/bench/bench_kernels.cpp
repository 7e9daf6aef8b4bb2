// Timing comparison of the serial reference kernels against the OpenMP
// variants. Results must agree bit for bit; the table reports both times
// and the speedup.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef AGGR_HAVE_OPENMP
#include <omp.h>
#endif

#include "aggr/mixability.hpp"

using namespace aggr;

namespace {

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename F>
double time_best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool equal) {
  std::printf("%-34s %10.4f s %10.4f s %7.2fx   %s\n", name, serial, parallel,
              serial / parallel, equal ? "results equal" : "RESULTS DIFFER");
}

}  // namespace

int main() {
#ifdef AGGR_HAVE_OPENMP
  std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; both columns run the serial path\n\n");
#endif
  std::printf("%-34s %12s %12s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const LossSpec brier = LossSpec::brier(3);
    const SimplexGrid grid{3, 501, 1e-4};
    double vs = 0, vp = 0;
    const double ts = time_best_of(3, [&] { vs = mixability_constant(brier, grid, Execution::Serial); });
    const double tp = time_best_of(3, [&] { vp = mixability_constant(brier, grid, Execution::Parallel); });
    report("mixability constant (n=3)", ts, tp, vs == vp);
  }

  {
    const LossSpec brier = LossSpec::brier(2);
    const Entropy phi = Entropy::mixture(3, 0.5);
    const SimplexGrid lg{2, 1001, 1e-4};
    const SimplexGrid eg{3, 501, 1e-4};
    double vs = 0, vp = 0;
    const double ts = time_best_of(
        3, [&] { vs = generalized_mixability_constant(brier, phi, lg, eg, Execution::Serial); });
    const double tp = time_best_of(
        3, [&] { vp = generalized_mixability_constant(brier, phi, lg, eg, Execution::Parallel); });
    report("generalized constant (k=3)", ts, tp, vs == vp);
  }

  {
    const Entropy phi = Entropy::mixture(3, 0.5);
    const BruteForceOracle oracle(phi, 1501);
    std::mt19937_64 rng(1ULL);
    std::vector<Vec> ds;
    std::vector<Distribution> qs;
    for (int i = 0; i < 16; ++i) {
      Vec w(3), d(3);
      for (int j = 0; j < 3; ++j) {
        w(j) = 0.1 + unit(rng);
        d(j) = 5.0 * unit(rng);
      }
      ds.push_back(d);
      qs.push_back(Distribution(w / w.sum()));
    }
    double vs = 0, vp = 0;
    const double ts = time_best_of(3, [&] {
      vs = 0;
      for (size_t i = 0; i < ds.size(); ++i)
        vs += oracle.value(1.0, ds[i], qs[i], Execution::Serial);
    });
    const double tp = time_best_of(3, [&] {
      vp = 0;
      for (size_t i = 0; i < ds.size(); ++i)
        vp += oracle.value(1.0, ds[i], qs[i], Execution::Parallel);
    });
    report("grid oracle, 16 queries (k=3)", ts, tp, vs == vp);
  }

  {
    const Entropy phi = Entropy::mixture(3, 0.5);
    const SimplexGrid grid{3, 301, 1e-3};
    RegretBound rs{0, Distribution::uniform(3)}, rp{0, Distribution::uniform(3)};
    const double ts =
        time_best_of(3, [&] { rs = regret_bound(phi, 0.5, 3, grid, Execution::Serial); });
    const double tp =
        time_best_of(3, [&] { rp = regret_bound(phi, 0.5, 3, grid, Execution::Parallel); });
    report("regret bound scan (k=3)", ts, tp,
           rs.bound == rp.bound && rs.prior.weights() == rp.prior.weights());
  }

  return 0;
}
