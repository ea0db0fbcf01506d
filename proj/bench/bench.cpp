// Serial reference vs OpenMP kernels. Usage: qmghost-bench [workers] [pairs]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "qmghost/coincidence.hpp"
#include "qmghost/verify.hpp"

using namespace qmg;

template <class F>
double seconds(F&& f) {
  auto start = std::chrono::steady_clock::now();
  f();
  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  return dt.count();
}

static void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-12s serial %8.3f s   parallel %8.3f s   speedup %5.2f   identical %s\n", name, serial, parallel,
              serial / parallel, same ? "yes" : "NO");
}

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const std::uint64_t pairs = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1000000;
  std::printf("workers %d (hardware %d), pairs %llu\n", workers, omp_get_num_procs(),
              static_cast<unsigned long long>(pairs));

  Scene s;
  s.pump = PumpModel::plane(1.0);
  s.spdc.sigma_k = 2.5e-4;
  s.spdc.spot_radius = 4e-3;
  s.signal_arm = Arm(ArmId::Signal, {FreeSpace{0.4}, ThinLens{0.4, 0.0254}, FreeSpace{0.6},
                                     MaskElement{Mask::double_slit(1e-3, 2e-4, 4e-3)}, BucketDetector{0.05}});
  s.idler_arm = Arm(ArmId::Idler, {FreeSpace{0.8}, ScanningDetector{40, 40, 1e-4}});
  s.n_pairs = pairs;
  s.seed = 1;

  {
    std::vector<PhotonPair> a(pairs), b(pairs);
    const double ts = seconds([&] { sample_pairs_serial(s.pump, s.spdc, 0, a); });
    const double tp = seconds([&] { sample_pairs(s.pump, s.spdc, 0, b, workers); });
    report("sampling", ts, tp, pairs_csv(a) == pairs_csv(b));
  }
  {
    CoincidenceImage a, b;
    const double ts = seconds([&] { a = run_simulation_serial(s); });
    const double tp = seconds([&] { b = run_simulation(s, workers); });
    report("simulation", ts, tp, a == b);
  }
  {
    std::vector<SqmParams> cases;
    for (std::uint64_t i = 0; i < 1000; ++i) cases.push_back(random_sqm_case(7, i));
    const std::vector<double> h_rel{1e-5, 1e-4, 1e-3, 1e-2};
    std::vector<SweepRow> a, b;
    const double ts = seconds([&] { a = run_law_sweep_serial(cases, h_rel); });
    const double tp = seconds([&] { b = run_law_sweep(cases, h_rel, workers); });
    report("law sweep", ts, tp, residual_sweep_csv(a, h_rel, "-", 7) == residual_sweep_csv(b, h_rel, "-", 7));
  }
}
