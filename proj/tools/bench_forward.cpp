#include <chrono>
#include <cstdio>

#include "irsim/fixture.hpp"
#include "irsim/harness.hpp"

// Times the forward kernels on the generated fixture: OpenMP-parallel path vs
// the serial reference, same seeds, identical outputs.

using namespace irsim;

namespace {

double run_once(const FixtureBundle& fb, ExecutionPolicy policy, int samples, double* accuracy) {
  ExperimentInputs in;
  in.model = fb.proposed;
  in.data = fb.test;
  in.config = fb.config;

  ExperimentSpec spec;
  spec.seeds = {1};
  spec.policy = policy;

  Dataset subset = fb.test;
  if (samples < subset.samples()) {
    subset.labels.resize(samples);
    subset.bits.resize(static_cast<size_t>(samples) * subset.sample_size());
  }
  in.data = subset;

  auto t0 = std::chrono::steady_clock::now();
  auto rep = cmd_simulate(in, spec);
  auto t1 = std::chrono::steady_clock::now();
  *accuracy = rep.accuracy_mean;
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
  try {
    auto fb = synthesize_classification_fixture();
    const int samples = 96;
    uint64_t pairs_per_sample = 0;
    // 15 channels at 12x12, 10x10 and 8x8 output maps
    pairs_per_sample = 15ull * (144 + 100 + 64);
    const double total_pairs = static_cast<double>(pairs_per_sample) * samples;

    double acc_serial = 0, acc_parallel = 0;
    double warm = run_once(fb, ExecutionPolicy::Parallel, 8, &acc_parallel);
    (void)warm;
    double ts = run_once(fb, ExecutionPolicy::Serial, samples, &acc_serial);
    double tp = run_once(fb, ExecutionPolicy::Parallel, samples, &acc_parallel);

    std::printf("column-pair evaluations: %.0f\n", total_pairs);
    std::printf("serial reference : %8.3f s  (%9.0f pairs/s)  accuracy %.2f%%\n", ts,
                total_pairs / ts, acc_serial);
    std::printf("parallel kernels : %8.3f s  (%9.0f pairs/s)  accuracy %.2f%%\n", tp,
                total_pairs / tp, acc_parallel);
    std::printf("speedup          : %.2fx\n", ts / tp);
    if (acc_serial != acc_parallel) {
      std::printf("MISMATCH: serial and parallel runs disagree\n");
      return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
