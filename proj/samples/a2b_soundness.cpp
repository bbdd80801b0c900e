// Cheating acceptance in the A-to-B protocol against the closed form,
// for a few copy counts N at fixed d.
//
//   a2b_soundness [d] [trials]

#include <cstdio>
#include <cstdlib>

#include "kcekqs/analysis.hpp"
#include "kcekqs/harness.hpp"

int main(int argc, char** argv) {
  using namespace kcekqs;
  const std::size_t d = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2;
  const std::uint64_t trials = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20000;

  harness::ExperimentSpec spec;
  spec.protocol = protocols::ProtocolId::QuantumA2B;
  spec.params.d = d;
  spec.alice.kind = strategies::AliceKind::Ignorant;
  spec.n_trials = trials;

  std::printf("%4s %10s %10s %10s\n", "N", "p_hat", "std_err", "eps_S");
  for (std::size_t N = 1; N <= 6; ++N) {
    spec.params.N = N;
    const auto stats = harness::run_trials(spec);
    std::printf("%4zu %10.5f %10.5f %10.5f\n", N, stats.estimate(), stats.std_err(), analysis::a2b_soundness(N, d));
  }
}
