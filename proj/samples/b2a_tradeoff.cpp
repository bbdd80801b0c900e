// Completeness against soundness in the B-to-A protocol as the commitment
// list length q varies. Prints the audited ratio eps_S / (1 - eps_C).
//
//   b2a_tradeoff [N] [d] [trials]

#include <cstdio>
#include <cstdlib>

#include "kcekqs/analysis.hpp"
#include "kcekqs/harness.hpp"

int main(int argc, char** argv) {
  using namespace kcekqs;
  const std::size_t N = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 9;
  const std::size_t d = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 2;
  const std::uint64_t trials = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 10000;

  harness::ExperimentSpec spec;
  spec.protocol = protocols::ProtocolId::QuantumB2A;
  spec.params.d = d;
  spec.params.N = N;
  spec.n_trials = trials;

  std::printf("%3s %9s %9s %9s %9s %6s\n", "q", "eps_C", "exact", "eps_S", "ratio", "audit");
  for (std::size_t q = 1; q <= N + 1; ++q) {
    spec.params.q = q;
    spec.alice.kind = strategies::AliceKind::HonestKnowing;
    spec.metric = harness::Metric::Rejection;
    const auto eps_c = harness::run_trials(spec);
    spec.alice.kind = strategies::AliceKind::RandomDistinctCommit;
    spec.metric = harness::Metric::Acceptance;
    const auto eps_s = harness::run_trials(spec);
    if (eps_c.estimate() >= 1.0) continue;
    const auto audit = analysis::tradeoff_audit(eps_s, eps_c, d);
    std::printf("%3zu %9.5f %9.5f %9.5f %9.5f %6s\n", q, eps_c.estimate(), analysis::eps_c_b2a_exact(N, d, q),
                eps_s.estimate(), audit.ratio, audit.pass ? "pass" : "FAIL");
  }
}
