#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "kcekqs/analysis.hpp"
#include "kcekqs/harness.hpp"
#include "oracles.hpp"

using namespace kcekqs;
using namespace kcekqs::protocols;
using analysis::BoundKind;
using harness::ExperimentSpec;
using harness::Metric;
using strategies::AliceKind;
using strategies::BobKind;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentSpec spec(ProtocolId id, std::size_t d, std::size_t N, std::size_t q, AliceKind alice,
                    BobKind bob = BobKind::Honest, Metric metric = Metric::Acceptance, std::uint64_t n = 10000) {
  ExperimentSpec s;
  s.protocol = id;
  s.params.d = d;
  s.params.N = N;
  s.params.q = q;
  s.alice.kind = alice;
  s.bob.kind = bob;
  s.metric = metric;
  s.n_trials = n;
  s.master_seed = 99;
  return s;
}

void check_near(const stats::TrialStats& s, double target, double z = 4.0) {
  INFO("p_hat=" << s.estimate() << " se=" << s.std_err() << " target=" << target);
  CHECK(std::abs(s.estimate() - target) <= z * s.std_err() + 1e-12);
}

}  // namespace

TEST_CASE("protocol names round-trip") {
  for (auto p : {ProtocolId::Classical1, ProtocolId::Classical2, ProtocolId::QuantumA2B, ProtocolId::QuantumB2A,
                 ProtocolId::QuantumB2AAbort}) {
    CHECK(parse_protocol(to_string(p)) == p);
  }
  CHECK_THROWS_AS(parse_protocol("bb84"), ConfigError);
}

TEST_CASE("parameter validation") {
  ProtocolParams p;
  p.d = 1;
  CHECK_THROWS_AS(p.validate(ProtocolId::QuantumA2B), InvalidDimension);
  p.d = 3;
  p.q = 4;
  CHECK_THROWS_AS(p.validate(ProtocolId::Classical2), ConfigError);
  p.N = 2;
  CHECK_THROWS_AS(p.validate(ProtocolId::QuantumB2A), ConfigError);
  p.q = 0;
  p.N = 12;
  CHECK_THROWS_AS(p.validate(ProtocolId::QuantumA2B), ResourceError);
  CHECK(p.effective_q(ProtocolId::QuantumB2A) == 5);  // ceil(13 / 3)
  ProtocolParams a;
  a.d = 2;
  a.N = 100;
  a.abort_epsilon = 0.1;
  CHECK(a.effective_q(ProtocolId::QuantumB2AAbort) == 60);
  a.abort_epsilon = 0.0;
  CHECK_THROWS_AS(a.validate(ProtocolId::QuantumB2AAbort), ConfigError);
}

TEST_CASE("classical protocol 1") {
  SECTION("honest Alice with eps_C = 0 is always accepted") {
    for (std::size_t d : {2u, 3u, 7u}) {
      const auto s = harness::run_trials(spec(ProtocolId::Classical1, d, 0, 0, AliceKind::HonestKnowing,
                                              BobKind::Honest, Metric::Acceptance, 2000));
      CHECK(s.estimate() == 1.0);
    }
  }
  SECTION("ignorant Alice succeeds with 1/d") {
    check_near(harness::run_trials(spec(ProtocolId::Classical1, 4, 0, 0, AliceKind::Ignorant)), 0.25);
  }
  SECTION("designed slack eps_C = 0.2") {
    auto sp = spec(ProtocolId::Classical1, 3, 0, 0, AliceKind::HonestKnowing);
    sp.params.eps_c_target = 0.2;
    const auto s = harness::run_trials(sp);
    CHECK(s.estimate() >= 0.8 - 3 * s.std_err());
    check_near(s, 0.8);
  }
  SECTION("subspace knowledge k = 2 predicts with probability 1/2") {
    auto sp = spec(ProtocolId::Classical1, 4, 0, 0, AliceKind::SubspaceKnowledge);
    sp.alice.subspace_dim = 2;
    check_near(harness::run_trials(sp), 0.5);
  }
}

TEST_CASE("classical protocol 2") {
  check_near(harness::run_trials(spec(ProtocolId::Classical2, 6, 0, 3, AliceKind::Ignorant)), 0.5);
  const auto full = harness::run_trials(spec(ProtocolId::Classical2, 4, 0, 4, AliceKind::Ignorant, BobKind::Honest,
                                             Metric::Acceptance, 1000));
  CHECK(full.estimate() == 1.0);
  const auto q1 = harness::run_trials(spec(ProtocolId::Classical2, 5, 0, 1, AliceKind::HonestKnowing,
                                           BobKind::Honest, Metric::Acceptance, 1000));
  CHECK(q1.estimate() == 1.0);
}

TEST_CASE("A-to-B protocol") {
  const auto honest = harness::run_trials(spec(ProtocolId::QuantumA2B, 3, 2, 0, AliceKind::HonestKnowing));
  CHECK(honest.estimate() == 1.0);
  CHECK(honest.std_err() == 0.0);
  check_near(harness::run_trials(spec(ProtocolId::QuantumA2B, 2, 1, 0, AliceKind::Ignorant)), 0.75);
  // brute-force w ratio, computed independently
  const double two_thirds = double(oracle::multisets(3, 2)) / (double(oracle::multisets(2, 2)) * 2.0);
  CHECK_THAT(two_thirds, WithinAbs(2.0 / 3.0, 1e-15));
  check_near(harness::run_trials(spec(ProtocolId::QuantumA2B, 2, 2, 0, AliceKind::Ignorant)), two_thirds);
}

TEST_CASE("B-to-A protocol") {
  SECTION("N = 0: only Q_B is sent and it always passes") {
    const auto s = harness::run_trials(spec(ProtocolId::QuantumB2A, 3, 0, 1, AliceKind::HonestKnowing,
                                            BobKind::Honest, Metric::Acceptance, 2000));
    CHECK(s.estimate() == 1.0);
  }
  SECTION("random distinct commitments succeed with q/(N+1)") {
    check_near(harness::run_trials(spec(ProtocolId::QuantumB2A, 2, 9, 2, AliceKind::RandomDistinctCommit)), 0.2);
    check_near(harness::run_trials(spec(ProtocolId::QuantumB2A, 3, 9, 2, AliceKind::Ignorant)), 0.2);
  }
  SECTION("honest rejection matches the exact sum") {
    const auto s = harness::run_trials(
        spec(ProtocolId::QuantumB2A, 2, 4, 2, AliceKind::HonestKnowing, BobKind::Honest, Metric::Rejection));
    check_near(s, oracle::eps_c_b2a(4, 2, 2));
  }
  SECTION("steal strategy: Alice's guess is a single-copy estimate") {
    check_near(harness::run_trials(spec(ProtocolId::QuantumB2A, 3, 5, 2, AliceKind::StealState, BobKind::Honest,
                                        Metric::AliceFsq)),
               0.5);
    check_near(harness::run_trials(spec(ProtocolId::QuantumB2A, 3, 5, 2, AliceKind::StealState)), 2.0 / 6.0);
  }
  SECTION("cheat_epsilon lifts a dishonest Alice") {
    auto sp = spec(ProtocolId::QuantumB2A, 2, 9, 2, AliceKind::RandomDistinctCommit);
    sp.params.commitment.cheat_epsilon = 0.25;
    check_near(harness::run_trials(sp), 0.2 + 0.8 * 0.25);
    auto honest = spec(ProtocolId::QuantumB2A, 2, 0, 1, AliceKind::HonestKnowing);
    honest.params.commitment.cheat_epsilon = 0.25;
    CHECK(harness::run_trials(honest).estimate() == 1.0);
  }
  SECTION("skip Bob does not take part") {
    const auto s = harness::run_trials(
        spec(ProtocolId::QuantumB2A, 4, 3, 0, AliceKind::HonestKnowing, BobKind::SkipProtocolMeasure, Metric::MeanFsq));
    check_near(s, 0.4);
  }
}

TEST_CASE("B-to-A honest Bob records no information events") {
  std::mt19937_64 rng(5);
  ProtocolParams p;
  p.d = 3;
  p.N = 4;
  for (int i = 0; i < 50; ++i) {
    const auto o = run_protocol(ProtocolId::QuantumB2A, p, {AliceKind::HonestKnowing}, {BobKind::Honest}, rng);
    CHECK_FALSE(o.bob_guess);
    for (const auto& e : o.transcript) {
      CHECK_FALSE((spacetime::is_bob(e.site.agent) && e.kind == spacetime::EventKind::Measure));
    }
  }
}

TEST_CASE("abort variant") {
  SECTION("q = N + 1 never aborts") {
    const auto s = harness::run_trials(spec(ProtocolId::QuantumB2AAbort, 2, 6, 7, AliceKind::HonestKnowing,
                                            BobKind::Honest, Metric::AbortRate, 3000));
    CHECK(s.estimate() == 0.0);
  }
  SECTION("always-abort Alice") {
    auto sp = spec(ProtocolId::QuantumB2AAbort, 2, 6, 2, AliceKind::Ignorant, BobKind::Honest, Metric::AbortRate, 500);
    sp.alice.always_abort = true;
    CHECK(harness::run_trials(sp).estimate() == 1.0);
    std::mt19937_64 rng(1);
    const auto o = run_protocol(sp.protocol, sp.params, sp.alice, sp.bob, rng);
    CHECK(o.verdict == Verdict::Abort);
    CHECK(std::none_of(o.transcript.begin(), o.transcript.end(), [](const auto& e) {
      return e.site.agent == spacetime::AgentId::B1 && e.kind == spacetime::EventKind::Announce;
    }));
    sp.protocol = ProtocolId::QuantumB2A;
    CHECK_THROWS_AS(harness::run_trials(sp), ConfigError);
  }
  SECTION("abort frequency matches the binomial tail") {
    const auto s = harness::run_trials(spec(ProtocolId::QuantumB2AAbort, 2, 20, 12, AliceKind::HonestKnowing,
                                            BobKind::Honest, Metric::AbortRate));
    check_near(s, analysis::p_abort_b2a_exact(20, 2, 12));
  }
  SECTION("abort is only possible in the abort variant") {
    for (auto id : {ProtocolId::Classical1, ProtocolId::QuantumA2B, ProtocolId::QuantumB2A}) {
      const auto s = harness::run_trials(spec(id, 2, 3, 0, AliceKind::Ignorant, BobKind::Honest, Metric::AbortRate, 500));
      CHECK(s.estimate() == 0.0);
    }
  }
}

TEST_CASE("honest transcripts are causal for every protocol") {
  std::mt19937_64 rng(77);
  for (auto id : {ProtocolId::Classical1, ProtocolId::Classical2, ProtocolId::QuantumA2B, ProtocolId::QuantumB2A,
                  ProtocolId::QuantumB2AAbort}) {
    ProtocolParams p;
    p.d = 3;
    p.N = 4;
    p.q = id == ProtocolId::Classical2 ? 2 : 0;
    for (int i = 0; i < 20; ++i) {
      const auto o = run_protocol(id, p, {AliceKind::HonestKnowing}, {BobKind::Honest}, rng);
      const auto report = spacetime::validate_transcript(o.transcript);
      INFO(to_string(id) << ": " << (report.ok() ? "" : report.violations.front().detail));
      CHECK(report.ok());
    }
  }
}

TEST_CASE("eps_c_b2a_exact") {
  CHECK(analysis::eps_c_b2a_exact(5, 2, 6) == 0.0);
  CHECK_THAT(analysis::eps_c_b2a_exact(1, 2, 1), WithinAbs(0.25, 1e-15));
  CHECK_THAT(analysis::eps_c_b2a_exact(2, 2, 1), WithinAbs(5.0 / 12.0, 1e-15));
  for (std::size_t N : {0u, 3u, 9u, 16u, 40u}) {
    for (std::size_t d : {2u, 3u, 5u}) {
      for (std::size_t q = 1; q <= N + 1; q += 1 + N / 5) {
        CHECK_THAT(analysis::eps_c_b2a_exact(N, d, q), WithinAbs(oracle::eps_c_b2a(N, d, q), 1e-12));
      }
    }
  }
  CHECK_THROWS_AS(analysis::eps_c_b2a_exact(3, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(analysis::eps_c_b2a_exact(3, 2, 5), InvalidArgument);
  // decreasing toward 0 with q = ceil((N+1)/2)
  const auto at = [](std::size_t N) { return analysis::eps_c_b2a_exact(N, 2, (N + 2) / 2); };
  CHECK(at(16) <= at(4));
  CHECK(at(64) <= at(16));
  CHECK(at(64) < at(16));
}

TEST_CASE("hoeffding bound") {
  CHECK(analysis::hoeffding_bound(0, 0.3) == 1.0);
  CHECK_THAT(analysis::hoeffding_bound(100, 0.1), WithinRel(std::exp(-2.0), 1e-12));
  CHECK_THAT(analysis::hoeffding_bound(1000, 0.05), WithinRel(std::exp(-5.0), 1e-12));
  CHECK_THROWS_AS(analysis::hoeffding_bound(10, 0.0), InvalidArgument);
}

TEST_CASE("closed forms") {
  ProtocolParams p;
  p.d = 2;
  p.N = 1;
  const auto a2b = analysis::closed_forms(ProtocolId::QuantumA2B, p);
  CHECK_THAT(a2b.eps_S->value, WithinAbs(0.75, 1e-15));
  CHECK_THAT(a2b.eps_K->value, WithinAbs(0.75, 1e-15));
  CHECK_THAT(a2b.eps_M->value, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(a2b.eps_C->value == 0.0);

  p.d = 9;
  const auto b2a = analysis::closed_forms(ProtocolId::QuantumB2A, p);
  CHECK_THAT(b2a.eps_K->value, WithinAbs(0.4, 1e-15));
  CHECK(b2a.eps_K->kind == BoundKind::Upper);
  CHECK_THAT(b2a.eps_M->value, WithinAbs(0.2, 1e-15));

  p.d = 5;
  const auto c1 = analysis::closed_forms(ProtocolId::Classical1, p);
  CHECK_THAT(c1.eps_S->value, WithinAbs(0.2, 1e-15));
  CHECK(c1.eps_K->value == 1.0);
  CHECK(c1.eps_K->kind == BoundKind::Lower);

  p.q = 2;
  p.eps_c_target = 0.1;
  const auto c2 = analysis::closed_forms(ProtocolId::Classical2, p);
  CHECK_THAT(c2.eps_S->value, WithinAbs(0.4, 1e-15));
  CHECK_THAT(c2.eps_K->value, WithinAbs(0.81 / 2.0, 1e-15));

  // eps_K > 1/(d eps_S) over the grid
  for (std::size_t N = 0; N <= 20; ++N) {
    for (std::size_t d = 2; d <= 20; ++d) {
      ProtocolParams g;
      g.d = d;
      g.N = N;
      const auto f = analysis::closed_forms(ProtocolId::QuantumA2B, g);
      CHECK(f.eps_K->value > 1.0 / (d * f.eps_S->value) - 1e-15);
      CHECK_THAT(analysis::a2b_soundness_wratio(N, d), WithinAbs(f.eps_S->value, 1e-12));
    }
  }
}

TEST_CASE("trade-off audit") {
  using stats::Estimate;
  const auto tight = analysis::tradeoff_audit(Estimate{0.25, 0.0}, Estimate{0.0, 0.0}, 4);
  CHECK(tight.pass);
  CHECK_THAT(tight.slack, WithinAbs(0.0, 1e-15));
  const auto loose = analysis::tradeoff_audit(Estimate{0.75, 0.0}, Estimate{0.0, 0.0}, 2);
  CHECK(loose.pass);
  CHECK(loose.slack > 0.2);
  CHECK_FALSE(analysis::tradeoff_audit(Estimate{1.0 / 6.0, 0.0}, Estimate{0.0, 0.0}, 3).pass);
  CHECK_THROWS_AS(analysis::tradeoff_audit(Estimate{0.5, 0.0}, Estimate{1.0, 0.0}, 2), InvalidArgument);

  // noise on either estimate counts in favour of the bound
  const auto noisy = analysis::tradeoff_audit(Estimate{0.199, 0.001}, Estimate{0.601, 0.005}, 2);
  CHECK(noisy.ratio < 0.5);
  CHECK(noisy.pass);
  CHECK_THAT(noisy.slack, WithinAbs(0.202 / (1.0 - 0.616) - 0.5, 1e-12));
  CHECK_FALSE(analysis::tradeoff_audit(Estimate{0.15, 0.001}, Estimate{0.6, 0.005}, 2).pass);
  CHECK(analysis::tradeoff_audit(Estimate{0.0, 0.0}, Estimate{0.9, 0.05}, 2).pass);
}
