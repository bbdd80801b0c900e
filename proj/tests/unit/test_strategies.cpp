#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "kcekqs/strategies.hpp"

using namespace kcekqs;
using namespace kcekqs::strategies;
using Catch::Matchers::WithinAbs;

TEST_CASE("strategy names round-trip") {
  for (auto k : {AliceKind::HonestKnowing, AliceKind::Ignorant, AliceKind::SubspaceKnowledge, AliceKind::StealState,
                 AliceKind::RandomDistinctCommit}) {
    CHECK(parse_alice_kind(to_string(k)) == k);
  }
  for (auto k : {BobKind::Honest, BobKind::SubstituteState, BobKind::MeasureRetainGuess,
                 BobKind::SkipProtocolMeasure}) {
    CHECK(parse_bob_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_alice_kind("oracle"), ConfigError);
  CHECK_THROWS_AS(parse_bob_kind("oracle"), ConfigError);
}

TEST_CASE("equip_alice hands out exactly the allowed knowledge") {
  std::mt19937_64 rng(7);
  const auto eta = qudit::haar_random(5, rng);
  const auto honest = equip_alice({AliceKind::HonestKnowing}, eta, rng);
  REQUIRE(honest.knowledge);
  CHECK_THAT(qudit::fidelity_sq(*honest.knowledge, eta), WithinAbs(1.0, 1e-15));

  const auto ignorant = equip_alice({AliceKind::Ignorant}, eta, rng);
  CHECK_FALSE(ignorant.knowledge);
  CHECK(ignorant.subspace.empty());

  const auto sub = equip_alice({AliceKind::SubspaceKnowledge, 3}, eta, rng);
  REQUIRE(sub.subspace.size() == 3);
  CHECK_FALSE(sub.knowledge);
  double weight = 0.0;
  for (const auto& s : sub.subspace) weight += qudit::fidelity_sq(s, eta);
  CHECK_THAT(weight, WithinAbs(1.0, 1e-12));
  CHECK_THROWS_AS(equip_alice({AliceKind::SubspaceKnowledge, 6}, eta, rng), ConfigError);
  CHECK_THROWS_AS(equip_alice({AliceKind::SubspaceKnowledge, 0}, eta, rng), ConfigError);
}

TEST_CASE("aligned_measurement puts weight exactly 1 - eps on the committed set") {
  std::mt19937_64 rng(9);
  for (auto [d, q, eps] : std::vector<std::tuple<std::size_t, std::size_t, double>>{
           {2, 1, 0.0}, {2, 1, 0.2}, {5, 2, 0.1}, {6, 3, 0.0}, {4, 4, 0.0}}) {
    const auto eta = qudit::haar_random(d, rng);
    const auto m = aligned_measurement(eta, q, eps, rng);
    REQUIRE(m.basis.size() == d);
    REQUIRE(m.predicted.size() == q);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        CHECK_THAT(std::abs(m.basis[i].amplitudes().dot(m.basis[j].amplitudes())), WithinAbs(i == j, 1e-12));
      }
    }
    double weight = 0.0;
    for (auto i : m.predicted) weight += qudit::fidelity_sq(m.basis[i], eta);
    CHECK_THAT(weight, WithinAbs(1.0 - eps, 1e-12));
  }
  const auto eta = qudit::haar_random(3, rng);
  CHECK_THROWS_AS(aligned_measurement(eta, 3, 0.1, rng), ConfigError);
  CHECK_THROWS_AS(aligned_measurement(eta, 0, 0.0, rng), ConfigError);
}

TEST_CASE("strategy/protocol mismatches are configuration errors") {
  std::mt19937_64 rng(13);
  const auto eta = qudit::haar_random(3, rng);
  const auto steal = equip_alice({AliceKind::StealState}, eta, rng);
  CHECK_THROWS_AS(alice_act(steal, ClassicalContext{3, 1, 0.0}, rng), ConfigError);
  CHECK_THROWS_AS(alice_act(steal, CopyContext{3, 2}, rng), ConfigError);
  const auto rd = equip_alice({AliceKind::RandomDistinctCommit}, eta, rng);
  CHECK_THROWS_AS(alice_act(rd, CopyContext{3, 2}, rng), ConfigError);
  CHECK_THROWS_AS(bob_act(BobStrategy{BobKind::SkipProtocolMeasure}, eta, 2, rng), ConfigError);
  CHECK_THROWS_AS(bob_act(BobStrategy{BobKind::SkipProtocolMeasure}, eta, rng), ConfigError);
}

TEST_CASE("honest B-to-A selection pads with dummies or subsamples") {
  std::mt19937_64 rng(17);
  const std::size_t d = 2, N = 6;
  const auto eta = qudit::haar_random(d, rng);
  const auto alice = equip_alice({AliceKind::HonestKnowing}, eta, rng);
  std::vector<qudit::PureState> systems(N + 1, eta);  // every system passes

  const auto padded = alice_act(alice, SelectionContext{d, N, N + 1, false}, systems, rng);
  CHECK(padded.positives == N + 1);
  CHECK(padded.values.size() == N + 1);
  CHECK(std::count(padded.values.begin(), padded.values.end(), 0u) == 0);

  const auto sub = alice_act(alice, SelectionContext{d, N, 3, false}, systems, rng);
  CHECK(sub.values.size() == 3);
  CHECK(std::set<std::size_t>(sub.values.begin(), sub.values.end()).size() == 3);

  const auto aborted = alice_act(alice, SelectionContext{d, N, 3, true}, systems, rng);
  CHECK(aborted.abort_before_commit);

  // only one system passes: one real index and q - 1 dummies
  std::vector<qudit::PureState> orth;
  std::vector<qudit::Vector> fam{eta.amplitudes()};
  qudit::extend_orthonormal(fam, 1, d, rng);
  for (std::size_t i = 0; i < N + 1; ++i) orth.push_back(qudit::PureState::normalized(fam[1]));
  orth[4] = eta;
  const auto one = alice_act(alice, SelectionContext{d, N, 3, false}, orth, rng);
  CHECK(one.positives == 1);
  CHECK(std::count(one.values.begin(), one.values.end(), 0u) == 2);
  CHECK(std::count(one.values.begin(), one.values.end(), 5u) == 1);
}

TEST_CASE("ignorant B-to-A commits to q distinct labels") {
  std::mt19937_64 rng(19);
  const auto eta = qudit::haar_random(2, rng);
  const auto alice = equip_alice({AliceKind::Ignorant}, eta, rng);
  std::vector<qudit::PureState> systems(10, eta);
  for (int i = 0; i < 50; ++i) {
    const auto plan = alice_act(alice, SelectionContext{2, 9, 4, false}, systems, rng);
    CHECK_FALSE(plan.measured);
    const std::set<std::size_t> distinct(plan.values.begin(), plan.values.end());
    CHECK(distinct.size() == 4);
    CHECK(*distinct.begin() >= 1);
    CHECK(*distinct.rbegin() <= 10);
  }
  AliceSpec abort_spec{AliceKind::Ignorant};
  abort_spec.always_abort = true;
  const auto quitter = equip_alice(abort_spec, eta, rng);
  CHECK(alice_act(quitter, SelectionContext{2, 9, 4, true}, systems, rng).abort_before_commit);
  CHECK_THROWS_AS(alice_act(quitter, SelectionContext{2, 9, 4, false}, systems, rng), ConfigError);
}

TEST_CASE("Bob's B-to-A preparation") {
  std::mt19937_64 rng(23);
  const auto eta = qudit::haar_random(3, rng);
  const auto honest = bob_act(BobStrategy{BobKind::Honest}, eta, 5, rng);
  REQUIRE(honest.systems.size() == 6);
  CHECK_THAT(qudit::fidelity_sq(honest.systems[honest.x - 1], eta), WithinAbs(1.0, 1e-12));
  CHECK_FALSE(honest.retains_eta);
  CHECK_FALSE(honest.collapsed);

  const auto sub = bob_act(BobStrategy{BobKind::SubstituteState}, eta, 5, rng);
  CHECK(sub.retains_eta);
  REQUIRE(sub.probe);
  CHECK_THAT(qudit::fidelity_sq(sub.systems[sub.x - 1], *sub.probe), WithinAbs(1.0, 1e-12));

  const auto mr = bob_act(BobStrategy{BobKind::MeasureRetainGuess}, eta, 5, rng);
  REQUIRE(mr.collapsed);
  CHECK_THAT(qudit::fidelity_sq(mr.systems[mr.x - 1], qudit::PureState::basis(3, *mr.collapsed)),
             WithinAbs(1.0, 1e-12));
}
