#pragma once

// Honest and adversarial behaviours for Alice and Bob.
//
// Each protocol family has its own context type; alice_act / bob_act are
// overloaded on it. A strategy that has no meaning for a family (say,
// StealState in a classical protocol) raises ConfigError.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcekqs/errors.hpp"
#include "kcekqs/estimation.hpp"
#include "kcekqs/qudit.hpp"

namespace kcekqs::strategies {

using estimation::EstimationResult;
using qudit::PureState;
using qudit::Vector;

enum class AliceKind { HonestKnowing, Ignorant, SubspaceKnowledge, StealState, RandomDistinctCommit };
enum class BobKind { Honest, SubstituteState, MeasureRetainGuess, SkipProtocolMeasure };

inline std::string_view to_string(AliceKind k) {
  switch (k) {
    case AliceKind::HonestKnowing: return "honest";
    case AliceKind::Ignorant: return "ignorant";
    case AliceKind::SubspaceKnowledge: return "subspace";
    case AliceKind::StealState: return "steal";
    case AliceKind::RandomDistinctCommit: return "random-distinct";
  }
  return "?";
}

inline std::string_view to_string(BobKind k) {
  switch (k) {
    case BobKind::Honest: return "honest";
    case BobKind::SubstituteState: return "substitute";
    case BobKind::MeasureRetainGuess: return "measure-retain";
    case BobKind::SkipProtocolMeasure: return "skip";
  }
  return "?";
}

inline AliceKind parse_alice_kind(std::string_view name) {
  for (auto k : {AliceKind::HonestKnowing, AliceKind::Ignorant, AliceKind::SubspaceKnowledge,
                 AliceKind::StealState, AliceKind::RandomDistinctCommit}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown Alice strategy '" + std::string(name) + "'");
}

inline BobKind parse_bob_kind(std::string_view name) {
  for (auto k : {BobKind::Honest, BobKind::SubstituteState, BobKind::MeasureRetainGuess,
                 BobKind::SkipProtocolMeasure}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown Bob strategy '" + std::string(name) + "'");
}

// Configuration-time choice; bound to the run's true state by equip_alice.
struct AliceSpec {
  AliceKind kind = AliceKind::HonestKnowing;
  std::size_t subspace_dim = 2;
  bool always_abort = false;  // only meaningful with an abort option
};

struct AliceStrategy {
  AliceKind kind = AliceKind::Ignorant;
  std::optional<PureState> knowledge;  // exactly eta for HonestKnowing
  std::vector<PureState> subspace;     // orthonormal basis of a span containing eta
  bool always_abort = false;
};

struct BobStrategy {
  BobKind kind = BobKind::Honest;
};

inline bool is_dishonest(AliceKind k) {
  return k == AliceKind::Ignorant || k == AliceKind::StealState || k == AliceKind::RandomDistinctCommit;
}

/// Gives Alice exactly the knowledge her kind allows about eta.
template <class Rng>
AliceStrategy equip_alice(const AliceSpec& spec, const PureState& eta, Rng& rng) {
  AliceStrategy s;
  s.kind = spec.kind;
  s.always_abort = spec.always_abort;
  switch (spec.kind) {
    case AliceKind::HonestKnowing:
      s.knowledge = eta;
      break;
    case AliceKind::SubspaceKnowledge: {
      if (spec.subspace_dim == 0 || spec.subspace_dim > eta.dim()) {
        throw ConfigError("subspace dimension must lie in [1, d]");
      }
      // A random span containing eta, with a basis in which eta's
      // coordinates are Haar-distributed.
      std::vector<Vector> family{eta.amplitudes()};
      qudit::extend_orthonormal(family, spec.subspace_dim - 1, eta.dim(), rng);
      for (auto& v : qudit::rotate_within_span(family, rng)) {
        s.subspace.push_back(PureState::normalized(std::move(v)));
      }
      break;
    }
    case AliceKind::Ignorant:
    case AliceKind::StealState:
    case AliceKind::RandomDistinctCommit:
      break;
  }
  return s;
}

template <class Rng>
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// q distinct values drawn uniformly from [first, first + count).
template <class Rng>
std::vector<std::size_t> random_distinct(std::size_t q, std::size_t first, std::size_t count, Rng& rng) {
  if (q > count) throw ConfigError("cannot pick " + std::to_string(q) + " distinct of " + std::to_string(count));
  std::vector<std::size_t> pool(count);
  std::iota(pool.begin(), pool.end(), first);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(q);
  return pool;
}

// ---------------------------------------------------------------------------
// Classical protocols: Alice announces a complete projective measurement and
// commits to the indices she predicts.

struct ClassicalContext {
  std::size_t d = 2;
  std::size_t q = 1;
  double eps_c_target = 0.0;
};

struct MeasurementChoice {
  std::vector<PureState> basis;        // rank-1 projectors P_i = |basis_i><basis_i|
  std::vector<std::size_t> predicted;  // the committed set S, |S| = q
};

template <class Rng>
MeasurementChoice relabel(std::vector<Vector> basis, std::vector<std::size_t> predicted, Rng& rng) {
  const auto perm = random_permutation(basis.size(), rng);
  MeasurementChoice out;
  out.basis.resize(basis.size(), PureState::basis(1, 0));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out.basis[perm[i]] = PureState::normalized(std::move(basis[i]));
  }
  for (auto idx : predicted) out.predicted.push_back(perm[idx]);
  return out;
}

/// A random complete measurement with a q-element set S carrying weight
/// exactly 1 - eps on eta. The S span contains a = sqrt(1-eps) eta +
/// sqrt(eps) eta_perp and the complement contains the orthogonal mix b.
template <class Rng>
MeasurementChoice aligned_measurement(const PureState& eta, std::size_t q, double eps, Rng& rng) {
  const std::size_t d = eta.dim();
  if (q == 0 || q > d) throw ConfigError("aligned measurement needs 1 <= q <= d");
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("eps_c_target must lie in [0, 1]");
  if (q == d && eps > 0.0) throw ConfigError("q = d leaves no room for eps_c_target > 0");

  std::vector<Vector> all;
  const Vector& e = eta.amplitudes();
  if (eps > 0.0) {
    std::vector<Vector> tmp{e};
    qudit::extend_orthonormal(tmp, 1, d, rng);
    const Vector& perp = tmp[1];
    all.push_back(std::sqrt(1.0 - eps) * e + std::sqrt(eps) * perp);
    all.push_back(std::sqrt(eps) * e - std::sqrt(1.0 - eps) * perp);
  } else {
    all.push_back(e);
  }
  const std::size_t fixed = all.size();
  qudit::extend_orthonormal(all, q - 1, d, rng);
  std::vector<Vector> in_s{all[0]};
  in_s.insert(in_s.end(), all.begin() + static_cast<std::ptrdiff_t>(fixed), all.end());
  const std::size_t before_rest = all.size();
  qudit::extend_orthonormal(all, d - all.size(), d, rng);
  std::vector<Vector> out_s;
  if (eps > 0.0) out_s.push_back(all[1]);
  out_s.insert(out_s.end(), all.begin() + static_cast<std::ptrdiff_t>(before_rest), all.end());

  std::vector<Vector> basis = qudit::rotate_within_span(in_s, rng);
  for (auto& v : qudit::rotate_within_span(out_s, rng)) basis.push_back(std::move(v));
  std::vector<std::size_t> predicted(q);
  std::iota(predicted.begin(), predicted.end(), 0);
  return relabel(std::move(basis), std::move(predicted), rng);
}

template <class Rng>
MeasurementChoice alice_act(const AliceStrategy& alice, const ClassicalContext& ctx, Rng& rng) {
  if (ctx.q == 0 || ctx.q > ctx.d) throw ConfigError("classical protocols need 1 <= q <= d");
  switch (alice.kind) {
    case AliceKind::HonestKnowing:
      if (!alice.knowledge) throw ConfigError("HonestKnowing Alice carries no state");
      return aligned_measurement(*alice.knowledge, ctx.q, ctx.eps_c_target, rng);
    case AliceKind::Ignorant:
    case AliceKind::RandomDistinctCommit: {
      const qudit::Matrix u = qudit::haar_unitary(ctx.d, rng);
      std::vector<Vector> basis;
      for (Eigen::Index c = 0; c < u.cols(); ++c) basis.push_back(u.col(c));
      return relabel(std::move(basis), random_distinct(ctx.q, 0, ctx.d, rng), rng);
    }
    case AliceKind::SubspaceKnowledge: {
      // Basis aligned with the known span; predict as many of its
      // elements as the commitment budget allows.
      std::vector<Vector> basis;
      for (const auto& s : alice.subspace) basis.push_back(s.amplitudes());
      const std::size_t k = basis.size();
      qudit::extend_orthonormal(basis, ctx.d - k, ctx.d, rng);
      std::vector<std::size_t> predicted;
      for (std::size_t i = 0; i < std::min(ctx.q, k); ++i) predicted.push_back(i);
      if (ctx.q > k) {
        for (auto extra : random_distinct(ctx.q - k, k, ctx.d - k, rng)) predicted.push_back(extra);
      }
      return relabel(std::move(basis), std::move(predicted), rng);
    }
    case AliceKind::StealState:
      break;
  }
  throw ConfigError("Alice strategy '" + std::string(to_string(alice.kind)) +
                    "' does not apply to classical protocols");
}

struct ClassicalBobContext {
  std::span<const PureState> basis;
  const PureState& eta;
};

struct ClassicalBobMove {
  std::size_t reported = 0;
  bool measured_eta = false;  // false when a probe was measured instead
};

template <class Rng>
ClassicalBobMove bob_act(const BobStrategy& bob, const ClassicalBobContext& ctx, Rng& rng) {
  switch (bob.kind) {
    case BobKind::Honest:
    case BobKind::MeasureRetainGuess:
      return {qudit::measure_in_basis(ctx.eta, ctx.basis, rng), true};
    case BobKind::SubstituteState: {
      const PureState probe = qudit::haar_random(ctx.eta.dim(), rng);
      return {qudit::measure_in_basis(probe, ctx.basis, rng), false};
    }
    case BobKind::SkipProtocolMeasure:
      break;
  }
  throw ConfigError("Bob strategy 'skip' does not take part in the protocol");
}

/// Bob's estimate after a classical run. MeasureRetainGuess guesses the
/// eigenvector of his own outcome (the unveiled projector when accepted);
/// SubstituteState still holds eta and measures it in the announced basis.
template <class Rng>
std::optional<EstimationResult> bob_classical_guess(const BobStrategy& bob, const ClassicalBobContext& ctx,
                                                    const ClassicalBobMove& move, Rng& rng) {
  switch (bob.kind) {
    case BobKind::MeasureRetainGuess: {
      const PureState& g = ctx.basis[move.reported];
      return EstimationResult{g, qudit::fidelity_sq(g, ctx.eta)};
    }
    case BobKind::SubstituteState: {
      const PureState& g = ctx.basis[qudit::measure_in_basis(ctx.eta, ctx.basis, rng)];
      return EstimationResult{g, qudit::fidelity_sq(g, ctx.eta)};
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Quantum A-to-B: Alice hands over N systems.

struct CopyContext {
  std::size_t d = 2;
  std::size_t copies = 1;
};

template <class Rng>
std::vector<PureState> alice_act(const AliceStrategy& alice, const CopyContext& ctx, Rng& rng) {
  switch (alice.kind) {
    case AliceKind::HonestKnowing:
      if (!alice.knowledge) throw ConfigError("HonestKnowing Alice carries no state");
      return std::vector<PureState>(ctx.copies, *alice.knowledge);
    case AliceKind::Ignorant:
      // one guessed state, repeated: the acceptance-maximizing choice
      return std::vector<PureState>(ctx.copies, qudit::haar_random(ctx.d, rng));
    case AliceKind::SubspaceKnowledge: {
      const PureState coeffs = qudit::haar_random(alice.subspace.size(), rng);
      Vector v = Vector::Zero(static_cast<Eigen::Index>(ctx.d));
      for (std::size_t i = 0; i < alice.subspace.size(); ++i) v += coeffs[i] * alice.subspace[i].amplitudes();
      return std::vector<PureState>(ctx.copies, PureState::normalized(std::move(v)));
    }
    case AliceKind::StealState:
    case AliceKind::RandomDistinctCommit:
      break;
  }
  throw ConfigError("Alice strategy '" + std::string(to_string(alice.kind)) +
                    "' does not apply to the A-to-B protocol");
}

struct A2BBobMove {
  PureState slot;  // what Bob feeds into the test alongside Alice's systems
  bool retains_eta = false;
};

template <class Rng>
A2BBobMove bob_act(const BobStrategy& bob, const PureState& eta, Rng& rng) {
  switch (bob.kind) {
    case BobKind::Honest:
    case BobKind::MeasureRetainGuess:
      return {eta, false};
    case BobKind::SubstituteState:
      return {qudit::haar_random(eta.dim(), rng), true};
    case BobKind::SkipProtocolMeasure:
      break;
  }
  throw ConfigError("Bob strategy 'skip' does not take part in the protocol");
}

// ---------------------------------------------------------------------------
// Quantum B-to-A: Bob sends N decoys plus Q_B; Alice commits to q indices.

struct SelectionContext {
  std::size_t d = 2;
  std::size_t N = 0;
  std::size_t q = 1;
  bool abort_option = false;
};

struct CommitPlan {
  std::vector<std::size_t> values;  // q committed indices; 0 is the dummy
  std::size_t positives = 0;        // q', when Alice measured
  bool measured = false;
  bool abort_before_commit = false;
  bool abort_after_index = false;
  bool keeps_systems = false;
};

template <class Rng>
CommitPlan select_by_projector(const qudit::HermitianOperator& p, const SelectionContext& ctx,
                               std::span<const PureState> systems, Rng& rng) {
  CommitPlan plan;
  plan.measured = true;
  std::vector<std::size_t> detected;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (qudit::measure_binary(systems[i], p, rng).index == 1) detected.push_back(i + 1);
  }
  plan.positives = detected.size();
  if (detected.size() <= ctx.q) {
    plan.values = detected;
    plan.values.resize(ctx.q, 0);
  } else if (ctx.abort_option) {
    plan.abort_before_commit = true;
    return plan;
  } else {
    std::shuffle(detected.begin(), detected.end(), rng);
    detected.resize(ctx.q);
    plan.values = std::move(detected);
  }
  std::shuffle(plan.values.begin(), plan.values.end(), rng);
  return plan;
}

template <class Rng>
CommitPlan alice_act(const AliceStrategy& alice, const SelectionContext& ctx,
                     std::span<const PureState> systems, Rng& rng) {
  if (systems.size() != ctx.N + 1) throw InvalidArgument("expected N + 1 systems");
  if (alice.always_abort) {
    if (!ctx.abort_option) throw ConfigError("always-abort needs the abort variant");
    CommitPlan plan;
    plan.abort_before_commit = true;
    return plan;
  }
  switch (alice.kind) {
    case AliceKind::HonestKnowing:
      if (!alice.knowledge) throw ConfigError("HonestKnowing Alice carries no state");
      return select_by_projector(qudit::HermitianOperator::projector_onto(*alice.knowledge), ctx, systems, rng);
    case AliceKind::SubspaceKnowledge:
      return select_by_projector(qudit::HermitianOperator::projector_onto(std::span<const PureState>(alice.subspace)),
                                 ctx, systems, rng);
    case AliceKind::Ignorant:
    case AliceKind::RandomDistinctCommit:
    case AliceKind::StealState: {
      CommitPlan plan;
      plan.values = random_distinct(ctx.q, 1, ctx.N + 1, rng);
      if (alice.kind == AliceKind::StealState) {
        plan.keeps_systems = true;
        plan.abort_after_index = ctx.abort_option;
      }
      return plan;
    }
  }
  throw ConfigError("unhandled Alice strategy");
}

struct B2ABobMove {
  std::vector<PureState> systems;       // systems[i] carries label i + 1
  std::size_t x = 1;                    // label of the Q_B slot
  std::optional<std::size_t> collapsed;  // basis outcome when Bob measured first
  std::optional<PureState> probe;
  bool retains_eta = false;
};

template <class Rng>
B2ABobMove bob_act(const BobStrategy& bob, const PureState& eta, std::size_t N, Rng& rng) {
  if (bob.kind == BobKind::SkipProtocolMeasure) {
    throw ConfigError("Bob strategy 'skip' does not take part in the protocol");
  }
  B2ABobMove move;
  std::uniform_int_distribution<std::size_t> slot(1, N + 1);
  move.x = slot(rng);
  for (std::size_t label = 1; label <= N + 1; ++label) {
    if (label != move.x) {
      move.systems.push_back(qudit::haar_random(eta.dim(), rng));
      continue;
    }
    switch (bob.kind) {
      case BobKind::Honest:
        move.systems.push_back(eta);
        break;
      case BobKind::MeasureRetainGuess:
        move.collapsed = qudit::measure_basis(eta, rng);
        move.systems.push_back(PureState::basis(eta.dim(), *move.collapsed));
        break;
      case BobKind::SubstituteState:
        move.probe = qudit::haar_random(eta.dim(), rng);
        move.systems.push_back(*move.probe);
        move.retains_eta = true;
        break;
      case BobKind::SkipProtocolMeasure:
        break;
    }
  }
  return move;
}

/// Bob's estimate after a B-to-A run, given Alice's one-bit response.
template <class Rng>
std::optional<EstimationResult> bob_b2a_guess(const BobStrategy& bob, const PureState& eta, const B2ABobMove& move,
                                              Rng& rng) {
  switch (bob.kind) {
    case BobKind::MeasureRetainGuess: {
      PureState g = PureState::basis(eta.dim(), *move.collapsed);
      const double f = qudit::fidelity_sq(g, eta);
      return EstimationResult{std::move(g), f};
    }
    case BobKind::SubstituteState: {
      // measure the retained eta in a basis containing the probe
      std::vector<Vector> family{move.probe->amplitudes()};
      qudit::extend_orthonormal(family, eta.dim() - 1, eta.dim(), rng);
      std::vector<PureState> basis;
      for (auto& v : family) basis.push_back(PureState::normalized(std::move(v)));
      const PureState& g = basis[qudit::measure_in_basis(eta, basis, rng)];
      return EstimationResult{g, qudit::fidelity_sq(g, eta)};
    }
    default:
      return std::nullopt;
  }
}

}  // namespace kcekqs::strategies
