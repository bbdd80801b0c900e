#pragma once

// Executable state machines for the classical and quantum protocols.
//
// Every run owns one Transcript. Events are logged at their nominal times
// in the standard layout, with the step's declared window and the payload
// dependencies that the step reads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kcekqs/commitment.hpp"
#include "kcekqs/errors.hpp"
#include "kcekqs/estimation.hpp"
#include "kcekqs/qudit.hpp"
#include "kcekqs/spacetime.hpp"
#include "kcekqs/strategies.hpp"

namespace kcekqs::protocols {

using estimation::EstimationResult;
using qudit::PureState;
using spacetime::EventId;
using spacetime::EventKind;
using spacetime::SpacetimeEvent;
using spacetime::Transcript;
using spacetime::Window;
using strategies::AliceKind;
using strategies::AliceSpec;
using strategies::AliceStrategy;
using strategies::BobKind;
using strategies::BobStrategy;

enum class ProtocolId { Classical1, Classical2, QuantumA2B, QuantumB2A, QuantumB2AAbort };

inline std::string_view to_string(ProtocolId p) {
  switch (p) {
    case ProtocolId::Classical1: return "classical1";
    case ProtocolId::Classical2: return "classical2";
    case ProtocolId::QuantumA2B: return "a2b";
    case ProtocolId::QuantumB2A: return "b2a";
    case ProtocolId::QuantumB2AAbort: return "b2a-abort";
  }
  return "?";
}

inline ProtocolId parse_protocol(std::string_view name) {
  for (auto p : {ProtocolId::Classical1, ProtocolId::Classical2, ProtocolId::QuantumA2B, ProtocolId::QuantumB2A,
                 ProtocolId::QuantumB2AAbort}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

inline bool is_b2a(ProtocolId p) { return p == ProtocolId::QuantumB2A || p == ProtocolId::QuantumB2AAbort; }
inline bool is_classical(ProtocolId p) { return p == ProtocolId::Classical1 || p == ProtocolId::Classical2; }

struct ProtocolParams {
  std::size_t d = 2;
  std::size_t N = 1;
  std::size_t q = 0;  // 0 selects the protocol default
  double eps_c_target = 0.0;
  double abort_epsilon = 0.1;
  spacetime::TimingConfig timing{};
  commitment::CommitmentConfig commitment{};  // alphabet is set per protocol
  std::size_t size_cap = qudit::kDefaultSizeCap;

  std::size_t effective_q(ProtocolId id) const {
    switch (id) {
      case ProtocolId::Classical1:
        return 1;
      case ProtocolId::Classical2:
        return q == 0 ? 1 : q;
      case ProtocolId::QuantumA2B:
        return 0;
      case ProtocolId::QuantumB2A:
        return q == 0 ? (N + d) / d : q;  // ceil((N + 1) / d)
      case ProtocolId::QuantumB2AAbort: {
        if (q != 0) return q;
        const double raw = static_cast<double>(N) / static_cast<double>(d) + abort_epsilon * static_cast<double>(N);
        const auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
        return std::clamp<std::size_t>(c, 1, N + 1);
      }
    }
    return q;
  }

  commitment::CommitmentConfig commitment_config(ProtocolId id) const {
    commitment::CommitmentConfig c = commitment;
    c.alphabet_size = is_b2a(id) ? N + 2 : d;  // B-to-A: indices 1..N+1 plus the dummy 0
    return c;
  }

  // check_resources = false skips the simulation size cap (closed forms only).
  void validate(ProtocolId id, bool check_resources = true) const {
    if (d < 2) throw InvalidDimension("d must be at least 2");
    timing.validate();
    commitment_config(id).validate();
    if (!(eps_c_target >= 0.0 && eps_c_target <= 1.0)) throw ConfigError("eps_c_target must lie in [0, 1]");
    const std::size_t qe = effective_q(id);
    switch (id) {
      case ProtocolId::Classical1:
        break;
      case ProtocolId::Classical2:
        if (qe > d) throw ConfigError("classical2 needs q <= d");
        break;
      case ProtocolId::QuantumA2B:
        if (check_resources) qudit::checked_power(d, N + 1, size_cap);
        break;
      case ProtocolId::QuantumB2AAbort:
        if (!(abort_epsilon > 0.0)) throw ConfigError("abort_epsilon must be positive");
        [[fallthrough]];
      case ProtocolId::QuantumB2A:
        if (qe < 1 || qe > N + 1) throw ConfigError("B-to-A needs 1 <= q <= N + 1");
        break;
    }
  }
};

enum class Verdict { Reject, Accept, Abort };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Reject: return "reject";
    case Verdict::Accept: return "accept";
    case Verdict::Abort: return "abort";
  }
  return "?";
}

struct ProtocolOutcome {
  Verdict verdict = Verdict::Reject;
  std::vector<SpacetimeEvent> transcript;  // time-ordered
  std::optional<EstimationResult> bob_guess;
  std::optional<EstimationResult> alice_guess;  // StealState only
  std::size_t positives = 0;                    // q' for measuring Alices
};

namespace detail {

inline std::string describe_basis(const std::vector<PureState>& basis) {
  std::string s = "measurement";
  char buf[64];
  for (const auto& b : basis) {
    s += " [";
    for (Eigen::Index i = 0; i < b.amplitudes().size(); ++i) {
      const auto z = b.amplitudes()[i];
      std::snprintf(buf, sizeof buf, "%s%.9f%+.9fi", i ? "," : "", z.real(), z.imag());
      s += buf;
    }
    s += "]";
  }
  return s;
}

template <class Rng>
ProtocolOutcome skip_run(const PureState& eta, const spacetime::Layout& layout, Rng& rng) {
  Transcript log;
  ProtocolOutcome out;
  out.bob_guess = estimation::basis_measure_guess(eta, rng);
  log.record(0.0, layout.b1, EventKind::Measure, "measure Q_B outside the protocol", {}, {}, "skip");
  out.verdict = Verdict::Reject;
  out.transcript = log.time_ordered();
  return out;
}

inline void require_no_abort(const AliceStrategy& alice) {
  if (alice.always_abort) throw ConfigError("always-abort needs the abort variant");
}

template <class Rng>
ProtocolOutcome run_classical(ProtocolId id, const ProtocolParams& params, const PureState& eta,
                              const AliceStrategy& alice, const BobStrategy& bob, Rng& rng) {
  params.validate(id);
  require_no_abort(alice);
  if (eta.dim() != params.d) throw DimensionMismatch("eta does not have dimension d");
  const auto layout = spacetime::standard_configuration(params.timing);
  if (bob.kind == BobKind::SkipProtocolMeasure) return skip_run(eta, layout, rng);

  const auto& t = params.timing;
  const double ds = t.d_small;
  const auto cfg = params.commitment_config(id);
  Transcript log;
  ProtocolOutcome out;

  // Alice fixes {P_i} and S, tells B1 the measurement, commits S to B2.
  const auto choice = strategies::alice_act(alice, strategies::ClassicalContext{params.d, params.effective_q(id),
                                                                               params.eps_c_target},
                                            rng);
  const EventId announce =
      log.record(0.0, layout.a1, EventKind::Send, describe_basis(choice.basis), {}, Window{0.0, 0.0}, "announce-measurement");
  std::vector<commitment::Commitment> commits;
  for (auto v : choice.predicted) {
    commits.push_back(commitment::commit(v, cfg, layout.a2, 0.0, log, {}, Window{0.0, 0.0}));
  }
  std::vector<EventId> b2_holds;
  for (const auto& c : commits) b2_holds.push_back(log.record_receive(ds, layout.b2, c.handle_id(), "commit-data"));
  const EventId heard_basis = log.record_receive(ds, layout.b1, announce, "announce-measurement");

  // Sustain round, Alice-side at A1.
  for (auto& c : commits) c = commitment::sustain(c, layout.a1, t.delta, log, Window{0.0, t.delta});

  // B1 measures Q_B (or a probe) and reports the outcome.
  const strategies::ClassicalBobContext bctx{choice.basis, eta};
  const auto move = strategies::bob_act(bob, bctx, rng);
  const EventId measured = log.record(t.delta, layout.b1, EventKind::Measure,
                                      move.measured_eta ? "measure Q_B" : "measure probe", {heard_basis},
                                      Window{t.delta, t.delta}, "measure");
  const EventId report = log.record(t.delta, layout.b1, EventKind::Send, "outcome " + std::to_string(move.reported),
                                    {measured}, Window{t.delta, t.delta}, "report");
  const EventId heard_report = log.record_receive(t.delta + ds, layout.a1, report, "report");

  // A1 unveils the commitment holding the reported outcome, if any.
  const double t_open = std::max(t.delta_prime, t.delta + ds);
  std::optional<commitment::UnveilResult> opened;
  for (auto& c : commits) {
    if (c.committed_value() == move.reported) {
      opened = commitment::unveil(c, move.reported, rng, layout.a1, t_open, log, {heard_report},
                                  Window{t.delta_prime, t_open});
      break;
    }
  }
  if (!opened && strategies::is_dishonest(alice.kind) && cfg.cheat_epsilon > 0.0 && !commits.empty()) {
    opened = commitment::unveil(commits.front(), move.reported, rng, layout.a1, t_open, log, {heard_report},
                                Window{t.delta_prime, t_open});
  }

  // B2 forwards its commitment records; B1 decides once both have arrived.
  const EventId forward =
      log.record(ds, layout.b2, EventKind::Send, "commitment records", b2_holds, Window{ds, ds}, "forward");
  const EventId forwarded = log.record_receive(t.D, layout.b1, forward, "forward");
  std::vector<EventId> verdict_deps{forwarded};
  double t_verdict = t.D;
  if (opened) {
    const EventId got = log.record_receive(t_open + ds, layout.b1, opened->event, "unveil");
    verdict_deps.push_back(got);
    t_verdict = std::max(t_verdict, t_open + ds);
  }
  const bool accepted = opened && opened->accepted && opened->value == move.reported;
  out.verdict = accepted ? Verdict::Accept : Verdict::Reject;
  log.record(t_verdict, layout.b1, EventKind::Announce, std::string(to_string(out.verdict)), verdict_deps,
             Window{t.D, t_verdict}, "verdict");

  out.bob_guess = strategies::bob_classical_guess(bob, bctx, move, rng);
  if (out.bob_guess) {
    log.record(t_verdict, layout.b1, EventKind::Measure, "estimate eta", {}, {}, "bob-estimate");
  }
  out.transcript = log.time_ordered();
  return out;
}

}  // namespace detail

template <class Rng>
ProtocolOutcome run_classical1(const ProtocolParams& params, const PureState& eta, const AliceStrategy& alice,
                               const BobStrategy& bob, Rng& rng) {
  return detail::run_classical(ProtocolId::Classical1, params, eta, alice, bob, rng);
}

template <class Rng>
ProtocolOutcome run_classical2(const ProtocolParams& params, const PureState& eta, const AliceStrategy& alice,
                               const BobStrategy& bob, Rng& rng) {
  return detail::run_classical(ProtocolId::Classical2, params, eta, alice, bob, rng);
}

template <class Rng>
ProtocolOutcome run_quantum_a2b(const ProtocolParams& params, const PureState& eta, const AliceStrategy& alice,
                                const BobStrategy& bob, Rng& rng) {
  params.validate(ProtocolId::QuantumA2B);
  detail::require_no_abort(alice);
  if (eta.dim() != params.d) throw DimensionMismatch("eta does not have dimension d");
  const auto layout = spacetime::standard_configuration(params.timing);
  if (bob.kind == BobKind::SkipProtocolMeasure) return detail::skip_run(eta, layout, rng);

  const auto& t = params.timing;
  Transcript log;
  ProtocolOutcome out;

  auto systems = strategies::alice_act(alice, strategies::CopyContext{params.d, params.N}, rng);
  const EventId sent = log.record(0.0, layout.a1, EventKind::Send, std::to_string(params.N) + " systems", {},
                                  Window{0.0, 0.0}, "send-systems");
  const EventId got = log.record_receive(t.d_small, layout.b1, sent, "send-systems");

  const auto move = strategies::bob_act(bob, eta, rng);
  systems.push_back(move.slot);
  const PureState joint = qudit::tensor_all(systems, params.size_cap);
  const auto outcome = qudit::measure_symmetric(joint, params.N + 1, params.d, rng);
  const EventId measured = log.record(t.delta, layout.b1, EventKind::Measure,
                                      move.retains_eta ? "symmetric test with probe" : "symmetric test",
                                      {got}, Window{t.delta, t.delta}, "measure");
  out.verdict = outcome.index == 1 ? Verdict::Accept : Verdict::Reject;
  log.record(t.delta_prime, layout.b1, EventKind::Announce, std::string(to_string(out.verdict)), {measured},
             Window{t.delta, t.delta_prime}, "verdict");

  switch (bob.kind) {
    case BobKind::MeasureRetainGuess:
      if (out.verdict == Verdict::Accept) {
        out.bob_guess = estimation::covariant_estimate_joint(outcome.post_state, params.N + 1, params.d, eta, rng);
      } else {
        PureState g = qudit::haar_random(params.d, rng);
        const double f = qudit::fidelity_sq(g, eta);
        out.bob_guess = EstimationResult{std::move(g), f};
      }
      break;
    case BobKind::SubstituteState:
      out.bob_guess = estimation::basis_measure_guess(eta, rng);
      break;
    default:
      break;
  }
  if (out.bob_guess) {
    log.record(t.delta_prime, layout.b1, EventKind::Measure, "estimate eta", {measured}, {}, "bob-estimate");
  }
  out.transcript = log.time_ordered();
  return out;
}

namespace detail {

template <class Rng>
ProtocolOutcome run_b2a(ProtocolId id, const ProtocolParams& params, const PureState& eta,
                        const AliceStrategy& alice, const BobStrategy& bob, Rng& rng) {
  params.validate(id);
  const bool abort_option = id == ProtocolId::QuantumB2AAbort;
  if (!abort_option) require_no_abort(alice);
  if (eta.dim() != params.d) throw DimensionMismatch("eta does not have dimension d");
  const auto layout = spacetime::standard_configuration(params.timing);
  if (bob.kind == BobKind::SkipProtocolMeasure) return skip_run(eta, layout, rng);

  const auto& t = params.timing;
  const double ds = t.d_small;
  const std::size_t q = params.effective_q(id);
  const auto cfg = params.commitment_config(id);
  Transcript log;
  ProtocolOutcome out;

  // Bob permutes N decoys with Q_B and hands the labeled systems to A1.
  const auto move = strategies::bob_act(bob, eta, params.N, rng);
  std::vector<EventId> prep;
  if (move.collapsed) {
    prep.push_back(log.record(-4.0 * ds, layout.b1, EventKind::Measure, "measure Q_B", {}, {}, "bob-measure"));
  }
  const EventId sent = log.record(-3.0 * ds, layout.b1, EventKind::Send,
                                  std::to_string(params.N + 1) + " labeled systems", prep,
                                  Window{-3.0 * ds, -3.0 * ds}, "send-systems");
  const EventId got = log.record_receive(-2.0 * ds, layout.a1, sent, "send-systems");

  const auto plan = strategies::alice_act(alice, strategies::SelectionContext{params.d, params.N, q, abort_option},
                                          move.systems, rng);
  out.positives = plan.positives;
  std::vector<EventId> commit_deps;
  if (plan.measured) {
    commit_deps.push_back(log.record(-ds, layout.a1, EventKind::Measure, "binary test on each system", {got},
                                     Window{-2.0 * ds, 0.0}, "alice-measure"));
  }

  auto abort_run = [&](double when, std::vector<EventId> deps) {
    const EventId ab = log.record(when, layout.a1, EventKind::Announce, "abort", std::move(deps),
                                  Window{when, when}, "abort");
    const EventId heard = log.record_receive(when + ds, layout.b1, ab, "abort");
    const EventId relay = log.record(when + ds, layout.b1, EventKind::Send, "abort", {heard},
                                     Window{when + ds, when + ds}, "relay-abort");
    log.record_receive(when + t.D, layout.b2, relay, "relay-abort");
    out.verdict = Verdict::Abort;
    out.transcript = log.time_ordered();
    return out;
  };
  if (plan.abort_before_commit) return abort_run(0.0, commit_deps);

  // q commitments from A1 to B1, sustained between A2 and B2.
  std::vector<commitment::Commitment> commits;
  std::vector<EventId> b1_holds;
  for (auto v : plan.values) {
    commits.push_back(commitment::commit(v, cfg, layout.a1, 0.0, log, commit_deps, Window{0.0, 0.0}));
    b1_holds.push_back(log.record_receive(ds, layout.b1, commits.back().handle_id(), "commit-data"));
  }
  std::vector<EventId> b2_holds;
  for (auto& c : commits) {
    c = commitment::sustain(c, layout.a2, t.delta, log, Window{0.0, t.delta});
    b2_holds.push_back(log.record_receive(t.delta + ds, layout.b2, c.phase_events().back(), "sustain-data"));
  }

  // B1 announces which label held Q_B.
  const EventId announce = log.record(t.delta_prime, layout.b1, EventKind::Announce,
                                      "index " + std::to_string(move.x), b1_holds,
                                      Window{t.delta, t.delta_prime}, "announce-index");
  const double t_reply = t.delta_prime + ds;
  const EventId heard = log.record_receive(t_reply, layout.a1, announce, "announce-index");

  if (plan.keeps_systems) {
    out.alice_guess = estimation::basis_measure_guess(move.systems[move.x - 1], rng);
    log.record(t_reply, layout.a1, EventKind::Measure, "estimate system " + std::to_string(move.x), {heard}, {},
               "alice-estimate");
  }
  if (plan.abort_after_index) return abort_run(t_reply, {heard});

  std::optional<commitment::UnveilResult> opened;
  for (auto& c : commits) {
    if (c.committed_value() == move.x) {
      opened = commitment::unveil(c, move.x, rng, layout.a1, t_reply, log, {heard}, Window{t.delta_prime, t_reply});
      break;
    }
  }
  if (!opened && strategies::is_dishonest(alice.kind) && cfg.cheat_epsilon > 0.0 && !commits.empty()) {
    opened = commitment::unveil(commits.front(), move.x, rng, layout.a1, t_reply, log, {heard},
                                Window{t.delta_prime, t_reply});
  }
  const EventId answer = opened ? opened->event
                                : log.record(t_reply, layout.a1, EventKind::Announce, "failure", {heard},
                                             Window{t.delta_prime, t_reply}, "failure");
  const EventId answered = log.record_receive(t_reply + ds, layout.b1, answer, "reply");

  const EventId forward = log.record(t.delta + ds, layout.b2, EventKind::Send, "sustain records", b2_holds,
                                     Window{t.delta + ds, t.delta + ds}, "forward");
  const EventId forwarded = log.record_receive(t.delta + t.D, layout.b1, forward, "forward");
  const double t_verdict = std::max(t_reply + ds, t.delta + t.D);
  const bool accepted = opened && opened->accepted && opened->value == move.x;
  out.verdict = accepted ? Verdict::Accept : Verdict::Reject;
  log.record(t_verdict, layout.b1, EventKind::Announce, std::string(to_string(out.verdict)), {answered, forwarded},
             Window{t.delta + t.D, t_verdict}, "verdict");

  out.bob_guess = strategies::bob_b2a_guess(bob, eta, move, rng);
  if (move.retains_eta) {
    log.record(t_verdict, layout.b1, EventKind::Measure, "measure retained Q_B", {}, {}, "bob-estimate");
  }
  out.transcript = log.time_ordered();
  return out;
}

}  // namespace detail

template <class Rng>
ProtocolOutcome run_quantum_b2a(const ProtocolParams& params, const PureState& eta, const AliceStrategy& alice,
                                const BobStrategy& bob, Rng& rng) {
  return detail::run_b2a(ProtocolId::QuantumB2A, params, eta, alice, bob, rng);
}

template <class Rng>
ProtocolOutcome run_quantum_b2a_abort(const ProtocolParams& params, const PureState& eta,
                                      const AliceStrategy& alice, const BobStrategy& bob, Rng& rng) {
  return detail::run_b2a(ProtocolId::QuantumB2AAbort, params, eta, alice, bob, rng);
}

template <class Rng>
ProtocolOutcome run_protocol(ProtocolId id, const ProtocolParams& params, const PureState& eta,
                             const AliceStrategy& alice, const BobStrategy& bob, Rng& rng) {
  switch (id) {
    case ProtocolId::Classical1: return run_classical1(params, eta, alice, bob, rng);
    case ProtocolId::Classical2: return run_classical2(params, eta, alice, bob, rng);
    case ProtocolId::QuantumA2B: return run_quantum_a2b(params, eta, alice, bob, rng);
    case ProtocolId::QuantumB2A: return run_quantum_b2a(params, eta, alice, bob, rng);
    case ProtocolId::QuantumB2AAbort: return run_quantum_b2a_abort(params, eta, alice, bob, rng);
  }
  throw ConfigError("unknown protocol");
}

/// Samples Bob's Haar-random eta, equips Alice, and runs the protocol.
template <class Rng>
ProtocolOutcome run_protocol(ProtocolId id, const ProtocolParams& params, const AliceSpec& alice,
                             const BobStrategy& bob, Rng& rng) {
  params.validate(id);
  const PureState eta = qudit::haar_random(params.d, rng);
  const AliceStrategy equipped = strategies::equip_alice(alice, eta, rng);
  return run_protocol(id, params, eta, equipped, bob, rng);
}

}  // namespace kcekqs::protocols
