#pragma once

// Monte Carlo experiments: repeated seeded trials, formula targets and
// parameter sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kcekqs/analysis.hpp"
#include "kcekqs/errors.hpp"
#include "kcekqs/protocols.hpp"
#include "kcekqs/stats.hpp"
#include "kcekqs/strategies.hpp"

namespace kcekqs::harness {

using analysis::BoundKind;
using protocols::ProtocolId;
using protocols::ProtocolOutcome;
using protocols::ProtocolParams;
using protocols::Verdict;
using stats::StatKind;
using stats::TrialStats;
using strategies::AliceKind;
using strategies::AliceSpec;
using strategies::BobKind;
using strategies::BobStrategy;

using TrialRng = std::mt19937_64;

enum class Metric { Acceptance, Rejection, AbortRate, MeanFsq, AliceFsq };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Acceptance: return "acceptance";
    case Metric::Rejection: return "rejection";
    case Metric::AbortRate: return "abort-rate";
    case Metric::MeanFsq: return "mean-fsq";
    case Metric::AliceFsq: return "alice-fsq";
  }
  return "?";
}

inline Metric parse_metric(std::string_view name) {
  for (auto m : {Metric::Acceptance, Metric::Rejection, Metric::AbortRate, Metric::MeanFsq, Metric::AliceFsq}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

inline StatKind stat_kind(Metric m) {
  return (m == Metric::MeanFsq || m == Metric::AliceFsq) ? StatKind::Mean : StatKind::Bernoulli;
}

struct ExperimentSpec {
  ProtocolId protocol = ProtocolId::QuantumA2B;
  ProtocolParams params{};
  AliceSpec alice{};
  BobStrategy bob{};
  Metric metric = Metric::Acceptance;
  std::uint64_t n_trials = 10000;
  std::uint64_t master_seed = 1;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based: trial i's seed depends only on (master, i).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline ProtocolOutcome run_single_trial(const ExperimentSpec& spec, std::uint64_t index) {
  TrialRng rng(derive_seed(spec.master_seed, index));
  return protocols::run_protocol(spec.protocol, spec.params, spec.alice, spec.bob, rng);
}

inline double metric_value(Metric m, const ProtocolOutcome& o) {
  switch (m) {
    case Metric::Acceptance: return o.verdict == Verdict::Accept ? 1.0 : 0.0;
    case Metric::Rejection: return o.verdict == Verdict::Reject ? 1.0 : 0.0;
    case Metric::AbortRate: return o.verdict == Verdict::Abort ? 1.0 : 0.0;
    case Metric::MeanFsq:
      if (!o.bob_guess) throw ConfigError("metric mean-fsq needs a Bob strategy that guesses eta");
      return o.bob_guess->achieved_fsq;
    case Metric::AliceFsq:
      if (!o.alice_guess) throw ConfigError("metric alice-fsq needs the steal strategy");
      return o.alice_guess->achieved_fsq;
  }
  return 0.0;
}

/// Runs trials [0, n) of `fn` over `jobs` contiguous partitions and merges
/// the partial statistics in partition order.
template <class Fn>
TrialStats run_trials_with(std::uint64_t n, StatKind kind, Fn&& fn, unsigned jobs = 1) {
  if (n == 0) throw InvalidArgument("n_trials = 0 would produce empty statistics");
  jobs = std::max(1u, jobs);
  if (jobs == 1 || n < jobs) {
    TrialStats s(kind);
    for (std::uint64_t i = 0; i < n; ++i) s.add(fn(i));
    return s;
  }
  std::vector<TrialStats> parts(jobs, TrialStats(kind));
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> threads;
  for (unsigned j = 0; j < jobs; ++j) {
    threads.emplace_back([&, j] {
      const std::uint64_t lo = n * j / jobs;
      const std::uint64_t hi = n * (j + 1) / jobs;
      try {
        for (std::uint64_t i = lo; i < hi; ++i) parts[j].add(fn(i));
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  TrialStats total(kind);
  for (const auto& p : parts) total.merge(p);
  return total;
}

/// Called with the outcome of each trial whose index is below the limit;
/// calls are made in index order after all trials finish.
using TrialObserver = std::function<void(std::uint64_t, const ProtocolOutcome&)>;

inline TrialStats run_trials(const ExperimentSpec& spec, unsigned jobs = 1, const TrialObserver& observer = {},
                             std::uint64_t observe_limit = 0) {
  spec.params.validate(spec.protocol);
  const std::uint64_t kept = observer ? std::min(observe_limit, spec.n_trials) : 0;
  std::vector<std::optional<ProtocolOutcome>> seen(kept);
  auto trial = [&](std::uint64_t i) {
    try {
      ProtocolOutcome o = run_single_trial(spec, i);
      const double v = metric_value(spec.metric, o);
      if (i < kept) seen[i] = std::move(o);
      return v;
    } catch (const ConfigError& e) {
      throw ConfigError("trial " + std::to_string(i) + " (" + std::string(protocols::to_string(spec.protocol)) +
                        "): " + e.what());
    }
  };
  TrialStats s = run_trials_with(spec.n_trials, stat_kind(spec.metric), trial, jobs);
  for (std::uint64_t i = 0; i < kept; ++i) observer(i, *seen[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Targets

enum class Sidedness { TwoSided, AtMost, AtLeast };

inline std::string_view to_string(Sidedness s) {
  switch (s) {
    case Sidedness::TwoSided: return "two-sided";
    case Sidedness::AtMost: return "at-most";
    case Sidedness::AtLeast: return "at-least";
  }
  return "?";
}

struct Target {
  double value = 0.0;
  Sidedness side = Sidedness::TwoSided;
};

inline bool is_ignorant(AliceKind k) {
  return k == AliceKind::Ignorant || k == AliceKind::RandomDistinctCommit || k == AliceKind::StealState;
}

/// The formula value a spec's metric should reproduce, where one applies.
inline std::optional<Target> target_for(const ExperimentSpec& spec) {
  const auto& p = spec.params;
  const ProtocolId id = spec.protocol;
  const auto forms = analysis::closed_forms(id, p);
  const double d = static_cast<double>(p.d);
  const double cheat = p.commitment.cheat_epsilon;
  const BobKind bob = spec.bob.kind;
  const AliceKind alice = spec.alice.kind;
  const bool abort_variant = id == ProtocolId::QuantumB2AAbort;

  if (bob == BobKind::SkipProtocolMeasure) {
    if (spec.metric == Metric::MeanFsq) return Target{analysis::eps_m(p.d)};
    if (spec.metric == Metric::Acceptance) return Target{0.0};
    return std::nullopt;
  }

  if (spec.alice.always_abort) {
    if (spec.metric == Metric::AbortRate) return Target{1.0};
    if (spec.metric == Metric::Acceptance) return Target{0.0};
    return std::nullopt;
  }

  // Acceptance of an Alice that commits without information about eta;
  // a binding-breaking attempt lifts misses by cheat_epsilon.
  auto with_cheat = [&](double s) { return s + (1.0 - s) * cheat; };
  std::optional<double> accept;
  Sidedness accept_side = Sidedness::TwoSided;
  const bool honest_alice = alice == AliceKind::HonestKnowing;
  const bool honest_bob = bob == BobKind::Honest;

  if (honest_alice && bob != BobKind::SubstituteState) {
    if (id == ProtocolId::QuantumB2A) {
      if (honest_bob) accept = 1.0 - forms.eps_C->value;
    } else if (abort_variant) {
      if (honest_bob) {
        if (spec.metric == Metric::AbortRate) {
          const std::size_t q = p.effective_q(id);
          return Target{analysis::p_abort_b2a_exact(p.N, p.d, q)};
        }
        accept = 1.0 - analysis::p_abort_b2a_exact(p.N, p.d, p.effective_q(id));
      }
    } else if (protocols::is_classical(id)) {
      accept = 1.0 - p.eps_c_target;
    } else {
      accept = 1.0;
    }
  } else if (is_ignorant(alice) && honest_bob) {
    if (id == ProtocolId::QuantumA2B) {
      if (alice == AliceKind::Ignorant) accept = forms.eps_S->value;
    } else {
      accept = with_cheat(forms.eps_S->value);
    }
  } else if (alice == AliceKind::SubspaceKnowledge && honest_bob && protocols::is_classical(id)) {
    const double k = static_cast<double>(spec.alice.subspace_dim);
    accept = std::min(static_cast<double>(p.effective_q(id)), k) / k;
  }

  switch (spec.metric) {
    case Metric::Acceptance:
      if (accept) return Target{*accept, accept_side};
      return std::nullopt;
    case Metric::Rejection:
      if (accept && !abort_variant) return Target{1.0 - *accept, accept_side};
      return std::nullopt;
    case Metric::AbortRate:
      if (!abort_variant) return Target{0.0};
      if (alice == AliceKind::StealState && honest_bob) return Target{1.0};
      if (!honest_alice) return Target{0.0};
      return std::nullopt;
    case Metric::MeanFsq:
      if (bob == BobKind::MeasureRetainGuess) {
        if (protocols::is_b2a(id)) return Target{forms.eps_K->value, Sidedness::AtMost};
        if (id == ProtocolId::QuantumA2B && honest_alice) return Target{forms.eps_K->value};
        if (protocols::is_classical(id) && honest_alice) return Target{forms.eps_K->value, Sidedness::AtLeast};
      }
      if (bob == BobKind::SubstituteState) return Target{analysis::eps_m(p.d), Sidedness::AtLeast};
      return std::nullopt;
    case Metric::AliceFsq:
      if (alice == AliceKind::StealState && bob == BobKind::Honest) return Target{2.0 / (d + 1.0)};
      return std::nullopt;
  }
  return std::nullopt;
}

struct Comparison {
  bool pass = false;
  double estimate = 0.0;
  double std_err = 0.0;
  double target = 0.0;
  double deviation = 0.0;  // estimate - target
  double z_score = 0.0;    // deviation / std_err, 0 when std_err = 0
  Sidedness side = Sidedness::TwoSided;

  std::string direction() const {
    if (deviation > 0.0) return "above";
    if (deviation < 0.0) return "below";
    return "equal";
  }
};

inline constexpr double kZeroErrorTolerance = 1e-9;

inline Comparison compare_to_formula(stats::Estimate est, Target target, double z = 3.0) {
  Comparison c;
  c.estimate = est.value;
  c.std_err = est.std_err;
  c.target = target.value;
  c.side = target.side;
  c.deviation = est.value - target.value;
  c.z_score = est.std_err > 0.0 ? c.deviation / est.std_err : 0.0;
  const double allowed = z * est.std_err + (est.std_err == 0.0 ? kZeroErrorTolerance : 0.0);
  switch (target.side) {
    case Sidedness::TwoSided: c.pass = std::abs(c.deviation) <= allowed; break;
    case Sidedness::AtMost: c.pass = c.deviation <= allowed; break;
    case Sidedness::AtLeast: c.pass = c.deviation >= -allowed; break;
  }
  return c;
}

inline Comparison compare_to_formula(const TrialStats& s, Target target, double z = 3.0) {
  return compare_to_formula(s.as_estimate(), target, z);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double value = 0.0;
  ExperimentSpec spec;
  TrialStats stats;
  std::optional<analysis::ClosedForms> forms;
  std::optional<Target> target;
  std::optional<Comparison> comparison;
};

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"d", "N", "q", "eps_c_target", "abort_epsilon", "cheat_epsilon"};
  return axes;
}

inline ExperimentSpec with_axis(ExperimentSpec spec, std::string_view axis, double value) {
  auto as_count = [&](double v) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("axis " + std::string(axis) + " needs integers");
    return static_cast<std::size_t>(v);
  };
  if (axis == "d") spec.params.d = as_count(value);
  else if (axis == "N") spec.params.N = as_count(value);
  else if (axis == "q") spec.params.q = as_count(value);
  else if (axis == "eps_c_target") spec.params.eps_c_target = value;
  else if (axis == "abort_epsilon") spec.params.abort_epsilon = value;
  else if (axis == "cheat_epsilon") spec.params.commitment.cheat_epsilon = value;
  else throw ConfigError("unknown sweep axis '" + std::string(axis) + "'");
  return spec;
}

inline std::vector<SweepRow> sweep(const ExperimentSpec& base, std::string_view axis,
                                   const std::vector<double>& values, unsigned jobs = 1, double z = 3.0) {
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    throw ConfigError("unknown sweep axis '" + std::string(axis) + "'");
  }
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.value = v;
    row.spec = with_axis(base, axis, v);
    row.stats = run_trials(row.spec, jobs);
    row.forms = analysis::closed_forms(row.spec.protocol, row.spec.params);
    row.target = target_for(row.spec);
    if (row.target) row.comparison = compare_to_formula(row.stats, *row.target, z);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kcekqs::harness
