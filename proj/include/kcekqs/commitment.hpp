#pragma once

// Ideal functionality for a sustained relativistic bit-string commitment.
//
// The committed value never appears in receiver-visible data (event
// payloads or receiver_view) until an unveil. Binding holds up to
// cheat_epsilon: a claim that differs from the committed value is accepted
// with that probability.

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kcekqs/errors.hpp"
#include "kcekqs/spacetime.hpp"

namespace kcekqs::commitment {

using spacetime::AgentSite;
using spacetime::EventId;
using spacetime::Transcript;

struct CommitmentConfig {
  std::size_t alphabet_size = 2;
  double cheat_epsilon = 0.0;

  void validate() const {
    if (alphabet_size == 0) throw ConfigError("commitment alphabet must be non-empty");
    if (!(cheat_epsilon >= 0.0 && cheat_epsilon < 1.0)) {
      throw ConfigError("cheat_epsilon must lie in [0, 1)");
    }
  }
};

enum class Phase { initiated, sustained, unveiled, expired };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::initiated: return "initiated";
    case Phase::sustained: return "sustained";
    case Phase::unveiled: return "unveiled";
    case Phase::expired: return "expired";
  }
  return "?";
}

class Commitment;

Commitment commit(std::size_t value, const CommitmentConfig& cfg, AgentSite site, double time,
                  Transcript& log, std::vector<EventId> depends_on = {},
                  std::optional<spacetime::Window> window = {});

class Commitment {
 public:
  // Handle ids are the transcript id of the commit-initiate event, so they
  // are unique within a run.
  EventId handle_id() const { return handle_; }
  Phase phase() const { return phase_; }
  const std::vector<EventId>& phase_events() const { return events_; }
  const CommitmentConfig& config() const { return cfg_; }

  // Sender-side knowledge; receivers only ever see receiver_view().
  std::size_t committed_value() const { return value_; }

 private:
  Commitment(std::size_t value, CommitmentConfig cfg, EventId handle)
      : value_(value), cfg_(cfg), handle_(handle), events_{handle} {}

  friend Commitment commit(std::size_t, const CommitmentConfig&, AgentSite, double, Transcript&,
                           std::vector<EventId>, std::optional<spacetime::Window>);
  friend Commitment sustain(Commitment, AgentSite, double, Transcript&, std::optional<spacetime::Window>);
  template <class Rng>
  friend struct UnveilAccess;
  friend Commitment expire(Commitment);

  std::size_t value_;
  CommitmentConfig cfg_;
  EventId handle_;
  Phase phase_ = Phase::initiated;
  std::vector<EventId> events_;
};

inline Commitment commit(std::size_t value, const CommitmentConfig& cfg, AgentSite site, double time,
                         Transcript& log, std::vector<EventId> depends_on,
                         std::optional<spacetime::Window> window) {
  cfg.validate();
  if (value >= cfg.alphabet_size) {
    throw InvalidArgument("commit value " + std::to_string(value) + " outside alphabet of size " +
                          std::to_string(cfg.alphabet_size));
  }
  const EventId id = log.record(time, site, spacetime::EventKind::CommitInitiate,
                                "commit-initiate alphabet=" + std::to_string(cfg.alphabet_size),
                                std::move(depends_on), window, "commit");
  return Commitment(value, cfg, id);
}

/// Second commitment round. Timing is not enforced here: a late sustain is
/// logged with its declared window and surfaces in validate_transcript.
inline Commitment sustain(Commitment c, AgentSite site, double time, Transcript& log,
                          std::optional<spacetime::Window> window = {}) {
  if (c.phase_ != Phase::initiated) {
    throw StateError("sustain in phase " + std::string(to_string(c.phase_)));
  }
  const EventId id = log.record(time, site, spacetime::EventKind::CommitSustain,
                                "commit-sustain handle=" + std::to_string(c.handle_), {}, window, "sustain");
  c.events_.push_back(id);
  c.phase_ = Phase::sustained;
  return c;
}

/// Declining to unveil. Reveals nothing.
inline Commitment expire(Commitment c) {
  if (c.phase_ == Phase::unveiled || c.phase_ == Phase::expired) {
    throw StateError("expire in phase " + std::string(to_string(c.phase_)));
  }
  c.phase_ = Phase::expired;
  return c;
}

struct UnveilResult {
  bool accepted = false;
  std::optional<std::size_t> value;  // the value the receiver now believes
  EventId event = 0;
};

template <class Rng>
struct UnveilAccess {
  static UnveilResult run(Commitment& c, std::size_t claimed, Rng& rng, AgentSite site, double time,
                          Transcript& log, std::vector<EventId> depends_on,
                          std::optional<spacetime::Window> window) {
    if (c.phase_ != Phase::sustained) {
      throw StateError("unveil in phase " + std::string(to_string(c.phase_)));
    }
    bool accepted = claimed == c.value_;
    if (!accepted && c.cfg_.cheat_epsilon > 0.0) {
      std::bernoulli_distribution cheat(c.cfg_.cheat_epsilon);
      accepted = cheat(rng);
    }
    const EventId id = log.record(time, site, spacetime::EventKind::Unveil,
                                  "unveil handle=" + std::to_string(c.handle_) + " value=" + std::to_string(claimed),
                                  std::move(depends_on), window, "unveil");
    c.events_.push_back(id);
    c.phase_ = Phase::unveiled;
    UnveilResult r;
    r.accepted = accepted;
    if (accepted) r.value = claimed;
    r.event = id;
    return r;
  }
};

/// Opens `c` claiming `claimed`. An honest claim is always accepted; a
/// false one is accepted with probability cheat_epsilon.
template <class Rng>
UnveilResult unveil(Commitment& c, std::size_t claimed, Rng& rng, AgentSite site, double time,
                    Transcript& log, std::vector<EventId> depends_on = {},
                    std::optional<spacetime::Window> window = {}) {
  return UnveilAccess<Rng>::run(c, claimed, rng, site, time, log, std::move(depends_on), window);
}

/// What the receiver can see: handle, phase, and number of rounds so far.
inline std::string receiver_view(const Commitment& c) {
  std::string s = "commitment handle=" + std::to_string(c.handle_id()) +
                  " phase=" + std::string(to_string(c.phase())) +
                  " rounds=" + std::to_string(c.phase_events().size()) +
                  " alphabet=" + std::to_string(c.config().alphabet_size);
  return s;
}

}  // namespace kcekqs::commitment
