#pragma once

// One-dimensional spacetime bookkeeping for relativistic protocol runs.
// Units have c = 1: positions in light-seconds, times in seconds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kcekqs/errors.hpp"

namespace kcekqs::spacetime {

enum class AgentId { A1, A2, B1, B2 };

inline std::string_view to_string(AgentId a) {
  switch (a) {
    case AgentId::A1: return "A1";
    case AgentId::A2: return "A2";
    case AgentId::B1: return "B1";
    case AgentId::B2: return "B2";
  }
  return "?";
}

inline bool is_alice(AgentId a) { return a == AgentId::A1 || a == AgentId::A2; }
inline bool is_bob(AgentId a) { return !is_alice(a); }

struct AgentSite {
  AgentId agent;
  double position;
};

enum class EventKind { Send, Receive, CommitInitiate, CommitSustain, Unveil, Announce, Measure };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Send: return "send";
    case EventKind::Receive: return "receive";
    case EventKind::CommitInitiate: return "commit-initiate";
    case EventKind::CommitSustain: return "commit-sustain";
    case EventKind::Unveil: return "unveil";
    case EventKind::Announce: return "announce";
    case EventKind::Measure: return "measure";
  }
  return "?";
}

// Kinds that put information on a channel another agent can receive.
inline bool is_transmission(EventKind k) {
  return k != EventKind::Receive && k != EventKind::Measure;
}

using EventId = std::uint64_t;

struct Window {
  double earliest;
  double latest;
};

struct SpacetimeEvent {
  EventId id = 0;
  double time = 0.0;
  AgentSite site{AgentId::A1, 0.0};
  EventKind kind = EventKind::Send;
  std::string payload;
  std::optional<EventId> cause;     // the transmission a receive consumes
  std::vector<EventId> depends_on;  // payload dependency edges
  std::optional<Window> window;     // declared timing window of the step
  std::string step;
};

inline constexpr double kCausalTolerance = 1e-12;

/// e2 lies in the closed future light cone of e1.
inline bool causally_precedes(const SpacetimeEvent& e1, const SpacetimeEvent& e2) {
  return e2.time - e1.time >= std::abs(e2.site.position - e1.site.position) - kCausalTolerance;
}

/// "Much smaller than" is taken as a factor of 10.
struct TimingConfig {
  double d_small = 0.001;
  double D = 1.0;
  double delta = 0.01;
  double delta_prime = 0.02;

  void validate() const {
    if (!(d_small > 0.0) || !(D > 0.0)) throw ConfigError("timing: d_small and D must be positive");
    if (d_small > D / 10.0) throw ConfigError("timing: d_small must be at most D/10");
    if (!(delta > 0.0) || !(delta < delta_prime)) {
      throw ConfigError("timing: need 0 < delta < delta_prime");
    }
    if (delta_prime > D / 10.0) throw ConfigError("timing: delta_prime must be at most D/10");
  }
};

struct Layout {
  AgentSite a1, a2, b1, b2;

  const AgentSite& site(AgentId id) const {
    switch (id) {
      case AgentId::A1: return a1;
      case AgentId::A2: return a2;
      case AgentId::B1: return b1;
      case AgentId::B2: return b2;
    }
    return a1;
  }
  std::vector<AgentSite> sites() const { return {a1, a2, b1, b2}; }
};

/// A1, B1 near x = 0 and B2, A2 near x = D, each pair d_small apart.
inline Layout standard_configuration(const TimingConfig& cfg) {
  cfg.validate();
  return Layout{
      .a1 = {AgentId::A1, 0.0},
      .a2 = {AgentId::A2, cfg.D + cfg.d_small},
      .b1 = {AgentId::B1, cfg.d_small},
      .b2 = {AgentId::B2, cfg.D},
  };
}

/// Append-only event log owned by one protocol run. Event ids are the
/// insertion indices.
class Transcript {
 public:
  EventId record(double time, AgentSite site, EventKind kind, std::string payload,
                 std::vector<EventId> depends_on = {}, std::optional<Window> window = {},
                 std::string step = {}) {
    SpacetimeEvent e;
    e.id = events_.size();
    e.time = time;
    e.site = site;
    e.kind = kind;
    e.payload = std::move(payload);
    e.depends_on = std::move(depends_on);
    e.window = window;
    e.step = std::move(step);
    events_.push_back(std::move(e));
    return events_.back().id;
  }

  EventId record_receive(double time, AgentSite site, EventId cause, std::string step = {}) {
    const EventId id = record(time, site, EventKind::Receive, at(cause).payload, {}, {}, std::move(step));
    events_[id].cause = cause;
    return id;
  }

  const SpacetimeEvent& at(EventId id) const {
    if (id >= events_.size()) throw InvalidArgument("unknown event id");
    return events_[id];
  }
  SpacetimeEvent& at(EventId id) {
    if (id >= events_.size()) throw InvalidArgument("unknown event id");
    return events_[id];
  }

  const std::vector<SpacetimeEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  // Stable by time, so simultaneous events keep insertion order.
  std::vector<SpacetimeEvent> time_ordered() const {
    std::vector<SpacetimeEvent> out = events_;
    std::stable_sort(out.begin(), out.end(),
                     [](const SpacetimeEvent& a, const SpacetimeEvent& b) { return a.time < b.time; });
    return out;
  }

 private:
  std::vector<SpacetimeEvent> events_;
};

enum class ViolationKind {
  OutOfOrder,
  UnmatchedReceive,
  AcausalReceive,
  UnknownDependency,
  AcausalDependency,
  OutsideWindow,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::OutOfOrder: return "out-of-order";
    case ViolationKind::UnmatchedReceive: return "unmatched-receive";
    case ViolationKind::AcausalReceive: return "acausal-receive";
    case ViolationKind::UnknownDependency: return "unknown-dependency";
    case ViolationKind::AcausalDependency: return "acausal-dependency";
    case ViolationKind::OutsideWindow: return "outside-window";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  EventId event;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }
};

/// Checks a time-ordered event log against the light cone and the declared
/// step windows. Violations are collected, never thrown.
inline ValidationReport validate_transcript(std::span<const SpacetimeEvent> events) {
  ValidationReport report;
  std::unordered_map<EventId, const SpacetimeEvent*> by_id;
  by_id.reserve(events.size());
  for (const auto& e : events) by_id.emplace(e.id, &e);

  auto describe = [](const SpacetimeEvent& e) {
    std::string s(to_string(e.site.agent));
    s += " ";
    s += to_string(e.kind);
    if (!e.step.empty()) s += " [" + e.step + "]";
    s += " @t=" + std::to_string(e.time);
    return s;
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0 && e.time < events[i - 1].time) {
      report.violations.push_back({ViolationKind::OutOfOrder, e.id, describe(e) + " precedes its predecessor"});
    }
    if (e.kind == EventKind::Receive) {
      const SpacetimeEvent* src = nullptr;
      if (e.cause) {
        auto it = by_id.find(*e.cause);
        if (it != by_id.end() && is_transmission(it->second->kind)) src = it->second;
      }
      if (src == nullptr) {
        report.violations.push_back({ViolationKind::UnmatchedReceive, e.id, describe(e) + " has no matching send"});
      } else if (!causally_precedes(*src, e)) {
        report.violations.push_back(
            {ViolationKind::AcausalReceive, e.id, describe(e) + " arrives faster than light from " + describe(*src)});
      }
    }
    for (EventId dep : e.depends_on) {
      auto it = by_id.find(dep);
      if (it == by_id.end()) {
        report.violations.push_back(
            {ViolationKind::UnknownDependency, e.id, describe(e) + " depends on unknown event " + std::to_string(dep)});
      } else if (!causally_precedes(*it->second, e)) {
        report.violations.push_back({ViolationKind::AcausalDependency, e.id,
                                     describe(e) + " depends on spacelike/future " + describe(*it->second)});
      }
    }
    if (e.window) {
      if (e.time < e.window->earliest - kCausalTolerance || e.time > e.window->latest + kCausalTolerance) {
        report.violations.push_back({ViolationKind::OutsideWindow, e.id,
                                     describe(e) + " outside window [" + std::to_string(e.window->earliest) +
                                         ", " + std::to_string(e.window->latest) + "]"});
      }
    }
  }
  return report;
}

/// 64-bit FNV-1a of the payload, as 16 hex digits.
inline std::string payload_digest(std::string_view payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::ordered_json to_json(const SpacetimeEvent& e) {
  nlohmann::ordered_json j;
  j["time"] = e.time;
  j["agent"] = std::string(to_string(e.site.agent));
  j["position"] = e.site.position;
  j["kind"] = std::string(to_string(e.kind));
  j["payload_digest"] = payload_digest(e.payload);
  return j;
}

/// One JSON object per line. `trial`, when given, is prepended to each line.
inline void write_jsonl(std::ostream& os, std::span<const SpacetimeEvent> events,
                        std::optional<std::uint64_t> trial = {}) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    if (trial) j["trial"] = *trial;
    const auto fields = to_json(e);
    for (const auto& [k, v] : fields.items()) j[k] = v;
    os << j.dump() << '\n';
  }
}

}  // namespace kcekqs::spacetime
