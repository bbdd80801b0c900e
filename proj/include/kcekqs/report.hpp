#pragma once

// CSV / JSON / JSONL renderings of experiment results. Output contains no
// timestamps or host data, so equal inputs give byte-equal files.

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcekqs/harness.hpp"

namespace kcekqs::report {

using harness::Comparison;
using harness::ExperimentSpec;
using harness::Target;
using stats::TrialStats;

struct ResultRow {
  ExperimentSpec spec;
  TrialStats stats;
  std::optional<Target> target;
  std::optional<Comparison> comparison;
};

inline ResultRow make_row(const ExperimentSpec& spec, const TrialStats& stats, double z = 3.0) {
  ResultRow r{spec, stats, harness::target_for(spec), std::nullopt};
  if (r.target) r.comparison = harness::compare_to_formula(stats, *r.target, z);
  return r;
}

inline std::vector<ResultRow> from_sweep(const std::vector<harness::SweepRow>& rows) {
  std::vector<ResultRow> out;
  for (const auto& r : rows) out.push_back({r.spec, r.stats, r.target, r.comparison});
  return out;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string verdict_of(const ResultRow& r) {
  if (!r.comparison) return "n/a";
  return r.comparison->pass ? "pass" : "fail";
}

inline const char* kCsvHeader =
    "protocol,d,N,q,eps_c_target,abort_epsilon,cheat_epsilon,alice,bob,metric,n,p_hat,std_err,target,verdict";

inline std::string alice_name(const ExperimentSpec& s) {
  std::string name(strategies::to_string(s.alice.kind));
  if (s.alice.kind == strategies::AliceKind::SubspaceKnowledge) name += "(" + std::to_string(s.alice.subspace_dim) + ")";
  if (s.alice.always_abort) name += "+abort";
  return name;
}

inline std::string csv_row(const ResultRow& r) {
  const auto& s = r.spec;
  const auto& p = s.params;
  std::string line;
  line += std::string(protocols::to_string(s.protocol)) + ",";
  line += std::to_string(p.d) + "," + std::to_string(p.N) + "," + std::to_string(p.effective_q(s.protocol)) + ",";
  line += fmt(p.eps_c_target) + "," + fmt(p.abort_epsilon) + "," + fmt(p.commitment.cheat_epsilon) + ",";
  line += alice_name(s) + "," + std::string(strategies::to_string(s.bob.kind)) + ",";
  line += std::string(harness::to_string(s.metric)) + ",";
  line += std::to_string(r.stats.n()) + "," + fmt(r.stats.estimate()) + "," + fmt(r.stats.std_err()) + ",";
  line += (r.target ? fmt(r.target->value) : std::string()) + ",";
  line += verdict_of(r);
  return line;
}

inline void write_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << csv_row(r) << '\n';
}

inline nlohmann::ordered_json to_json(const ResultRow& r) {
  const auto& s = r.spec;
  const auto& p = s.params;
  nlohmann::ordered_json j;
  j["protocol"] = std::string(protocols::to_string(s.protocol));
  j["d"] = p.d;
  j["N"] = p.N;
  j["q"] = p.effective_q(s.protocol);
  j["eps_c_target"] = p.eps_c_target;
  j["abort_epsilon"] = p.abort_epsilon;
  j["cheat_epsilon"] = p.commitment.cheat_epsilon;
  j["alice"] = alice_name(s);
  j["bob"] = std::string(strategies::to_string(s.bob.kind));
  j["metric"] = std::string(harness::to_string(s.metric));
  j["seed"] = s.master_seed;
  j["n"] = r.stats.n();
  j["p_hat"] = r.stats.estimate();
  j["std_err"] = r.stats.std_err();
  const auto [lo, hi] = r.stats.ci95();
  j["ci95"] = {lo, hi};
  if (r.target) {
    j["target"] = r.target->value;
    j["target_side"] = std::string(harness::to_string(r.target->side));
  } else {
    j["target"] = nullptr;
  }
  j["verdict"] = verdict_of(r);
  const auto forms = analysis::closed_forms(s.protocol, p);
  nlohmann::ordered_json cf = nlohmann::ordered_json::object();
  auto put = [&](const char* key, const std::optional<analysis::FormulaValue>& v) {
    if (v) cf[key] = {{"value", v->value}, {"kind", std::string(analysis::to_string(v->kind))}};
  };
  put("eps_C", forms.eps_C);
  put("eps_S", forms.eps_S);
  put("eps_K", forms.eps_K);
  put("eps_M", forms.eps_M);
  put("p_abort", forms.p_abort);
  j["closed_forms"] = cf;
  return j;
}

inline void write_json(std::ostream& os, std::span<const ResultRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  os << arr.dump(2) << '\n';
}

inline void write_jsonl(std::ostream& os, std::span<const ResultRow> rows) {
  for (const auto& r : rows) os << to_json(r).dump() << '\n';
}

}  // namespace kcekqs::report
