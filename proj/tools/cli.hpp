#pragma once

// Command-line front end: verify, simulate, sweep.
//
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcekqs/harness.hpp"
#include "kcekqs/report.hpp"
#include "kcekqs/spacetime.hpp"
#include "kcekqs/verify.hpp"

namespace kcekqs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string protocol = "a2b";
  std::size_t d = 2;
  std::size_t N = 1;
  std::size_t q = 0;
  double eps_c_target = 0.0;
  double abort_epsilon = 0.1;
  double cheat_epsilon = 0.0;
  std::string alice = "honest";
  std::size_t subspace_dim = 2;
  bool always_abort = false;
  std::string bob = "honest";
  std::string metric = "acceptance";
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "csv";
  std::string transcripts;
  std::uint64_t transcript_limit = 10;
  unsigned jobs = 1;
  bool check = false;

  harness::ExperimentSpec to_spec() const {
    harness::ExperimentSpec s;
    s.protocol = protocols::parse_protocol(protocol);
    s.params.d = d;
    s.params.N = N;
    s.params.q = q;
    s.params.eps_c_target = eps_c_target;
    s.params.abort_epsilon = abort_epsilon;
    s.params.commitment.cheat_epsilon = cheat_epsilon;
    s.alice.kind = strategies::parse_alice_kind(alice);
    s.alice.subspace_dim = subspace_dim;
    s.alice.always_abort = always_abort;
    s.bob.kind = strategies::parse_bob_kind(bob);
    s.metric = harness::parse_metric(metric);
    s.n_trials = trials;
    s.master_seed = seed;
    s.params.validate(s.protocol);
    return s;
  }
};

namespace detail {

inline void write_rows(std::ostream& os, const std::string& format, const std::vector<report::ResultRow>& rows) {
  if (format == "csv") report::write_csv(os, rows);
  else if (format == "json") report::write_json(os, rows);
  else report::write_jsonl(os, rows);
}

inline void summarize(std::ostream& os, const std::vector<report::ResultRow>& rows) {
  for (const auto& r : rows) {
    os << protocols::to_string(r.spec.protocol) << " d=" << r.spec.params.d << " N=" << r.spec.params.N << " "
       << harness::to_string(r.spec.metric) << ": p_hat=" << report::fmt(r.stats.estimate())
       << " se=" << report::fmt(r.stats.std_err());
    if (r.comparison) {
      os << " target=" << report::fmt(r.target->value) << " (" << harness::to_string(r.target->side) << ")"
         << " z=" << report::fmt(r.comparison->z_score) << " " << (r.comparison->pass ? "pass" : "fail");
    } else {
      os << " (no closed-form target)";
    }
    os << '\n';
  }
}

inline std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& chunk : raw) {
    std::stringstream ss(chunk);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw ConfigError("bad sweep value '" + item + "'");
      out.push_back(v);
    }
  }
  return out;
}

// Splices `--config FILE` entries into the argument list (argv without the
// program name) right after the subcommand as `--key value` pairs. Keys already present on the command line
// are skipped, so flags win. Sections other than the subcommand's own are ignored.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  const auto pos = std::find(args.begin(), args.end(), "--config");
  if (pos == args.end() || pos + 1 == args.end() || pos == args.begin()) return args;
  const std::string sub = args[0];
  const std::string path = *(pos + 1);
  args.erase(pos, pos + 2);
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub}) continue;
    const std::string flag = "--" + item.name;
    if (given(flag)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    std::string joined;
    for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    extra.push_back(joined);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace detail

inline int cmd_verify(const verify::VerifyOptions& opts, std::ostream& out) {
  const auto results = verify::run_all(opts);
  out << std::left << std::setw(22) << "check" << std::setw(22) << "params" << std::setw(16) << "error"
      << std::setw(12) << "tolerance" << "result\n";
  for (const auto& r : results) {
    out << std::left << std::setw(22) << r.name << std::setw(22) << r.params << std::setw(16) << report::fmt(r.error)
        << std::setw(12) << report::fmt(r.tolerance) << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  const bool ok = verify::all_pass(results);
  out << (ok ? "all checks passed" : "some checks FAILED") << " (" << results.size() << " checks)\n";
  return ok ? kExitOk : kExitCheckFailed;
}

inline int emit(const RunConfig& cfg, const std::vector<report::ResultRow>& rows, std::ostream& out,
                std::ostream& err) {
  if (cfg.output.empty()) {
    detail::write_rows(out, cfg.format, rows);
    detail::summarize(err, rows);
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "error: cannot open output file " << cfg.output << '\n';
      return kExitUsage;
    }
    detail::write_rows(f, cfg.format, rows);
    detail::summarize(out, rows);
  }
  if (cfg.check) {
    for (const auto& r : rows) {
      if (r.comparison && !r.comparison->pass) return kExitCheckFailed;
    }
  }
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto spec = cfg.to_spec();
  std::unique_ptr<std::ofstream> tfile;
  harness::TrialObserver observer;
  if (!cfg.transcripts.empty()) {
    tfile = std::make_unique<std::ofstream>(cfg.transcripts, std::ios::binary);
    if (!*tfile) {
      err << "error: cannot open transcript file " << cfg.transcripts << '\n';
      return kExitUsage;
    }
    observer = [&](std::uint64_t i, const protocols::ProtocolOutcome& o) {
      spacetime::write_jsonl(*tfile, o.transcript, i);
    };
  }
  const auto stats = harness::run_trials(spec, cfg.jobs, observer, cfg.transcript_limit);
  return emit(cfg, {report::make_row(spec, stats)}, out, err);
}

inline int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::vector<double>& values,
                     std::ostream& out, std::ostream& err) {
  const auto rows = harness::sweep(cfg.to_spec(), axis, values, cfg.jobs);
  return emit(cfg, report::from_sweep(rows), out, err);
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for knowledge-concealing evidence-of-knowledge protocols on qudits", "kcekqs"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  CLI::Option* d_opt = nullptr;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file mirroring the long flags; flags win");
    sub->add_option("--protocol", cfg.protocol, "classical1 | classical2 | a2b | b2a | b2a-abort")
        ->check(CLI::IsMember({"classical1", "classical2", "a2b", "b2a", "b2a-abort"}));
    d_opt = sub->add_option("--d", cfg.d, "qudit dimension (required)");
    sub->add_option("--n", cfg.N, "decoy / copy count N");
    sub->add_option("--q", cfg.q, "commitment list length (0 = protocol default)");
    sub->add_option("--eps-c", cfg.eps_c_target, "designed completeness slack, classical protocols");
    sub->add_option("--abort-epsilon", cfg.abort_epsilon, "epsilon of the abort variant");
    sub->add_option("--cheat-epsilon", cfg.cheat_epsilon, "binding failure probability of the commitment");
    sub->add_option("--alice", cfg.alice, "honest | ignorant | subspace | steal | random-distinct")
        ->check(CLI::IsMember({"honest", "ignorant", "subspace", "steal", "random-distinct"}));
    sub->add_option("--subspace-dim", cfg.subspace_dim, "span dimension for --alice subspace");
    sub->add_flag("--always-abort", cfg.always_abort, "Alice aborts every run (abort variant only)");
    sub->add_option("--bob", cfg.bob, "honest | substitute | measure-retain | skip")
        ->check(CLI::IsMember({"honest", "substitute", "measure-retain", "skip"}));
    sub->add_option("--metric", cfg.metric, "acceptance | rejection | abort-rate | mean-fsq | alice-fsq")
        ->check(CLI::IsMember({"acceptance", "rejection", "abort-rate", "mean-fsq", "alice-fsq"}));
    sub->add_option("--trials", cfg.trials, "trials per experiment");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--output", cfg.output, "write data here instead of stdout");
    sub->add_option("--format", cfg.format, "csv | json | jsonl")->check(CLI::IsMember({"csv", "json", "jsonl"}));
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--check", cfg.check, "exit 1 when an estimate misses its closed-form target");
    return d_opt;
  };

  auto* verify_cmd = app.add_subcommand("verify", "brute-force oracle checks of the closed forms");
  verify::VerifyOptions vopts;
  verify_cmd->add_option("--max-dim", vopts.max_dim, "largest qudit dimension to check")->check(CLI::Range(2, 64));
  verify_cmd->add_flag("--inject-fault", vopts.inject_fault, "perturb w(n, d) to exercise the failure path");

  auto* sim_cmd = app.add_subcommand("simulate", "run one Monte Carlo experiment");
  CLI::Option* sim_d = add_run_options(sim_cmd);
  sim_cmd->add_option("--transcripts", cfg.transcripts, "JSONL file for the first trials' event logs");
  sim_cmd->add_option("--transcript-limit", cfg.transcript_limit, "how many trials to log");

  auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per value of a parameter");
  CLI::Option* sweep_d = add_run_options(sweep_cmd);
  std::string axis;
  std::vector<std::string> raw_values;
  sweep_cmd->add_option("--axis", axis, "d | N | q | eps_c_target | abort_epsilon | cheat_epsilon")->required();
  sweep_cmd->add_option("--values", raw_values, "comma-separated values")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = detail::expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*verify_cmd) return cmd_verify(vopts, out);
    if (*sim_cmd) {
      if (sim_d->count() == 0) {
        err << "usage error: --d is required\n";
        return kExitUsage;
      }
      return cmd_simulate(cfg, out, err);
    }
    if (*sweep_cmd) {
      if (sweep_d->count() == 0 && axis != "d") {
        err << "usage error: --d is required\n";
        return kExitUsage;
      }
      return cmd_sweep(cfg, axis, detail::parse_values(raw_values), out, err);
    }
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidDimension& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace kcekqs::cli
