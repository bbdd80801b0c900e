#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "kcekqs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = kcekqs::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "kcekqs_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("verify subcommand") {
  const auto ok = run({"verify"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("all checks passed") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  const auto faulty = run({"verify", "--inject-fault"});
  CHECK(faulty.code == 1);
  CHECK(faulty.out.find("FAIL") != std::string::npos);

  const auto small = run({"verify", "--max-dim", "2"});
  CHECK(small.code == 0);
  CHECK(small.out.find("d=3") == std::string::npos);
  CHECK(small.out.find("d=2") != std::string::npos);
}

TEST_CASE("simulate subcommand") {
  const auto r = run({"simulate", "--protocol", "b2a", "--d", "2", "--n", "9", "--q", "2", "--alice", "ignorant",
                      "--trials", "20000", "--seed", "7"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == kcekqs::report::kCsvHeader);
  CHECK(row.rfind("b2a,2,9,2,", 0) == 0);
  CHECK(row.size() > 5);
  CHECK(row.substr(row.size() - 4) == "pass");
  CHECK(r.err.find("target=0.2") != std::string::npos);

  const auto a2b = run({"simulate", "--protocol", "a2b", "--d", "2", "--n", "1", "--alice", "ignorant",
                        "--trials", "20000", "--check"});
  CHECK(a2b.code == 0);
  CHECK(a2b.out.find(",0.75,pass") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({"simulate", "--protocol", "b2a", "--n", "9"}).code == 2);
  CHECK(run({"simulate", "--protocol", "nope", "--d", "2"}).code == 2);
  CHECK(run({"simulate", "--protocol", "classical2", "--d", "2", "--q", "3"}).code == 2);
  CHECK(run({"simulate", "--protocol", "a2b", "--d", "2", "--alice", "steal", "--trials", "10"}).code == 2);
  CHECK(run({"simulate", "--protocol", "a2b", "--d", "2", "--n", "20", "--trials", "10"}).code == 2);
  CHECK(run({"sweep", "--protocol", "a2b", "--d", "2", "--axis", "colour", "--values", "1"}).code == 2);
  CHECK(run({"sweep", "--protocol", "a2b", "--d", "2", "--axis", "N", "--values", "1,x"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("identical seeds give byte-identical files") {
  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  const std::vector<std::string> args{"simulate", "--protocol", "b2a", "--d", "3", "--n", "5", "--trials", "3000",
                                      "--seed", "11", "--metric", "rejection"};
  auto with_out = [&](const fs::path& p) {
    auto v = args;
    v.push_back("--output");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(run(with_out(a)).code == 0);
  REQUIRE(run(with_out(b)).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());

  auto jobs = with_out(b);
  jobs.push_back("--jobs");
  jobs.push_back("3");
  REQUIRE(run(jobs).code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("sweep subcommand and formats") {
  const auto r = run({"sweep", "--protocol", "a2b", "--d", "2", "--alice", "ignorant", "--axis", "N", "--values",
                      "1,2,4,8", "--trials", "3000", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 4);
  for (std::size_t i = 1; i < j.size(); ++i) {
    CHECK(j[i]["closed_forms"]["eps_S"]["value"].get<double>() < j[i - 1]["closed_forms"]["eps_S"]["value"].get<double>());
  }
  CHECK(j[0]["N"] == 1);

  const auto one = run({"sweep", "--protocol", "b2a", "--d", "2", "--bob", "measure-retain", "--metric", "mean-fsq",
                        "--axis", "d", "--values", "2,4,8", "--trials", "2000", "--format", "jsonl", "--check"});
  CHECK(one.code == 0);
  std::istringstream lines(one.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto row = nlohmann::json::parse(line);
    CHECK(row["target_side"] == "at-most");
    CHECK(row["verdict"] == "pass");
    ++count;
  }
  CHECK(count == 3);
}

TEST_CASE("config file with flags winning") {
  const auto cfg = scratch("run.ini");
  {
    std::ofstream f(cfg);
    f << "protocol=b2a\nd=3\nn=9\nq=2\nalice=ignorant\ntrials=500\nseed=5\n";
  }
  const auto from_file = run({"simulate", "--config", cfg.string()});
  REQUIRE(from_file.code == 0);
  CHECK(from_file.out.find("b2a,3,9,2,") != std::string::npos);
  CHECK(from_file.out.find(",500,") != std::string::npos);

  const auto override = run({"simulate", "--config", cfg.string(), "--d", "2"});
  REQUIRE(override.code == 0);
  CHECK(override.out.find("b2a,2,9,2,") != std::string::npos);

  const auto sections = scratch("sections.ini");
  {
    std::ofstream f(sections);
    f << "[simulate]\nprotocol=a2b\nd=4\ntrials=50\ncheck=true\n[sweep]\nd=7\n";
  }
  const auto scoped = run({"simulate", "--config", sections.string()});
  CHECK(scoped.code == 0);
  CHECK(scoped.out.find("a2b,4,1,") != std::string::npos);
  CHECK(run({"simulate", "--config", scratch("missing.ini").string()}).code == 2);
}

TEST_CASE("transcripts export") {
  const auto path = scratch("t.jsonl");
  const auto r = run({"simulate", "--protocol", "b2a", "--d", "2", "--n", "3", "--trials", "50", "--transcripts",
                      path.string(), "--transcript-limit", "2"});
  REQUIRE(r.code == 0);
  std::istringstream lines(slurp(path));
  std::string line;
  std::set<int> trials;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"trial", "time", "agent", "position", "kind", "payload_digest"}) CHECK(j.contains(key));
    trials.insert(j["trial"].get<int>());
  }
  CHECK(trials == std::set<int>{0, 1});
}
