#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using econevo::cli::run;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("econevo_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (*this)(name);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "econevo");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kFixtures = ECONEVO_FIXTURE_DIR;
const std::string kConfigs = ECONEVO_CONFIG_DIR;

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(call({}).code == 1);
  CHECK(call({"explode"}).code == 1);
  CHECK(call({"sim"}).code == 1);
  CHECK(call({"sim", kFixtures + "/minecraft_torch.json", "--steps", "0"}).code == 1);
  CHECK(call({"sim", kFixtures + "/minecraft_torch.json", "--steps", "many"}).code == 1);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("sim prints final-step statistics and writes the trace") {
  Scratch tmp;
  const auto r = call({"sim", kFixtures + "/minecraft_torch.json", "--steps", "16", "--trace",
                       tmp("trace.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\ntorches,60,0\n") != std::string::npos);
  const std::string trace = slurp(tmp("trace.csv"));
  CHECK(trace.rfind("run,step,node_id,amount\n", 0) == 0);
  CHECK(trace.find("\n0,16,torches,60\n") != std::string::npos);
}

TEST_CASE("sim runs of a deterministic economy repeat each other") {
  Scratch tmp;
  REQUIRE(call({"sim", kFixtures + "/minecraft_torch.json", "--steps", "5", "--runs", "3", "--out",
                tmp("t.csv"), "--quiet"})
              .code == 0);
  std::istringstream in(slurp(tmp("t.csv")));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<std::string>> blocks(3);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    blocks[std::stoul(line.substr(0, comma))].push_back(line.substr(comma));
  }
  CHECK(!blocks[0].empty());
  CHECK(blocks[0] == blocks[1]);
  CHECK(blocks[1] == blocks[2]);
}

TEST_CASE("sim rejects invalid economies") {
  Scratch tmp;
  const auto bad = tmp.write("bad.json", R"({"nodes":[{"id":"s","kind":"source"}],"edges":[]})");
  CHECK(call({"sim", bad, "--steps", "3"}).code == 2);
  CHECK(call({"sim", tmp("missing.json"), "--steps", "3"}).code == 2);
}

TEST_CASE("gen writes an economy and a report") {
  Scratch tmp;
  const auto r = call({"gen", kConfigs + "/gen_small.json", "--out", tmp("g.json"), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(tmp("g.json")));
  const std::string report = slurp(tmp("g.report.json"));
  CHECK(report.find("\"valid\": true") != std::string::npos);
  CHECK(report.find("\"elapsed_ms\": null") != std::string::npos);
  const std::string first = slurp(tmp("g.json"));
  REQUIRE(call({"gen", kConfigs + "/gen_small.json", "--out", tmp("g.json"), "--quiet"}).code == 0);
  CHECK(slurp(tmp("g.json")) == first);
  CHECK(slurp(tmp("g.report.json")) == report);
  CHECK(call({"sim", tmp("g.json"), "--steps", "10", "--quiet"}).code == 0);

  REQUIRE(call({"gen", kConfigs + "/gen_small.json", "--out", tmp("h.json"), "--timing", "--quiet"}).code == 0);
  CHECK(slurp(tmp("h.report.json")).find("\"elapsed_ms\": null") == std::string::npos);
}

TEST_CASE("gen reports failure with exit 2") {
  Scratch tmp;
  const auto cfg = tmp.write("cfg.json", R"({"nodes": {"random_gate": 1, "pool": 2}, "max_steps": 300})");
  CHECK(call({"gen", cfg, "--out", tmp("g.json"), "--report", tmp("rep.json")}).code == 2);
  CHECK_FALSE(fs::exists(tmp("g.json")));
  CHECK(slurp(tmp("rep.json")).find("\"valid\": false") != std::string::npos);
}

TEST_CASE("balance flag and objective mismatches") {
  Scratch tmp;
  const std::string torch = kFixtures + "/minecraft_torch.json";
  const std::string mage = kFixtures + "/mage.json";
  CHECK(call({"balance", torch, "--second", mage, "--objective", kConfigs + "/torch_absolute.json",
              "--out", tmp("o.json")})
            .code == 1);
  CHECK(call({"balance", mage, "--objective", kConfigs + "/case_study.json", "--out", tmp("o.json")}).code == 1);
  const auto ghost = tmp.write("ghost.json", R"({"kind": "absolute", "pool": "diamonds", "value": 3, "step": 4,
      "sim_length": 4, "runs": 2, "alpha": 0, "population": 4, "max_generations": 2, "seed": 1})");
  CHECK(call({"balance", torch, "--objective", ghost, "--out", tmp("o.json")}).code == 2);
  CHECK(call({"balance", mage, "--objective", ghost, "--out", tmp("o.json")}).code == 2);
}

TEST_CASE("balance writes reproducible outputs") {
  Scratch tmp;
  const std::string torch = kFixtures + "/minecraft_torch.json";
  const auto first = call({"balance", torch, "--objective", kConfigs + "/torch_absolute.json", "--out",
                           tmp("a.json"), "--quiet"});
  const auto second = call({"balance", torch, "--objective", kConfigs + "/torch_absolute.json", "--out",
                            tmp("b.json"), "--quiet"});
  CHECK(first.code == second.code);
  CHECK((first.code == 0 || first.code == 2));
  CHECK(slurp(tmp("a.json")) == slurp(tmp("b.json")));
  CHECK(slurp(tmp("a.report.json")) == slurp(tmp("b.report.json")));
  CHECK(slurp(tmp("a.report.json")).find("\"terminated_by\"") != std::string::npos);
}

TEST_CASE("bench with no graphs succeeds with an empty table") {
  Scratch tmp;
  const auto spec = tmp.write("spec.json", R"({"graph_count": 0})");
  REQUIRE(call({"bench", spec, "--out", tmp("r.json"), "--quiet"}).code == 0);
  CHECK(slurp(tmp("r.csv")) == "metric\n");
  CHECK(call({"bench", tmp("nope.json"), "--out", tmp("r.json")}).code == 2);
}
