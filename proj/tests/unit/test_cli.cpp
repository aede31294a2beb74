#include <sys/wait.h>

#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using testing::read_file;
using testing::TempDir;
using testing::write_file;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + NILMAUG_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

const char* kSpec = R"({"seed":3,"duration":14400,"noise_sd":2,"appliances":[
  {"name":"Fridge","on_power":200,"period":2400,"duty":0.4,"phase":17},
  {"name":"Microwave","on_power":800,"period":5400,"duty":0.1,"phase":1111}]})";

nlohmann::json comparison(const std::filesystem::path& out) {
  return nlohmann::json::parse(read_file(out / "comparison.json"));
}

}  // namespace

TEST_CASE("flags override the config file, which overrides defaults") {
  TempDir dir("cli");
  write_file(dir / "spec.json", kSpec);
  write_file(dir / "cfg.json", R"({"synth":")" + (dir / "spec.json").string() +
                                   R"(","k":3,"methods":["undersampled","stepwise"],"output":")" +
                                   (dir / "from_cfg").string() + "\"}");

  REQUIRE(run("pipeline --config " + q(dir / "cfg.json")) == 0);
  CHECK(comparison(dir / "from_cfg")["config"]["k"] == 3);
  CHECK(comparison(dir / "from_cfg")["config"]["low_period"] == 60);

  REQUIRE(run("pipeline --config " + q(dir / "cfg.json") + " --k 6 --output " + q(dir / "flag")) == 0);
  CHECK(comparison(dir / "flag")["config"]["k"] == 6);
  CHECK(comparison(dir / "flag")["tracks"].size() == 2);

  REQUIRE(run("pipeline --synth " + q(dir / "spec.json") + " --methods stepwise --output " + q(dir / "dflt")) == 0);
  CHECK(comparison(dir / "dflt")["config"]["k"] == 4);
}

TEST_CASE("exit codes") {
  TempDir dir("cli");
  write_file(dir / "spec.json", kSpec);
  CHECK(run("pipeline --synth " + q(dir / "spec.json") + " --split 2 --output " + q(dir / "o")) == 2);
  CHECK(run("pipeline --synth " + q(dir / "spec.json") + " --methods fourier --output " + q(dir / "o")) == 2);
  CHECK(run("pipeline --input " + q(dir / "missing.csv") + " --traces " + q(dir.path()) + " --output " + q(dir / "o")) == 3);
  CHECK(std::filesystem::exists(dir / "o" / "error.json"));
  CHECK(run("frobnicate") == 2);
  write_file(dir / "typo.json", R"({"low_periodd":60})");
  CHECK(run("pipeline --synth " + q(dir / "spec.json") + " --config " + q(dir / "typo.json")) == 2);
  CHECK(run("downsample") == 2);

  write_file(dir / "bad.csv", "timestamp,real_w\n0,1\n1,oops\n");
  CHECK(run("ingest --input " + q(dir / "bad.csv")) == 3);
  write_file(dir / "low.csv", "timestamp,real_w\n0,1\n60,2\n");
  CHECK(run("augment --input " + q(dir / "low.csv") + " --method stepwise --k 0") == 2);
  CHECK(run("augment --input " + q(dir / "low.csv") + " --method stepwise --target-period 7") == 2);

  // A single anchor leaves nothing to interpolate.
  write_file(dir / "one.csv", "timestamp,real_w\n0,1\n");
  CHECK(run("augment --input " + q(dir / "one.csv") + " --method denton") == 3);
}

TEST_CASE("subcommands compose into the pipeline tracks") {
  TempDir dir("cli");
  write_file(dir / "spec.json", kSpec);
  REQUIRE(run("synth --spec " + q(dir / "spec.json") + " --output-dir " + q(dir / "house")) == 0);
  CHECK(std::filesystem::exists(dir / "house" / "traces" / "Fridge.csv"));

  REQUIRE(run("downsample --input " + q(dir / "house" / "aggregate.csv") + " --target-period 60 --output " +
              q(dir / "low.csv")) == 0);
  REQUIRE(run("pipeline --input " + q(dir / "house" / "aggregate.csv") + " --traces " + q(dir / "house" / "traces") +
              " --output " + q(dir / "out")) == 0);
  CHECK(read_file(dir / "low.csv") == read_file(dir / "out" / "undersampled.csv"));

  REQUIRE(run("augment --input " + q(dir / "low.csv") + " --method device --traces " + q(dir / "house" / "traces") +
              " --output " + q(dir / "device.csv")) == 0);
  CHECK(read_file(dir / "device.csv") == read_file(dir / "out" / "device.csv"));

  REQUIRE(run("evaluate --truth " + q(dir / "house" / "aggregate.csv") + " --candidate " + q(dir / "device.csv") +
              " --method device --output " + q(dir / "eval.json")) == 0);
  const auto rep = nlohmann::json::parse(read_file(dir / "eval.json"));
  CHECK(rep["method"] == "device");
  CHECK(rep["rmse"].get<double>() >= 0);

  write_file(dir / "sigs.json", R"([{"name":"Fridge","on_delta_w":200},{"name":"Microwave","on_delta_w":800}])");
  REQUIRE(run("disaggregate --input " + q(dir / "house" / "aggregate.csv") + " --signatures " + q(dir / "sigs.json") +
              " --output-dir " + q(dir / "est")) == 0);
  REQUIRE(run("evaluate --estimates " + q(dir / "est") + " --traces " + q(dir / "house" / "traces") + " --output " +
              q(dir / "f.json")) == 0);
  CHECK(nlohmann::json::parse(read_file(dir / "f.json"))["appliances"].size() == 2);

  REQUIRE(run("ingest --input " + q(dir / "low.csv") + " --gaps " + q(dir / "gaps.json")) == 0);
  CHECK(nlohmann::json::parse(read_file(dir / "gaps.json"))["missing_fraction"] == 0.0);
}
