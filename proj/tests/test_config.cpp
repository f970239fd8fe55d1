#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "fdp/config.hpp"
#include "fdp/data.hpp"
#include "fdp/error.hpp"
#include "fdp/grid_io.hpp"

using namespace fdp;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("config accepted");
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fdp_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults survive an empty document and emit/parse is a fixed point") {
    const auto a = parse_config("{}");
    const auto text = to_yaml(a);
    CHECK(to_yaml(parse_config(text)) == text);
  }
  SUBCASE("shipped configs load and round trip") {
    for (const char* name : {"toy1d.yaml", "image2d.yaml"}) {
      const auto cfg = load_config(fs::path(FDP_CONFIG_DIR) / name);
      const auto text = to_yaml(cfg);
      CHECK(to_yaml(parse_config(text)) == text);
    }
    const auto toy = load_config(fs::path(FDP_CONFIG_DIR) / "toy1d.yaml");
    CHECK(toy.schedule.kind == TimeSchedule::Kind::Linear);
    CHECK(toy.network.inner_steps == 3);
    CHECK(toy.train.optimizer.kind == OptimizerKind::AdaBelief);
    CHECK(validate_spectrum(toy.spectrum.build()).ok());
  }
  SUBCASE("values land in the right fields") {
    const auto cfg = parse_config("train:\n  lr: 3.0e-5\n  weighting: simple\nnetwork:\n  width: 32\n  skip_every: 0\n");
    CHECK(cfg.train.optimizer.schedule.base_lr == 3e-5);
    CHECK(cfg.train.objective.weighting == LossWeighting::Simple);
    const auto arch = network_architecture(cfg);
    CHECK(arch.width == 32);
    CHECK(std::ranges::none_of(arch.skip, [](bool b) { return b; }));
  }
  SUBCASE("errors name the line and column") {
    const auto unknown = config_error("train:\n  steps: 10\n  stepz: 5\n");
    CHECK(unknown.find("test.yaml:3:3") != std::string::npos);
    CHECK(unknown.find("train.stepz") != std::string::npos);
    CHECK(config_error("nonsense:\n  a: 1\n").find("unknown section") != std::string::npos);
    const auto bad = config_error("train:\n  weighting: fancy\n");
    CHECK(bad.find("test.yaml:2:14") != std::string::npos);
    CHECK(bad.find("Config: Config") == std::string::npos);
  }
  SUBCASE("command-line overrides") {
    auto cfg = parse_config("{}");
    apply_overrides(cfg, {"train.steps=17", "sampler.scheme=pc", "dataset.sigma=0.2"});
    CHECK(cfg.train.steps == 17);
    CHECK(cfg.sampler.scheme == SamplerScheme::PredictorCorrector);
    CHECK(cfg.dataset.quadratic.sigma == 0.2);
    CHECK_THROWS_AS(apply_overrides(cfg, {"train.stepz=1"}), Error);
    CHECK_THROWS_AS(apply_overrides(cfg, {"steps=1"}), Error);
  }
}

TEST_CASE("command-line exit codes") {
  const std::string toy = std::string(FDP_CONFIG_DIR) + "/toy1d.yaml";
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("validate-spectrum " + toy) == 0);
  CHECK(run_cli("no-such-command") == 2);

  const auto dir = scratch("codes");
  {
    std::ofstream(dir / "bad.yaml") << "spectrum:\n  preset: table\n  b: [1, 1, 1, 1]\n  r: [1, 1, 1, 1]\n";
    std::ofstream(dir / "typo.yaml") << "train:\n  stepz: 3\n";
    std::ofstream(dir / "empty.fdpg");
  }
  CHECK(run_cli("validate-spectrum " + (dir / "bad.yaml").string()) == 2);
  CHECK(run_cli("train " + (dir / "typo.yaml").string()) == 2);
  CHECK(run_cli("eval " + (dir / "empty.fdpg").string()) != 0);
  CHECK(run_cli("reconstruct --grids 8 --cutoffs 100") == 2);
}

TEST_CASE("sampling through the command line with the Gaussian oracle score") {
  const auto dir = scratch("oracle");
  const std::string toy = std::string(FDP_CONFIG_DIR) + "/toy1d.yaml";
  REQUIRE(run_cli("sample " + toy + " --oracle-score gaussian --count 16 --set dataset.count=256 --set sampler.steps=50 --out " +
                  dir.string()) == 0);
  const auto samples = load_grids(dir / "samples" / "samples.fdpg");
  CHECK(samples.size() == 16);
  CHECK(fs::exists(dir / "samples" / "qhat.csv"));
  CHECK(run_cli("eval " + (dir / "samples" / "samples.fdpg").string() + " --config " + toy +
                " --report " + (dir / "report.json").string()) == 0);
  CHECK(fs::exists(dir / "report.json"));
}
