#include <doctest.h>

#include "orlicz/config.hpp"
#include "orlicz/error.hpp"
#include "orlicz/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace orlicz;
namespace fs = std::filesystem;

namespace {

Error parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a parse error");
  return Error(Errc::io, "");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("orlicz_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(ORLICZ_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* small_config = R"j({
  "seed": 3,
  "scenarios": [
    {"id": "triad", "task": "certify-young", "phi": ["power(2)", "t_log"], "expect": ["yes/yes", "yes/no"]},
    {"id": "norms", "task": "norms", "grid": {"dim": 1, "n": 64},
     "functions": [{"generator": "band_limited", "params": {"kmax": 2}}], "phi": ["power(2)"], "power_oracle": true},
    {"id": "max", "task": "maximal-bmo", "grid": {"dim": 1, "n": 64},
     "functions": [{"generator": "random_smooth"}], "phi": ["power(1.5)"], "p": 2}
  ]
})j";

}  // namespace

TEST_CASE("a valid config parses") {
  const Config c = parse_config(small_config);
  CHECK(c.seed == 3);
  CHECK(c.output_dir == "out");
  REQUIRE(c.scenarios.size() == 3);
  CHECK(c.scenarios[1].task == "norms");
  CHECK(c.scenarios[1].seed == 3);
}

TEST_CASE("syntax errors carry a line number") {
  const Error e = parse_error("{\n  \"seed\": 1,\n  \"scenarios\": [\n    {\"id\": }\n  ]\n}");
  CHECK(e.code() == Errc::config_parse);
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
}

TEST_CASE("semantic errors name the key") {
  CHECK(std::string(parse_error(R"j({"seed": 1})j").what()).find("scenarios") != std::string::npos);
  CHECK(std::string(parse_error(R"j({"scenarios": [], "bogus": 1})j").what()).find("bogus") != std::string::npos);
  CHECK(std::string(parse_error(R"j({"scenarios": [{"id": "a", "task": "dance"}]})j").what()).find("task") !=
        std::string::npos);
  CHECK(std::string(parse_error(R"j({"scenarios": [{"id": "a", "task": "certify-young", "phi": ["power(0.5)"]}]})j").what())
            .find("phi[0]") != std::string::npos);
  CHECK(std::string(parse_error(R"j({"scenarios": [{"id": "a", "task": "certify-young", "phi": ["t_log"]},
                                                  {"id": "a", "task": "certify-young", "phi": ["t_log"]}]})j")
                        .what())
            .find("duplicate") != std::string::npos);
  CHECK(std::string(parse_error(R"j({"scenarios": [{"id": "g", "task": "norms", "grid": {"dim": 4, "n": 8},
                                                   "functions": [], "phi": ["t_log"]}]})j")
                        .what())
            .find("grid") != std::string::npos);
}

TEST_CASE("unknown generators have their own error") {
  const Error e = parse_error(R"j({"scenarios": [{"id": "a", "task": "norms", "grid": {"dim": 1, "n": 16},
                                                 "functions": [{"generator": "wobble"}], "phi": ["power(2)"]}]})j");
  CHECK(e.code() == Errc::unknown_generator);
}

TEST_CASE("Young function specs") {
  CHECK(phi_from_json("power(3)")(2.0) == doctest::Approx(8.0));
  CHECK(phi_from_json(nlohmann::json{{"family", "power"}, {"p", 2}, {"scale", 0.5}})(2.0) == doctest::Approx(2.0));
  CHECK(phi_from_json("exp_minus_one")(1.0) == doctest::Approx(std::expm1(1.0)));
  CHECK_THROWS_AS(phi_from_json("cosh"), Error);
  CHECK(grid_from_json(nlohmann::json{{"dim", 2}, {"n", 16}, {"topology", "rectangle"}}).topology() == Topology::rectangle);
}

TEST_CASE("catalog covers every kind") {
  std::set<std::string> kinds;
  for (const CatalogEntry& e : builtin_catalog()) kinds.insert(e.kind);
  CHECK(kinds == std::set<std::string>{"phi", "kernel", "generator", "system"});
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_optional(std::nullopt) == "NA");
}

TEST_CASE("pipeline errors become a failed assertion") {
  const Config c = parse_config(R"j({"scenarios": [{"id": "bad", "task": "maximal-bmo", "grid": {"dim": 1, "n": 16},
                                     "functions": [{"generator": "constant", "params": {"value": 1e300}}],
                                     "phi": ["exp_minus_one"]}]})j");
  const RunReport r = run_scenario(c.scenarios[0], scratch("errors"));
  CHECK_FALSE(r.passed());
}

TEST_CASE("reruns produce byte-identical CSVs") {
  const Config c = parse_config(small_config);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_config(c, a, 1);
  const auto rb = run_config(c, b, 2);
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = b / fs::relative(entry.path(), a);
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++files;
  }
  CHECK(files >= 4);
  for (const auto& r : ra) CHECK(r.passed());
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  {
    std::ofstream(dir / "good.json") << small_config;
    std::ofstream(dir / "broken.json") << "{\"scenarios\": [";
    std::ofstream(dir / "wrong.json")
        << R"j({"scenarios": [{"id": "t", "task": "certify-young", "phi": ["t_log"], "expect": ["yes/yes"]}]})j";
  }
  CHECK(run_cli("list") == 0);
  CHECK(run_cli("validate " + (dir / "good.json").string()) == 0);
  CHECK(run_cli("validate " + (dir / "broken.json").string()) == 2);
  CHECK(run_cli("run " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("run --out " + (dir / "out").string() + " " + (dir / "good.json").string()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.txt"));
  CHECK(fs::exists(dir / "out" / "triad" / "certificates.csv"));
  CHECK(run_cli("run --out " + (dir / "out2").string() + " " + (dir / "wrong.json").string()) == 1);
  CHECK(run_cli("frobnicate") == 2);
}
