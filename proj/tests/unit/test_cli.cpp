#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "../../tools/commands.hpp"
#include "ctfconn/errors.hpp"

using namespace ctfconn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "ctfconn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "ctfconn_test_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json small_config() {
  return Json::parse(R"({
    "scene": {"channels": 16, "n_lead_fields": 80, "n_noise_sources": 10, "duration_s": 12.0, "pr": 0.8},
    "fit": {"rank": 3, "n_runs": 2, "n_inits": 2, "burn_in": 3, "max_iters": 25},
    "sweep": {"n_datasets": 2, "pr_values": [0.6], "ranks": [2], "duration_s": 6.0, "threads": 1}
  })");
}

}  // namespace

TEST_CASE("parse_band") {
  const Band b = cli::parse_band("8:12");
  CHECK(b.lo_hz == 8.0);
  CHECK(b.hi_hz == 12.0);
  CHECK_THROWS_AS(cli::parse_band("8-12"), InvalidInput);
  CHECK_THROWS_AS(cli::parse_band("12:8"), InvalidInput);
}

TEST_CASE("pipeline commands run end to end and are deterministic") {
  const fs::path dir = workdir();
  const std::string cfg = (dir / "cfg.json").string();
  write_file(cfg, small_config().dump());

  REQUIRE(call({"gen", "--config", cfg, "--out", (dir / "rec.ctf").string()}).code == 0);
  CHECK(fs::exists(dir / "rec.ctf.scene.json"));
  REQUIRE(call({"tensorize", "--config", cfg, (dir / "rec.ctf").string(), "--out", (dir / "x.ctf").string()}).code == 0);
  const Outcome fit1 = call({"fit", "--config", cfg, (dir / "x.ctf").string(), "--out", (dir / "m1.ctf").string()});
  REQUIRE(fit1.code == 0);
  const Json report = Json::parse(fit1.out);
  CHECK(report["explained_variance"].get<double>() > 0.0);
  const Outcome fit2 = call({"fit", "--config", cfg, (dir / "x.ctf").string(), "--out", (dir / "m2.ctf").string()});
  CHECK(fit2.out == fit1.out);
  CHECK(read_file(dir / "m1.ctf") == read_file(dir / "m2.ctf"));

  const Outcome pf = call({"fit", "--config", cfg, "--algo", "parafac", "--rank", "2", (dir / "x.ctf").string(), "--out",
                           (dir / "pf.ctf").string()});
  CHECK(pf.code == 0);

  const Outcome conn = call({"conn", "--band", "8:12", (dir / "m1.ctf").string(), "--out", (dir / "map").string()});
  REQUIRE(conn.code == 0);
  for (const char* name : {"map.csv", "map_regions.csv", "map.svg", "map_regions.svg"}) CHECK(fs::exists(dir / name));
  const RealMatrix map = parse_matrix_csv(read_file(dir / "map.csv"));
  CHECK(map.rows() == 16);
  CHECK(map == map.transpose());
}

TEST_CASE("bench writes records, summary and plots that plot can redraw") {
  const fs::path dir = workdir();
  const std::string cfg = (dir / "cfg.json").string();
  write_file(cfg, small_config().dump());
  REQUIRE(call({"bench", "--config", cfg, "--out", (dir / "b1").string()}).code == 0);
  REQUIRE(call({"bench", "--config", cfg, "--out", (dir / "b2").string()}).code == 0);
  CHECK(read_file(dir / "b1/records.csv") == read_file(dir / "b2/records.csv"));
  CHECK(read_file(dir / "b1/summary.json") == read_file(dir / "b2/summary.json"));
  int svgs = 0;
  for (const auto& e : fs::directory_iterator(dir / "b1")) svgs += e.path().extension() == ".svg";
  CHECK(svgs == 6);  // EV, CONN and LOC for each of two algorithms at one rank
  const Outcome plot = call({"plot", (dir / "b1/summary.json").string(), "--out", (dir / "plots").string()});
  CHECK(plot.code == 0);
  CHECK(std::count(plot.out.begin(), plot.out.end(), '\n') == 6);
}

TEST_CASE("exit codes") {
  const fs::path dir = workdir();
  CHECK(call({}).code == 1);
  CHECK(call({"gen"}).code == 1);                                 // --out missing
  CHECK(call({"frobnicate", "--out", "x"}).code == 1);
  Json bad = small_config();
  bad["scene"]["pr"] = 0.95;
  write_file(dir / "bad.json", bad.dump());
  CHECK(call({"gen", "--config", (dir / "bad.json").string(), "--out", (dir / "r.ctf").string()}).code == 1);
  bad = small_config();
  bad["fit"]["learning_rate"] = 1;
  write_file(dir / "bad.json", bad.dump());
  CHECK(call({"gen", "--config", (dir / "bad.json").string(), "--out", (dir / "r.ctf").string()}).code == 1);
  CHECK(call({"tensorize", (dir / "missing.ctf").string(), "--out", (dir / "x.ctf").string()}).code == 3);
  write_file(dir / "junk.ctf", "definitely not a container");
  const Outcome junk = call({"fit", (dir / "junk.ctf").string(), "--out", (dir / "m.ctf").string()});
  CHECK(junk.code == 3);
  CHECK(junk.err.find("byte offset") != std::string::npos);
  CHECK(call({"fit", "--algo", "tucker", (dir / "junk.ctf").string(), "--out", (dir / "m.ctf").string()}).code == 1);
}
