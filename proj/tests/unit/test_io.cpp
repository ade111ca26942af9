#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "ctfconn/config.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/io.hpp"
#include "helpers.hpp"

using namespace ctfconn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ctfconn_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::uint64_t header_length(const std::string& bytes) {
  std::uint64_t n = 0;
  for (int b = 0; b < 8; ++b) n |= std::uint64_t(static_cast<unsigned char>(bytes[12 + b])) << (8 * b);
  return n;
}

}  // namespace

TEST_CASE("container byte layout") {
  Rng rng(1);
  const ComplexTensor x = testutil::random_tensor({3, 2, 4}, rng);
  const std::string bytes = encode_container(tensor_container(x, {{"fs", 100.0}}));
  CHECK(std::memcmp(bytes.data(), "CTFCONN\0", 8) == 0);
  CHECK(static_cast<unsigned char>(bytes[8]) == kContainerVersion);
  const std::uint64_t hlen = header_length(bytes);
  const Json header = Json::parse(bytes.substr(20, hlen));
  CHECK(header["kind"] == "tensor");
  CHECK(header["meta"]["fs"] == 100.0);
  const Json& arr = header["arrays"][0];
  CHECK(arr["name"] == "X");
  CHECK(arr["dtype"] == "c128");
  CHECK(arr["shape"] == Json::array({3, 2, 4}));
  CHECK(bytes.size() == 20 + hlen + 24 * 16);
  // First payload value is X(0, 0, 0), little-endian real then imaginary part.
  double re = 0.0, im = 0.0;
  std::memcpy(&re, bytes.data() + 20 + hlen + arr["offset"].get<std::size_t>(), 8);
  std::memcpy(&im, bytes.data() + 28 + hlen + arr["offset"].get<std::size_t>(), 8);
  CHECK(re == x(0, 0, 0).real());
  CHECK(im == x(0, 0, 0).imag());
}

TEST_CASE("tensor, recording and model round-trips are exact") {
  Rng rng(2);
  const ComplexTensor x = testutil::random_tensor({5, 3, 6}, rng);
  CHECK(tensor_from_container(decode_container(encode_container(tensor_container(x)))) == x);

  Recording rec{testutil::gaussian(4, 50, rng), 250.0, {{"note", "abc"}}};
  const fs::path path = scratch("rec.ctf");
  write_container(path, recording_container(rec));
  const Recording back = recording_from_container(read_container(path));
  CHECK(back.data == rec.data);
  CHECK(back.fs == 250.0);
  CHECK(back.meta["note"] == "abc");

  const ParafacModel pf = testutil::random_parafac(5, 3, 6, 2, rng);
  const auto pf_back = std::get<ParafacModel>(model_from_container(decode_container(encode_container(model_container(pf)))));
  CHECK(pf_back.A == pf.A);
  CHECK(pf_back.P == pf.P);
  CHECK(pf_back.Y == pf.Y);
  const Parafac2Model pf2 = testutil::random_parafac2(5, 3, 6, 2, rng);
  const Container c2 = model_container(pf2);
  CHECK(c2.meta["algo"] == "parafac2");
  const auto pf2_back = std::get<Parafac2Model>(model_from_container(decode_container(encode_container(c2))));
  CHECK(pf2_back.H == pf2.H);
  REQUIRE(pf2_back.Q.size() == 3u);
  for (std::size_t f = 0; f < 3; ++f) CHECK(pf2_back.Q[f] == pf2.Q[f]);
}

TEST_CASE("corrupt containers raise format errors with offsets") {
  Rng rng(3);
  const std::string good = encode_container(tensor_container(testutil::random_tensor({2, 2, 2}, rng)));
  const std::uint64_t hlen = header_length(good);

  std::string bad = good;
  bad[0] = 'X';
  try {
    decode_container(bad);
    FAIL("no error");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }

  bad = good;
  bad[8] = 9;
  CHECK_THROWS_AS(decode_container(bad), FormatError);

  try {
    decode_container(good.substr(0, good.size() - 5));
    FAIL("no error");
  } catch (const FormatError& e) {
    CHECK(e.offset() >= 20 + hlen);
  }

  bad = good;
  bad[20] = '#';
  try {
    decode_container(bad);
    FAIL("no error");
  } catch (const FormatError& e) {
    CHECK(e.offset() >= 20);
  }
  CHECK_THROWS_AS(decode_container(good.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(decode_container(""), FormatError);

  Container wrong = tensor_container(testutil::random_tensor({2, 2, 2}, rng));
  wrong.kind = "model";
  CHECK_THROWS_AS(tensor_from_container(wrong), InvalidInput);
  CHECK_THROWS_AS(read_container(scratch("missing.ctf")), IoError);
}

TEST_CASE("CSV round-trip is exact") {
  Rng rng(4);
  const RealMatrix m = testutil::gaussian(4, 3, rng);
  CHECK(parse_matrix_csv(matrix_csv(m)) == m);
  CHECK_THROWS_AS(parse_matrix_csv("1,2\n3\n"), InvalidInput);
}

TEST_CASE("config hash depends on content only") {
  const Json a = {{"x", 1}, {"y", {1, 2}}};
  const Json b = Json::parse(R"({"y":[1,2],"x":1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(Json{{"x", 2}, {"y", {1, 2}}}));
}

TEST_CASE("run config JSON round-trip and strictness") {
  RunConfig c;
  c.rank = 4;
  c.pr = 0.6;
  c.fit.n_runs = 3;
  c.sweep.ranks = {2, 3};
  const Json j = to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.rank == 4);
  CHECK(back.sweep.ranks == std::vector<Index>{2, 3});

  CHECK(to_json(run_config_from_json(Json::object())) == to_json(RunConfig{}));
  Json unknown = j;
  unknown["fit"]["momentum"] = 0.5;
  CHECK_THROWS_AS(run_config_from_json(unknown), InvalidInput);
  Json extra_section = j;
  extra_section["plotting"] = Json::object();
  CHECK_THROWS_AS(run_config_from_json(extra_section), InvalidInput);
  Json wrong_type = j;
  wrong_type["fit"]["rank"] = "eight";
  CHECK_THROWS_AS(run_config_from_json(wrong_type), InvalidInput);

  RunConfig high;
  high.pr = 0.95;
  CHECK_THROWS_AS(validate(high), InvalidInput);
  Json high_json = j;
  high_json["scene"]["pr"] = 0.95;
  CHECK_THROWS(run_config_from_json(high_json));

  const fs::path path = scratch("cfg.json");
  write_file(path, j.dump(2));
  CHECK(to_json(load_run_config(path)) == j);
  write_file(path, "{ not json");
  CHECK_THROWS_AS(load_run_config(path), InvalidInput);
}

TEST_CASE("scene and sweep point JSON round-trips") {
  SceneSettings settings;
  settings.channels = 16;
  settings.n_lead_fields = 60;
  settings.n_noise_sources = 5;
  const HeadModel head = build_head_model(settings);
  const SourceScene scene = make_scene(settings, head, true, 0.7, 9);
  const SourceScene back = scene_from_json(scene_to_json(scene));
  CHECK(scene_to_json(back) == scene_to_json(scene));
  CHECK(render_scene(back, head, 5.0, settings.fs).data == render_scene(scene, head, 5.0, settings.fs).data);

  SweepPoint p;
  p.algo = Algorithm::parafac;
  p.rank = 3;
  p.pr = 0.4;
  p.n_ok = 7;
  p.conn = 0.25;
  p.loc = -0.5;
  const SweepPoint q = sweep_point_from_json(to_json(p));
  CHECK(to_json(q) == to_json(p));
  p.conn = std::numeric_limits<double>::quiet_NaN();
  const SweepPoint nan_back = sweep_point_from_json(Json::parse(to_json(p).dump()));
  CHECK(std::isnan(nan_back.conn));
}

TEST_CASE("records CSV has a header and one line per record") {
  std::vector<BenchmarkRecord> recs(3);
  recs[1].failed = true;
  recs[1].error = "bad, \"quoted\"";
  const std::string csv = records_csv(recs);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.rfind("dataset,", 0) == 0);
}
