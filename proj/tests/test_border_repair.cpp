#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "fake_extend.hpp"
#include "jigsaw/border_repair.hpp"
#include "jigsaw/puzzle_gen.hpp"
#include "jigsaw/synth.hpp"
#include "test_util.hpp"

using namespace jigsaw;
namespace fs = std::filesystem;
using testutil::noise_image;

namespace {

const RepairMethod kBuiltin[] = {RepairMethod::replicate(), RepairMethod::mirror(),
                                 RepairMethod::linear()};

Tile eroded_tile(int side, std::uint64_t seed) {
  Tile t{noise_image(side, side, seed), 0, 0.14, 5};
  return t;
}

ExternalAdapter fake_command(const std::string& mode, const fs::path& log = {}) {
  ExternalAdapter a;
  a.command = std::string(FAKE_ADAPTER_PATH) + " --mode " + mode;
  if (!log.empty()) a.command += " --log " + log.string();
  return a;
}

}  // namespace

TEST_CASE("e = 0 leaves tiles alone") {
  const Tile t{noise_image(12, 12, 1), 3, 0.0, 0};
  for (const auto& m : kBuiltin) {
    const Tile r = repair_tile(t, 0, m);
    CHECK(r.pixels == t.pixels);
    CHECK(r.original_index == 3);
  }
  CHECK_THROWS_AS(repair_tile(t, -1, RepairMethod::linear()), DomainError);
}

TEST_CASE("replicate on a uniform tile") {
  const Tile t{Image(6, 6, {30, 60, 90}), 0, 0.25, 1};
  const Tile r = repair_tile(t, 2, RepairMethod::replicate());
  CHECK(r.pixels == Image(10, 10, {30, 60, 90}));
  CHECK(r.erosion_px == 0);
  CHECK(r.erosion_beta == 0.0);
}

TEST_CASE("linear continues a ramp and clamps") {
  Image img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(y, x, 0) = static_cast<std::uint8_t>(10 * x);
  const Tile r = repair_tile(Tile{img, 0, 0.3, 1}, 1, RepairMethod::linear());
  REQUIRE(r.side() == 6);
  for (int y = 0; y < 6; ++y) {
    CHECK(r.pixels.at(y, 5, 0) == 40);  // continues 0, 10, 20, 30
    CHECK(r.pixels.at(y, 0, 0) == 0);   // -10 clamps
    for (int x = 1; x < 5; ++x) CHECK(r.pixels.at(y, x, 0) == 10 * (x - 1));
    CHECK(r.pixels.at(y, 3, 1) == 0);
  }

  Image steep(3, 5);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) steep.at(y, x, 2) = static_cast<std::uint8_t>(60 * x);
  const Image wide = repair_tile(Tile{steep.crop(0, 0, 3, 3), 0, 0.3, 1}, 3, RepairMethod::linear()).pixels;
  CHECK(wide.at(4, 5, 2) == 120);
  CHECK(wide.at(4, 6, 2) == 180);
  CHECK(wide.at(4, 7, 2) == 240);
  CHECK(wide.at(4, 8, 2) == 255);
}

TEST_CASE("mirror reflects about the edge") {
  Image img(3, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) img.at(y, x, 0) = static_cast<std::uint8_t>(1 + x + 3 * y);
  const Image m = repair_tile(Tile{img, 0, 0.3, 1}, 2, RepairMethod::mirror()).pixels;
  // Row 0 of the original sits at output row 2: [2 1 | 1 2 3 | 3 2].
  CHECK(m.at(2, 0, 0) == 2);
  CHECK(m.at(2, 1, 0) == 1);
  CHECK(m.at(2, 5, 0) == 3);
  CHECK(m.at(2, 6, 0) == 2);
  CHECK(m.at(0, 2, 0) == 4);  // two rows up mirrors row 1
}

TEST_CASE("built-in methods keep the center and are deterministic") {
  const Tile t = eroded_tile(62, 2);
  for (const auto& m : kBuiltin) {
    const Tile a = repair_tile(t, 5, m);
    const Tile b = repair_tile(t, 5, m);
    CHECK(a.pixels == b.pixels);
    CHECK(a.side() == 72);
    CHECK(a.pixels.crop(5, 5, 62, 62) == t.pixels);
  }
}

TEST_CASE("repair_instance") {
  const Image img = synthesize_image(216, 216, SynthKind::Textured, 4);
  const auto clean = make_puzzle(img, {3, 3}, 0.0, 1);
  const auto same = repair_instance(clean, RepairMethod::linear());
  for (int k = 0; k < 9; ++k) CHECK(same.tiles[k].pixels == clean.tiles[k].pixels);

  const auto p = make_puzzle(img, {3, 3}, 0.14, 1);
  const auto r = repair_instance(p, RepairMethod::mirror());
  CHECK(r.erosion_px == 0);
  CHECK(r.ground_truth == p.ground_truth);
  for (int k = 0; k < 9; ++k) {
    CHECK(r.tiles[k].side() == 72);
    CHECK(r.tiles[k].original_index == p.tiles[k].original_index);
  }
  const auto none = repair_instance(p, RepairMethod::none());
  CHECK(none.erosion_px == 5);
  CHECK(none.tiles[0].pixels == p.tiles[0].pixels);
}

TEST_CASE("method names") {
  for (std::string n : {"none", "replicate", "mirror", "linear"}) CHECK(method_name(parse_method(n)) == n);
  CHECK_THROWS_AS(parse_method("gan"), DomainError);
  CHECK(adapter_from_string("http://127.0.0.1:9/x").endpoint == "http://127.0.0.1:9/x");
  CHECK(adapter_from_string("/bin/adapter --flag").command == "/bin/adapter --flag");
}

TEST_CASE("external adapter over a subprocess") {
  const fs::path work = testutil::scratch("adapter_work");
  const fs::path log = testutil::scratch("adapter_log") / "request.json";
  const Image img = synthesize_image(216, 216, SynthKind::Textured, 9);
  const auto p = make_puzzle(img, {3, 3}, 0.14, 2);

  ExternalAdapter a = fake_command("ok", log);
  a.work_dir = work;
  const auto r = repair_instance(p, RepairMethod::external(a));

  std::ifstream in(log);
  const auto req = nlohmann::json::parse(in);
  CHECK(req.at("tiles").size() == 9);
  CHECK(req.at("extension_pixels") == 5);
  CHECK(req.at("rotate_trick") == true);

  for (int k = 0; k < 9; ++k) {
    REQUIRE(r.tiles[k].side() == 72);
    // The adapter inverts the center; the client must restore it.
    CHECK(r.tiles[k].pixels.crop(5, 5, 62, 62) == p.tiles[k].pixels);
    CHECK(r.tiles[k].pixels == repair_tile(p.tiles[k], 5, RepairMethod::replicate()).pixels);
  }
  CHECK(fs::is_empty(work));
}

TEST_CASE("external adapter protocol violations") {
  const std::vector<Image> tiles{noise_image(20, 20, 1), noise_image(20, 20, 2), noise_image(20, 20, 3)};
  for (std::string mode : {"missing", "wrong-size", "error", "exit"})
    CHECK_THROWS_AS(repair_external(tiles, 2, fake_command(mode)), RepairBackendError);
  CHECK_THROWS_AS(repair_external(tiles, 2, ExternalAdapter{}), RepairBackendError);
  CHECK_THROWS_AS(repair_external(tiles, 2, adapter_from_string("/nonexistent/adapter")),
                  RepairBackendError);
}

TEST_CASE("external adapter over HTTP") {
  httplib::Server svr;
  std::string mode = "ok";
  svr.Post("/extend", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    fake::extend(body.at("request").get<std::string>(), body.at("response").get<std::string>(), mode);
    res.set_content("{}", "application/json");
  });
  const int port = svr.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/extend";
  const std::vector<Image> tiles{noise_image(16, 16, 4), noise_image(16, 16, 5)};
  const auto out = repair_external(tiles, 3, adapter_from_string(url));
  REQUIRE(out.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(out[k].width() == 22);
    CHECK(out[k].crop(3, 3, 16, 16) == tiles[k]);
  }
  mode = "missing";
  CHECK_THROWS_AS(repair_external(tiles, 3, adapter_from_string(url)), RepairBackendError);
  CHECK_THROWS_AS(repair_external(tiles, 3, adapter_from_string(url + "/nope")), RepairBackendError);

  svr.stop();
  server.join();
  CHECK_THROWS_AS(repair_external(tiles, 3, adapter_from_string(url)), RepairBackendError);
}

TEST_CASE("external method reads the adapter from the environment") {
  ::setenv("JIGSOLVE_ADAPTER", "http://127.0.0.1:1/extend", 1);
  const auto m = parse_method("external");
  CHECK(m.kind == RepairMethod::Kind::External);
  CHECK(m.adapter.endpoint == "http://127.0.0.1:1/extend");
  ::unsetenv("JIGSOLVE_ADAPTER");
}
