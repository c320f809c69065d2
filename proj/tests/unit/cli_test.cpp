#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "uhpsot/tracker.hpp"

using namespace uhpsot;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = UHPSOT_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uhpsot_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(UHPSOT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::shared_ptr<const CNTable> table() {
  static const auto t = load_cn_table(Config{});
  return t;
}

}  // namespace

TEST_CASE("config") {
  SUBCASE("dump and load round trip") {
    Config c;
    c.set("mu_set", "12, 8, 4, 0");
    c.set("cut_threshold", "0.15");
    const fs::path file = scratch("config") / "c.cfg";
    std::ofstream(file) << "# tuned\n" << c.dump();
    const Config back = Config::load(file);
    CHECK(back.dump() == c.dump());
    CHECK(back.fusion.mu_merge == 8);
    CHECK(back.background.cut == 0.15);
    CHECK(Config::keys().size() > 40);
  }
  SUBCASE("unknown keys warn, bad values fail with the line") {
    const fs::path file = scratch("config_bad") / "c.cfg";
    std::ofstream(file) << "sim_threshold = 0.1\nfrobnicate = 3\n";
    std::vector<std::string> warnings;
    const Config c = Config::load(file, &warnings);
    CHECK(c.fusion.sim_threshold == 0.1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("frobnicate") != std::string::npos);

    std::ofstream(file) << "history_length = 20\niou_threshold = 1.5\n";
    CHECK_THROWS_WITH_AS(Config::load(file), doctest::Contains(":2:"), ConfigError);
    std::ofstream(file) << "no equals sign\n";
    CHECK_THROWS_AS(Config::load(file), ConfigError);
  }
  SUBCASE("setters") {
    Config c;
    CHECK_FALSE(c.set("nope", "1"));
    CHECK_THROWS_AS(c.set("cell_size", "four"), ConfigError);
    CHECK_THROWS_AS(c.set("mu_set", "1,2,3"), ConfigError);
    CHECK(c.set("enable_background", "false"));
    CHECK(c.set("enable_trajectory", "0"));
    CHECK(c.baseline());
  }
}

TEST_CASE("tracker contracts") {
  const Config config;
  const Sequence seq = load_sequence(kFixtures / "static");
  const BoundingBox init{seq.init_box.x - 1, seq.init_box.y - 1, seq.init_box.w, seq.init_box.h};

  SUBCASE("first frame returns the initial box") {
    Tracker t(config, table(), true);
    CHECK(t.initialize(load_image(seq.frames[0]), init) == init);
    CHECK_THROWS_AS(t.initialize(load_image(seq.frames[0]), BoundingBox{0, 0, 0, 5}), FeatureError);
  }
  SUBCASE("stepping before initialisation") {
    Tracker t(config, table(), true);
    CHECK_THROWS_AS(t.step(load_image(seq.frames[1])), std::logic_error);
  }
  SUBCASE("static scene is a fixed point") {
    // Sub-pixel peak refinement leaves residue far below a hundredth of a pixel.
    const TrackRun run = run_track(config, seq, std::nullopt, table());
    for (const auto& b : run.boxes) {
      CHECK(std::abs(b.x - seq.init_box.x) < 1e-2);
      CHECK(std::abs(b.y - seq.init_box.y) < 1e-2);
      CHECK(std::abs(b.w - seq.init_box.w) < 1e-2);
      CHECK(std::abs(b.h - seq.init_box.h) < 1e-2);
    }
    CHECK(run.result.fps == doctest::Approx(double(seq.size()) / run.seconds));
    CHECK(run.result.fps > 0);
  }
  SUBCASE("grayscale mode") {
    const TrackRun run = run_track(config, seq, std::nullopt, table(), true);
    CHECK(run.result.auc > 0.9);
  }
}

TEST_CASE("occlusion freezes the box and tracking resumes") {
  const Sequence seq = load_sequence(kFixtures / "occlusion");
  const TrackRun run = run_track(Config{}, seq, std::nullopt, table());
  std::size_t first_hidden = seq.size(), last_hidden = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!seq.visible[i]) {
      first_hidden = std::min(first_hidden, i);
      last_hidden = i;
    }
  REQUIRE(first_hidden == 15);
  REQUIRE(last_hidden == 24);
  for (std::size_t i = first_hidden; i <= last_hidden; ++i) CHECK(run.boxes[i] == run.boxes[first_hidden - 1]);
  for (std::size_t i = last_hidden + 3; i < seq.size(); ++i) CHECK(iou(run.boxes[i], seq.ground_truth[i]) > 0.7);
}

TEST_CASE("determinism and causality") {
  const Config config;
  const Sequence seq = load_sequence(kFixtures / "moving");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const TrackRun ra = run_track(config, seq, a, table());
  run_track(config, seq, b, table());
  CHECK(slurp(a / "moving.txt") == slurp(b / "moving.txt"));

  Sequence prefix = seq;
  prefix.frames.resize(17);
  prefix.ground_truth.resize(17);
  prefix.visible.resize(17);
  const TrackRun rp = run_track(config, prefix, std::nullopt, table());
  REQUIRE(rp.boxes.size() == 17);
  for (std::size_t i = 0; i < 17; ++i) CHECK(rp.boxes[i] == ra.boxes[i]);
}

TEST_CASE("command line") {
  SUBCASE("usage errors exit with 2") {
    CHECK(cli("") == 2);
    CHECK(cli("bench /no/such/dataset") == 2);
    CHECK(cli("track /no/such/sequence") == 2);
    CHECK(cli("bench " + kFixtures.string() + " --jobs 0") == 2);
    CHECK(cli("track " + kFixtures.string() + " --seq static --frobnicate") == 2);
    CHECK(cli("plot /no/such/summary.json") == 2);
  }
  SUBCASE("track writes boxes and a one-entry summary") {
    const fs::path out = scratch("track");
    REQUIRE(cli("track " + kFixtures.string() + " --seq static --out " + out.string()) == 0);
    CHECK(fs::is_regular_file(out / "static.txt"));
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(j["sequences"].size() == 1);
  }
  SUBCASE("bench output does not depend on the worker count, plot renders it") {
    const fs::path one = scratch("bench1"), three = scratch("bench3"), plots = scratch("plots");
    REQUIRE(cli("bench " + kFixtures.string() + " --jobs 1 --out " + one.string()) == 0);
    REQUIRE(cli("bench " + kFixtures.string() + " --jobs 3 --out " + three.string()) == 0);
    for (const char* name : {"static", "moving", "occlusion"}) {
      const std::string file = std::string(name) + ".txt";
      CHECK(slurp(one / file) == slurp(three / file));
    }
    CHECK(fs::is_regular_file(one / "success.csv"));
    CHECK(fs::is_regular_file(one / "precision.svg"));
    const auto j = nlohmann::json::parse(slurp(one / "summary.json"));
    CHECK(j["sequences"].size() == 3);

    REQUIRE(cli("plot " + (one / "summary.json").string() + " --out " + plots.string()) == 0);
    const std::string svg = slurp(plots / "success.svg");
    const std::regex mean_line("data-label=\"mean\"[^>]*points=\"([^\"]*)\"");
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, mean_line));
    const std::string points = m[1];
    CHECK(std::count(points.begin(), points.end(), ',') == 21);
  }
}
