#include <fstream>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "uhpsot/eval.hpp"
#include "uhpsot/image.hpp"
#include "uhpsot/report.hpp"

using namespace uhpsot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uhpsot_eval_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

void write_frames(const fs::path& dir, int count) {
  fs::create_directories(dir);
  Frame f(16, 12, 3);
  for (int i = 1; i <= count; ++i) {
    std::fill(f.pixels.begin(), f.pixels.end(), std::uint8_t(10 * i));
    char name[32];
    std::snprintf(name, sizeof name, "%04d.png", i);
    save_png(dir / name, f);
  }
}

}  // namespace

TEST_CASE("annotation lines") {
  CHECK(parse_box_line("231,92,68,119", 1) == BoundingBox{231, 92, 68, 119});
  CHECK(parse_box_line("231\t92\t68\t119", 1) == BoundingBox{231, 92, 68, 119});
  CHECK(parse_box_line("  1.5 2.25  3 4\r", 1) == BoundingBox{1.5, 2.25, 3, 4});
  CHECK_FALSE(parse_box_line("NaN,NaN,NaN,NaN", 1).valid());
  CHECK_THROWS_WITH_AS(parse_box_line("1,2,x,4", 7), doctest::Contains("line 7"), DatasetError);
  CHECK_THROWS_AS(parse_box_line("1,2,3", 3), DatasetError);
  CHECK_THROWS_AS(parse_box_line("1,2,3,4,5", 3), DatasetError);
}

TEST_CASE("sequence loading") {
  SUBCASE("occlusion flags mask frames") {
    const fs::path root = scratch("lasot") / "toy-1";
    write_frames(root / "img", 5);
    write_text(root / "groundtruth.txt", "1,1,4,4\n2,1,4,4\n3,1,4,4\n4,1,4,4\n5,1,4,4\n");
    write_text(root / "full_occlusion.txt", "0,0,1,1,0");
    write_text(root / "out_of_view.txt", "0,0,0,0,1");
    const Sequence s = load_sequence(root);
    CHECK(s.name == "toy-1");
    CHECK(s.size() == 5);
    CHECK(s.visible == std::vector<bool>{true, true, false, false, false});
    CHECK(s.init_box == BoundingBox{1, 1, 4, 4});
    CHECK(s.frames[2].filename() == "0003.png");
  }
  SUBCASE("length mismatch truncates") {
    const fs::path root = scratch("trunc") / "seq";
    write_frames(root / "img", 4);
    write_text(root / "groundtruth_rect.txt", "1,1,4,4\n2,1,4,4\n3,1,4,4\n");
    CHECK(load_sequence(root).size() == 3);
  }
  SUBCASE("bad line reports its number") {
    const fs::path root = scratch("bad") / "seq";
    write_frames(root / "img", 2);
    write_text(root / "groundtruth_rect.txt", "1,1,4,4\n2,oops,4,4\n");
    CHECK_THROWS_WITH_AS(load_sequence(root), doctest::Contains("line 2"), DatasetError);
  }
  SUBCASE("dataset listing") {
    const fs::path root = scratch("list");
    for (const char* n : {"b", "a"}) {
      write_frames(root / n / "img", 1);
      write_text(root / n / "groundtruth_rect.txt", "1,1,2,2\n");
    }
    fs::create_directories(root / "not_a_sequence");
    const auto seqs = list_sequences(root);
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].filename() == "a");
  }
}

TEST_CASE("box file round trip") {
  const fs::path dir = scratch("boxes");
  const std::vector<BoundingBox> boxes{{1.5, 2, 30, 40}, {2.25, 3, 31, 39}};
  write_boxes(dir / "x.txt", boxes);
  CHECK(read_boxes(dir / "x.txt") == boxes);
}

TEST_CASE("overlap and centre error") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BoundingBox{20, 20, 5, 5}) == 0.0);
  CHECK(iou(a, BoundingBox{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
  CHECK(center_error(a, a) == 0.0);
  CHECK(center_error(a, BoundingBox{3, 4, 10, 10}) == doctest::Approx(5.0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 20);
  for (int k = 0; k < 100; ++k) {
    const BoundingBox p{u(rng), u(rng), 1 + u(rng), 1 + u(rng)}, q{u(rng), u(rng), 1 + u(rng), 1 + u(rng)};
    CHECK(iou(p, q) == iou(q, p));
    CHECK(iou(p, q) >= 0.0);
    CHECK(iou(p, q) <= 1.0);
    CHECK(center_error(p, q) == center_error(q, p));
  }
}

TEST_CASE("summaries") {
  SUBCASE("strict success threshold") {
    const std::vector<double> ious{1, 0.5, 0}, errors{0, 0, 0};
    const EvalResult r = summarize(ious, errors);
    CHECK(r.success.size() == 21);
    CHECK(r.precision.size() == 51);
    CHECK(r.success[10] == doctest::Approx(1.0 / 3.0));
    CHECK(r.dp20 == 1.0);
  }
  SUBCASE("perfect overlap loses only the last threshold") {
    const std::vector<double> ious{1, 1, 1}, errors{0, 0, 0};
    CHECK(summarize(ious, errors).auc == doctest::Approx(20.0 / 21.0));
  }
  SUBCASE("empty input") {
    const std::vector<double> none;
    CHECK_THROWS_AS(summarize(none, none), std::invalid_argument);
  }
  SUBCASE("enumeration oracle, monotone curves, order invariance") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> ious(40), errors(40);
      for (int i = 0; i < 40; ++i) {
        ious[std::size_t(i)] = u(rng);
        errors[std::size_t(i)] = 60 * u(rng);
      }
      const EvalResult r = summarize(ious, errors);
      const oracle::Curves want = oracle::enumerate_curves(ious, errors);
      CHECK(r.auc == doctest::Approx(want.auc));
      CHECK(r.dp20 == doctest::Approx(want.dp20));
      for (std::size_t i = 1; i < r.success.size(); ++i) CHECK(r.success[i] <= r.success[i - 1]);
      for (std::size_t i = 1; i < r.precision.size(); ++i) CHECK(r.precision[i] >= r.precision[i - 1]);
      std::shuffle(ious.begin(), ious.end(), rng);
      std::shuffle(errors.begin(), errors.end(), rng);
      const EvalResult s = summarize(ious, errors);
      CHECK(s.auc == r.auc);
      CHECK(s.dp20 == r.dp20);
    }
  }
}

TEST_CASE("evaluation skips hidden frames") {
  Sequence seq;
  seq.name = "x";
  seq.frames.resize(3);
  seq.ground_truth = {{0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}};
  seq.visible = {true, false, true};
  const std::vector<BoundingBox> pred{{0, 0, 10, 10}, {50, 50, 10, 10}, {0, 0, 10, 10}};
  const EvalResult r = evaluate(pred, seq);
  CHECK(r.ious.size() == 2);
  CHECK(r.dp20 == 1.0);
}

TEST_CASE("summary report") {
  EvalResult a = summarize(std::vector<double>{0.9, 0.8}, std::vector<double>{1, 2});
  EvalResult b = summarize(std::vector<double>{0.3, 0.1}, std::vector<double>{30, 40});
  const Summary s = aggregate({make_report("Coupon", b, 2, 0.5), make_report("Basketball", a, 2, 0.25)});
  REQUIRE(s.sequences.size() == 2);
  CHECK(s.sequences[0].name == "Basketball");
  CHECK(s.sequences[1].fragile);
  CHECK_FALSE(s.sequences[0].fragile);
  CHECK(s.mean_auc == doctest::Approx((a.auc + b.auc) / 2));
  CHECK(s.sequences[0].fps == doctest::Approx(8.0));

  const fs::path dir = scratch("summary");
  write_summary(dir / "summary.json", s);
  const Summary back = read_summary(dir / "summary.json");
  CHECK(back.sequences.size() == 2);
  CHECK(back.mean_auc == doctest::Approx(s.mean_auc));
  CHECK(back.sequences[1].success == s.sequences[1].success);

  const std::string svg = render_svg(s, true);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("data-label=\"mean\"") != std::string::npos);

  write_text(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(read_summary(dir / "broken.json"), DatasetError);
}
