#include <random>

#include <doctest.h>

#include "uhpsot/fusion.hpp"

using namespace uhpsot;

namespace {

const BoundingBox kPrev{100, 100, 40, 40};

Proposals all_at(const BoundingBox& b) {
  Proposals p;
  p.boxes = {b, b, b};
  return p;
}

SimilarityScores uniform_scores(double v) {
  SimilarityScores s;
  s.values.fill(v);
  return s;
}

TrackHistory steady_history(double score, const Eigen::Vector3d& color) {
  TrackHistory h(20);
  for (int i = 0; i < 6; ++i) h.push(kPrev, score, color);
  return h;
}

}  // namespace

TEST_CASE("minimum covering rectangle") {
  CHECK(min_cover({kPrev, kPrev}) == kPrev);
  CHECK(min_cover({BoundingBox{0, 0, 10, 10}, BoundingBox{5, 5, 10, 10}}) == BoundingBox{0, 0, 15, 15});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 50);
  for (int k = 0; k < 50; ++k) {
    const BoundingBox a{u(rng), u(rng), 1 + u(rng), 1 + u(rng)}, b{u(rng), u(rng), 1 + u(rng), 1 + u(rng)},
        c{u(rng), u(rng), 1 + u(rng), 1 + u(rng)};
    const BoundingBox cover = min_cover({a, b, c});
    for (const auto& in : {a, b, c}) CHECK(iou(in, min_cover({in, cover})) == doctest::Approx(iou(in, cover)));
    for (const auto& in : {a, b, c}) {
      CHECK(in.x >= cover.x);
      CHECK(in.right() <= cover.right() + 1e-12);
    }
  }
}

TEST_CASE("quality flags") {
  std::vector<Eigen::Vector2d> still(10, kPrev.center());
  SUBCASE("everything at the previous box with high scores") {
    CHECK(assess_quality(uniform_scores(0.5), all_at(kPrev), kPrev, still) == QualityFlags{true, true, true});
  }
  SUBCASE("a jumping background proposal is unreliable") {
    std::vector<Eigen::Vector2d> jumpy;
    for (int i = 0; i < 10; ++i) jumpy.push_back(kPrev.center() + Eigen::Vector2d(i % 2 ? 100 : -100, 0));
    CHECK_FALSE(assess_quality(uniform_scores(0.9), all_at(kPrev), kPrev, jumpy).bgd);
  }
  SUBCASE("appearance below 0.08 on both filters") {
    SimilarityScores s = uniform_scores(0.5);
    s.values[0] = 0.07;
    s.values[3] = 0.07;
    const QualityFlags f = assess_quality(s, all_at(kPrev), kPrev, still);
    CHECK_FALSE(f.app);
    CHECK(f.trj);
  }
  SUBCASE("either filter suffices") {
    SimilarityScores s = uniform_scores(0.01);
    s.values[3] = 0.2;
    CHECK(assess_quality(s, all_at(kPrev), kPrev, still).app);
  }
  SUBCASE("large displacement") {
    Proposals p = all_at(kPrev);
    p[Source::trajectory] = BoundingBox{131, 100, 40, 40};
    p[Source::appearance] = BoundingBox{130, 100, 40, 40};
    const QualityFlags f = assess_quality(uniform_scores(0.5), p, kPrev, still);
    CHECK(f.app);
    CHECK_FALSE(f.trj);
  }
}

TEST_CASE("occlusion detection") {
  const Eigen::Vector3d grey(120, 120, 120);
  const TrackHistory hist = steady_history(0.4, grey);
  CHECK_FALSE(detect_occlusion(hist, 0.4, grey));
  CHECK(detect_occlusion(hist, 0.15, Eigen::Vector3d(160, 120, 120)));
  CHECK_FALSE(detect_occlusion(hist, 0.15, grey));
  CHECK_FALSE(detect_occlusion(hist, 0.3, Eigen::Vector3d(160, 120, 120)));
  CHECK(detect_occlusion(hist, 0.15, std::nullopt));

  SUBCASE("needs a full window") {
    TrackHistory short_hist(20);
    for (int i = 0; i < 4; ++i) short_hist.push(kPrev, 0.4, grey);
    CHECK_FALSE(detect_occlusion(short_hist, 0.0, Eigen::Vector3d(255, 0, 0)));
  }
  SUBCASE("invariant to scaling the scores") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int k = 0; k < 50; ++k) {
      TrackHistory a(20), b(20);
      const double c = 0.1 + 10 * u(rng);
      for (int i = 0; i < 5; ++i) {
        const double s = u(rng);
        a.push(kPrev, s, grey);
        b.push(kPrev, c * s, grey);
      }
      const double cur = u(rng) * 0.6;
      const Eigen::Vector3d col(150, 120, 120);
      CHECK(detect_occlusion(a, cur, col) == detect_occlusion(b, c * cur, col));
    }
  }
}

TEST_CASE("fusion table") {
  const FusionParams params;
  Proposals p;
  p[Source::appearance] = {100, 100, 40, 40};
  p[Source::trajectory] = {103, 101, 40, 40};
  p[Source::background] = {101, 104, 40, 40};

  SUBCASE("three good overlapping proposals merge") {
    const FusionDecision d = fuse({true, true, true}, p, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(d.box == BoundingBox{100, 100, 43, 44});
    CHECK(d.case_id == 7);
    CHECK(d.mu_selected == 10);
    CHECK(d.update_model);
  }
  SUBCASE("a long disagreement streak drops the temporal weight") {
    CHECK(fuse({true, true, true}, p, uniform_scores(0.3), kPrev, false, 3, params).mu_selected == 0);
    CHECK(fuse({true, true, true}, p, uniform_scores(0.3), kPrev, false, 2, params).mu_selected == 10);
  }
  SUBCASE("three good but apart keeps the appearance box") {
    Proposals far = p;
    far[Source::background] = {140, 100, 40, 40};
    const FusionDecision d = fuse({true, true, true}, far, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(d.box == p[Source::appearance]);
    CHECK(d.mu_selected == 15);
  }
  SUBCASE("nothing good and occluded holds the previous box") {
    const FusionDecision d = fuse({false, false, false}, p, uniform_scores(0.01), kPrev, true, 0, params);
    CHECK(d.box == kPrev);
    CHECK_FALSE(d.update_model);
    CHECK(d.occluded);
  }
  SUBCASE("nothing good and visible follows the appearance box") {
    const FusionDecision d = fuse({false, false, false}, p, uniform_scores(0.01), kPrev, false, 0, params);
    CHECK(d.box == p[Source::appearance]);
    CHECK(d.update_model);
  }
  SUBCASE("only the trajectory good and more similar") {
    SimilarityScores s;
    s.values = {0.05, 0.2, 0.0, 0.04, 0.1, 0.0};
    const FusionDecision d = fuse({false, true, false}, p, s, kPrev, false, 0, params);
    CHECK(d.box == p[Source::trajectory]);
    CHECK(d.mu_selected == 5);
  }
  SUBCASE("only the trajectory good but worse on both counts") {
    Proposals q = p;
    q[Source::trajectory] = {110, 100, 40, 40};
    SimilarityScores s;
    s.values = {0.3, 0.1, 0.0, 0.3, 0.1, 0.0};
    const FusionDecision d = fuse({false, true, false}, q, s, kPrev, false, 0, params);
    CHECK(d.box == q[Source::appearance]);
    CHECK(d.mu_selected == 15);
  }
  SUBCASE("two good overlapping merge, apart picks the steadier one") {
    const FusionDecision merged = fuse({true, false, true}, p, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(merged.box == min_cover({p[Source::appearance], p[Source::background]}));
    CHECK(merged.mu_selected == 10);
    Proposals q = p;
    q[Source::appearance] = {125, 100, 40, 40};
    const FusionDecision pick = fuse({true, false, true}, q, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(pick.box == q[Source::background]);
    CHECK(pick.mu_selected == 5);
    const FusionDecision motion = fuse({false, true, true}, q, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(motion.box == min_cover({q[Source::trajectory], q[Source::background]}));
    CHECK(motion.mu_selected == 5);
  }
  SUBCASE("appearance alone") {
    const FusionDecision d = fuse({true, false, false}, p, uniform_scores(0.3), kPrev, false, 0, params);
    CHECK(d.box == p[Source::appearance]);
    CHECK(d.mu_selected == 15);
  }
}

TEST_CASE("fusion invariants over every cell") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-30, 30), s(0, 0.5);
  for (int trial = 0; trial < 20; ++trial)
    for (int id = 0; id < 8; ++id)
      for (bool occluded : {false, true}) {
        Proposals p;
        for (auto& b : p.boxes) b = {100 + u(rng), 100 + u(rng), 40 + u(rng) / 2, 40 + u(rng) / 2};
        SimilarityScores sc;
        for (auto& v : sc.values) v = s(rng);
        const FusionDecision d = fuse(QualityFlags::from_case(id), p, sc, kPrev, occluded, trial % 5);
        CHECK(d.box.valid());
        CHECK((d.mu_selected == 15 || d.mu_selected == 10 || d.mu_selected == 5 || d.mu_selected == 0));
        CHECK(d.case_id == id);
        if (occluded) {
          CHECK(d.box == kPrev);
          CHECK_FALSE(d.update_model);
        }
        const BoundingBox c = clamp_to_frame(d.box, 160.0, 150.0);
        CHECK(c.x >= 0);
        CHECK(c.right() <= 160.0);
        CHECK(c.w > 0);
      }
  for (int id = 0; id < 8; ++id)
    CHECK(fuse(QualityFlags::from_case(id), all_at(kPrev), uniform_scores(0.2), kPrev, false, 0).box == kPrev);
}

TEST_CASE("anchor agreement") {
  Proposals p = all_at(kPrev);
  CHECK(proposals_agree(p));
  p[Source::background] = {102, 102, 40, 40};
  CHECK(proposals_agree(p));
  p[Source::background] = {103, 103, 40, 40};
  CHECK_FALSE(proposals_agree(p));
  p = all_at(kPrev);
  p.has_background = false;
  CHECK_FALSE(proposals_agree(p));
}
