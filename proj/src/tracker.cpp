#include "uhpsot/tracker.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace uhpsot {

std::shared_ptr<const CNTable> load_cn_table(const Config& config) {
  if (!config.use_color) return nullptr;
  if (!std::filesystem::is_regular_file(config.cn_table))
    throw FeatureError("color-name table not found: " + config.cn_table.string());
  return std::make_shared<const CNTable>(CNTable::load(config.cn_table));
}

Eigen::Vector3d mean_color(const Frame& frame, const BoundingBox& box) {
  const int x0 = std::clamp(int(std::floor(box.x)), 0, frame.width - 1);
  const int y0 = std::clamp(int(std::floor(box.y)), 0, frame.height - 1);
  const int x1 = std::clamp(int(std::ceil(box.right())), x0 + 1, frame.width);
  const int y1 = std::clamp(int(std::ceil(box.bottom())), y0 + 1, frame.height);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < 3; ++c) sum(c) += frame.at(x, y, frame.channels == 3 ? c : 0);
  return sum / double((x1 - x0) * (y1 - y0));
}

// ---------------------------------------------------------------------------

StrcfTracker::StrcfTracker(const Config& config, std::shared_ptr<const CNTable> cn, bool color)
    : mu_(config.dcf.mu), model_(config.dcf, std::move(cn), color && config.use_color) {}

BoundingBox StrcfTracker::initialize(const Frame& frame, const BoundingBox& box) {
  model_.initialize(FramePlanes::from(frame, model_.params().cell_size > 0 && frame.is_color()), box);
  previous_ = box;
  frame_index_ = 1;
  return box;
}

BoundingBox StrcfTracker::track(const Frame& frame) { return track(FramePlanes::from(frame, frame.is_color())); }

BoundingBox StrcfTracker::track(const FramePlanes& planes) {
  ++frame_index_;
  const AppearanceProposal p = model_.propose(planes, previous_);
  const BoundingBox box = clamp_to_frame(p.box, double(planes.width), double(planes.height));
  model_.set_latest(model_.learn(planes, box, mu_, model_.latest(), frame_index_));
  previous_ = box;
  return box;
}

// ---------------------------------------------------------------------------

Tracker::Tracker(Config config, std::shared_ptr<const CNTable> cn, bool color)
    : config_(std::move(config)), color_(color && config_.use_color), model_(config_.dcf, cn, color_) {
  state_.history = TrackHistory(config_.trajectory.history);
  if (config_.baseline()) baseline_.emplace(config_, std::move(cn), color_);
}

BoundingBox Tracker::initialize(const Frame& frame, const BoundingBox& box) {
  if (!box.valid()) throw FeatureError("degenerate box");
  state_ = TrackerState{};
  state_.history = TrackHistory(config_.trajectory.history);
  state_.previous = box;
  state_.frame_index = 1;
  log_ = StepLog{};
  log_.frame = 1;
  log_.decision.box = box;

  if (baseline_) {
    baseline_->initialize(frame, box);
    return box;
  }
  const FramePlanes planes = FramePlanes::from(frame, color_);
  model_.initialize(planes, box);
  state_.bank.latest = model_.latest();
  state_.bank.anchor = model_.latest();
  state_.bank.anchor_frame = 1;
  state_.previous_gray = frame.gray();
  state_.history.push(box, model_.similarity(state_.bank.latest, planes, box), mean_color(frame, box));
  return box;
}

BoundingBox Tracker::step(const Frame& frame) {
  if (state_.frame_index < 1) throw std::logic_error("tracker not initialised");
  ++state_.frame_index;
  log_ = StepLog{};
  log_.frame = state_.frame_index;

  if (baseline_) {
    const BoundingBox box = baseline_->track(FramePlanes::from(frame, color_));
    state_.previous = box;
    log_.decision.box = box;
    return box;
  }
  return full_step(frame, FramePlanes::from(frame, color_));
}

BoundingBox Tracker::full_step(const Frame& frame, const FramePlanes& planes) {
  const BoundingBox prev = state_.previous;
  const double fw = frame.width, fh = frame.height;
  const Plane gray = frame.gray();

  AppearanceProposal app;
  try {
    app = model_.propose(planes, prev);
  } catch (const std::exception& e) {
    spdlog::warn("frame {}: appearance search failed ({}), holding previous box", state_.frame_index, e.what());
    state_.history.push_box(prev);
    state_.previous_gray = gray;
    log_.degraded = true;
    log_.decision.box = prev;
    return prev;
  }
  app.box = clamp_to_frame(app.box, fw, fh);
  log_.appearance = app;

  FusionDecision decision;
  Proposals proposals;
  SimilarityScores scores;
  QualityFlags flags;
  bool degraded = false;
  try {
    proposals[Source::appearance] = app.box;

    // Trajectory centre, once at least one displacement is known.
    const bool have_trj = config_.enable_trajectory && state_.history.count() >= 2;
    const Eigen::Vector2d trj_center = predict_center(state_.history, config_.trajectory).value_or(prev.center());

    // Both motion proposals take the residual shape estimate when one passes
    // the size-trajectory test, and the appearance size otherwise.
    Eigen::Vector2d shape = app.box.size();
    proposals.has_background = false;
    if (config_.enable_background) {
      const BackgroundProposal bg = propose_background(state_.previous_gray, gray, prev, config_.background);
      if (bg.box) {
        // The residual of a translating object covers both its old and new
        // positions: shift by half the last step and shrink by the full step.
        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        if (state_.history.count() >= 2) {
          const auto& boxes = state_.history.boxes();
          step = boxes[boxes.size() - 1].center() - boxes[boxes.size() - 2].center();
        }
        if (bg.size) {
          const Eigen::Vector2d raw = (*bg.size - step.cwiseAbs()).cwiseMax(1.0);
          if (const auto accepted = filter_size_estimate(raw, state_.history, config_.trajectory)) shape = *accepted;
        }
        const Eigen::Vector2d c = bg.box->center() + step / 2;
        proposals[Source::background] = clamp_to_frame(BoundingBox::from_center(c, shape.x(), shape.y()), fw, fh);
        proposals.has_background = true;
        state_.background_centers.push_back(proposals[Source::background].center());
        if (state_.background_centers.size() > config_.fusion.bgd_std_window) state_.background_centers.erase(state_.background_centers.begin());
      }
    }
    if (!proposals.has_background) proposals[Source::background] = prev;
    proposals[Source::trajectory] = have_trj ? clamp_to_frame(BoundingBox::from_center(trj_center, shape.x(), shape.y()), fw, fh) : prev;

    scores = similarity_scores(state_.bank, proposals, planes, model_);
    flags = assess_quality(scores, proposals, prev, state_.background_centers, config_.fusion);
    flags.trj = flags.trj && have_trj;
    flags.bgd = flags.bgd && config_.enable_background && proposals.has_background;

    bool occluded = false;
    if (flags.case_id() == 0) {
      const std::optional<Eigen::Vector3d> color = color_ ? std::optional(mean_color(frame, app.box)) : std::nullopt;
      occluded = detect_occlusion(state_.history, scores.latest(Source::appearance), color, config_.fusion);
    }
    decision = fuse(flags, proposals, scores, prev, occluded, state_.disagreement_streak, config_.fusion);
  } catch (const std::exception& e) {
    spdlog::warn("frame {}: proposal fusion failed ({}), using the appearance box", state_.frame_index, e.what());
    degraded = true;
    decision = FusionDecision{};
    decision.box = app.box;
    decision.mu_selected = config_.fusion.mu_alone;
    decision.used[std::size_t(Source::appearance)] = true;
    scores = SimilarityScores{};
    scores.values[0] = app.score;
  }
  decision.box = clamp_to_frame(decision.box, fw, fh);
  const BoundingBox box = decision.box;
  state_.disagreement_streak = flags.case_id() == 7 ? 0 : state_.disagreement_streak + 1;

  // Model update, skipped on occlusion or when nothing moved.
  const bool moved = center_error(box, prev) >= config_.min_motion_px || box.w != prev.w || box.h != prev.h;
  bool updated = false;
  if (decision.update_model && moved) {
    state_.bank.latest = model_.learn(planes, box, decision.mu_selected, state_.bank.latest, state_.frame_index);
    model_.set_latest(state_.bank.latest);
    updated = true;
  }
  bool refreshed = false;
  if (!degraded && proposals_agree(proposals, config_.fusion)) {
    state_.bank.anchor = state_.bank.latest;
    state_.bank.anchor_frame = state_.frame_index;
    refreshed = true;
  }

  if (decision.occluded) {
    state_.history.push_box(box);
  } else {
    state_.history.push(box, scores.latest(Source::appearance), mean_color(frame, box));
  }
  state_.previous = box;
  state_.previous_gray = gray;

  log_.proposals = proposals;
  log_.scores = scores;
  log_.flags = flags;
  log_.decision = decision;
  log_.model_updated = updated;
  log_.anchor_refreshed = refreshed;
  log_.degraded = degraded;
  spdlog::debug(
      "frame {} case {} flags ({},{},{}) mu {} occ {} upd {} app [{:.1f},{:.1f},{:.1f},{:.1f}] {:.3f} trj [{:.1f},{:.1f},{:.1f},{:.1f}] {:.3f} "
      "bgd{} [{:.1f},{:.1f},{:.1f},{:.1f}] {:.3f} -> [{:.1f},{:.1f},{:.1f},{:.1f}]",
      state_.frame_index, decision.case_id, int(flags.app), int(flags.trj), int(flags.bgd), decision.mu_selected, int(decision.occluded),
      int(updated), proposals.boxes[0].x, proposals.boxes[0].y, proposals.boxes[0].w, proposals.boxes[0].h, scores.best(Source::appearance),
      proposals.boxes[1].x, proposals.boxes[1].y, proposals.boxes[1].w, proposals.boxes[1].h, scores.best(Source::trajectory),
      proposals.has_background ? "" : "(none)", proposals.boxes[2].x, proposals.boxes[2].y, proposals.boxes[2].w, proposals.boxes[2].h,
      scores.best(Source::background), box.x, box.y, box.w, box.h);
  return box;
}

// ---------------------------------------------------------------------------

TrackRun run_track(const Config& config, const Sequence& seq, const std::optional<std::filesystem::path>& out_dir,
                   std::shared_ptr<const CNTable> cn, bool force_gray) {
  using clock = std::chrono::steady_clock;
  TrackRun run;
  run.boxes.reserve(seq.size());
  const auto to_internal = [](BoundingBox b) { return BoundingBox{b.x - 1, b.y - 1, b.w, b.h}; };
  const auto to_external = [](BoundingBox b) { return BoundingBox{b.x + 1, b.y + 1, b.w, b.h}; };

  Frame first = load_image(seq.frames.front());
  const bool color = !force_gray && config.use_color && first.is_color() && !first.has_equal_channels();
  Tracker tracker(config, color ? cn : nullptr, color);

  clock::duration busy{};
  auto t0 = clock::now();
  run.boxes.push_back(to_external(tracker.initialize(first, to_internal(seq.init_box))));
  busy += clock::now() - t0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    Frame f = load_image(seq.frames[i]);
    f.index = int(i) + 1;
    t0 = clock::now();
    run.boxes.push_back(to_external(tracker.step(f)));
    busy += clock::now() - t0;
  }
  run.seconds = std::chrono::duration<double>(busy).count();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_boxes(*out_dir / (seq.name + ".txt"), run.boxes);
  }
  run.result = evaluate(run.boxes, seq);
  run.result.fps = run.seconds > 0 ? double(seq.size()) / run.seconds : 0.0;
  return run;
}

}  // namespace uhpsot
