// Command-line front end: track one sequence, benchmark a dataset, or plot a
// saved summary.

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "uhpsot/report.hpp"
#include "uhpsot/tracker.hpp"

namespace fs = std::filesystem;
using namespace uhpsot;

namespace {

constexpr int kUsage = 2;

struct Options {
  fs::path config_file;
  fs::path out = "results";
  std::vector<std::string> seqs;
  unsigned jobs = 1;
  bool no_color = false;
  std::string log_level = "info";
  fs::path input;
};

Config load_config(const Options& o) {
  if (o.config_file.empty()) return Config{};
  std::vector<std::string> warnings;
  Config c = Config::load(o.config_file, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  return c;
}

std::shared_ptr<const CNTable> color_table(const Config& c, bool no_color) {
  if (no_color || !c.use_color) return nullptr;
  return load_cn_table(c);
}

SequenceReport track_one(const Config& config, const fs::path& dir, const fs::path& out, std::shared_ptr<const CNTable> cn,
                         bool no_color) {
  const Sequence seq = load_sequence(dir);
  const TrackRun run = run_track(config, seq, out, std::move(cn), no_color);
  return make_report(seq.name, run.result, seq.size(), run.seconds);
}

void print_report(const SequenceReport& r) {
  std::cout << fmt::format("{:<20} frames {:>5}  AUC {:.3f}  DP@20 {:.3f}  {:.1f} fps{}\n", r.name, r.frames, r.auc, r.dp20, r.fps,
                           r.fragile ? "  [fragile]" : "");
}

int cmd_track(const Options& o) {
  fs::path dir = o.input;
  if (o.seqs.size() > 1) throw CLI::ValidationError("--seq", "track takes a single sequence");
  if (!o.seqs.empty()) dir /= o.seqs.front();
  if (!fs::is_directory(dir)) throw CLI::ValidationError("sequence", "no such sequence directory: " + dir.string());
  const Config config = load_config(o);
  const SequenceReport r = track_one(config, dir, o.out, color_table(config, o.no_color), o.no_color);
  write_summary(o.out / "summary.json", aggregate({r}));
  print_report(r);
  return 0;
}

int cmd_bench(const Options& o) {
  if (!fs::is_directory(o.input)) throw CLI::ValidationError("dataset", "no such dataset directory: " + o.input.string());
  std::vector<fs::path> dirs = list_sequences(o.input);
  if (!o.seqs.empty()) {
    std::vector<fs::path> picked;
    for (const auto& name : o.seqs) {
      const auto it = std::find_if(dirs.begin(), dirs.end(), [&](const fs::path& d) { return d.filename() == name; });
      if (it == dirs.end()) throw DatasetError("sequence not found in dataset: " + name);
      picked.push_back(*it);
    }
    dirs = picked;
  }
  if (dirs.empty()) throw DatasetError("no sequences under " + o.input.string());

  const Config config = load_config(o);
  const auto cn = color_table(config, o.no_color);
  fs::create_directories(o.out);

  std::vector<std::optional<SequenceReport>> results(dirs.size());
  std::vector<std::string> failures;
  std::mutex sink;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < dirs.size();) {
      try {
        SequenceReport r = track_one(config, dirs[i], o.out, cn, o.no_color);
        std::lock_guard lock(sink);
        print_report(r);
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        std::lock_guard lock(sink);
        failures.push_back(dirs[i].filename().string() + ": " + e.what());
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, unsigned(dirs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<SequenceReport> done;
  for (auto& r : results)
    if (r) done.push_back(std::move(*r));
  for (const auto& f : failures) spdlog::error("{}", f);
  if (done.empty()) return 1;

  const Summary summary = aggregate(std::move(done));
  write_summary(o.out / "summary.json", summary);
  write_plots(o.out, summary);
  std::cout << fmt::format("{} sequences  mean AUC {:.3f}  mean DP@20 {:.3f}  mean {:.1f} fps\n", summary.sequences.size(),
                           summary.mean_auc, summary.mean_dp20, summary.mean_fps);
  for (const auto& r : summary.sequences)
    if (r.fragile) std::cout << "fragile: " << r.name << fmt::format(" (AUC {:.3f})\n", r.auc);
  return failures.empty() ? 0 : 1;
}

int cmd_plot(const Options& o) {
  if (!fs::is_regular_file(o.input)) throw CLI::ValidationError("summary", "no such summary file: " + o.input.string());
  const Summary summary = read_summary(o.input);
  write_plots(o.out, summary);
  std::cout << fmt::format("wrote {} and {} (AUC {:.3f}, DP@20 {:.3f})\n", (o.out / "success.svg").string(),
                           (o.out / "precision.svg").string(), summary.mean_auc, summary.mean_dp20);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised single-object tracker"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "results directory");
    sub->add_option("--log-level", o.log_level, "trace, debug, info, warn, error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  };
  auto* track = app.add_subcommand("track", "track one sequence and score it");
  track->add_option("sequence", o.input, "sequence directory, or dataset root with --seq")->required();
  track->add_option("--seq", o.seqs, "sequence name under the dataset root");
  track->add_flag("--no-color", o.no_color, "grayscale features and occlusion test");
  common(track);

  auto* bench = app.add_subcommand("bench", "track every sequence of a dataset");
  bench->add_option("dataset", o.input, "dataset root in OTB layout")->required();
  bench->add_option("--seq", o.seqs, "restrict to these sequences (repeatable)");
  bench->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  bench->add_flag("--no-color", o.no_color, "grayscale features and occlusion test");
  common(bench);

  auto* plot = app.add_subcommand("plot", "render success/precision curves from summary.json");
  plot->add_option("summary", o.input, "summary.json written by track or bench")->required();
  common(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    if (*track) return cmd_track(o);
    if (*bench) return cmd_bench(o);
    return cmd_plot(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
