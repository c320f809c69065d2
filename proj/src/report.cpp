#include "uhpsot/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace uhpsot {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool is_fragile_sequence(const std::string& name) {
  static constexpr std::array<const char*, 3> kFragile{"Bird2", "Coupon", "Freeman4"};
  return std::any_of(kFragile.begin(), kFragile.end(), [&](const char* f) { return name == f; });
}

SequenceReport make_report(const std::string& name, const EvalResult& result, std::size_t frames, double seconds) {
  SequenceReport r;
  r.name = name;
  r.frames = frames;
  r.seconds = seconds;
  r.auc = result.auc;
  r.dp20 = result.dp20;
  r.fps = seconds > 0 ? double(frames) / seconds : result.fps;
  r.success = result.success;
  r.precision = result.precision;
  r.fragile = is_fragile_sequence(name);
  return r;
}

Summary aggregate(std::vector<SequenceReport> sequences) {
  std::sort(sequences.begin(), sequences.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  Summary s;
  s.success.assign(kSuccessPoints, 0.0);
  s.precision.assign(kPrecisionPoints, 0.0);
  const double n = double(sequences.size());
  for (const auto& r : sequences) {
    s.mean_auc += r.auc / n;
    s.mean_dp20 += r.dp20 / n;
    s.mean_fps += r.fps / n;
    for (std::size_t i = 0; i < s.success.size() && i < r.success.size(); ++i) s.success[i] += r.success[i] / n;
    for (std::size_t i = 0; i < s.precision.size() && i < r.precision.size(); ++i) s.precision[i] += r.precision[i] / n;
  }
  s.sequences = std::move(sequences);
  return s;
}

void write_summary(const fs::path& file, const Summary& summary) {
  json seqs = json::array();
  for (const auto& r : summary.sequences) {
    seqs.push_back({{"name", r.name},
                    {"frames", r.frames},
                    {"seconds", r.seconds},
                    {"auc", r.auc},
                    {"dp20", r.dp20},
                    {"fps", r.fps},
                    {"fragile", r.fragile},
                    {"success", r.success},
                    {"precision", r.precision}});
  }
  std::vector<double> iou_grid, px_grid;
  for (int i = 0; i < kSuccessPoints; ++i) iou_grid.push_back(success_threshold(i));
  for (int p = 0; p < kPrecisionPoints; ++p) px_grid.push_back(p);
  const json doc = {{"protocol", "OPE"},
                    {"success_thresholds", iou_grid},
                    {"precision_thresholds", px_grid},
                    {"mean_auc", summary.mean_auc},
                    {"mean_dp20", summary.mean_dp20},
                    {"mean_fps", summary.mean_fps},
                    {"success", summary.success},
                    {"precision", summary.precision},
                    {"sequences", seqs}};
  std::ofstream out(file);
  if (!out) throw DatasetError("cannot write " + file.string());
  out << doc.dump(2) << '\n';
  if (!out) throw DatasetError("write failed: " + file.string());
}

Summary read_summary(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("cannot open " + file.string());
  std::vector<SequenceReport> seqs;
  try {
    const json doc = json::parse(in);
    for (const auto& j : doc.at("sequences")) {
      SequenceReport r;
      r.name = j.at("name").get<std::string>();
      r.frames = j.value("frames", std::size_t{0});
      r.seconds = j.value("seconds", 0.0);
      r.auc = j.at("auc").get<double>();
      r.dp20 = j.at("dp20").get<double>();
      r.fps = j.value("fps", 0.0);
      r.fragile = j.value("fragile", is_fragile_sequence(r.name));
      r.success = j.at("success").get<std::vector<double>>();
      r.precision = j.at("precision").get<std::vector<double>>();
      seqs.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DatasetError(file.string() + ": " + e.what());
  }
  return aggregate(std::move(seqs));
}

void write_curve_csv(const fs::path& dir, const Summary& summary) {
  const auto write = [&](const fs::path& file, bool success) {
    std::ofstream out(file);
    if (!out) throw DatasetError("cannot write " + file.string());
    out << (success ? "iou_threshold" : "pixel_threshold");
    for (const auto& r : summary.sequences) out << ',' << r.name;
    out << ",mean\n" << std::setprecision(6) << std::fixed;
    const int n = success ? kSuccessPoints : kPrecisionPoints;
    for (int i = 0; i < n; ++i) {
      out << (success ? success_threshold(i) : double(i));
      for (const auto& r : summary.sequences) {
        const auto& c = success ? r.success : r.precision;
        out << ',' << (std::size_t(i) < c.size() ? c[i] : 0.0);
      }
      out << ',' << (success ? summary.success : summary.precision)[i] << '\n';
    }
  };
  write(dir / "success.csv", true);
  write(dir / "precision.csv", false);
}

std::string render_svg(const Summary& summary, bool success) {
  constexpr double W = 480, H = 360, L = 56, R = 16, T = 32, B = 48;
  const double xmax = success ? 1.0 : double(kPrecisionPoints - 1);
  const int n = success ? kSuccessPoints : kPrecisionPoints;
  const auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  const auto py = [&](double y) { return H - B - (H - T - B) * y; };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << (success ? "Success plot of OPE" : "Precision plot of OPE") << "</text>\n";
  s << "<g stroke=\"#ccc\" stroke-width=\"0.5\">\n";
  for (int k = 0; k <= 10; k += 2) {
    s << "<line x1=\"" << px(0) << "\" y1=\"" << py(k / 10.0) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(k / 10.0) << "\"/>\n";
  }
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int k = 0; k <= 10; k += 2)
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(k / 10.0) + 3 << "\" text-anchor=\"end\">" << k / 10.0 << "</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = xmax * k / 5.0;
    s << "<text x=\"" << px(x) << "\" y=\"" << H - B + 14 << "\" text-anchor=\"middle\">" << x << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << (success ? "Overlap threshold" : "Location error threshold (px)") << "</text>\n</g>\n";
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const auto polyline = [&](const std::vector<double>& c, const char* colour, double width, const std::string& label) {
    s << "<polyline data-label=\"" << label << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width << "\" points=\"";
    for (int i = 0; i < n && std::size_t(i) < c.size(); ++i) {
      const double x = success ? success_threshold(i) : double(i);
      s << (i ? " " : "") << px(x) << ',' << py(c[i]);
    }
    s << "\"/>\n";
  };
  for (const auto& r : summary.sequences) polyline(success ? r.success : r.precision, "#9bb", 0.6, r.name);
  polyline(success ? summary.success : summary.precision, "#c00", 2.0, "mean");

  std::ostringstream score;
  score << std::fixed << std::setprecision(3) << (success ? summary.mean_auc : summary.mean_dp20);
  s << "<text x=\"" << W - R - 6 << "\" y=\"" << T + 16 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c00\">"
    << (success ? "AUC " : "DP@20 ") << score.str() << "</text>\n</svg>\n";
  return s.str();
}

void write_plots(const fs::path& dir, const Summary& summary) {
  fs::create_directories(dir);
  write_curve_csv(dir, summary);
  for (bool success : {true, false}) {
    const fs::path file = dir / (success ? "success.svg" : "precision.svg");
    std::ofstream out(file);
    if (!out) throw DatasetError("cannot write " + file.string());
    out << render_svg(summary, success);
  }
}

}  // namespace uhpsot
