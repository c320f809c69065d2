#include "uhpsot/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

namespace uhpsot {

namespace fs = std::filesystem;

BoundingBox parse_box_line(const std::string& line, std::size_t line_no) {
  std::string s = line;
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\t' || c == ';' || c == '\r'; }, ' ');
  std::istringstream in(s);
  double v[4];
  for (double& x : v) {
    std::string tok;
    if (!(in >> tok)) throw DatasetError("line " + std::to_string(line_no) + ": expected 4 values");
    std::string lower = tok;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (lower == "nan") {
      x = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, x);
    if (ec != std::errc() || ptr != end) throw DatasetError("line " + std::to_string(line_no) + ": cannot parse '" + tok + "'");
  }
  std::string extra;
  if (in >> extra) throw DatasetError("line " + std::to_string(line_no) + ": more than 4 values");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<BoundingBox> read_boxes(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("cannot open " + file.string());
  std::vector<BoundingBox> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_box_line(line, n));
  }
  return out;
}

void write_boxes(const fs::path& file, std::span<const BoundingBox> boxes) {
  std::ofstream out(file);
  if (!out) throw DatasetError("cannot write " + file.string());
  out << std::setprecision(6) << std::fixed;
  for (const auto& b : boxes) out << b.x << ',' << b.y << ',' << b.w << ',' << b.h << '\n';
  if (!out) throw DatasetError("write failed: " + file.string());
}

namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::vector<fs::path> images_in(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image(e.path())) out.push_back(e.path());
  // Numeric stems sort by value, everything else lexicographically after.
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    const std::string sa = a.stem().string(), sb = b.stem().string();
    const bool na = !sa.empty() && std::all_of(sa.begin(), sa.end(), ::isdigit);
    const bool nb = !sb.empty() && std::all_of(sb.begin(), sb.end(), ::isdigit);
    if (na && nb) return std::stoull(sa) != std::stoull(sb) ? std::stoull(sa) < std::stoull(sb) : sa < sb;
    if (na != nb) return na;
    return sa < sb;
  });
  return out;
}

std::optional<fs::path> find_ground_truth(const fs::path& root) {
  for (const char* name : {"groundtruth_rect.txt", "groundtruth.txt", "groundtruth_rect.1.txt"})
    if (fs::is_regular_file(root / name)) return root / name;
  std::vector<fs::path> gt;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.size() > 7 && n.ends_with("_gt.txt")) gt.push_back(e.path());
  }
  std::sort(gt.begin(), gt.end());
  if (!gt.empty()) return gt.front();
  return std::nullopt;
}

std::vector<int> read_flags(const fs::path& file) {
  std::ifstream in(file);
  std::vector<int> out;
  std::string tok;
  char c;
  while (in.get(c)) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok += c;
    } else if (!tok.empty()) {
      out.push_back(std::stoi(tok));
      tok.clear();
    }
  }
  if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

Sequence load_sequence(const fs::path& root) {
  if (!fs::is_directory(root)) throw DatasetError("not a sequence directory: " + root.string());
  Sequence seq;
  seq.name = root.filename().string();
  if (seq.name.empty()) seq.name = root.parent_path().filename().string();

  for (const char* sub : {"img", "imgs", "color"}) {
    seq.frames = images_in(root / sub);
    if (!seq.frames.empty()) break;
  }
  if (seq.frames.empty()) seq.frames = images_in(root);
  if (seq.frames.empty()) throw DatasetError("no images in " + root.string());

  const auto gt_file = find_ground_truth(root);
  if (!gt_file) throw DatasetError("no ground-truth file in " + root.string());
  try {
    seq.ground_truth = read_boxes(*gt_file);
  } catch (const DatasetError& e) {
    throw DatasetError(gt_file->string() + ": " + e.what());
  }

  const std::size_t n = std::min(seq.frames.size(), seq.ground_truth.size());
  if (seq.frames.size() != seq.ground_truth.size()) {
    spdlog::warn("{}: {} frames but {} annotations, truncating to {}", seq.name, seq.frames.size(), seq.ground_truth.size(), n);
    seq.frames.resize(n);
    seq.ground_truth.resize(n);
  }
  if (n == 0) throw DatasetError("empty sequence: " + root.string());

  seq.visible.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) seq.visible[i] = seq.ground_truth[i].valid();
  for (const char* flag_file : {"full_occlusion.txt", "out_of_view.txt"}) {
    if (!fs::is_regular_file(root / flag_file)) continue;
    const auto flags = read_flags(root / flag_file);
    for (std::size_t i = 0; i < std::min(n, flags.size()); ++i)
      if (flags[i] != 0) seq.visible[i] = false;
  }
  if (fs::is_regular_file(root / "attributes.txt")) {
    std::ifstream in(root / "attributes.txt");
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(" \t\r\n"));
      tok.erase(tok.find_last_not_of(" \t\r\n") + 1);
      if (!tok.empty()) seq.attributes.push_back(tok);
    }
  }

  seq.init_box = seq.ground_truth.front();
  if (!seq.init_box.valid()) throw DatasetError(seq.name + ": first ground-truth box has no positive extent");
  return seq;
}

std::vector<fs::path> list_sequences(const fs::path& root) {
  if (!fs::is_directory(root)) throw DatasetError("not a dataset directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && find_ground_truth(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

double success_threshold(int i) { return 0.05 * i; }

EvalResult summarize(std::span<const double> ious, std::span<const double> errors) {
  if (ious.empty() || errors.empty()) throw std::invalid_argument("summarize needs at least one frame");
  if (ious.size() != errors.size()) throw std::invalid_argument("IoU and error lists differ in length");
  EvalResult r;
  r.ious.assign(ious.begin(), ious.end());
  r.center_errors.assign(errors.begin(), errors.end());
  const double n = double(ious.size());
  for (int i = 0; i < kSuccessPoints; ++i) {
    const double t = success_threshold(i);
    r.success.push_back(double(std::count_if(ious.begin(), ious.end(), [t](double v) { return v > t; })) / n);
  }
  for (int p = 0; p < kPrecisionPoints; ++p)
    r.precision.push_back(double(std::count_if(errors.begin(), errors.end(), [p](double e) { return e <= p; })) / n);
  for (double s : r.success) r.auc += s;
  r.auc /= kSuccessPoints;
  r.dp20 = r.precision[20];
  return r;
}

EvalResult evaluate(std::span<const BoundingBox> predicted, const Sequence& seq) {
  std::vector<double> ious, errors;
  for (std::size_t i = 0; i < std::min(predicted.size(), seq.size()); ++i) {
    if (!seq.visible[i]) continue;
    ious.push_back(predicted[i].valid() ? iou(predicted[i], seq.ground_truth[i]) : 0.0);
    errors.push_back(predicted[i].valid() ? center_error(predicted[i], seq.ground_truth[i]) : std::numeric_limits<double>::infinity());
  }
  if (ious.empty()) throw DatasetError(seq.name + ": no visible annotated frames to evaluate");
  return summarize(ious, errors);
}

}  // namespace uhpsot
