#include "uhpsot/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace uhpsot {

namespace {

struct Entry {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

long parse_int(const std::string& key, const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::string fmt_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<Entry> entries(Config& c) {
  std::vector<Entry> out;
  auto real = [&](std::string key, double& field, double lo, double hi) {
    out.push_back({key,
                   [key, &field, lo, hi](const std::string& v) {
                     const double x = parse_real(key, v);
                     if (x < lo || x > hi) throw ConfigError(key + ": " + v + " outside [" + fmt_real(lo) + ", " + fmt_real(hi) + "]");
                     field = x;
                   },
                   [&field] { return fmt_real(field); }});
  };
  auto integer = [&]<typename T>(std::string key, T& field, long lo, long hi) {
    out.push_back({key,
                   [key, &field, lo, hi](const std::string& v) {
                     const long x = parse_int(key, v);
                     if (x < lo || x > hi) throw ConfigError(key + ": " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                     field = T(x);
                   },
                   [&field] { return std::to_string(field); }});
  };
  auto boolean = [&](std::string key, bool& field) {
    out.push_back({key, [key, &field](const std::string& v) { field = parse_bool(key, v); },
                   [&field] { return std::string(field ? "1" : "0"); }});
  };

  constexpr double kBig = 1e12;
  // Feature extraction and search region.
  integer("cell_size", c.dcf.cell_size, 1, 32);
  real("padding", c.dcf.padding, 1.0, 20.0);
  integer("template_max_px", c.dcf.template_max_px, 8, 2048);
  integer("template_min_px", c.dcf.template_min_px, 8, 2048);
  boolean("use_color", c.use_color);
  out.push_back({"cn_table", [&c](const std::string& v) { c.cn_table = v; }, [&c] { return c.cn_table.string(); }});

  // Appearance filter.
  real("output_sigma_factor", c.dcf.output_sigma_factor, 1e-4, 10.0);
  real("reg_window_min", c.dcf.reg_window_min, 0.0, kBig);
  real("reg_window_max", c.dcf.reg_window_max, 0.0, kBig);
  real("mu", c.dcf.mu, 0.0, kBig);
  integer("admm_iterations", c.dcf.admm.iterations, 1, 10000);
  real("admm_penalty_init", c.dcf.admm.penalty_init, 1e-12, kBig);
  real("admm_penalty_growth", c.dcf.admm.penalty_growth, 1.0, kBig);
  real("admm_penalty_max", c.dcf.admm.penalty_max, 1e-12, kBig);
  integer("scale_count", c.dcf.scale_count, 1, 33);
  real("scale_step", c.dcf.scale_step, 1.0, 2.0);
  real("scale_damping", c.dcf.scale_damping, 0.0, 1.0);
  integer("newton_iterations", c.dcf.newton_iterations, 0, 50);
  integer("similarity_radius", c.dcf.similarity_radius, 0, 16);
  real("min_motion_px", c.min_motion_px, 0.0, kBig);

  // Background motion.
  boolean("enable_background", c.enable_background);
  integer("bgd_max_points", c.background.match.max_points, 3, 10000);
  integer("sad_window", c.background.match.window, 3, 101);
  integer("sad_search", c.background.match.search, 1, 200);
  real("sad_max_error", c.background.match.max_error, 0.0, 255.0);
  real("affine_inlier_px", c.background.inlier_px, 0.0, kBig);
  integer("motion_max_dim", c.background.max_dim, 32, 100000);
  real("cut_threshold", c.background.cut, 1e-9, 1.0 - 1e-9);
  real("residual_floor", c.background.energy_floor, 0.0, 255.0);

  // Trajectory.
  boolean("enable_trajectory", c.enable_trajectory);
  integer("history_length", c.trajectory.history, 2, 10000);
  real("size_clamp", c.trajectory.size_clamp, 0.0, 10.0);
  real("size_reject_sigma", c.trajectory.reject_sigma, 0.0, kBig);
  real("aspect_reject", c.trajectory.aspect_reject, 0.0, kBig);
  real("size_std_floor", c.trajectory.std_floor, 0.0, kBig);

  // Fusion.
  real("sim_threshold", c.fusion.sim_threshold, -1.0, 1.0);
  real("robustness_px", c.fusion.robustness_px, 0.0, kBig);
  real("bgd_std_px", c.fusion.bgd_std_px, 0.0, kBig);
  integer("bgd_std_window", c.fusion.bgd_std_window, 1, 10000);
  real("iou_threshold", c.fusion.iou_threshold, 0.0, 1.0);
  out.push_back({"mu_set",
                 [&c](const std::string& v) {
                   std::vector<double> mus;
                   std::stringstream ss(v);
                   std::string tok;
                   while (std::getline(ss, tok, ',')) mus.push_back(parse_real("mu_set", trim(tok)));
                   if (mus.size() != 4) throw ConfigError("mu_set: expected 4 comma-separated values");
                   for (double m : mus)
                     if (m < 0) throw ConfigError("mu_set: values must be non-negative");
                   c.fusion.mu_alone = mus[0];
                   c.fusion.mu_merge = mus[1];
                   c.fusion.mu_override = mus[2];
                   c.fusion.mu_agree = mus[3];
                 },
                 [&c] {
                   return fmt_real(c.fusion.mu_alone) + "," + fmt_real(c.fusion.mu_merge) + "," + fmt_real(c.fusion.mu_override) +
                          "," + fmt_real(c.fusion.mu_agree);
                 }});
  integer("agreement_streak", c.fusion.agreement_streak, 0, 1000000);
  real("occlusion_ratio", c.fusion.occlusion_ratio, 0.0, 1.0);
  real("occlusion_color", c.fusion.occlusion_color, 0.0, 255.0);
  integer("occlusion_window", c.fusion.occlusion_window, 1, 1000);
  real("anchor_center_px", c.fusion.anchor_center_px, 0.0, kBig);
  real("anchor_iou", c.fusion.anchor_iou, 0.0, 1.0);
  return out;
}

}  // namespace

bool Config::set(const std::string& key, const std::string& value) {
  for (auto& e : entries(*this)) {
    if (e.key == key) {
      e.set(trim(value));
      if (key == "template_min_px" || key == "template_max_px") {
        if (dcf.template_min_px > dcf.template_max_px) throw ConfigError("template_min_px exceeds template_max_px");
      }
      return true;
    }
  }
  return false;
}

Config Config::load(const std::filesystem::path& file, std::vector<std::string>* warnings) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  Config c;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(file.string() + ":" + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    try {
      if (!c.set(key, line.substr(eq + 1)) && warnings) warnings->push_back(file.string() + ":" + std::to_string(n) + ": unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(file.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

std::string Config::dump() const {
  Config copy = *this;
  std::string out;
  for (const auto& e : entries(copy)) out += e.key + " = " + e.get() + "\n";
  return out;
}

std::vector<std::string> Config::keys() {
  Config c;
  std::vector<std::string> out;
  for (const auto& e : entries(c)) out.push_back(e.key);
  return out;
}

}  // namespace uhpsot
