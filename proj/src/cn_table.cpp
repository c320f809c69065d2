#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "uhpsot/features.hpp"

namespace uhpsot {

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

}  // namespace

CNTable::CNTable(std::vector<Row> rows) : rows_(std::move(rows)) {
  if (rows_.size() != std::size_t(kCnRows)) throw FeatureError("color-name table must have 32768 rows");
  for (const auto& r : rows_) {
    double s = 0;
    for (float v : r) {
      if (!(v >= 0.0f && v <= 1.0f)) throw FeatureError("color-name table entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-3) throw FeatureError("color-name table row does not sum to 1");
  }
}

CNTable CNTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureError("cannot open color-name table: " + path.string());
  std::vector<Row> rows(kCnRows);
  for (auto& r : rows)
    for (float& v : r) {
      std::uint32_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), 4);
      bits = to_little(bits);
      std::memcpy(&v, &bits, 4);
    }
  if (!in) throw FeatureError("truncated color-name table: " + path.string());
  in.peek();
  if (!in.eof()) throw FeatureError("color-name table has trailing data: " + path.string());
  return CNTable(std::move(rows));
}

void CNTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FeatureError("cannot write color-name table: " + path.string());
  for (const auto& r : rows_)
    for (float v : r) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, &v, 4);
      bits = to_little(bits);
      out.write(reinterpret_cast<const char*>(&bits), 4);
    }
}

CNTable CNTable::synthesize() {
  // black, white, grey, red, orange, yellow, green, blue, purple, pink
  static constexpr double kPrototypes[kCnChannels][3] = {
      {0.00, 0.00, 0.00}, {1.00, 1.00, 1.00}, {0.50, 0.50, 0.50}, {0.85, 0.10, 0.10}, {1.00, 0.55, 0.10},
      {0.95, 0.90, 0.15}, {0.15, 0.65, 0.20}, {0.15, 0.25, 0.85}, {0.55, 0.20, 0.65}, {1.00, 0.60, 0.75}};
  constexpr double kSigma = 0.2;

  std::vector<Row> rows(kCnRows);
  for (int i = 0; i < kCnRows; ++i) {
    const double rgb[3] = {((i & 31) + 0.5) / 32.0, (((i >> 5) & 31) + 0.5) / 32.0, (((i >> 10) & 31) + 0.5) / 32.0};
    double w[kCnChannels];
    double total = 0;
    for (int k = 0; k < kCnChannels; ++k) {
      double d2 = 0;
      for (int c = 0; c < 3; ++c) d2 += (rgb[c] - kPrototypes[k][c]) * (rgb[c] - kPrototypes[k][c]);
      w[k] = std::exp(-d2 / (2 * kSigma * kSigma));
      total += w[k];
    }
    for (int k = 0; k < kCnChannels; ++k) rows[i][k] = float(w[k] / total);
  }
  return CNTable(std::move(rows));
}

}  // namespace uhpsot
