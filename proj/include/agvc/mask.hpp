#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agvc/error.hpp"

namespace agvc {

/// Per-macroblock binary quality assignment; 1 = encode in high quality.
struct QualityMask {
  int w = 0, h = 0;
  std::vector<std::uint8_t> bits;

  QualityMask() = default;
  QualityMask(int w_, int h_, bool set = false)
      : w(w_), h(h_), bits(static_cast<std::size_t>(w_) * h_, set ? 1 : 0) {}

  std::uint8_t& at(int bx, int by) {
    return bits[static_cast<std::size_t>(by) * w + bx];
  }
  std::uint8_t at(int bx, int by) const {
    return bits[static_cast<std::size_t>(by) * w + bx];
  }
  int count() const {
    int n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
  }
  bool operator==(const QualityMask& o) const {
    return w == o.w && h == o.h && bits == o.bits;
  }
};

/// Per-macroblock nonnegative importance values on the same grid.
struct AccGradMap {
  int w = 0, h = 0;
  std::vector<double> v;

  AccGradMap() = default;
  AccGradMap(int w_, int h_)
      : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}

  double& at(int bx, int by) { return v[static_cast<std::size_t>(by) * w + bx]; }
  double at(int bx, int by) const { return v[static_cast<std::size_t>(by) * w + bx]; }
};

// Text dumps: CSV "bx,by,accgrad" per row; mask as P1 (plain PBM) grid.
void write_accgrad_csv(std::ostream& os, const AccGradMap& m);
void write_mask_pbm(std::ostream& os, const QualityMask& m);
QualityMask read_mask_pbm(std::istream& is);
void write_mask_pbm_file(const QualityMask& m, const std::string& path);
QualityMask read_mask_pbm_file(const std::string& path);

}  // namespace agvc
