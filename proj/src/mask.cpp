#include "agvc/mask.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace agvc {

void write_accgrad_csv(std::ostream& os, const AccGradMap& m) {
  os << "bx,by,accgrad\n";
  for (int by = 0; by < m.h; ++by)
    for (int bx = 0; bx < m.w; ++bx)
      os << bx << "," << by << "," << m.at(bx, by) << "\n";
}

void write_mask_pbm(std::ostream& os, const QualityMask& m) {
  os << "P1\n" << m.w << " " << m.h << "\n";
  for (int by = 0; by < m.h; ++by) {
    for (int bx = 0; bx < m.w; ++bx) {
      if (bx) os << ' ';
      os << (m.at(bx, by) ? 1 : 0);
    }
    os << '\n';
  }
}

QualityMask read_mask_pbm(std::istream& is) {
  std::string magic;
  int w = 0, h = 0;
  is >> magic >> w >> h;
  if (magic != "P1" || w <= 0 || h <= 0) throw ParseError("bad PBM header", 0);
  QualityMask m(w, h);
  for (int by = 0; by < h; ++by)
    for (int bx = 0; bx < w; ++bx) {
      int v = 0;
      if (!(is >> v) || (v != 0 && v != 1))
        throw ParseError("bad PBM bit", static_cast<std::size_t>(is.tellg()));
      m.at(bx, by) = static_cast<std::uint8_t>(v);
    }
  return m;
}

void write_mask_pbm_file(const QualityMask& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_mask_pbm(os, m);
}

QualityMask read_mask_pbm_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_mask_pbm(is);
}

}  // namespace agvc
