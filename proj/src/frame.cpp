#include "agvc/frame.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace agvc {

Frame Frame::from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw ShapeError("frame tensor must be (C,H,W)");
  Frame f(t.dim(2), t.dim(1), t.dim(0));
  f.px = t.vec();
  return f;
}

void Frame::clamp01() {
  for (double& v : px) v = std::clamp(v, 0.0, 1.0);
}

Frame pad_frame(const Frame& f) {
  if (f.padded()) return f;
  const int W = (f.width + 15) / 16 * 16;
  const int H = (f.height + 15) / 16 * 16;
  Frame out(W, H, f.channels);
  for (int c = 0; c < f.channels; ++c)
    for (int y = 0; y < H; ++y) {
      const int sy = std::min(y, f.height - 1);
      for (int x = 0; x < W; ++x)
        out.at(c, y, x) = f.at(c, sy, std::min(x, f.width - 1));
    }
  return out;
}

double frame_mse(const Frame& a, const Frame& b) {
  if (a.px.size() != b.px.size()) throw ShapeError("frame_mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.px.size(); ++i) {
    const double d = a.px[i] - b.px[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.px.size());
}

double frame_max_abs_diff(const Frame& a, const Frame& b) {
  if (a.px.size() != b.px.size()) throw ShapeError("frame diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.px.size(); ++i)
    m = std::max(m, std::abs(a.px[i] - b.px[i]));
  return m;
}

void write_pnm(const Frame& f, const std::string& path) {
  if (f.channels != 1 && f.channels != 3)
    throw Error("write_pnm: 1 or 3 channels only");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << (f.channels == 1 ? "P5" : "P6") << "\n"
     << f.width << " " << f.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(f.width) * f.channels);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        const double v = std::clamp(f.at(c, y, x), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * f.channels + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
}

Frame read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  is >> magic >> w >> h >> maxv;
  if ((magic != "P5" && magic != "P6") || w <= 0 || h <= 0 || maxv != 255)
    throw ParseError("bad PNM header in " + path, 0);
  is.get();  // single whitespace after header
  const int channels = magic == "P5" ? 1 : 3;
  Frame f(w, h, channels);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * channels);
  for (int y = 0; y < h; ++y) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (is.gcount() != static_cast<std::streamsize>(row.size()))
      throw ParseError("truncated PNM payload in " + path,
                       static_cast<std::size_t>(is.tellg()));
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        f.at(c, y, x) = row[static_cast<std::size_t>(x) * channels + c] / 255.0;
  }
  return f;
}

}  // namespace agvc
