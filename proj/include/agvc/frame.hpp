#pragma once

#include <string>
#include <vector>

#include "agvc/error.hpp"
#include "agvc/tensor.hpp"

namespace agvc {

/// Raster image, channel-major (c, y, x), pixel values in [0,1].
/// Codec and models require dimensions that are multiples of 16; call
/// pad_frame first when they are not.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> px;

  Frame() = default;
  Frame(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        px(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int c, int y, int x) {
    return px[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return px[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  bool padded() const { return width % 16 == 0 && height % 16 == 0; }
  int blocks_x() const { return width / 16; }
  int blocks_y() const { return height / 16; }

  Tensor to_tensor() const { return Tensor({channels, height, width}, px); }
  static Frame from_tensor(const Tensor& t);

  void clamp01();
};

/// Extends width/height to the next multiple of 16 by edge replication.
Frame pad_frame(const Frame& f);

double frame_mse(const Frame& a, const Frame& b);
double frame_max_abs_diff(const Frame& a, const Frame& b);

// 8-bit binary PGM (1 channel) / PPM (3 channels) round trip; quantizes
// to 255 levels.
void write_pnm(const Frame& f, const std::string& path);
Frame read_pnm(const std::string& path);

}  // namespace agvc
