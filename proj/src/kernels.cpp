#include "agvc/kernels.hpp"

#include <cmath>

namespace agvc::kernels {

namespace {
int g_threads = 1;

inline double round_half_away(double v) {
  return v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
}

// cos((2x+1) u pi / 16) table and the orthonormal scale factors
struct DctTables {
  double c[8][8];  // c[u][x]
  double s[8];     // s[u] = u==0 ? sqrt(1/8) : sqrt(2/8)
  DctTables() {
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
      s[u] = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) c[u][x] = std::cos((2 * x + 1) * u * pi / 16.0);
    }
  }
};
const DctTables kDct;
}  // namespace

int thread_count() { return g_threads; }

void set_thread_count(int n) { g_threads = n < 1 ? 1 : n; }

// ---------------------------------------------------------------------------
// conv2d

namespace {
inline void conv2d_forward_one(const double* x, const double* w, const double* bias,
                               double* y, const Conv2dDims& d, int oc, int oy) {
  const int khw = d.kh * d.kw;
  for (int ox = 0; ox < d.out_w; ++ox) {
    double acc = bias ? bias[oc] : 0.0;
    const double* wk = w + static_cast<std::size_t>(oc) * d.in_c * khw;
    for (int ic = 0; ic < d.in_c; ++ic) {
      const double* xc = x + static_cast<std::size_t>(ic) * d.in_h * d.in_w;
      for (int ky = 0; ky < d.kh; ++ky) {
        const int iy = oy * d.stride - d.pad + ky;
        if (iy < 0 || iy >= d.in_h) continue;
        for (int kx = 0; kx < d.kw; ++kx) {
          const int ix = ox * d.stride - d.pad + kx;
          if (ix < 0 || ix >= d.in_w) continue;
          acc += xc[iy * d.in_w + ix] * wk[(ic * d.kh + ky) * d.kw + kx];
        }
      }
    }
    y[(static_cast<std::size_t>(oc) * d.out_h + oy) * d.out_w + ox] = acc;
  }
}
}  // namespace

void conv2d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, const Conv2dDims& d) {
  for (int oc = 0; oc < d.out_c; ++oc)
    for (int oy = 0; oy < d.out_h; ++oy) conv2d_forward_one(x, w, bias, y, d, oc, oy);
}

void conv2d_forward_omp(const double* x, const double* w, const double* bias,
                        double* y, const Conv2dDims& d) {
  const int rows = d.out_c * d.out_h;
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int r = 0; r < rows; ++r)
    conv2d_forward_one(x, w, bias, y, d, r / d.out_h, r % d.out_h);
}

void conv2d_forward(const double* x, const double* w, const double* bias,
                    double* y, const Conv2dDims& d) {
  if (g_threads > 1)
    conv2d_forward_omp(x, w, bias, y, d);
  else
    conv2d_forward_serial(x, w, bias, y, d);
}

namespace {
inline void conv2d_backward_input_one(const double* gy, const double* w, double* gx,
                                      const Conv2dDims& d, int ic, int iy) {
  const int khw = d.kh * d.kw;
  for (int ix = 0; ix < d.in_w; ++ix) {
    double acc = 0.0;
    for (int oc = 0; oc < d.out_c; ++oc) {
      const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
      const double* wk = w + (static_cast<std::size_t>(oc) * d.in_c + ic) * khw;
      for (int ky = 0; ky < d.kh; ++ky) {
        const int ny = iy + d.pad - ky;
        if (ny < 0 || ny % d.stride != 0) continue;
        const int oy = ny / d.stride;
        if (oy >= d.out_h) continue;
        for (int kx = 0; kx < d.kw; ++kx) {
          const int nx = ix + d.pad - kx;
          if (nx < 0 || nx % d.stride != 0) continue;
          const int ox = nx / d.stride;
          if (ox >= d.out_w) continue;
          acc += gc[oy * d.out_w + ox] * wk[ky * d.kw + kx];
        }
      }
    }
    gx[(static_cast<std::size_t>(ic) * d.in_h + iy) * d.in_w + ix] = acc;
  }
}
}  // namespace

void conv2d_backward_input_serial(const double* gy, const double* w, double* gx,
                                  const Conv2dDims& d) {
  for (int ic = 0; ic < d.in_c; ++ic)
    for (int iy = 0; iy < d.in_h; ++iy) conv2d_backward_input_one(gy, w, gx, d, ic, iy);
}

void conv2d_backward_input_omp(const double* gy, const double* w, double* gx,
                               const Conv2dDims& d) {
  const int rows = d.in_c * d.in_h;
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int r = 0; r < rows; ++r)
    conv2d_backward_input_one(gy, w, gx, d, r / d.in_h, r % d.in_h);
}

void conv2d_backward_input(const double* gy, const double* w, double* gx,
                           const Conv2dDims& d) {
  if (g_threads > 1)
    conv2d_backward_input_omp(gy, w, gx, d);
  else
    conv2d_backward_input_serial(gy, w, gx, d);
}

namespace {
inline double conv2d_weight_grad_one(const double* gy, const double* x,
                                     const Conv2dDims& d, int oc, int ic, int ky,
                                     int kx) {
  const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
  const double* xc = x + static_cast<std::size_t>(ic) * d.in_h * d.in_w;
  double acc = 0.0;
  for (int oy = 0; oy < d.out_h; ++oy) {
    const int iy = oy * d.stride - d.pad + ky;
    if (iy < 0 || iy >= d.in_h) continue;
    for (int ox = 0; ox < d.out_w; ++ox) {
      const int ix = ox * d.stride - d.pad + kx;
      if (ix < 0 || ix >= d.in_w) continue;
      acc += gc[oy * d.out_w + ox] * xc[iy * d.in_w + ix];
    }
  }
  return acc;
}
}  // namespace

void conv2d_backward_params_serial(const double* gy, const double* x, double* gw,
                                   double* gb, const Conv2dDims& d) {
  const int khw = d.kh * d.kw;
  const int total = d.out_c * d.in_c * khw;
  for (int i = 0; i < total; ++i) {
    const int oc = i / (d.in_c * khw);
    const int ic = (i / khw) % d.in_c;
    const int ky = (i % khw) / d.kw;
    const int kx = i % d.kw;
    gw[i] = conv2d_weight_grad_one(gy, x, d, oc, ic, ky, kx);
  }
  if (gb) {
    for (int oc = 0; oc < d.out_c; ++oc) {
      const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
      double acc = 0.0;
      for (int i = 0; i < d.out_h * d.out_w; ++i) acc += gc[i];
      gb[oc] = acc;
    }
  }
}

void conv2d_backward_params_omp(const double* gy, const double* x, double* gw,
                                double* gb, const Conv2dDims& d) {
  const int khw = d.kh * d.kw;
  const int total = d.out_c * d.in_c * khw;
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int i = 0; i < total; ++i) {
    const int oc = i / (d.in_c * khw);
    const int ic = (i / khw) % d.in_c;
    const int ky = (i % khw) / d.kw;
    const int kx = i % d.kw;
    gw[i] = conv2d_weight_grad_one(gy, x, d, oc, ic, ky, kx);
  }
  if (gb) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
    for (int oc = 0; oc < d.out_c; ++oc) {
      const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
      double acc = 0.0;
      for (int i = 0; i < d.out_h * d.out_w; ++i) acc += gc[i];
      gb[oc] = acc;
    }
  }
}

void conv2d_backward_params(const double* gy, const double* x, double* gw,
                            double* gb, const Conv2dDims& d) {
  if (g_threads > 1)
    conv2d_backward_params_omp(gy, x, gw, gb, d);
  else
    conv2d_backward_params_serial(gy, x, gw, gb, d);
}

// ---------------------------------------------------------------------------
// 8x8 DCT

void dct8x8_forward(const double* in, double* out) {
  double tmp[64];
  // rows
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += in[y * 8 + x] * kDct.c[u][x];
      tmp[y * 8 + u] = acc * kDct.s[u];
    }
  // columns
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += tmp[y * 8 + u] * kDct.c[v][y];
      out[v * 8 + u] = acc * kDct.s[v];
    }
}

void dct8x8_inverse(const double* in, double* out) {
  double tmp[64];
  for (int u = 0; u < 8; ++u)
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += in[v * 8 + u] * kDct.s[v] * kDct.c[v][y];
      tmp[y * 8 + u] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += tmp[y * 8 + u] * kDct.s[u] * kDct.c[u][x];
      out[y * 8 + x] = acc;
    }
}

namespace {
inline void quantize_one(const BlockJob& j) {
  double coef[64];
  dct8x8_forward(j.pixels, coef);
  for (int i = 0; i < 64; ++i)
    j.levels[i] = static_cast<std::int16_t>(round_half_away(coef[i] / j.step));
}

inline void dequantize_one(const IBlockJob& j) {
  double coef[64];
  for (int i = 0; i < 64; ++i) coef[i] = j.levels[i] * j.step;
  dct8x8_inverse(coef, j.pixels);
}
}  // namespace

void quantize_blocks_serial(const BlockJob* jobs, int n) {
  for (int i = 0; i < n; ++i) quantize_one(jobs[i]);
}

void quantize_blocks_omp(const BlockJob* jobs, int n) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int i = 0; i < n; ++i) quantize_one(jobs[i]);
}

void quantize_blocks(const BlockJob* jobs, int n) {
  if (g_threads > 1)
    quantize_blocks_omp(jobs, n);
  else
    quantize_blocks_serial(jobs, n);
}

void dequantize_blocks_serial(const IBlockJob* jobs, int n) {
  for (int i = 0; i < n; ++i) dequantize_one(jobs[i]);
}

void dequantize_blocks_omp(const IBlockJob* jobs, int n) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int i = 0; i < n; ++i) dequantize_one(jobs[i]);
}

void dequantize_blocks(const IBlockJob* jobs, int n) {
  if (g_threads > 1)
    dequantize_blocks_omp(jobs, n);
  else
    dequantize_blocks_serial(jobs, n);
}

}  // namespace agvc::kernels
