#pragma once

#include <cstdint>

namespace agvc::kernels {

// Process-wide worker count for the OpenMP kernels. 1 selects the serial
// reference path. Every parallel kernel writes disjoint outputs with a
// fixed per-output summation order, so results are bit-identical for any
// thread count.
int thread_count();
void set_thread_count(int n);

struct Conv2dDims {
  int in_c, in_h, in_w;
  int out_c, out_h, out_w;
  int kh, kw;
  int stride, pad;
};

// y[oc,oy,ox] = bias[oc] + sum_{ic,ky,kx} x[ic, oy*s-p+ky, ox*s-p+kx] * w[oc,ic,ky,kx]
// Zero padding; bias may be null.
void conv2d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, const Conv2dDims& d);
void conv2d_forward_omp(const double* x, const double* w, const double* bias,
                        double* y, const Conv2dDims& d);
void conv2d_forward(const double* x, const double* w, const double* bias,
                    double* y, const Conv2dDims& d);

// gx[ic,iy,ix] = sum over (oc,ky,kx) hitting that input pixel of gy * w.
void conv2d_backward_input_serial(const double* gy, const double* w, double* gx,
                                  const Conv2dDims& d);
void conv2d_backward_input_omp(const double* gy, const double* w, double* gx,
                               const Conv2dDims& d);
void conv2d_backward_input(const double* gy, const double* w, double* gx,
                           const Conv2dDims& d);

// gw[oc,ic,ky,kx] = sum_{oy,ox} gy[oc,oy,ox] * x[ic, oy*s-p+ky, ox*s-p+kx]
// gb[oc] = sum_{oy,ox} gy[oc,oy,ox]; gb may be null.
void conv2d_backward_params_serial(const double* gy, const double* x, double* gw,
                                   double* gb, const Conv2dDims& d);
void conv2d_backward_params_omp(const double* gy, const double* x, double* gw,
                                double* gb, const Conv2dDims& d);
void conv2d_backward_params(const double* gy, const double* x, double* gw,
                            double* gb, const Conv2dDims& d);

// Orthonormal 8x8 DCT-II and its inverse on row-major blocks.
void dct8x8_forward(const double* in, double* out);
void dct8x8_inverse(const double* in, double* out);

// Quantize n macroblocks' worth of DCT coefficients: each job transforms
// one 8x8 sub-block from `pixels` (already centered) into quantized
// integer levels. Jobs are independent; `steps` holds the quant step per
// sub-block.
struct BlockJob {
  const double* pixels;  // 64 centered samples, row stride 8
  double step;
  std::int16_t* levels;  // 64 outputs in natural (row-major) order
};
void quantize_blocks_serial(const BlockJob* jobs, int n);
void quantize_blocks_omp(const BlockJob* jobs, int n);
void quantize_blocks(const BlockJob* jobs, int n);

struct IBlockJob {
  const std::int16_t* levels;
  double step;
  double* pixels;  // 64 reconstructed centered samples
};
void dequantize_blocks_serial(const IBlockJob* jobs, int n);
void dequantize_blocks_omp(const IBlockJob* jobs, int n);
void dequantize_blocks(const IBlockJob* jobs, int n);

}  // namespace agvc::kernels
