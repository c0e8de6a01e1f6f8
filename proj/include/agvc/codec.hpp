#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agvc/frame.hpp"
#include "agvc/mask.hpp"

namespace agvc {

/// Per-macroblock quantization parameters, 0..51.
struct QpMap {
  int w = 0, h = 0;
  std::vector<std::uint8_t> qp;

  QpMap() = default;
  QpMap(int w_, int h_, int value = 0)
      : w(w_), h(h_), qp(static_cast<std::size_t>(w_) * h_) {
    fill(value);
  }
  void fill(int value);
  std::uint8_t& at(int bx, int by) { return qp[static_cast<std::size_t>(by) * w + bx]; }
  std::uint8_t at(int bx, int by) const {
    return qp[static_cast<std::size_t>(by) * w + bx];
  }
};

struct CodecConfig {
  // Uniform background replacement color, per channel in [0,1]. Frames
  // with fewer channels use the leading entries.
  std::vector<double> background = {123.675 / 255.0, 116.28 / 255.0, 103.53 / 255.0};
};

/// Quantization step: max(1, 2^((qp-4)/6)) rounded to the nearest 1/16,
/// in 8-bit pixel units. Doubles every 6 QP like H.264.
double quant_step(int qp);

/// AGV1 frame bitstream (all integers little-endian):
///   magic "AGV1", width u16, height u16, channels u8, block_size u8 (16),
///   QP map bytes (w*h row-major), payload length u32, payload.
/// Payload, per macroblock in row-major order, per channel, per 8x8
/// sub-block (TL, TR, BL, BR): zigzag run-length pairs (zero-run u8,
/// level i16) terminated by the EOB byte 0xFF.
struct EncodedFrame {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t channels = 0;
  std::uint8_t block_size = 16;
  std::vector<std::uint8_t> qp;       // row-major
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> serialize() const;
  static EncodedFrame parse(const std::uint8_t* data, std::size_t len);
  std::size_t byte_size() const { return 10 + qp.size() + 4 + payload.size(); }
};

EncodedFrame encode_frame(const Frame& frame, const QpMap& qpmap,
                          const CodecConfig& cfg = {});
Frame decode_frame(const EncodedFrame& enc, const CodecConfig& cfg = {});

QpMap mask_to_qpmap(const QualityMask& mask, int qp_hi = 30, int qp_lo = 40);

/// Replaces unmasked macroblocks with the configured background color and
/// encodes everything at uniform qp_hi.
EncodedFrame encode_uniform_background(const Frame& frame, const QualityMask& mask,
                                       int qp_hi, const CodecConfig& cfg = {});

std::size_t frame_size(const EncodedFrame& enc);

/// Decoded quantized coefficients, for bit-exactness checks: one i16[64]
/// (natural order) per sub-block in stream order.
std::vector<std::int16_t> decode_coefficients(const EncodedFrame& enc);

// Chunk container: u32 frame count, then AGV1 frames back to back.
void write_chunk(std::ostream& os, const std::vector<EncodedFrame>& frames);
std::vector<EncodedFrame> read_chunk(std::istream& is);
void write_chunk_file(const std::vector<EncodedFrame>& frames, const std::string& path);
std::vector<EncodedFrame> read_chunk_file(const std::string& path);

/// "bx by qp" per line, for handing QP maps to external encoders.
void write_qpmap_sidecar(std::ostream& os, const QpMap& m);

}  // namespace agvc
