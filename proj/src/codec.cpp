#include "agvc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "agvc/kernels.hpp"

namespace agvc {

namespace {

constexpr int kBlock = 16;
constexpr std::uint8_t kEob = 0xff;

// JPEG-order zigzag scan of an 8x8 block.
constexpr int kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

void check_qp_range(int qp) {
  if (qp < 0 || qp > 51) throw Error("QP out of [0,51]: " + std::to_string(qp));
}

void append_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
}

void append_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xff));
}

// Encodes one sub-block's levels (natural order) as zigzag RLE pairs.
void rle_encode(const std::int16_t* levels, std::vector<std::uint8_t>& out) {
  int run = 0;
  for (int i = 0; i < 64; ++i) {
    const std::int16_t lv = levels[kZigzag[i]];
    if (lv == 0) {
      ++run;
      continue;
    }
    out.push_back(static_cast<std::uint8_t>(run));
    const std::uint16_t u = static_cast<std::uint16_t>(lv);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
    run = 0;
  }
  out.push_back(kEob);
}

struct PayloadReader {
  const std::uint8_t* data;
  std::size_t len;
  std::size_t pos = 0;
  std::size_t base;  // offset of payload within the whole stream

  std::uint8_t byte() {
    if (pos >= len) throw ParseError("truncated payload", base + pos);
    return data[pos++];
  }

  void sub_block(std::int16_t* levels) {
    std::fill(levels, levels + 64, static_cast<std::int16_t>(0));
    int idx = 0;
    for (;;) {
      const std::uint8_t head = byte();
      if (head == kEob) return;
      idx += head;
      if (idx >= 64) throw ParseError("zigzag overrun", base + pos - 1);
      const std::uint8_t lo = byte();
      const std::uint8_t hi = byte();
      const std::int16_t lv = static_cast<std::int16_t>(lo | (hi << 8));
      if (lv == 0) throw ParseError("zero level in RLE pair", base + pos - 2);
      levels[kZigzag[idx]] = lv;
      ++idx;
    }
  }
};

}  // namespace

void QpMap::fill(int value) {
  check_qp_range(value);
  std::fill(qp.begin(), qp.end(), static_cast<std::uint8_t>(value));
}

double quant_step(int qp) {
  check_qp_range(qp);
  double step = std::pow(2.0, (qp - 4) / 6.0);
  if (step < 1.0) step = 1.0;
  return std::round(step * 16.0) / 16.0;
}

std::vector<std::uint8_t> EncodedFrame::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(byte_size());
  out.insert(out.end(), {'A', 'G', 'V', '1'});
  append_u16(out, width);
  append_u16(out, height);
  out.push_back(channels);
  out.push_back(block_size);
  out.insert(out.end(), qp.begin(), qp.end());
  append_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

EncodedFrame EncodedFrame::parse(const std::uint8_t* data, std::size_t len) {
  if (len < 10) throw ParseError("stream shorter than AGV1 header", len);
  if (std::memcmp(data, "AGV1", 4) != 0) throw ParseError("bad AGV1 magic", 0);
  EncodedFrame f;
  f.width = static_cast<std::uint16_t>(data[4] | (data[5] << 8));
  f.height = static_cast<std::uint16_t>(data[6] | (data[7] << 8));
  f.channels = data[8];
  f.block_size = data[9];
  if (f.block_size != kBlock) throw ParseError("unsupported block size", 9);
  if (f.width == 0 || f.height == 0 || f.width % kBlock || f.height % kBlock)
    throw ParseError("dimensions not multiples of block size", 4);
  if (f.channels != 1 && f.channels != 3) throw ParseError("bad channel count", 8);
  const std::size_t nblocks =
      (static_cast<std::size_t>(f.width) / kBlock) * (f.height / kBlock);
  std::size_t pos = 10;
  if (len < pos + nblocks + 4) throw ParseError("truncated QP map", len);
  f.qp.assign(data + pos, data + pos + nblocks);
  for (std::size_t i = 0; i < nblocks; ++i)
    if (f.qp[i] > 51) throw ParseError("QP out of range in map", pos + i);
  pos += nblocks;
  const std::uint32_t plen = static_cast<std::uint32_t>(data[pos]) |
                             (static_cast<std::uint32_t>(data[pos + 1]) << 8) |
                             (static_cast<std::uint32_t>(data[pos + 2]) << 16) |
                             (static_cast<std::uint32_t>(data[pos + 3]) << 24);
  pos += 4;
  if (len != pos + plen) throw ParseError("payload length mismatch", pos - 4);
  f.payload.assign(data + pos, data + pos + plen);
  return f;
}

EncodedFrame encode_frame(const Frame& frame, const QpMap& qpmap,
                          const CodecConfig&) {
  if (!frame.padded()) throw Error("encode_frame: frame not padded to 16");
  if (frame.channels != 1 && frame.channels != 3)
    throw Error("encode_frame: 1 or 3 channels only");
  const int bw = frame.blocks_x(), bh = frame.blocks_y();
  if (qpmap.w != bw || qpmap.h != bh)
    throw ShapeError("encode_frame: QP map " + std::to_string(qpmap.w) + "x" +
                     std::to_string(qpmap.h) + " vs frame grid " +
                     std::to_string(bw) + "x" + std::to_string(bh));

  // Gather all 8x8 sub-block jobs (4 per macroblock per channel), then
  // transform them in one parallel batch; serialization stays row-major.
  const int subs_per_mb = frame.channels * 4;
  const int n_jobs = bw * bh * subs_per_mb;
  std::vector<double> centered(static_cast<std::size_t>(n_jobs) * 64);
  std::vector<std::int16_t> levels(static_cast<std::size_t>(n_jobs) * 64);
  std::vector<kernels::BlockJob> jobs(static_cast<std::size_t>(n_jobs));

  int job = 0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      const double step = quant_step(qpmap.at(bx, by));
      for (int c = 0; c < frame.channels; ++c)
        for (int sb = 0; sb < 4; ++sb) {
          const int y0 = by * kBlock + (sb / 2) * 8;
          const int x0 = bx * kBlock + (sb % 2) * 8;
          double* dst = centered.data() + static_cast<std::size_t>(job) * 64;
          for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
              dst[y * 8 + x] = frame.at(c, y0 + y, x0 + x) * 255.0 - 128.0;
          jobs[static_cast<std::size_t>(job)] = {
              dst, step, levels.data() + static_cast<std::size_t>(job) * 64};
          ++job;
        }
    }
  kernels::quantize_blocks(jobs.data(), n_jobs);

  EncodedFrame enc;
  enc.width = static_cast<std::uint16_t>(frame.width);
  enc.height = static_cast<std::uint16_t>(frame.height);
  enc.channels = static_cast<std::uint8_t>(frame.channels);
  enc.qp = qpmap.qp;
  for (int j = 0; j < n_jobs; ++j)
    rle_encode(levels.data() + static_cast<std::size_t>(j) * 64, enc.payload);
  return enc;
}

Frame decode_frame(const EncodedFrame& enc, const CodecConfig&) {
  const int bw = enc.width / kBlock, bh = enc.height / kBlock;
  const int subs_per_mb = enc.channels * 4;
  const int n_jobs = bw * bh * subs_per_mb;

  std::vector<std::int16_t> levels(static_cast<std::size_t>(n_jobs) * 64);
  std::vector<double> recon(static_cast<std::size_t>(n_jobs) * 64);
  std::vector<kernels::IBlockJob> jobs(static_cast<std::size_t>(n_jobs));

  PayloadReader reader{enc.payload.data(), enc.payload.size(), 0,
                       10 + enc.qp.size() + 4};
  int job = 0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      const double step = quant_step(enc.qp[static_cast<std::size_t>(by) * bw + bx]);
      for (int s = 0; s < subs_per_mb; ++s) {
        std::int16_t* lv = levels.data() + static_cast<std::size_t>(job) * 64;
        reader.sub_block(lv);
        jobs[static_cast<std::size_t>(job)] = {
            lv, step, recon.data() + static_cast<std::size_t>(job) * 64};
        ++job;
      }
    }
  if (reader.pos != reader.len)
    throw ParseError("trailing bytes after last sub-block", reader.base + reader.pos);
  kernels::dequantize_blocks(jobs.data(), n_jobs);

  Frame frame(enc.width, enc.height, enc.channels);
  job = 0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx)
      for (int c = 0; c < enc.channels; ++c)
        for (int sb = 0; sb < 4; ++sb) {
          const int y0 = by * kBlock + (sb / 2) * 8;
          const int x0 = bx * kBlock + (sb % 2) * 8;
          const double* src = recon.data() + static_cast<std::size_t>(job) * 64;
          for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
              frame.at(c, y0 + y, x0 + x) =
                  std::clamp((src[y * 8 + x] + 128.0) / 255.0, 0.0, 1.0);
          ++job;
        }
  return frame;
}

QpMap mask_to_qpmap(const QualityMask& mask, int qp_hi, int qp_lo) {
  check_qp_range(qp_hi);
  check_qp_range(qp_lo);
  if (qp_hi > qp_lo) throw Error("mask_to_qpmap: qp_hi must be <= qp_lo");
  QpMap m(mask.w, mask.h, qp_lo);
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    if (mask.bits[i]) m.qp[i] = static_cast<std::uint8_t>(qp_hi);
  return m;
}

EncodedFrame encode_uniform_background(const Frame& frame, const QualityMask& mask,
                                       int qp_hi, const CodecConfig& cfg) {
  if (!frame.padded()) throw Error("encode_uniform_background: frame not padded");
  if (mask.w != frame.blocks_x() || mask.h != frame.blocks_y())
    throw ShapeError("encode_uniform_background: mask grid mismatch");
  if (static_cast<int>(cfg.background.size()) < frame.channels)
    throw Error("encode_uniform_background: background color missing channels");
  Frame work = frame;
  for (int by = 0; by < mask.h; ++by)
    for (int bx = 0; bx < mask.w; ++bx) {
      if (mask.at(bx, by)) continue;
      for (int c = 0; c < frame.channels; ++c)
        for (int y = 0; y < kBlock; ++y)
          for (int x = 0; x < kBlock; ++x)
            work.at(c, by * kBlock + y, bx * kBlock + x) = cfg.background[static_cast<std::size_t>(c)];
    }
  QpMap qpmap(mask.w, mask.h, qp_hi);
  return encode_frame(work, qpmap, cfg);
}

std::size_t frame_size(const EncodedFrame& enc) { return enc.byte_size(); }

std::vector<std::int16_t> decode_coefficients(const EncodedFrame& enc) {
  const int bw = enc.width / kBlock, bh = enc.height / kBlock;
  const int n_jobs = bw * bh * enc.channels * 4;
  std::vector<std::int16_t> levels(static_cast<std::size_t>(n_jobs) * 64);
  PayloadReader reader{enc.payload.data(), enc.payload.size(), 0,
                       10 + enc.qp.size() + 4};
  for (int j = 0; j < n_jobs; ++j)
    reader.sub_block(levels.data() + static_cast<std::size_t>(j) * 64);
  return levels;
}

void write_chunk(std::ostream& os, const std::vector<EncodedFrame>& frames) {
  std::uint8_t hdr[4];
  const std::uint32_t n = static_cast<std::uint32_t>(frames.size());
  for (int i = 0; i < 4; ++i) hdr[i] = static_cast<std::uint8_t>((n >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(hdr), 4);
  for (const EncodedFrame& f : frames) {
    const auto bytes = f.serialize();
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<EncodedFrame> read_chunk(std::istream& is) {
  std::uint8_t hdr[4];
  is.read(reinterpret_cast<char*>(hdr), 4);
  if (is.gcount() != 4) throw ParseError("truncated chunk count", 0);
  const std::uint32_t n = static_cast<std::uint32_t>(hdr[0]) | (hdr[1] << 8) |
                          (hdr[2] << 16) | (static_cast<std::uint32_t>(hdr[3]) << 24);
  std::vector<EncodedFrame> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    // read fixed header first to learn the total frame size
    std::vector<std::uint8_t> head(10);
    is.read(reinterpret_cast<char*>(head.data()), 10);
    if (is.gcount() != 10) throw ParseError("truncated frame header", 4);
    const int width = head[4] | (head[5] << 8);
    const int height = head[6] | (head[7] << 8);
    if (width <= 0 || height <= 0 || width % kBlock || height % kBlock)
      throw ParseError("bad frame dims in chunk", 4);
    const std::size_t nblocks =
        (static_cast<std::size_t>(width) / kBlock) * (static_cast<std::size_t>(height) / kBlock);
    std::vector<std::uint8_t> rest(nblocks + 4);
    is.read(reinterpret_cast<char*>(rest.data()), static_cast<std::streamsize>(rest.size()));
    if (static_cast<std::size_t>(is.gcount()) != rest.size())
      throw ParseError("truncated QP map in chunk", 4);
    const std::size_t plen = static_cast<std::size_t>(rest[nblocks]) |
                             (static_cast<std::size_t>(rest[nblocks + 1]) << 8) |
                             (static_cast<std::size_t>(rest[nblocks + 2]) << 16) |
                             (static_cast<std::size_t>(rest[nblocks + 3]) << 24);
    std::vector<std::uint8_t> whole;
    whole.reserve(10 + rest.size() + plen);
    whole.insert(whole.end(), head.begin(), head.end());
    whole.insert(whole.end(), rest.begin(), rest.end());
    const std::size_t tail = whole.size();
    whole.resize(tail + plen);
    is.read(reinterpret_cast<char*>(whole.data() + tail), static_cast<std::streamsize>(plen));
    if (static_cast<std::size_t>(is.gcount()) != plen)
      throw ParseError("truncated frame payload in chunk", tail);
    out.push_back(EncodedFrame::parse(whole.data(), whole.size()));
  }
  return out;
}

void write_chunk_file(const std::vector<EncodedFrame>& frames, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_chunk(os, frames);
}

std::vector<EncodedFrame> read_chunk_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  return read_chunk(is);
}

void write_qpmap_sidecar(std::ostream& os, const QpMap& m) {
  for (int by = 0; by < m.h; ++by)
    for (int bx = 0; bx < m.w; ++bx)
      os << bx << " " << by << " " << static_cast<int>(m.at(bx, by)) << "\n";
}

}  // namespace agvc
