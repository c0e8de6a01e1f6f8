#include "agvc/params.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "agvc/error.hpp"

namespace agvc {

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_bytes(std::istream& is, unsigned char* out, std::size_t n) {
  is.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(is.gcount()) == n;
}

std::uint16_t read_u16(const unsigned char* b) {
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double read_f64(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

Tensor& ParamStore::create(const std::string& name, Tensor init) {
  if (map_.count(name)) throw Error("duplicate parameter name: " + name);
  order_.push_back(name);
  return map_.emplace(name, std::move(init)).first->second;
}

bool ParamStore::has(const std::string& name) const { return map_.count(name) > 0; }

Tensor& ParamStore::get(const std::string& name) {
  auto it = map_.find(name);
  if (it == map_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

void ParamStore::save(std::ostream& os) const {
  os.write("AGP1", 4);
  for (const std::string& name : order_) {
    const Tensor& t = map_.at(name);
    if (name.size() > 0xffff) throw Error("parameter name too long: " + name);
    put_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(t.rank()));
    for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
    for (std::int64_t i = 0; i < t.size(); ++i) put_f64(os, t[i]);
  }
}

ParamStore ParamStore::load(std::istream& is) {
  unsigned char magic[4];
  if (!get_bytes(is, magic, 4) || std::memcmp(magic, "AGP1", 4) != 0)
    throw ParseError("bad AGP1 magic", 0);
  ParamStore store;
  std::size_t off = 4;
  for (;;) {
    unsigned char lenb[2];
    is.read(reinterpret_cast<char*>(lenb), 2);
    if (is.gcount() == 0 && is.eof()) break;
    if (is.gcount() != 2) throw ParseError("truncated parameter name length", off);
    std::uint16_t len = read_u16(lenb);
    off += 2;
    std::string name(len, '\0');
    if (!get_bytes(is, reinterpret_cast<unsigned char*>(name.data()), len))
      throw ParseError("truncated parameter name", off);
    off += len;
    unsigned char rank;
    if (!get_bytes(is, &rank, 1)) throw ParseError("truncated rank", off);
    off += 1;
    std::vector<int> shape(rank);
    for (int i = 0; i < rank; ++i) {
      unsigned char db[4];
      if (!get_bytes(is, db, 4)) throw ParseError("truncated dims", off);
      shape[static_cast<std::size_t>(i)] = static_cast<int>(read_u32(db));
      off += 4;
    }
    Tensor t(shape);
    for (std::int64_t i = 0; i < t.size(); ++i) {
      unsigned char vb[8];
      if (!get_bytes(is, vb, 8)) throw ParseError("truncated values for " + name, off);
      t[i] = read_f64(vb);
      off += 8;
    }
    store.create(name, std::move(t));
  }
  return store;
}

void ParamStore::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  save(os);
}

ParamStore ParamStore::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  return load(is);
}

void sgd_step(ParamStore& params, const std::map<std::string, Tensor>& grads,
              double lr) {
  if (lr < 0) throw Error("negative learning rate");
  for (const std::string& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) throw Error("missing gradient for parameter: " + name);
    Tensor& w = params.get(name);
    const Tensor& g = it->second;
    if (!w.same_shape(g))
      throw ShapeError("gradient shape mismatch for " + name + ": " +
                       shape_str(w.shape()) + " vs " + shape_str(g.shape()));
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
}

}  // namespace agvc
