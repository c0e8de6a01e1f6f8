#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "agvc/tensor.hpp"

namespace agvc {

/// Named trainable tensors with deterministic (insertion) iteration order.
/// Shapes are frozen at creation.
class ParamStore {
 public:
  Tensor& create(const std::string& name, Tensor init);
  bool has(const std::string& name) const;
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t count() const { return order_.size(); }

  // AGP1 checkpoint: magic "AGP1", then per param:
  //   u16 name length, name bytes, u8 rank, u32 dims, f64 values
  // (all integers and doubles little-endian).
  void save(std::ostream& os) const;
  static ParamStore load(std::istream& is);
  void save_file(const std::string& path) const;
  static ParamStore load_file(const std::string& path);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
};

/// w' = w - lr * g for every parameter. Every parameter must have a
/// gradient of matching shape.
void sgd_step(ParamStore& params, const std::map<std::string, Tensor>& grads,
              double lr);

}  // namespace agvc
