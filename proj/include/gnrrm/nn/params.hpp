#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gnrrm/rng.hpp"

namespace gnrrm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ParamId = std::size_t;

// Rank-1 parameters (biases) are stored as n×1 matrices.
struct Param {
  std::string name;
  int rank = 2;
  Matrix value;
  Matrix grad;
};

// One gradient buffer per parameter, in store order. Workers accumulate into
// private buffers that are reduced in a fixed order.
using Gradients = std::vector<Matrix>;

// Named parameters in registration order. A parameter used at many sites
// (every node, every hop) is a single entry.
class ParamStore {
 public:
  ParamId add(const std::string& name, Eigen::Index rows, Eigen::Index cols, int rank = 2);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  ParamId id(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  const Param& operator[](ParamId i) const { return params_[i]; }
  Param& operator[](ParamId i) { return params_[i]; }
  const Matrix& value(ParamId i) const { return params_[i].value; }
  Matrix& value(ParamId i) { return params_[i].value; }

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  Gradients zero_gradients() const;
  void zero_grad();
  void set_grads(const Gradients& g);

  std::vector<double> flat_values() const;
  void set_flat_values(const std::vector<double>& v);
  std::vector<double> flat_grads() const;

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// Glorot uniform on [−√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out))].
void xavier_uniform(Matrix& m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

// Elementwise sum a += b across every buffer.
void accumulate(Gradients& into, const Gradients& from);

}  // namespace gnrrm::nn
