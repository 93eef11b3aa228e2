#include "gnrrm/nn/params.hpp"

#include <cmath>

#include "gnrrm/error.hpp"

namespace gnrrm::nn {

ParamId ParamStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols, int rank) {
  if (index_.count(name)) throw Error("duplicate parameter name " + name);
  if (rank == 1 && cols != 1) throw Error("rank-1 parameter " + name + " must be a column");
  const ParamId id = params_.size();
  params_.push_back(Param{name, rank, Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  index_[name] = id;
  return id;
}

ParamId ParamStore::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter " + name);
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

Gradients ParamStore::zero_gradients() const {
  Gradients g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  return g;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

void ParamStore::set_grads(const Gradients& g) {
  if (g.size() != params_.size()) throw Error("gradient buffer count mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) params_[i].grad = g[i];
}

std::vector<double> ParamStore::flat_values() const {
  std::vector<double> out;
  out.reserve(scalar_count());
  for (const auto& p : params_) out.insert(out.end(), p.value.data(), p.value.data() + p.value.size());
  return out;
}

void ParamStore::set_flat_values(const std::vector<double>& v) {
  if (v.size() != scalar_count()) throw Error("flat parameter vector has wrong length");
  std::size_t k = 0;
  for (auto& p : params_) {
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(k), v.begin() + static_cast<std::ptrdiff_t>(k + p.value.size()),
              p.value.data());
    k += static_cast<std::size_t>(p.value.size());
  }
}

std::vector<double> ParamStore::flat_grads() const {
  std::vector<double> out;
  out.reserve(scalar_count());
  for (const auto& p : params_) out.insert(out.end(), p.grad.data(), p.grad.data() + p.grad.size());
  return out;
}

void xavier_uniform(Matrix& m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-limit, limit);
}

void accumulate(Gradients& into, const Gradients& from) {
  if (into.size() != from.size()) throw Error("gradient buffer count mismatch");
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

}  // namespace gnrrm::nn
