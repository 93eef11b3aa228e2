#pragma once

// Random inputs and finite-difference harnesses shared by the unit suites and
// the acceptance run.

#include <algorithm>
#include <span>

#include "gnrrm/dataset/forcing.hpp"
#include "gnrrm/nn/grad_check.hpp"
#include "gnrrm/nn/sequence.hpp"
#include "gnrrm/rng.hpp"

namespace fixtures {

using namespace gnrrm;
using namespace gnrrm::nn;

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-scale, scale);
  return m;
}

inline Sequence random_sequence(Rng& rng, std::size_t T, Eigen::Index in, Eigen::Index B) {
  Sequence s;
  for (std::size_t t = 0; t < T; ++t) s.push_back(random_matrix(rng, in, B));
  return s;
}

inline void randomize(ParamStore& store, Rng& rng, double scale) {
  for (std::size_t i = 0; i < store.size(); ++i) store.value(i) = random_matrix(rng, store.value(i).rows(), store.value(i).cols(), scale);
}

// Loss = Σ_t ⟨R_t, y_t⟩ + ⟨R_f, final⟩, a random linear read-out.
struct Readout {
  Sequence per_step;
  Matrix final;

  double operator()(const SequenceResult& r) const {
    double s = (final.array() * r.final.array()).sum();
    for (std::size_t t = 0; t < per_step.size(); ++t) s += (per_step[t].array() * r.outputs[t].array()).sum();
    return s;
  }
};

struct SeqCheck {
  GradCheckReport params, inputs;
};

inline SeqCheck check_sequence(const SequenceModel& model, ParamStore& store, Sequence x, Rng& rng, double rtol) {
  const Eigen::Index B = x.front().cols();
  Readout ro;
  for (std::size_t t = 0; t < x.size(); ++t) ro.per_step.push_back(random_matrix(rng, model.output_size(), B));
  ro.final = random_matrix(rng, model.output_size(), B);

  auto fwd = model.forward(store, x);
  Gradients grads = store.zero_gradients();
  Sequence dx = model.backward(store, *fwd.trace, SequenceGrad{ro.per_step, ro.final}, grads, true);

  SeqCheck out;
  out.params = grad_check(store, [&](const ParamStore& p) { return ro(model.forward(p, x)); }, grads, rtol);
  out.inputs.passed = true;
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::span<double> theta(x[t].data(), static_cast<std::size_t>(x[t].size()));
    std::span<const double> a(dx[t].data(), static_cast<std::size_t>(dx[t].size()));
    auto r = grad_check(theta, [&] { return ro(model.forward(store, x)); }, a, rtol);
    out.inputs.passed = out.inputs.passed && r.passed;
    out.inputs.max_error = std::max(out.inputs.max_error, r.max_error);
  }
  return out;
}

inline dataset::ForcingSet random_forcing(Rng& rng, std::size_t nodes, std::size_t steps) {
  dataset::ForcingSet f;
  f.rain.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(nodes));
  f.discharge.resize(static_cast<Eigen::Index>(steps));
  for (std::size_t t = 0; t < steps; ++t) {
    f.timestamps.push_back(static_cast<HourStamp>(t));
    for (std::size_t i = 0; i < nodes; ++i)
      f.rain(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rng.uniform() < 0.4 ? rng.uniform(0, 8) : 0.0;
    f.discharge[static_cast<Eigen::Index>(t)] = rng.uniform(1, 20);
  }
  dataset::finalize_forcing(f);
  return f;
}

}  // namespace fixtures
