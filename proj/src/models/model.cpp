#include "gnrrm/models/model.hpp"

#include <algorithm>

#include "gnrrm/error.hpp"
#include "gnrrm/runtime.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::models {

using dataset::RowMatrix;
using dataset::Sample;
using nn::Matrix;
using nn::Sequence;

namespace {

// Per-node columns are padded with zeros to a multiple of 8. Matrix products
// and vectorized loops then give each column the same arithmetic wherever it
// sits, so results do not depend on node numbering.
Eigen::Index padded_columns(Eigen::Index n) { return (n + 7) / 8 * 8; }

}  // namespace

const char* to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Gnrrm: return "gnrrm";
    case Pipeline::All: return "all";
    case Pipeline::Lumped: return "lumped";
    case Pipeline::Cnn: return "cnn";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& name) {
  const std::string n = to_lower(trim(name));
  if (n == "gnrrm") return Pipeline::Gnrrm;
  if (n == "all") return Pipeline::All;
  if (n == "lumped") return Pipeline::Lumped;
  if (n == "cnn") return Pipeline::Cnn;
  throw ValidationError("unknown pipeline '" + name + "' (expected gnrrm, all, lumped or cnn)");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ValidationError(std::string(what) + " must be positive, got " + std::to_string(v));
  };
  positive(h_temporal, "h_temporal");
  positive(h_spatial, "h_spatial");
  positive(cnn_channels, "cnn_channels");
  positive(cnn_kernel, "cnn_kernel");
  positive(gtcn_layers, "gtcn_layers");
  positive(gtcn_kernel, "gtcn_kernel");
  if (window == 0) throw ValidationError("window must be positive");
}

Model::Model(const ModelConfig& config, const terrain::GraphBundle& bundle) : config_(config), bundle_(bundle) {
  config_.validate();
  const std::size_t N = bundle_.graph.size();
  if (N == 0 || bundle_.hierarchy.levels.empty()) throw ValidationError("model: empty graph or hierarchy");

  Rng rng(config_.seed);
  const Eigen::Index Ht = config_.h_temporal;
  switch (config_.pipeline) {
    case Pipeline::Gnrrm: {
      temporal_ = nn::make_backbone(config_.backbone, store_, "temporal", 2, Ht, rng, config_.gtcn());
      spatial_ = nn::make_backbone(config_.backbone, store_, "spatial", temporal_->output_size() + 1,
                                   config_.h_spatial, rng, config_.gtcn());
      head_ = nn::Dense(store_, "head", spatial_->output_size(), 1, rng);
      break;
    }
    case Pipeline::All:
      temporal_ = nn::make_backbone(config_.backbone, store_, "temporal", static_cast<Eigen::Index>(N), Ht, rng,
                                    config_.gtcn());
      head_ = nn::Dense(store_, "head", temporal_->output_size(), 1, rng);
      break;
    case Pipeline::Lumped:
      temporal_ = nn::make_backbone(config_.backbone, store_, "temporal", 1, Ht, rng, config_.gtcn());
      head_ = nn::Dense(store_, "head", temporal_->output_size(), 1, rng);
      break;
    case Pipeline::Cnn:
      cnn_ = nn::Dense(store_, "cnn", config_.cnn_kernel, config_.cnn_channels, rng);
      temporal_ = nn::make_backbone(config_.backbone, store_, "temporal", config_.cnn_channels, Ht, rng,
                                    config_.gtcn());
      head_ = nn::Dense(store_, "head", temporal_->output_size(), 1, rng);
      break;
  }

  const double mean_area = bundle_.graph.total_area_km2() / static_cast<double>(N);
  node_area_scaled_.resize(N);
  for (std::size_t i = 0; i < N; ++i) node_area_scaled_[i] = bundle_.graph.nodes[i].area_km2 / mean_area;
  node_level_.assign(N, 0);
  node_weight_.assign(N, 0.0);
  std::vector<bool> seen(N, false);
  for (const auto& level : bundle_.hierarchy.levels) {
    for (std::size_t k = 0; k < level.member_ids.size(); ++k) {
      const auto id = level.member_ids[k];
      if (id >= N || seen[id]) throw ValidationError("model: hierarchy does not partition the graph nodes");
      seen[id] = true;
      node_level_[id] = level.hop;
      node_weight_[id] = level.weights[k];
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ValidationError("model: hierarchy does not partition the graph nodes");

  normalizer_ = dataset::Normalizer::identity(pooled_normalization() ? 1 : input_width());
}

std::size_t Model::parameter_count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& p : store_)
    if (p.name.starts_with(prefix + ".")) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::size_t Model::input_width() const { return static_cast<std::size_t>(temporal_->input_size()); }

RowMatrix Model::raw_features(const dataset::ForcingSet& f) const {
  if (f.nodes() != node_count())
    throw ValidationError("forcing has " + std::to_string(f.nodes()) + " node columns, graph has " +
                          std::to_string(node_count()));
  if (config_.pipeline != Pipeline::Lumped) return f.rain;
  std::vector<double> areas;
  for (const auto& n : bundle_.graph.nodes) areas.push_back(n.area_km2);
  return dataset::lumped_series(f.rain, areas, config_.lumped_weighting);
}

void Model::fit_normalizer(const dataset::ForcingSet& f, std::span<const Sample> train) {
  auto n = dataset::fit_normalizer(raw_features(f), train, config_.window, pooled_normalization());
  if (pooled_normalization()) n = {n.mean.head(1), n.scale.head(1)};
  normalizer_ = std::move(n);
}

void Model::set_normalizer(dataset::Normalizer n) {
  const std::size_t want = pooled_normalization() ? 1 : input_width();
  if (n.features() != want)
    throw ValidationError("normalizer has " + std::to_string(n.features()) + " features, model expects " +
                          std::to_string(want));
  normalizer_ = std::move(n);
}

RowMatrix Model::features(const dataset::ForcingSet& f) const {
  RowMatrix raw = raw_features(f);
  if (!pooled_normalization()) return normalizer_.apply(raw);
  return ((raw.array() - normalizer_.mean[0]) / normalizer_.scale[0]).matrix();
}

Sequence Model::direct_inputs(const RowMatrix& x, std::span<const Sample> batch) const {
  const std::size_t L = config_.window, N = node_count();
  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  if (static_cast<std::size_t>(x.cols()) != (config_.pipeline == Pipeline::Lumped ? 1 : N))
    throw ValidationError("model: feature matrix has " + std::to_string(x.cols()) + " columns");
  for (const auto& s : batch)
    if (s.t_index + 1 < L || s.t_index >= static_cast<std::size_t>(x.rows()))
      throw ValidationError("model: sample at row " + std::to_string(s.t_index) + " has no full window");

  Sequence seq(L);
  for (std::size_t t = 0; t < L; ++t) {
    Matrix& m = seq[t];
    switch (config_.pipeline) {
      case Pipeline::Gnrrm:
        m = Matrix::Zero(2, padded_columns(B * static_cast<Eigen::Index>(N)));
        for (Eigen::Index b = 0; b < B; ++b) {
          const auto row = static_cast<Eigen::Index>(batch[b].t_index + 1 - L + t);
          for (std::size_t i = 0; i < N; ++i) {
            const Eigen::Index col = b * static_cast<Eigen::Index>(N) + static_cast<Eigen::Index>(i);
            m(0, col) = x(row, static_cast<Eigen::Index>(i));
            m(1, col) = node_area_scaled_[i];
          }
        }
        break;
      case Pipeline::All:
      case Pipeline::Lumped:
        m.resize(x.cols(), B);
        for (Eigen::Index b = 0; b < B; ++b)
          m.col(b) = x.row(static_cast<Eigen::Index>(batch[b].t_index + 1 - L + t)).transpose();
        break;
      case Pipeline::Cnn: {
        // Mean over node positions of each zero-padded kernel tap; the
        // convolution is linear, so pooling commutes with it.
        const int K = config_.cnn_kernel, pad = (K - 1) / 2;
        const auto n = static_cast<int>(N);
        m.resize(K, B);
        for (Eigen::Index b = 0; b < B; ++b) {
          const auto row = static_cast<Eigen::Index>(batch[b].t_index + 1 - L + t);
          for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = std::max(0, pad - k); j < n && j + k - pad < n; ++j) s += x(row, j + k - pad);
            m(k, b) = s / n;
          }
        }
        break;
      }
    }
  }
  return seq;
}

namespace {

// Sum in ascending order so the value depends only on the multiset of terms.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

}  // namespace

Pass Model::forward(const nn::ParamStore& p, const RowMatrix& features, std::span<const Sample> batch) const {
  if (batch.empty()) throw ValidationError("model: empty batch");
  auto tr = std::make_unique<ForwardTrace>();
  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  tr->batch = batch.size();

  Sequence direct = direct_inputs(features, batch);
  if (config_.pipeline == Pipeline::Cnn) {
    tr->temporal_in.reserve(direct.size());
    for (const auto& m : direct) tr->temporal_in.push_back(cnn_.forward(p, m));
    tr->cnn_in = std::move(direct);
  } else {
    tr->temporal_in = std::move(direct);
  }
  tr->temporal = temporal_->forward(p, tr->temporal_in);

  if (config_.pipeline == Pipeline::Gnrrm) {
    const Matrix& e = tr->temporal.final;  // H' × (B·N)
    const Eigen::Index Hp = e.rows();
    const auto N = static_cast<Eigen::Index>(node_count());
    const auto& levels = bundle_.hierarchy.levels;
    const double total_area = bundle_.hierarchy.total_area_km2();
    std::vector<double> terms;
    for (std::size_t s = 0; s < levels.size(); ++s) {
      const auto& level = levels[levels.size() - 1 - s];
      Matrix in = Matrix::Zero(Hp + 1, B);
      for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index k = 0; k < Hp; ++k) {
          terms.clear();
          for (std::size_t m = 0; m < level.member_ids.size(); ++m)
            terms.push_back(level.weights[m] * e(k, b * N + static_cast<Eigen::Index>(level.member_ids[m])));
          in(k, b) = ordered_sum(terms);
        }
        in(Hp, b) = level.level_area_km2 / total_area;
      }
      tr->spatial_in.push_back(std::move(in));
    }
    tr->spatial = spatial_->forward(p, tr->spatial_in);
    tr->head_in = tr->spatial.final;
  } else {
    tr->head_in = tr->temporal.final;
  }
  tr->head_out = head_.forward(p, tr->head_in);

  Pass out;
  out.pred = (out_.scale * tr->head_out.row(0).transpose().array() + out_.offset).matrix();
  out.trace = std::move(tr);
  return out;
}

void Model::backward(const nn::ParamStore& p, const ForwardTrace& tr, const nn::Vector& d_pred,
                     nn::Gradients& grads) const {
  const Eigen::Index B = static_cast<Eigen::Index>(tr.batch);
  if (d_pred.size() != B) throw Error("model: gradient size does not match the batch");
  const Matrix d_head = (out_.scale * d_pred).transpose();
  Matrix d_final = head_.backward(p, tr.head_in, d_head, grads);

  if (config_.pipeline == Pipeline::Gnrrm) {
    Sequence d_spatial = spatial_->backward(p, *tr.spatial.trace, nn::SequenceGrad{{}, d_final}, grads, true);
    const Eigen::Index Hp = tr.temporal.final.rows();
    const auto N = static_cast<Eigen::Index>(node_count());
    const std::size_t D = bundle_.hierarchy.levels.size() - 1;
    Matrix d_embed = Matrix::Zero(Hp, tr.temporal.final.cols());
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index i = 0; i < N; ++i) {
        const std::size_t s = D - node_level_[static_cast<std::size_t>(i)];
        d_embed.col(b * N + i) = node_weight_[static_cast<std::size_t>(i)] * d_spatial[s].col(b).head(Hp);
      }
    d_final = std::move(d_embed);
  }

  const bool cnn = config_.pipeline == Pipeline::Cnn;
  Sequence dx = temporal_->backward(p, *tr.temporal.trace, nn::SequenceGrad{{}, d_final}, grads, cnn);
  if (cnn)
    for (std::size_t t = 0; t < dx.size(); ++t) cnn_.backward(p, tr.cnn_in[t], dx[t], grads);
}

nn::Vector Model::predict(const RowMatrix& features, std::span<const Sample> samples, int threads) const {
  retain_heap_memory();
  nn::Vector out(static_cast<Eigen::Index>(samples.size()));
  const std::size_t chunks = (samples.size() + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * kChunkSize, n = std::min(kChunkSize, samples.size() - lo);
    out.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(n)) =
        forward(store_, features, samples.subspan(lo, n)).pred;
  });
  return out;
}

}  // namespace gnrrm::models
