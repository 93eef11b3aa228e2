#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "gnrrm/dataset/forcing.hpp"
#include "gnrrm/dataset/windows.hpp"
#include "gnrrm/nn/dense.hpp"
#include "gnrrm/nn/sequence.hpp"
#include "gnrrm/terrain/graph.hpp"

namespace gnrrm::models {

enum class Pipeline { Gnrrm, All, Lumped, Cnn };

const char* to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

struct ModelConfig {
  Pipeline pipeline = Pipeline::Gnrrm;
  nn::Backbone backbone = nn::Backbone::Lstm;
  int h_temporal = 16;
  int h_spatial = 16;
  int cnn_channels = 8;
  int cnn_kernel = 3;
  int gtcn_layers = 2;
  int gtcn_kernel = 3;
  dataset::LumpedWeighting lumped_weighting = dataset::LumpedWeighting::Area;
  std::size_t window = dataset::kDefaultWindow;
  std::uint64_t seed = 1;

  void validate() const;
  nn::GtcnShape gtcn() const { return {gtcn_layers, gtcn_kernel}; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Predictions are scale·head + offset; the trainer sets these from the
// training targets so the head works in standardized units.
struct OutputScale {
  double scale = 1.0;
  double offset = 0.0;

  friend bool operator==(const OutputScale&, const OutputScale&) = default;
};

// Everything backward needs from one batched forward pass. For gnrrm the
// temporal batch is laid out sample-major: column b·N + i is node i of
// sample b.
struct ForwardTrace {
  std::size_t batch = 0;
  nn::Sequence cnn_in;  // cnn only: mean-pooled kernel taps, K × B
  nn::Sequence temporal_in;
  nn::SequenceResult temporal;
  nn::Sequence spatial_in;  // gnrrm only, farthest hop first
  nn::SequenceResult spatial;
  nn::Matrix head_in;
  nn::Matrix head_out;
};

struct Pass {
  nn::Vector pred;
  std::unique_ptr<ForwardTrace> trace;
};

class Model {
 public:
  Model(const ModelConfig& config, const terrain::GraphBundle& bundle);

  const ModelConfig& config() const { return config_; }
  const terrain::GraphBundle& bundle() const { return bundle_; }
  std::size_t node_count() const { return bundle_.graph.size(); }

  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  std::size_t parameter_count() const { return store_.scalar_count(); }
  // Scalars whose parameter name starts with `prefix` ("temporal", "spatial", "head", "cnn").
  std::size_t parameter_count(const std::string& prefix) const;

  std::size_t input_width() const;  // temporal backbone input features per step
  Eigen::Index head_width() const { return head_.in(); }

  // Per-step pipeline inputs before normalization: rain (T × N) for
  // gnrrm/all/cnn, the area-weighted mean (T × 1) for lumped.
  dataset::RowMatrix raw_features(const dataset::ForcingSet& f) const;
  // gnrrm, lumped and cnn feed rain through one shared channel and use a
  // single pooled statistic; all normalizes each node column separately.
  bool pooled_normalization() const { return config_.pipeline != Pipeline::All; }
  void fit_normalizer(const dataset::ForcingSet& f, std::span<const dataset::Sample> train);
  const dataset::Normalizer& normalizer() const { return normalizer_; }
  void set_normalizer(dataset::Normalizer n);
  dataset::RowMatrix features(const dataset::ForcingSet& f) const;

  const OutputScale& output_scale() const { return out_; }
  void set_output_scale(OutputScale s) { out_ = s; }

  // `features` is the normalized matrix from features().
  Pass forward(const nn::ParamStore& p, const dataset::RowMatrix& features,
               std::span<const dataset::Sample> batch) const;
  void backward(const nn::ParamStore& p, const ForwardTrace& trace, const nn::Vector& d_pred,
                nn::Gradients& grads) const;

  // Chunked over `threads` workers; results do not depend on the thread count.
  nn::Vector predict(const dataset::RowMatrix& features, std::span<const dataset::Sample> samples,
                     int threads = 1) const;

 private:
  nn::Sequence direct_inputs(const dataset::RowMatrix& features, std::span<const dataset::Sample> batch) const;

  ModelConfig config_;
  terrain::GraphBundle bundle_;
  nn::ParamStore store_;
  std::unique_ptr<nn::SequenceModel> temporal_, spatial_;
  nn::Dense cnn_, head_;
  dataset::Normalizer normalizer_;
  OutputScale out_;
  std::vector<double> node_area_scaled_;  // area / mean node area
  std::vector<std::size_t> node_level_;
  std::vector<double> node_weight_;
};

// Samples per independently evaluated chunk.
inline constexpr std::size_t kChunkSize = 16;

}  // namespace gnrrm::models
