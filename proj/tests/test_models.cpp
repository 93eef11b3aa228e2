#include <cmath>

#include "doctest.h"
#include "gnrrm/error.hpp"
#include "gnrrm/models/model.hpp"
#include "gnrrm/nn/grad_check.hpp"
#include "gnrrm/nn/lstm.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace gnrrm;
using namespace gnrrm::models;
using dataset::ForcingSet;
using dataset::Sample;
using nn::Backbone;

namespace {

using fixtures::random_forcing;

ModelConfig small_config(Pipeline p, Backbone b, std::uint64_t seed = 3) {
  ModelConfig c;
  c.pipeline = p;
  c.backbone = b;
  c.h_temporal = 3;
  c.h_spatial = 2;
  c.cnn_channels = 2;
  c.cnn_kernel = 3;
  c.window = 6;
  c.seed = seed;
  return c;
}

const Pipeline kPipelines[] = {Pipeline::Gnrrm, Pipeline::All, Pipeline::Lumped, Pipeline::Cnn};
const Backbone kBackbones[] = {Backbone::Lstm, Backbone::BiLstm, Backbone::Gtcn, Backbone::BiGtcn};

// Relabels node ids by `perm` (old id → new id) and moves rain columns along.
std::pair<terrain::GraphBundle, ForcingSet> relabel(const terrain::FlowGraph& g, const ForcingSet& f,
                                                    const std::vector<std::size_t>& perm) {
  terrain::FlowGraph h;
  h.nodes.resize(g.size());
  h.downstream.assign(g.size(), std::nullopt);
  ForcingSet out = f;
  for (std::size_t i = 0; i < g.size(); ++i) {
    h.nodes[perm[i]] = g.nodes[i];
    h.nodes[perm[i]].id = perm[i];
    if (g.downstream[i]) h.downstream[perm[i]] = perm[*g.downstream[i]];
    out.rain.col(static_cast<Eigen::Index>(perm[i])) = f.rain.col(static_cast<Eigen::Index>(i));
  }
  h.outlet_id = perm[g.outlet_id];
  return {terrain::make_bundle(h), out};
}

}  // namespace

TEST_CASE("pipelines with zero parameters return the head bias") {
  Rng rng(1);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 6));
  auto f = random_forcing(rng, 6, 20);
  auto samples = dataset::make_windows(f, 6);
  for (auto p : kPipelines)
    for (auto b : kBackbones) {
      CAPTURE(to_string(p));
      CAPTURE(nn::to_string(b));
      Model m(small_config(p, b), bundle);
      for (std::size_t i = 0; i < m.params().size(); ++i) m.params().value(i).setZero();
      m.params().value(m.params().id("head.b"))(0, 0) = 2.5;
      auto pass = m.forward(m.params(), m.features(f), std::span(samples).first(4));
      for (Eigen::Index k = 0; k < pass.pred.size(); ++k) CHECK(pass.pred[k] == 2.5);
      if (p == Pipeline::Gnrrm) {
        CHECK(pass.trace->temporal.final.cwiseAbs().maxCoeff() == 0.0);
        CHECK(pass.trace->spatial.final.cwiseAbs().maxCoeff() == 0.0);
      }
    }
}

TEST_CASE("gnrrm on a single-node watershed") {
  Rng rng(2);
  terrain::FlowGraph g;
  g.nodes = {{0, 0, 0, 16.0}};
  g.downstream = {std::nullopt};
  auto bundle = terrain::make_bundle(g);
  auto f = random_forcing(rng, 1, 12);
  auto samples = dataset::make_windows(f, 6);
  Model m(small_config(Pipeline::Gnrrm, Backbone::Lstm), bundle);
  auto pass = m.forward(m.params(), m.features(f), std::span(samples).first(1));
  REQUIRE(pass.trace->spatial_in.size() == 1);

  // Rebuild the spatial cell and head by hand from the stored parameters.
  const nn::Matrix e = pass.trace->temporal.final.leftCols(1);  // the rest is zero padding
  nn::Matrix in(e.rows() + 1, 1);
  in << e, 1.0;
  CHECK(pass.trace->spatial_in[0] == in);
  nn::ParamStore s;
  Rng unused(0);
  nn::Lstm cell(s, "spatial.lstm", e.rows() + 1, 2, unused);
  for (const char* n : {"spatial.lstm.W", "spatial.lstm.U", "spatial.lstm.b"}) s.value(s.id(n)) = m.params().value(m.params().id(n));
  auto h = nn::lstm_cell(s, cell, in, {nn::Matrix::Zero(2, 1), nn::Matrix::Zero(2, 1)}).h;
  const double q = (m.params().value(m.params().id("head.W")) * h)(0, 0) + m.params().value(m.params().id("head.b"))(0, 0);
  CHECK(pass.pred[0] == doctest::Approx(q).epsilon(1e-14));
}

TEST_CASE("gnrrm is invariant to node order within hop levels") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = oracle::random_tree(rng, 5 + rng.below(20));
    auto bundle = terrain::make_bundle(g);
    auto f = random_forcing(rng, g.size(), 16);
    auto samples = dataset::make_windows(f, 6);
    const auto batch = std::span(samples).first(5);
    for (auto b : kBackbones) {
      Model base(small_config(Pipeline::Gnrrm, b, 10 + trial), bundle);
      auto ref = base.forward(base.params(), base.features(f), batch).pred;

      // Reordered membership lists.
      auto shuffled = bundle;
      for (auto& level : shuffled.hierarchy.levels) {
        std::vector<std::size_t> order(level.member_ids.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        rng.shuffle(order);
        auto ids = level.member_ids;
        auto w = level.weights;
        for (std::size_t k = 0; k < order.size(); ++k) {
          level.member_ids[k] = ids[order[k]];
          level.weights[k] = w[order[k]];
        }
      }
      Model reordered(small_config(Pipeline::Gnrrm, b, 10 + trial), shuffled);
      CHECK(reordered.forward(reordered.params(), reordered.features(f), batch).pred == ref);

      // Relabelled node ids, which also moves each node's batch column.
      std::vector<std::size_t> perm(g.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      for (const auto& level : bundle.hierarchy.levels) {
        auto ids = level.member_ids;
        rng.shuffle(ids);
        for (std::size_t k = 0; k < ids.size(); ++k) perm[level.member_ids[k]] = ids[k];
      }
      auto [rb, rf] = relabel(g, f, perm);
      REQUIRE(rb.hops.max_distance == bundle.hops.max_distance);
      Model relabelled(small_config(Pipeline::Gnrrm, b, 10 + trial), rb);
      CHECK(relabelled.forward(relabelled.params(), relabelled.features(rf), batch).pred == ref);
    }
  }
}

TEST_CASE("uniform rain and uniform areas reduce to the lumped signal") {
  Rng rng(4);
  auto g = oracle::random_tree(rng, 12);
  for (auto& n : g.nodes) n.area_km2 = 16.0;
  auto bundle = terrain::make_bundle(g);
  auto f = random_forcing(rng, 12, 20);
  for (Eigen::Index t = 0; t < f.rain.rows(); ++t) f.rain.row(t).setConstant(f.rain(t, 0));
  auto samples = dataset::make_windows(f, 6);
  const auto batch = std::span(samples).first(3);

  Model m(small_config(Pipeline::Gnrrm, Backbone::Lstm), bundle);
  auto pass = m.forward(m.params(), m.features(f), batch);
  const auto& e = pass.trace->temporal.final;
  const auto N = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index b = 0; b < 3; ++b) {
    const nn::Vector common = e.col(b * N);
    for (Eigen::Index i = 1; i < N; ++i) CHECK((e.col(b * N + i) - common).norm() <= 1e-12 * common.norm());
    for (const auto& level : pass.trace->spatial_in)
      CHECK((level.col(b).head(common.size()) - common).norm() <= 1e-12 * common.norm());
  }

  Model all(small_config(Pipeline::All, Backbone::Lstm), bundle);
  Model lumped(small_config(Pipeline::Lumped, Backbone::Lstm), bundle);
  auto ra = all.raw_features(f);
  auto rl = lumped.raw_features(f);
  REQUIRE(ra.cols() == N);
  for (Eigen::Index i = 0; i < N; ++i)
    CHECK((ra.col(i) - rl.col(0)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, rl.cwiseAbs().maxCoeff()));
}

TEST_CASE("lumped pipeline weighting") {
  Rng rng(9);
  auto g = oracle::random_tree(rng, 7);
  auto bundle = terrain::make_bundle(g);
  auto f = random_forcing(rng, 7, 30);
  auto c = small_config(Pipeline::Lumped, Backbone::Lstm);
  Model area(c, bundle);
  c.lumped_weighting = dataset::LumpedWeighting::Simple;
  Model simple(c, bundle);
  const auto ra = area.raw_features(f), rs = simple.raw_features(f);
  double total = 0.0;
  for (const auto& n : g.nodes) total += n.area_km2;
  for (Eigen::Index t = 0; t < f.rain.rows(); ++t) {
    double aw = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      aw += f.rain(t, static_cast<Eigen::Index>(i)) * g.nodes[i].area_km2 / total;
      mean += f.rain(t, static_cast<Eigen::Index>(i)) / static_cast<double>(g.size());
    }
    CHECK(ra(t, 0) == doctest::Approx(aw).epsilon(1e-13));
    CHECK(rs(t, 0) == doctest::Approx(mean).epsilon(1e-13));
  }
  CHECK(area.parameter_count() == simple.parameter_count());
  CHECK_THROWS_AS(dataset::parse_lumped_weighting("median"), ValidationError);
}

TEST_CASE("parameter counts") {
  Rng rng(5);
  auto small = terrain::make_bundle(oracle::random_tree(rng, 5));
  auto large = terrain::make_bundle(oracle::random_tree(rng, 40));
  ModelConfig c;
  c.backbone = Backbone::Lstm;
  Model m(c, small);
  CHECK(m.parameter_count("temporal") == 4 * (16 * (2 + 16) + 16));
  CHECK(m.parameter_count("temporal") == 1216);
  CHECK(m.parameter_count() ==
        m.parameter_count("temporal") + m.parameter_count("spatial") + m.parameter_count("head"));

  for (auto b : kBackbones) {
    c.backbone = b;
    for (auto p : {Pipeline::Gnrrm, Pipeline::Lumped, Pipeline::Cnn}) {
      c.pipeline = p;
      CHECK(Model(c, small).parameter_count() == Model(c, large).parameter_count());
    }
    c.pipeline = Pipeline::All;
    Model a_small(c, small), a_large(c, large);
    CHECK(a_small.input_width() == 5);
    CHECK(a_large.input_width() == 40);
    CHECK(a_small.head_width() == a_large.head_width());
  }

  c.pipeline = Pipeline::Gnrrm;
  c.backbone = Backbone::Lstm;
  Model uni(c, small);
  c.backbone = Backbone::BiLstm;
  Model bi(c, small);
  CHECK(bi.parameter_count("temporal") == 2 * uni.parameter_count("temporal"));
  CHECK(bi.head_width() == 2 * uni.head_width());

  // Spatial parameters do not depend on the hierarchy depth.
  terrain::FlowGraph chain;
  for (std::size_t i = 0; i < 9; ++i) {
    chain.nodes.push_back({i, 0, static_cast<int>(i), 1.0});
    chain.downstream.push_back(i == 0 ? std::nullopt : std::optional<std::size_t>(i - 1));
  }
  Model deep(c, terrain::make_bundle(chain));
  CHECK(deep.parameter_count("spatial") == bi.parameter_count("spatial"));
}

TEST_CASE("end-to-end gradients match finite differences") {
  Rng rng(6);
  for (auto p : kPipelines)
    for (auto b : kBackbones) {
      CAPTURE(to_string(p));
      CAPTURE(nn::to_string(b));
      for (int trial = 0; trial < 20; ++trial) {
        auto bundle = terrain::make_bundle(oracle::random_tree(rng, 1 + rng.below(6)));
        auto cfg = small_config(p, b, 100 + trial);
        cfg.window = 2 + rng.below(7);
        cfg.cnn_kernel = 1 + 2 * static_cast<int>(rng.below(3));
        Model m(cfg, bundle);
        m.set_output_scale({rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0)});
        auto f = random_forcing(rng, bundle.graph.size(), cfg.window + 4);
        auto samples = dataset::make_windows(f, cfg.window);
        m.fit_normalizer(f, samples);
        const auto x = m.features(f);
        const auto batch = std::span(samples).first(3);
        nn::Vector r(3);
        for (int k = 0; k < 3; ++k) r[k] = rng.uniform(-1, 1);

        auto pass = m.forward(m.params(), x, batch);
        nn::Gradients g = m.params().zero_gradients();
        m.backward(m.params(), *pass.trace, r, g);
        auto loss = [&](const nn::ParamStore& ps) { return m.forward(ps, x, batch).pred.dot(r); };
        auto store = m.params();
        auto rep = nn::grad_check(store, loss, g, 1e-4);
        CAPTURE(rep.worst_name);
        CHECK(rep.passed);
      }
    }
}

TEST_CASE("cnn front end") {
  Rng rng(7);
  SUBCASE("zero weights and bias c give constant backbone input") {
    auto bundle = terrain::make_bundle(oracle::random_tree(rng, 6));
    auto f = random_forcing(rng, 6, 12);
    auto samples = dataset::make_windows(f, 6);
    Model m(small_config(Pipeline::Cnn, Backbone::Lstm), bundle);
    m.params().value(m.params().id("cnn.W")).setZero();
    m.params().value(m.params().id("cnn.b")) << 0.75, -1.25;
    auto pass = m.forward(m.params(), m.features(f), std::span(samples).first(2));
    for (const auto& step : pass.trace->temporal_in) {
      CHECK((step.row(0).array() == 0.75).all());
      CHECK((step.row(1).array() == -1.25).all());
    }
  }
  SUBCASE("more taps than nodes") {
    terrain::FlowGraph g;
    g.nodes = {{0, 0, 0, 1.0}, {1, 0, 1, 1.0}};
    g.downstream = {std::nullopt, 0};
    auto f = random_forcing(rng, 2, 10);
    auto samples = dataset::make_windows(f, 6);
    auto cfg = small_config(Pipeline::Cnn, Backbone::Lstm);
    cfg.cnn_kernel = 5;
    Model m(cfg, terrain::make_bundle(g));
    auto x = m.features(f);
    auto pass = m.forward(m.params(), x, std::span(samples).first(1));
    CHECK(pass.pred.allFinite());
    // Taps 0 and 4 never overlap a node; taps 1..3 see the mean of what overlaps.
    const auto& P = pass.trace->cnn_in.back();
    const auto row = static_cast<Eigen::Index>(samples[0].t_index);
    CHECK(P(0, 0) == 0.0);
    CHECK(P(4, 0) == 0.0);
    CHECK(P(2, 0) == doctest::Approx((x(row, 0) + x(row, 1)) / 2));
    CHECK(P(1, 0) == doctest::Approx(x(row, 0) / 2));
    CHECK(P(3, 0) == doctest::Approx(x(row, 1) / 2));
  }
}

TEST_CASE("forward is deterministic and chunking is thread independent") {
  Rng rng(8);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 8));
  auto f = random_forcing(rng, 8, 80);
  auto samples = dataset::make_windows(f, 6);
  for (auto p : kPipelines) {
    Model m(small_config(p, Backbone::BiGtcn), bundle);
    auto x = m.features(f);
    CHECK(m.forward(m.params(), x, samples).pred == m.forward(m.params(), x, samples).pred);
    CHECK(m.predict(x, samples, 1) == m.predict(x, samples, 3));
  }
}

TEST_CASE("model input validation") {
  Rng rng(9);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 4));
  auto f = random_forcing(rng, 4, 12);
  Model m(small_config(Pipeline::Gnrrm, Backbone::Lstm), bundle);
  auto x = m.features(f);
  CHECK_THROWS_AS(m.forward(m.params(), x, {}), ValidationError);
  std::vector<Sample> early{{2, 1.0, 2}};
  CHECK_THROWS_AS(m.forward(m.params(), x, early), ValidationError);
  auto g = random_forcing(rng, 5, 12);
  CHECK_THROWS_AS(m.features(g), ValidationError);
  auto cfg = small_config(Pipeline::Gnrrm, Backbone::Lstm);
  cfg.h_temporal = 0;
  CHECK_THROWS_AS(Model(cfg, bundle), ValidationError);
  CHECK_THROWS_AS(parse_pipeline("graph"), ValidationError);
  CHECK(parse_pipeline("CNN") == Pipeline::Cnn);
}
