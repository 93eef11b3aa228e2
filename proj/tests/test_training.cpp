#include <cmath>
#include <limits>

#include "doctest.h"
#include "gnrrm/error.hpp"
#include "gnrrm/training/correlation.hpp"
#include "gnrrm/training/hydrograph.hpp"
#include "gnrrm/training/metrics.hpp"
#include "gnrrm/training/trainer.hpp"
#include "oracles.hpp"

using namespace gnrrm;
using namespace gnrrm::training;
using dataset::ForcingSet;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

ForcingSet forcing_for(Rng& rng, std::size_t nodes, std::size_t steps, double constant_q = -1.0) {
  ForcingSet f;
  f.rain.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(nodes));
  f.discharge.resize(static_cast<Eigen::Index>(steps));
  double q = 2.0;
  for (std::size_t t = 0; t < steps; ++t) {
    f.timestamps.push_back(static_cast<HourStamp>(1000 + t));
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double r = rng.uniform() < 0.3 ? rng.uniform(0, 6) : 0.0;
      f.rain(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = r;
      total += r;
    }
    q = 0.8 * q + 0.2 * (1.0 + total);
    f.discharge[static_cast<Eigen::Index>(t)] = constant_q >= 0 ? constant_q : q;
  }
  dataset::finalize_forcing(f);
  return f;
}

dataset::Split halves(const std::vector<dataset::Sample>& s) {
  dataset::Split sp;
  const std::size_t cut = s.size() * 2 / 3;
  sp.train.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut));
  sp.val.assign(s.begin() + static_cast<std::ptrdiff_t>(cut), s.end());
  return sp;
}

models::ModelConfig tiny(models::Pipeline p) {
  models::ModelConfig c;
  c.pipeline = p;
  c.h_temporal = 4;
  c.h_spatial = 3;
  c.window = 6;
  return c;
}

// Pearson from raw sums in long double, independent of the library's two-pass form.
double oracle_pearson(const VectorXd& a, const VectorXd& b) {
  long double n = a.size(), sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
    saa += (long double)a[k] * a[k];
    sbb += (long double)b[k] * b[k];
    sab += (long double)a[k] * b[k];
  }
  return static_cast<double>((n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb)));
}

}  // namespace

TEST_CASE("metric definitions on hand cases") {
  const VectorXd o = vec({1, 2, 3});
  SUBCASE("perfect simulation") {
    auto m = compute_metrics(o, o);
    CHECK(*m.nse == 1.0);
    CHECK(*m.kge == 1.0);
    CHECK(m.rmse == 0.0);
    CHECK(*m.parts.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*m.parts.alpha == 1.0);
    CHECK(*m.parts.beta == 1.0);
  }
  SUBCASE("mean prediction") {
    auto m = compute_metrics(o, VectorXd::Constant(3, 2.0));
    CHECK(std::abs(*m.nse) <= 1e-12);
    CHECK_FALSE(m.kge.has_value());  // r undefined for a constant series
  }
  SUBCASE("shifted by one") {
    auto m = compute_metrics(o, vec({2, 3, 4}));
    CHECK(std::abs(*m.nse - (-0.5)) <= 1e-12);
    CHECK(std::abs(m.rmse - 1.0) <= 1e-12);
    CHECK(std::abs(*m.parts.r - 1.0) <= 1e-12);
    CHECK(std::abs(*m.parts.alpha - 1.0) <= 1e-12);
    // β = mean(s)/mean(o) = 3/2, so KGE = 1 − √(0.25).
    CHECK(std::abs(*m.parts.beta - 1.5) <= 1e-12);
    CHECK(std::abs(*m.kge - 0.5) <= 1e-12);
  }
  SUBCASE("undefined cases") {
    CHECK_FALSE(nse(VectorXd::Constant(4, 3.0), vec({1, 2, 3, 4})).has_value());
    auto k = kge(vec({-1, 0, 1}), vec({-1, 0, 2}));
    CHECK(k.r.has_value());
    CHECK_FALSE(k.beta.has_value());
    CHECK_FALSE(k.kge.has_value());
    CHECK_THROWS_AS(rmse(VectorXd(), VectorXd()), ValidationError);
    CHECK_THROWS_AS(rmse(o, vec({1, 2})), ValidationError);
  }
}

TEST_CASE("metric properties on random series") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(40));
    VectorXd o(n), s(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      o[k] = rng.uniform(0.5, 20);
      s[k] = rng.uniform(0.5, 20);
    }
    CHECK(*nse(o, VectorXd::Constant(n, rng.uniform(-5, 25))) <= 1e-12);
    CHECK(*nse(o, s) <= 1.0);
    auto k = kge(o, s);
    CHECK(*k.kge <= 1.0);
    CHECK(rmse(o, s) >= 0.0);
    const double c = rng.uniform(-3, 3);
    const double base = rmse(o, s);
    const double mean_diff = (s - o).mean();
    const VectorXd shifted = (s.array() + c).matrix();
    CHECK(rmse(o, shifted) == doctest::Approx(std::sqrt(base * base + 2 * c * mean_diff + c * c)).epsilon(1e-12));
  }
}

TEST_CASE("pairwise correlation") {
  Rng rng(2);
  SUBCASE("matches the raw-sum oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index T = 50 + static_cast<Eigen::Index>(rng.below(100)), N = 2 + static_cast<Eigen::Index>(rng.below(10));
      dataset::RowMatrix x(T, N);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform() < 0.5 ? rng.uniform(0, 10) : 0.0;
      auto rep = pairwise_correlation(x, 0.7, 1 + static_cast<int>(rng.below(3)));
      for (Eigen::Index a = 0; a < N; ++a) {
        CHECK(rep.r(a, a) == 1.0);
        for (Eigen::Index b = 0; b < N; ++b) {
          CHECK(std::abs(rep.r(a, b) - rep.r(b, a)) <= 1e-12);
          if (a != b) CHECK(std::abs(rep.r(a, b) - oracle_pearson(x.col(a), x.col(b))) <= 1e-9);
        }
      }
      CHECK(rep.pairs == static_cast<std::size_t>(N * (N - 1) / 2));
    }
  }
  SUBCASE("identity, negation and thresholds") {
    dataset::RowMatrix x(20, 3);
    for (Eigen::Index t = 0; t < 20; ++t) {
      x(t, 0) = rng.uniform(0, 5);
      x(t, 1) = x(t, 0);
      x(t, 2) = -x(t, 0);
    }
    auto rep = pairwise_correlation(x, 0.7);
    CHECK(rep.r(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.r(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(rep.pairs == 3);
    CHECK(rep.above == 1);
    dataset::RowMatrix same(20, 4);
    for (Eigen::Index c = 0; c < 4; ++c) same.col(c) = x.col(0);
    CHECK(pairwise_correlation(same, 0.7).fraction() == 1.0);
    dataset::RowMatrix noisy = same;
    for (Eigen::Index k = 0; k < noisy.size(); ++k) noisy.data()[k] += rng.uniform(0, 0.1);
    CHECK(pairwise_correlation(noisy, 1.0).fraction() == 0.0);
  }
  SUBCASE("zero-variance columns are excluded") {
    dataset::RowMatrix x(10, 3);
    for (Eigen::Index t = 0; t < 10; ++t) x.row(t) << rng.uniform(), 4.0, rng.uniform();
    auto rep = pairwise_correlation(x, 0.7);
    REQUIRE(rep.excluded.size() == 1);
    CHECK(rep.excluded[0] == 1);
    CHECK(rep.pairs == 1);
    CHECK(std::isnan(rep.r(0, 1)));
    CHECK(rep.r(1, 1) == 1.0);
    CHECK(format_correlation_csv(rep).find("nan") != std::string::npos);
  }
  SUBCASE("independent noise is rarely correlated") {
    dataset::RowMatrix x(500, 12);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
    CHECK(pairwise_correlation(x, 0.7).fraction() == 0.0);
  }
}

TEST_CASE("training on a constant target") {
  Rng rng(3);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 4));
  auto f = forcing_for(rng, 4, 125, 0.5);
  auto split = halves(dataset::make_windows(f, 6));
  TrainConfig tc;
  tc.batch_size = 8;
  tc.max_epochs = 200;
  tc.patience = 200;
  tc.target_scaling = false;
  SUBCASE("from zero parameters only the head bias moves, to the mean") {
    models::Model m(tiny(models::Pipeline::Lumped), bundle);
    for (std::size_t i = 0; i < m.params().size(); ++i) m.params().value(i).setZero();
    auto res = train(m, f, split, tc);
    CHECK(res.history.size() <= 200);
    CHECK(res.history[res.best_epoch - 1].train_loss < 1e-4);
    CHECK(m.params().value(m.params().id("head.b"))(0, 0) == doctest::Approx(0.5).epsilon(1e-2));
  }
  SUBCASE("from the default initialization") {
    for (auto p : {models::Pipeline::Gnrrm, models::Pipeline::Lumped}) {
      models::Model m(tiny(p), bundle);
      auto res = train(m, f, split, tc);
      CHECK(res.history[res.best_epoch - 1].train_loss < 1e-4);
    }
  }
}

TEST_CASE("training loop contract") {
  Rng rng(4);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 5));
  auto f = forcing_for(rng, 5, 200);
  auto split = halves(dataset::make_windows(f, 6));
  TrainConfig tc;
  tc.batch_size = 16;
  tc.max_epochs = 6;
  tc.patience = 6;

  SUBCASE("patience 0 runs exactly one epoch") {
    models::Model m(tiny(models::Pipeline::Gnrrm), bundle);
    tc.patience = 0;
    CHECK(train(m, f, split, tc).history.size() == 1);
  }
  SUBCASE("same seed gives the same history for any thread count") {
    auto run = [&](int threads) {
      models::Model m(tiny(models::Pipeline::Gnrrm), bundle);
      auto c = tc;
      c.threads = threads;
      c.batch_size = 40;
      auto r = train(m, f, split, c);
      return std::make_pair(r.history, m.params().flat_values());
    };
    auto a = run(1), b = run(1), c = run(3);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(a.first == c.first);
    CHECK(a.second == c.second);
  }
  SUBCASE("the best epoch's parameters are kept") {
    models::Model m(tiny(models::Pipeline::Cnn), bundle);
    tc.lr = 0.05;
    auto res = train(m, f, split, tc);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : res.history) best = std::min(best, r.val_rmse);
    CHECK(res.best_val_rmse == best);
    CHECK(evaluate(m, f, split.val).rmse == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("non-finite loss aborts") {
    models::Model m(tiny(models::Pipeline::Lumped), bundle);
    m.params().value(m.params().id("head.b"))(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train(m, f, split, tc), Error);
  }
  SUBCASE("empty splits and bad configs are rejected") {
    models::Model m(tiny(models::Pipeline::Lumped), bundle);
    dataset::Split empty = split;
    empty.val.clear();
    CHECK_THROWS_AS(train(m, f, empty, tc), ValidationError);
    empty = split;
    empty.train.clear();
    CHECK_THROWS_AS(train(m, f, empty, tc), ValidationError);
    tc.patience = 7;
    CHECK_THROWS_AS(train(m, f, split, tc), ValidationError);
    CHECK_THROWS_AS(evaluate(m, f, {}), ValidationError);
  }
  SUBCASE("history CSV") {
    models::Model m(tiny(models::Pipeline::Lumped), bundle);
    tc.max_epochs = 2;
    tc.patience = 2;
    auto text = format_history(train(m, f, split, tc).history);
    CHECK(text.rfind("epoch,train_loss,val_rmse\n1,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }
}

TEST_CASE("hydrograph export") {
  Rng rng(5);
  auto bundle = terrain::make_bundle(oracle::random_tree(rng, 3));
  auto f = forcing_for(rng, 3, 40);
  auto samples = dataset::make_windows(f, 6);
  models::Model m(tiny(models::Pipeline::All), bundle);
  auto rows = predict_series(m, f, samples);
  REQUIRE(rows.size() == samples.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].observed == samples[k].y);
    CHECK(rows[k].time == samples[k].time);
  }
  auto text = format_hydrograph(rows);
  CHECK(text.rfind("timestamp,observed_cms,predicted_cms\n", 0) == 0);
  auto back = parse_hydrograph(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(back[k].time == rows[k].time);
    CHECK(std::abs(back[k].observed - rows[k].observed) <= 1e-12);
    CHECK(std::abs(back[k].predicted - rows[k].predicted) <= 1e-12);
  }
  CHECK(back == rows);
  CHECK_THROWS_AS(parse_hydrograph("time,q\n"), ParseError);
}
