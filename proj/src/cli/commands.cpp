#include "gnrrm/cli/commands.hpp"

#include <CLI11.hpp>

#include "gnrrm/cli/checkpoint.hpp"
#include "gnrrm/dataset/synthetic.hpp"
#include "gnrrm/error.hpp"
#include "gnrrm/terrain/flow_direction.hpp"
#include "gnrrm/text.hpp"
#include "gnrrm/training/correlation.hpp"
#include "gnrrm/training/hydrograph.hpp"

namespace gnrrm::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ValidationError(std::string(what) + " file not found: " + p.string());
}

void require_output_dir(const fs::path& p) {
  const auto dir = p.parent_path();
  if (!dir.empty() && !fs::is_directory(dir)) throw ValidationError("output directory does not exist: " + dir.string());
}

// Node count from the `node_<id>` header columns, for commands without a graph.
dataset::ForcingSet load_forcing_unbound(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string first_line = text.substr(0, text.find('\n'));
  const auto header = split(first_line, ',');
  std::size_t nodes = 0;
  for (auto h : header)
    if (trim(h).starts_with("node_")) ++nodes;
  return dataset::parse_forcing(text, nodes, path.string());
}

std::vector<dataset::Sample> in_range(const std::vector<dataset::Sample>& all, const TimeRange& r) {
  auto s = dataset::select_range(all, r);
  if (s.empty()) throw ValidationError("range " + format_time_range(r) + " contains no complete windows");
  return s;
}

TimeRange resolve_range(const std::string& text, const dataset::SplitRanges& stored) {
  const std::pair<const char*, const std::optional<TimeRange>*> named[] = {
      {"train", &stored.train}, {"val", &stored.val}, {"test", &stored.test}};
  for (const auto& [name, r] : named)
    if (text == name) {
      if (!*r) throw ValidationError(std::string("checkpoint does not record a ") + name + " range");
      return **r;
    }
  auto r = parse_time_range(text);
  if (!r) throw ValidationError("--range expects START/END or train, val, test; got '" + text + "'");
  if (r->end <= r->start) throw ValidationError("--range is empty: " + text);
  return *r;
}

}  // namespace

terrain::Cell parse_cell(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() == 2) {
    auto r = parse_integer(trim(parts[0])), c = parse_integer(trim(parts[1]));
    if (r && c) return {static_cast<int>(*r), static_cast<int>(*c)};
  }
  throw ValidationError("expected ROW,COL, got '" + text + "'");
}

dataset::SplitRanges default_ranges(const std::vector<dataset::Sample>& samples) {
  if (samples.size() < 3) throw ValidationError("too few samples for a default train/val/test split");
  const std::size_t n = samples.size(), a = n / 2, b = n * 3 / 4;
  auto at = [&](std::size_t k) { return samples[k].time; };
  dataset::SplitRanges r;
  r.train = TimeRange{at(0), at(a)};
  r.val = TimeRange{at(a), at(b)};
  r.test = TimeRange{at(b), at(n - 1) + 1};
  return r;
}

void cmd_delineate(const DelineateOptions& o, std::ostream& out) {
  require_file(o.dem, "DEM");
  require_output_dir(o.out);
  const auto dem = terrain::load_dem(o.dem);
  const auto fd = terrain::compute_d8(dem);
  const auto cells = terrain::delineate(fd, o.outlet);
  auto bundle = terrain::make_bundle(terrain::build_graph(fd, cells, o.outlet, dem.default_cell_areas_km2()));
  terrain::export_graph(bundle, o.out);
  out << "nodes " << bundle.graph.size() << " max_distance " << bundle.hops.max_distance << "\n";
}

void cmd_synth(const SynthOptions& o, std::ostream& out) {
  require_file(o.config, "synthetic config");
  if (!fs::is_directory(o.out_dir)) throw ValidationError("output directory does not exist: " + o.out_dir.string());
  const auto cfg = dataset::parse_synthetic_config(read_file(o.config), o.config.string());
  const auto w = dataset::gen_synthetic(cfg);
  terrain::write_dem(w.dem, o.out_dir / "dem.asc");
  dataset::write_forcing(w.forcing, o.out_dir / "forcing.csv");
  terrain::export_graph(w.graph, o.out_dir / "graph.json");
  std::string prov = "# synthetic watershed\n" + dataset::format_synthetic_config(cfg);
  prov += "outlet_row=" + std::to_string(w.outlet.row) + "\noutlet_col=" + std::to_string(w.outlet.col) + "\n";
  prov += "watershed_nodes=" + std::to_string(w.graph.graph.size()) + "\n";
  prov += "max_distance=" + std::to_string(w.graph.hops.max_distance) + "\n";
  write_file(o.out_dir / "provenance.txt", prov);
  out << "nodes " << w.graph.graph.size() << " max_distance " << w.graph.hops.max_distance << " hours "
      << w.forcing.steps() << " outlet " << w.outlet.row << "," << w.outlet.col << "\n";
}

void cmd_train(const TrainOptions& o, std::ostream& out) {
  require_file(o.graph, "graph");
  require_file(o.forcing, "forcing");
  if (o.config) require_file(*o.config, "config");
  require_output_dir(o.out);
  const fs::path history = o.history ? *o.history : fs::path(o.out.string() + ".history.csv");
  require_output_dir(history);

  RunConfig rc = o.config ? load_run_config(*o.config) : RunConfig{};
  apply_overrides(rc, o.overrides);
  if (o.threads) rc.set("threads", std::to_string(*o.threads));
  const auto mc = rc.model();
  const auto tc = rc.train();
  auto ranges = rc.ranges();

  const auto bundle = terrain::import_graph(o.graph);
  const auto forcing = dataset::load_forcing(o.forcing, bundle.graph);
  const auto samples = dataset::make_windows(forcing, mc.window);
  if (!ranges.train && !ranges.val && !ranges.test) ranges = default_ranges(samples);
  if (!ranges.train || !ranges.val) throw ValidationError("train_range and val_range must both be set");
  const auto split = dataset::split_by_ranges(samples, ranges);

  models::Model model(mc, bundle);
  out << "training " << models::to_string(mc.pipeline) << "-" << nn::to_string(mc.backbone) << ": "
      << model.parameter_count() << " parameters, " << split.train.size() << " train / " << split.val.size()
      << " val samples\n";
  const auto res = training::train(model, forcing, split, tc, [&](const training::EpochRecord& r) {
    out << "epoch " << r.epoch << " train_loss " << format_real(r.train_loss) << " val_rmse " << format_real(r.val_rmse)
        << "\n";
  });
  save_checkpoint(model, ranges, o.out);
  write_file(history, training::format_history(res.history));
  out << "best epoch " << res.best_epoch << " val_rmse " << format_real(res.best_val_rmse) << "\n";
}

void cmd_eval(const EvalOptions& o, std::ostream& out) {
  require_file(o.ckpt, "checkpoint");
  require_file(o.graph, "graph");
  require_file(o.forcing, "forcing");
  const fs::path dest = o.out ? *o.out : fs::path(o.ckpt.string() + ".metrics.json");
  require_output_dir(dest);

  const auto bundle = terrain::import_graph(o.graph);
  auto ck = load_checkpoint(o.ckpt, bundle);
  const auto range = resolve_range(o.range, ck.ranges);
  const auto forcing = dataset::load_forcing(o.forcing, bundle.graph);
  const auto samples = in_range(dataset::make_windows(forcing, ck.model->config().window), range);
  const auto m = training::evaluate(*ck.model, forcing, samples, o.threads);
  write_file(dest, training::metrics_json(m, format_time_range(range)));
  out << "range " << format_time_range(range) << " n " << m.n_samples << "\n"
      << "KGE " << training::format_score(m.kge) << "\nNSE " << training::format_score(m.nse) << "\nRMSE "
      << format_real(m.rmse) << "\n";
}

void cmd_correlate(const CorrelateOptions& o, std::ostream& out) {
  require_file(o.forcing, "forcing");
  const fs::path dest = o.out ? *o.out : fs::path(o.forcing.string() + ".correlation.csv");
  require_output_dir(dest);
  const auto f = load_forcing_unbound(o.forcing);
  const auto rep = training::pairwise_correlation(f.rain, o.threshold, o.threads);
  write_file(dest, training::format_correlation_csv(rep));
  if (!rep.excluded.empty()) {
    out << "excluded zero-variance nodes:";
    for (auto id : rep.excluded) out << " " << id;
    out << "\n";
  }
  out << "pairs " << rep.pairs << " above " << rep.above << "\n";
  out << "fraction > " << format_real(o.threshold) << ": " << format_real(rep.fraction()) << "\n";
}

void cmd_predict(const PredictOptions& o, std::ostream& out) {
  require_file(o.ckpt, "checkpoint");
  require_file(o.graph, "graph");
  require_file(o.forcing, "forcing");
  require_output_dir(o.out);
  const auto bundle = terrain::import_graph(o.graph);
  auto ck = load_checkpoint(o.ckpt, bundle);
  const auto forcing = dataset::load_forcing(o.forcing, bundle.graph);
  auto samples = dataset::make_windows(forcing, ck.model->config().window);
  if (o.range) samples = in_range(samples, resolve_range(*o.range, ck.ranges));
  if (samples.empty()) throw ValidationError("forcing has no complete windows");
  const auto rows = training::predict_series(*ck.model, forcing, samples, o.threads);
  write_file(o.out, training::format_hydrograph(rows));
  out << "rows " << rows.size() << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based rainfall-runoff modelling: delineation, synthetic data, training and evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  DelineateOptions dl;
  std::string outlet;
  auto* sub_dl = app.add_subcommand("delineate", "Build the watershed graph above an outlet cell");
  sub_dl->add_option("--dem", dl.dem, "ESRI ASCII DEM")->required();
  sub_dl->add_option("--outlet", outlet, "Outlet cell as ROW,COL (0-based, row 0 is north)")->required();
  sub_dl->add_option("--out", dl.out, "Graph file to write")->required();

  SynthOptions sy;
  auto* sub_sy = app.add_subcommand("synth", "Generate a synthetic watershed, forcing and discharge");
  sub_sy->add_option("--config", sy.config, "key=value synthetic configuration")->required();
  sub_sy->add_option("--out-dir", sy.out_dir, "Existing directory for dem.asc, graph.json, forcing.csv")->required();

  TrainOptions tr;
  std::string tr_config, tr_history;
  int tr_threads = 0;
  auto* sub_tr = app.add_subcommand("train", "Train a model and write a checkpoint");
  sub_tr->add_option("--graph", tr.graph)->required();
  sub_tr->add_option("--forcing", tr.forcing)->required();
  sub_tr->add_option("--config", tr_config, "key=value run configuration");
  sub_tr->add_option("--out", tr.out, "Checkpoint to write")->required();
  sub_tr->add_option("--history", tr_history, "Per-epoch history CSV (default: <out>.history.csv)");
  sub_tr->add_option("--set", tr.overrides, "Override a config key: --set key=value (repeatable)");
  sub_tr->add_option("--threads", tr_threads, "Worker threads; 1 is the bit-reproducible reference");

  EvalOptions ev;
  std::string ev_out;
  auto* sub_ev = app.add_subcommand("eval", "Report KGE, NSE and RMSE over a time range");
  sub_ev->add_option("--ckpt", ev.ckpt)->required();
  sub_ev->add_option("--graph", ev.graph)->required();
  sub_ev->add_option("--forcing", ev.forcing)->required();
  sub_ev->add_option("--range", ev.range, "START/END, or train, val, test")->required();
  sub_ev->add_option("--out", ev_out, "Metrics JSON (default: <ckpt>.metrics.json)");
  sub_ev->add_option("--threads", ev.threads)->check(CLI::PositiveNumber);

  CorrelateOptions co;
  std::string co_out;
  auto* sub_co = app.add_subcommand("correlate", "Pairwise Pearson correlation of node rainfall");
  sub_co->add_option("--forcing", co.forcing)->required();
  sub_co->add_option("--threshold", co.threshold)->capture_default_str();
  sub_co->add_option("--out", co_out, "Matrix CSV (default: <forcing>.correlation.csv)");
  sub_co->add_option("--threads", co.threads)->check(CLI::PositiveNumber);

  PredictOptions pr;
  std::string pr_range;
  auto* sub_pr = app.add_subcommand("predict", "Write the predicted hydrograph");
  sub_pr->add_option("--ckpt", pr.ckpt)->required();
  sub_pr->add_option("--graph", pr.graph)->required();
  sub_pr->add_option("--forcing", pr.forcing)->required();
  sub_pr->add_option("--out", pr.out, "Hydrograph CSV")->required();
  sub_pr->add_option("--range", pr_range, "START/END, or train, val, test");
  sub_pr->add_option("--threads", pr.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sub_dl) {
      dl.outlet = parse_cell(outlet);
      cmd_delineate(dl, out);
    } else if (*sub_sy) {
      cmd_synth(sy, out);
    } else if (*sub_tr) {
      if (!tr_config.empty()) tr.config = tr_config;
      if (!tr_history.empty()) tr.history = tr_history;
      if (sub_tr->count("--threads")) {
        if (tr_threads < 1) throw ValidationError("--threads must be at least 1");
        tr.threads = tr_threads;
      }
      cmd_train(tr, out);
    } else if (*sub_ev) {
      if (!ev_out.empty()) ev.out = ev_out;
      cmd_eval(ev, out);
    } else if (*sub_co) {
      if (!co_out.empty()) co.out = co_out;
      cmd_correlate(co, out);
    } else if (*sub_pr) {
      if (!pr_range.empty()) pr.range = pr_range;
      cmd_predict(pr, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace gnrrm::cli
