#include "gnrrm/cli/checkpoint.hpp"

#include <map>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::cli {

namespace {

std::string row_major_values(const nn::Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += ' ';
      out += format_real(m(r, c));
    }
  return out;
}

std::map<std::string, std::string> config_fields(const models::ModelConfig& c) {
  return {
      {"pipeline", models::to_string(c.pipeline)},
      {"backbone", nn::to_string(c.backbone)},
      {"h_temporal", std::to_string(c.h_temporal)},
      {"h_spatial", std::to_string(c.h_spatial)},
      {"cnn_channels", std::to_string(c.cnn_channels)},
      {"cnn_kernel", std::to_string(c.cnn_kernel)},
      {"gtcn_layers", std::to_string(c.gtcn_layers)},
      {"gtcn_kernel", std::to_string(c.gtcn_kernel)},
      {"lumped_weighting", dataset::to_string(c.lumped_weighting)},
      {"window", std::to_string(c.window)},
      {"seed", std::to_string(c.seed)},
  };
}

struct Lines {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  std::string source;

  bool done() const { return pos >= lines.size(); }
  std::size_t line_no() const { return pos; }
  std::vector<std::string_view> next() {
    while (pos < lines.size()) {
      auto t = split_whitespace(lines[pos++]);
      if (!t.empty()) return t;
    }
    throw ParseError(source, pos, "unexpected end of checkpoint");
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, pos, what); }
};

double real(Lines& in, std::string_view tok) {
  auto v = parse_real(tok);
  if (!v) in.fail("bad number '" + std::string(tok) + "'");
  return *v;
}

long long count(Lines& in, std::string_view tok) {
  auto v = parse_integer(tok);
  if (!v || *v < 0) in.fail("bad count '" + std::string(tok) + "'");
  return *v;
}

}  // namespace

std::string format_checkpoint(const models::Model& model, const dataset::SplitRanges& ranges) {
  std::string out = std::string(kCheckpointTag) + " " + std::to_string(kCheckpointVersion) + "\n";
  for (const auto& [k, v] : config_fields(model.config())) out += "config " + k + " " + v + "\n";
  const auto fp = terrain::fingerprint(model.bundle());
  out += "graph " + std::to_string(fp.node_count) + " " + std::to_string(fp.outlet_id) + " " +
         std::to_string(fp.max_distance) + " " + fp.content_hash + "\n";
  const std::pair<const char*, const std::optional<TimeRange>*> named[] = {
      {"train", &ranges.train}, {"val", &ranges.val}, {"test", &ranges.test}};
  for (const auto& [name, r] : named)
    if (*r) out += std::string("split ") + name + " " + format_time_range(**r) + "\n";
  const auto& n = model.normalizer();
  out += "normalizer " + std::to_string(n.features());
  for (Eigen::Index k = 0; k < n.mean.size(); ++k) out += " " + format_real(n.mean[k]);
  for (Eigen::Index k = 0; k < n.scale.size(); ++k) out += " " + format_real(n.scale[k]);
  out += "\n";
  out += "output_scale " + format_real(model.output_scale().scale) + " " + format_real(model.output_scale().offset) + "\n";
  for (const auto& p : model.params()) {
    out += "param " + p.name + " " + std::to_string(p.rank) + " " + std::to_string(p.value.rows());
    if (p.rank == 2) out += " " + std::to_string(p.value.cols());
    out += "\n" + row_major_values(p.value) + "\n";
  }
  out += "end\n";
  return out;
}

LoadedCheckpoint parse_checkpoint(const std::string& text, const terrain::GraphBundle& bundle,
                                  const std::string& source) {
  Lines in{split(text, '\n'), 0, source};
  auto head = in.next();
  if (head.size() != 2 || head[0] != kCheckpointTag) in.fail("not a checkpoint file");
  if (head[1] != std::to_string(kCheckpointVersion))
    throw ValidationError(source + ": checkpoint format version " + std::string(head[1]) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");

  std::map<std::string, std::string> cfg;
  auto tok = in.next();
  while (tok[0] == "config") {
    if (tok.size() != 3) in.fail("config lines are 'config <key> <value>'");
    cfg[std::string(tok[1])] = std::string(tok[2]);
    tok = in.next();
  }
  models::ModelConfig mc;
  try {
    auto need = [&](const char* k) -> const std::string& {
      auto it = cfg.find(k);
      if (it == cfg.end()) in.fail(std::string("missing config ") + k);
      return it->second;
    };
    auto num = [&](const char* k) {
      auto v = parse_integer(need(k));
      if (!v) in.fail(std::string("bad config ") + k);
      return *v;
    };
    mc.pipeline = models::parse_pipeline(need("pipeline"));
    mc.backbone = nn::parse_backbone(need("backbone"));
    mc.lumped_weighting = dataset::parse_lumped_weighting(need("lumped_weighting"));
    mc.h_temporal = static_cast<int>(num("h_temporal"));
    mc.h_spatial = static_cast<int>(num("h_spatial"));
    mc.cnn_channels = static_cast<int>(num("cnn_channels"));
    mc.cnn_kernel = static_cast<int>(num("cnn_kernel"));
    mc.gtcn_layers = static_cast<int>(num("gtcn_layers"));
    mc.gtcn_kernel = static_cast<int>(num("gtcn_kernel"));
    mc.window = static_cast<std::size_t>(num("window"));
    mc.seed = static_cast<std::uint64_t>(num("seed"));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    in.fail(e.what());
  }

  if (tok[0] != "graph" || tok.size() != 5) in.fail("expected 'graph <nodes> <outlet> <max_distance> <hash>'");
  terrain::GraphFingerprint stored{static_cast<std::size_t>(count(in, tok[1])), static_cast<std::size_t>(count(in, tok[2])),
                                   static_cast<std::size_t>(count(in, tok[3])), std::string(tok[4])};
  const auto actual = terrain::fingerprint(bundle);
  if (!(stored == actual))
    throw ValidationError(source + ": checkpoint was trained on graph " + terrain::to_string(stored) +
                          " but the supplied graph is " + terrain::to_string(actual));

  LoadedCheckpoint out;
  tok = in.next();
  while (tok[0] == "split") {
    if (tok.size() != 3) in.fail("split lines are 'split <name> START/END'");
    auto r = parse_time_range(tok[2]);
    if (!r) in.fail("bad split range");
    if (tok[1] == "train") out.ranges.train = r;
    else if (tok[1] == "val") out.ranges.val = r;
    else if (tok[1] == "test") out.ranges.test = r;
    else in.fail("unknown split '" + std::string(tok[1]) + "'");
    tok = in.next();
  }

  out.model = std::make_unique<models::Model>(mc, bundle);
  auto& model = *out.model;

  if (tok[0] != "normalizer" || tok.size() < 2) in.fail("expected normalizer line");
  const auto nf = static_cast<std::size_t>(count(in, tok[1]));
  if (tok.size() != 2 + 2 * nf) in.fail("normalizer has the wrong number of values");
  dataset::Normalizer norm;
  norm.mean.resize(static_cast<Eigen::Index>(nf));
  norm.scale.resize(static_cast<Eigen::Index>(nf));
  for (std::size_t k = 0; k < nf; ++k) {
    norm.mean[static_cast<Eigen::Index>(k)] = real(in, tok[2 + k]);
    norm.scale[static_cast<Eigen::Index>(k)] = real(in, tok[2 + nf + k]);
  }
  try {
    model.set_normalizer(std::move(norm));
  } catch (const ValidationError& e) {
    in.fail(e.what());
  }

  tok = in.next();
  if (tok[0] != "output_scale" || tok.size() != 3) in.fail("expected 'output_scale <scale> <offset>'");
  model.set_output_scale({real(in, tok[1]), real(in, tok[2])});

  std::vector<bool> seen(model.params().size(), false);
  for (tok = in.next(); tok[0] != "end"; tok = in.next()) {
    if (tok[0] != "param" || tok.size() < 4) in.fail("expected a param record");
    const std::string name(tok[1]);
    if (!model.params().contains(name)) in.fail("checkpoint parameter '" + name + "' does not belong to this model");
    const auto id = model.params().id(name);
    auto& p = model.params()[id];
    const auto rank = count(in, tok[2]);
    const Eigen::Index rows = count(in, tok[3]);
    const Eigen::Index cols = rank == 2 && tok.size() == 5 ? count(in, tok[4]) : 1;
    if (rank != p.rank || tok.size() != static_cast<std::size_t>(3 + rank) || rows != p.value.rows() || cols != p.value.cols())
      in.fail("parameter '" + name + "' has shape different from the model");
    if (seen[id]) in.fail("parameter '" + name + "' appears twice");
    seen[id] = true;
    auto vals = in.next();
    if (vals.size() != static_cast<std::size_t>(rows * cols)) in.fail("parameter '" + name + "' has the wrong value count");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) p.value(r, c) = real(in, vals[k++]);
  }
  for (std::size_t id = 0; id < seen.size(); ++id)
    if (!seen[id]) in.fail("checkpoint lacks parameter '" + model.params()[id].name + "'");
  return out;
}

void save_checkpoint(const models::Model& model, const dataset::SplitRanges& ranges, const std::filesystem::path& path) {
  write_file(path, format_checkpoint(model, ranges));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path, const terrain::GraphBundle& bundle) {
  return parse_checkpoint(read_file(path), bundle, path.string());
}

}  // namespace gnrrm::cli
