#include "gnrrm/cli/run_config.hpp"

#include <algorithm>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::cli {

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "pipeline",    "backbone",   "h_temporal",  "h_spatial",      "cnn_channels", "cnn_kernel",
      "gtcn_layers", "gtcn_kernel", "window",     "seed",           "lr",           "batch_size",
      "max_epochs",  "patience",   "shuffle",     "target_scaling", "threads",      "train_range",
      "val_range",   "test_range",  "lumped_weighting",
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ValidationError("unknown config key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

long long integer(const RunConfig& c, const std::string& key, long long fallback, long long min) {
  auto v = c.get(key);
  if (!v) return fallback;
  auto n = parse_integer(*v);
  if (!n) throw ValidationError(key + ": expected an integer, got '" + *v + "'");
  if (*n < min) throw ValidationError(key + ": must be at least " + std::to_string(min) + ", got " + *v);
  return *n;
}

std::optional<TimeRange> range(const RunConfig& c, const std::string& key) {
  auto v = c.get(key);
  if (!v) return std::nullopt;
  auto r = parse_time_range(*v);
  if (!r) throw ValidationError(key + ": expected START/END timestamps, got '" + *v + "'");
  if (r->end <= r->start) throw ValidationError(key + ": range is empty");
  return r;
}

}  // namespace

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = to_lower(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(key + ": expected true or false, got '" + value + "'");
}

models::ModelConfig RunConfig::model() const {
  models::ModelConfig m;
  if (auto v = get("pipeline")) m.pipeline = models::parse_pipeline(*v);
  if (auto v = get("backbone")) m.backbone = nn::parse_backbone(*v);
  if (auto v = get("lumped_weighting")) m.lumped_weighting = dataset::parse_lumped_weighting(*v);
  m.h_temporal = static_cast<int>(integer(*this, "h_temporal", m.h_temporal, 1));
  m.h_spatial = static_cast<int>(integer(*this, "h_spatial", m.h_spatial, 1));
  m.cnn_channels = static_cast<int>(integer(*this, "cnn_channels", m.cnn_channels, 1));
  m.cnn_kernel = static_cast<int>(integer(*this, "cnn_kernel", m.cnn_kernel, 1));
  m.gtcn_layers = static_cast<int>(integer(*this, "gtcn_layers", m.gtcn_layers, 1));
  m.gtcn_kernel = static_cast<int>(integer(*this, "gtcn_kernel", m.gtcn_kernel, 1));
  m.window = static_cast<std::size_t>(integer(*this, "window", static_cast<long long>(m.window), 1));
  m.seed = static_cast<std::uint64_t>(integer(*this, "seed", static_cast<long long>(m.seed), 0));
  m.validate();
  return m;
}

training::TrainConfig RunConfig::train() const {
  training::TrainConfig t;
  if (auto v = get("lr")) {
    auto x = parse_real(*v);
    if (!x) throw ValidationError("lr: expected a number, got '" + *v + "'");
    t.lr = *x;
  }
  t.batch_size = static_cast<std::size_t>(integer(*this, "batch_size", static_cast<long long>(t.batch_size), 1));
  t.max_epochs = static_cast<std::size_t>(integer(*this, "max_epochs", static_cast<long long>(t.max_epochs), 1));
  t.patience = static_cast<std::size_t>(integer(*this, "patience", static_cast<long long>(t.patience), 0));
  t.seed = static_cast<std::uint64_t>(integer(*this, "seed", static_cast<long long>(t.seed), 0));
  if (auto v = get("shuffle")) t.shuffle = parse_bool("shuffle", *v);
  if (auto v = get("target_scaling")) t.target_scaling = parse_bool("target_scaling", *v);
  t.threads = static_cast<int>(integer(*this, "threads", t.threads, 1));
  t.validate();
  return t;
}

dataset::SplitRanges RunConfig::ranges() const {
  return {range(*this, "train_range"), range(*this, "val_range"), range(*this, "test_range")};
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line(trim(raw.substr(0, hash)));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value");
    const std::string key(trim(std::string_view(line).substr(0, eq)));
    const std::string value(trim(std::string_view(line).substr(eq + 1)));
    if (cfg.has(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    try {
      cfg.set(key, value);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path), path.string()); }

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> given;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + o + "'");
    const std::string key(trim(std::string_view(o).substr(0, eq)));
    const std::string value(trim(std::string_view(o).substr(eq + 1)));
    auto [it, fresh] = given.emplace(key, value);
    if (!fresh && it->second != value)
      throw ValidationError("conflicting values for '" + key + "': '" + it->second + "' and '" + value + "'");
    cfg.set(key, value);
  }
}

}  // namespace gnrrm::cli
