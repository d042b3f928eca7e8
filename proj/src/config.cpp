#include "banet/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "banet/error.hpp"

namespace banet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw FormatError("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw FormatError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t to_positive(const std::string& key, const std::string& v) {
  const auto n = to_uint(key, v);
  if (n == 0) throw FormatError("config: " + key + " must be positive");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw FormatError("config: " + key + " expects true or false, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "seed",
      "model.channels",
      "model.convs_per_block",
      "model.dilated_backbone",
      "model.width_scale",
      "model.interior_isd_branches",
      "model.transition_isd_branches",
      "model.isd_mid_channels",
      "model.isd_out_channels",
      "model.mode",
      "model.zero_init_heads",
      "train.base_lr",
      "train.head_lr_multiplier",
      "train.momentum",
      "train.weight_decay",
      "train.max_iters",
      "train.poly_power",
      "train.boundary_radius",
      "train.flip",
  };
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "model.channels") {
    std::stringstream ss(v);
    std::string item;
    std::size_t i = 0;
    std::array<std::size_t, kBackboneBlocks> widths{};
    while (std::getline(ss, item, ',')) {
      if (i >= kBackboneBlocks) throw FormatError("config: model.channels needs exactly 5 entries");
      widths[i++] = to_positive(key, trim(item));
    }
    if (i != kBackboneBlocks) throw FormatError("config: model.channels needs exactly 5 entries");
    model.backbone.channels = widths;
  } else if (key == "model.convs_per_block") {
    model.backbone.convs_per_block = to_positive(key, v);
  } else if (key == "model.dilated_backbone") {
    model.backbone.dilated = to_bool(key, v);
  } else if (key == "model.width_scale") {
    model.width_scale = to_double(key, v);
    if (!(model.width_scale > 0.0)) throw FormatError("config: model.width_scale must be positive");
  } else if (key == "model.interior_isd_branches") {
    model.interior_isd_branches = to_positive(key, v);
  } else if (key == "model.transition_isd_branches") {
    model.transition_isd_branches = to_positive(key, v);
  } else if (key == "model.isd_mid_channels") {
    model.isd_mid_channels = to_positive(key, v);
  } else if (key == "model.isd_out_channels") {
    model.isd_out_channels = to_positive(key, v);
  } else if (key == "model.mode") {
    try {
      model.mode = parse_fusion_mode(v);
    } catch (const UsageError& e) {
      throw FormatError(std::string("config: ") + e.what());
    }
  } else if (key == "model.zero_init_heads") {
    model.zero_init_heads = to_bool(key, v);
  } else if (key == "train.base_lr") {
    train.base_lr = to_double(key, v);
  } else if (key == "train.head_lr_multiplier") {
    train.head_lr_multiplier = to_double(key, v);
  } else if (key == "train.momentum") {
    train.momentum = to_double(key, v);
  } else if (key == "train.weight_decay") {
    train.weight_decay = to_double(key, v);
  } else if (key == "train.max_iters") {
    train.max_iters = to_positive(key, v);
  } else if (key == "train.poly_power") {
    train.poly_power = to_double(key, v);
  } else if (key == "train.boundary_radius") {
    train.boundary_radius = to_positive(key, v);
  } else if (key == "train.flip") {
    train.flip = to_bool(key, v);
  } else {
    throw FormatError("config: unknown key '" + key + "'");
  }
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "seed") return std::to_string(seed);
  if (key == "model.channels") {
    std::string out;
    for (std::size_t i = 0; i < kBackboneBlocks; ++i) {
      if (i) out += ",";
      out += std::to_string(model.backbone.channels[i]);
    }
    return out;
  }
  if (key == "model.convs_per_block") return std::to_string(model.backbone.convs_per_block);
  if (key == "model.dilated_backbone") return from_bool(model.backbone.dilated);
  if (key == "model.width_scale") return fmt_double(model.width_scale);
  if (key == "model.interior_isd_branches") return std::to_string(model.interior_isd_branches);
  if (key == "model.transition_isd_branches") return std::to_string(model.transition_isd_branches);
  if (key == "model.isd_mid_channels") return std::to_string(model.isd_mid_channels);
  if (key == "model.isd_out_channels") return std::to_string(model.isd_out_channels);
  if (key == "model.mode") return to_string(model.mode);
  if (key == "model.zero_init_heads") return from_bool(model.zero_init_heads);
  if (key == "train.base_lr") return fmt_double(train.base_lr);
  if (key == "train.head_lr_multiplier") return fmt_double(train.head_lr_multiplier);
  if (key == "train.momentum") return fmt_double(train.momentum);
  if (key == "train.weight_decay") return fmt_double(train.weight_decay);
  if (key == "train.max_iters") return std::to_string(train.max_iters);
  if (key == "train.poly_power") return fmt_double(train.poly_power);
  if (key == "train.boundary_radius") return std::to_string(train.boundary_radius);
  if (key == "train.flip") return from_bool(train.flip);
  throw FormatError("config: unknown key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k + "=" + get(k) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    cfg.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return cfg;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return RunConfig::parse(ss.str());
}

void apply_env_overrides(RunConfig& config) {
  if (const char* s = std::getenv("BANET_SEED"); s != nullptr && *s != '\0') {
    config.set("seed", s);
  }
}

}  // namespace banet
