#include "wdmdiff/config.hpp"

#include <fstream>
#include <sstream>

#include "wdmdiff/rng.hpp"
#include "wdmdiff/util.hpp"

namespace wdmdiff {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item));
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "geometry" && section != "material" && section != "task" &&
          section != "training" && section != "output")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "geometry.k") cfg.k = static_cast<int>(parse_long(value));
    else if (qual == "geometry.layer_side") cfg.layer_side = static_cast<int>(parse_long(value));
    else if (qual == "geometry.n_target") cfg.n_target = parse_long(value);
    else if (qual == "geometry.fov_side") cfg.fov_side = static_cast<int>(parse_long(value));
    else if (qual == "geometry.lambda_m_meters") cfg.lambda_m_meters = parse_double(value);
    else if (qual == "geometry.n_w") cfg.n_w = static_cast<int>(parse_long(value));
    else if (qual == "geometry.channels") cfg.channels = parse_double_list(value);
    else if (qual == "material.name") cfg.material = value;
    else if (qual == "task.master_seed") {
      cfg.master_seed = parse_u64(value);
      cfg.has_master_seed = true;
    } else if (qual == "task.n_i") cfg.n_i = static_cast<int>(parse_long(value));
    else if (qual == "task.n_o") cfg.n_o = static_cast<int>(parse_long(value));
    else if (qual == "task.train") cfg.train = parse_long(value);
    else if (qual == "task.val") cfg.val = parse_long(value);
    else if (qual == "task.test") cfg.test = parse_long(value);
    else if (qual == "training.lr0") cfg.lr0 = parse_double(value);
    else if (qual == "training.epochs") cfg.epochs = static_cast<int>(parse_long(value));
    else if (qual == "training.batch") cfg.batch = static_cast<int>(parse_long(value));
    else if (qual == "training.beta") cfg.beta = parse_double(value);
    else if (qual == "training.eta_th") {
      if (value == "auto") {
        cfg.has_eta_th = false;
      } else {
        cfg.eta_th = parse_double(value);
        cfg.has_eta_th = true;
      }
    } else if (qual == "training.bit_depth") {
      cfg.bit_depth = (value == "continuous") ? kContinuousDepth
                                              : static_cast<int>(parse_long(value));
    } else if (qual == "training.deterministic") cfg.deterministic = parse_bool(value, qual);
    else if (qual == "training.adaptive_alpha") cfg.adaptive_alpha = parse_bool(value, qual);
    else if (qual == "training.weight_decay") cfg.weight_decay = parse_double(value);
    else if (qual == "training.init_seed") {
      if (value == "auto") {
        cfg.has_init_seed = false;
      } else {
        cfg.init_seed = parse_u64(value);
        cfg.has_init_seed = true;
      }
    } else if (qual == "output.dir") cfg.out_dir = value;
    else if (qual == "output.run_id") cfg.run_id = value;
    else throw ConfigError("config: unknown field '" + qual + "'");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[geometry]\n";
  out << "k = " << cfg.k << "\n";
  out << "layer_side = " << cfg.layer_side << "\n";
  out << "n_target = " << cfg.n_target << "\n";
  out << "fov_side = " << cfg.fov_side << "\n";
  out << "lambda_m_meters = " << fmt_double(cfg.lambda_m_meters) << "\n";
  out << "n_w = " << cfg.n_w << "\n";
  out << "channels = " << join_doubles(cfg.channels) << "\n";
  out << "\n[material]\n";
  out << "name = " << cfg.material << "\n";
  out << "\n[task]\n";
  if (cfg.has_master_seed) out << "master_seed = " << cfg.master_seed << "\n";
  if (cfg.n_i != 0) out << "n_i = " << cfg.n_i << "\n";
  if (cfg.n_o != 0) out << "n_o = " << cfg.n_o << "\n";
  out << "train = " << cfg.train << "\n";
  out << "val = " << cfg.val << "\n";
  out << "test = " << cfg.test << "\n";
  out << "\n[training]\n";
  out << "lr0 = " << fmt_double(cfg.lr0) << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "batch = " << cfg.batch << "\n";
  out << "beta = " << fmt_double(cfg.beta) << "\n";
  out << "eta_th = " << (cfg.has_eta_th ? fmt_double(cfg.eta_th) : std::string("auto")) << "\n";
  out << "bit_depth = "
      << (cfg.bit_depth == kContinuousDepth ? std::string("continuous")
                                            : std::to_string(cfg.bit_depth))
      << "\n";
  out << "deterministic = " << (cfg.deterministic ? "true" : "false") << "\n";
  out << "adaptive_alpha = " << (cfg.adaptive_alpha ? "true" : "false") << "\n";
  out << "weight_decay = " << fmt_double(cfg.weight_decay) << "\n";
  out << "init_seed = "
      << (cfg.has_init_seed ? std::to_string(cfg.init_seed) : std::string("auto")) << "\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.out_dir << "\n";
  out << "run_id = " << cfg.run_id << "\n";
  return out.str();
}

void validate_config(const RunConfig& cfg) {
  if (!cfg.has_master_seed) throw ConfigError("config: missing required field task.master_seed");
  if (cfg.k < 1) throw ConfigError("config: geometry.k must be >= 1");
  if (cfg.fov_side < 1) throw ConfigError("config: geometry.fov_side must be >= 1");
  if (cfg.layer_side == 0 && cfg.n_target == 0)
    throw ConfigError("config: set geometry.layer_side or geometry.n_target");
  if (cfg.layer_side != 0 && cfg.n_target != 0)
    throw ConfigError("config: geometry.layer_side and geometry.n_target are exclusive");
  if (cfg.layer_side < 0 || cfg.n_target < 0)
    throw ConfigError("config: geometry sizes must be positive");
  if (!(cfg.lambda_m_meters > 0.0))
    throw ConfigError("config: geometry.lambda_m_meters must be positive");
  if (cfg.channels.empty() && cfg.n_w < 1)
    throw ConfigError("config: geometry.n_w must be >= 1");
  if (cfg.train < 1 || cfg.val < 1 || cfg.test < 1)
    throw ConfigError("config: task split sizes must be >= 1");
  const int fov_pixels = cfg.fov_side * cfg.fov_side;
  if (cfg.n_i != 0 && cfg.n_i != fov_pixels)
    throw ConfigError("config: task.n_i must equal fov_side^2 = " + std::to_string(fov_pixels));
  if (cfg.n_o != 0 && cfg.n_o != fov_pixels)
    throw ConfigError("config: task.n_o must equal fov_side^2 = " + std::to_string(fov_pixels));
  if (!(cfg.lr0 > 0.0)) throw ConfigError("config: training.lr0 must be positive");
  if (cfg.epochs < 1) throw ConfigError("config: training.epochs must be >= 1");
  if (cfg.batch < 1) throw ConfigError("config: training.batch must be >= 1");
  if (cfg.beta < 0.0) throw ConfigError("config: training.beta must be >= 0");
  if (cfg.has_eta_th && cfg.eta_th < 0.0)
    throw ConfigError("config: training.eta_th must be >= 0");
  if (cfg.bit_depth != kContinuousDepth && (cfg.bit_depth < 1 || cfg.bit_depth > 32))
    throw ConfigError("config: training.bit_depth must be 1..32 or continuous");
  if (cfg.weight_decay < 0.0) throw ConfigError("config: training.weight_decay must be >= 0");
  make_geometry(cfg);  // geometry-level validation
}

StackGeometry make_geometry(const RunConfig& cfg) {
  StackGeometry geo;
  geo.layer_count = cfg.k;
  geo.layer_side = cfg.layer_side != 0
                       ? cfg.layer_side
                       : StackGeometry::side_for_neuron_budget(cfg.n_target, cfg.k);
  geo.fov_side = cfg.fov_side;
  geo.lambda_m_meters = cfg.lambda_m_meters;
  geo.channels = cfg.channels.empty() ? StackGeometry::default_ladder(cfg.n_w) : cfg.channels;
  geo.validate();
  return geo;
}

Material make_material(const RunConfig& cfg) { return resolve_material(cfg.material); }

TrainConfig make_train_config(const RunConfig& cfg, const Material& material) {
  TrainConfig t;
  t.lr0 = cfg.lr0;
  t.epochs = cfg.epochs;
  t.batch = cfg.batch;
  t.beta = cfg.beta;
  t.eta_th = cfg.has_eta_th ? cfg.eta_th : (material.absorbing() ? 3e-5 : 3e-4);
  t.weight_decay = cfg.weight_decay;
  t.adaptive_alpha = cfg.adaptive_alpha;
  t.deterministic = cfg.deterministic;
  return t;
}

uint64_t resolved_init_seed(const RunConfig& cfg) {
  if (cfg.has_init_seed) return cfg.init_seed;
  return derive_seed(cfg.master_seed, {kStreamModel});
}

}  // namespace wdmdiff
