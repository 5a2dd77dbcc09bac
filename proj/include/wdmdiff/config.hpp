#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wdmdiff/material.hpp"
#include "wdmdiff/stack.hpp"
#include "wdmdiff/training.hpp"

namespace wdmdiff {

/// Self-describing run configuration: a config plus its seeds reproduces a run
/// end to end. Stored as a sectioned key/value text file; all lengths are in
/// reference-wavelength units (lambda_m_meters documents the physical scale).
struct RunConfig {
  // [geometry]
  int k = 8;
  int layer_side = 0;   // neurons per edge; 0 = derive from n_target
  long n_target = 0;    // requested total neuron count; 0 = use layer_side
  int fov_side = 8;
  double lambda_m_meters = 8e-4;
  int n_w = 1;                    // ignored when channels is non-empty
  std::vector<double> channels;   // explicit wavelengths; empty = default ladder

  // [material]
  std::string material = "dispersion-free";

  // [task]
  bool has_master_seed = false;
  uint64_t master_seed = 0;
  int n_i = 0;  // optional; must equal fov_side^2 when set
  int n_o = 0;
  long train = 55000;
  long val = 5000;
  long test = 10000;

  // [training]
  double lr0 = 1e-3;
  int epochs = 50;
  int batch = 8;
  double beta = 0.0;
  bool has_eta_th = false;  // false = resolve from the material
  double eta_th = 0.0;
  int bit_depth = kContinuousDepth;
  bool deterministic = true;
  bool adaptive_alpha = true;
  double weight_decay = 0.01;
  bool has_init_seed = false;  // false = derive from master_seed
  uint64_t init_seed = 0;

  // [output]
  std::string out_dir = "out";
  std::string run_id = "run";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

void validate_config(const RunConfig& cfg);  // throws ConfigError naming the field

// Resolved pieces.
StackGeometry make_geometry(const RunConfig& cfg);
Material make_material(const RunConfig& cfg);
TrainConfig make_train_config(const RunConfig& cfg, const Material& material);
uint64_t resolved_init_seed(const RunConfig& cfg);

}  // namespace wdmdiff
