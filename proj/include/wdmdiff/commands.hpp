#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wdmdiff/config.hpp"

namespace wdmdiff {

// Output files under cfg.out_dir:
//   transform_ch<w>.bin               (gen-tasks)
//   dataset_ch<w>_<split>.bin         (gen-tasks, when cache requested)
//   checkpoint_best.wdc, checkpoint_last.wdc, history.csv   (train)
//   metrics.csv                       (eval)

void cmd_gen_tasks(const RunConfig& cfg, bool write_cache, std::ostream& log);

// Throws NumericError after writing the retained checkpoints when training
// diverges. resume, when set, continues the epoch schedule from a checkpoint.
void cmd_train(const RunConfig& cfg, const std::optional<std::string>& resume,
               std::ostream& log);

struct EvalOptions {
  std::optional<std::string> checkpoint;  // default <out>/checkpoint_best.wdc
  std::vector<double> jitter;             // wavelength offsets, reference units
  std::vector<int> bitdepths;             // post-hoc quantization depths
};

void cmd_eval(const RunConfig& cfg, const EvalOptions& opts, std::ostream& log);

void cmd_all(const RunConfig& cfg, std::ostream& log);

}  // namespace wdmdiff
