// Command-line front end: gen-tasks / train / eval / all.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wdmdiff/commands.hpp"
#include "wdmdiff/util.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<bool> deterministic;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--seed", args.seed, "override task.master_seed");
  cmd->add_option("--threads", args.threads, "worker thread count");
  cmd->add_flag("--deterministic,!--no-deterministic", args.deterministic,
                "fixed-order reductions (default on)");
  cmd->add_option("--out", args.out_dir, "override output.dir");
}

wdmdiff::RunConfig load_config(const CommonArgs& args) {
  wdmdiff::RunConfig cfg = wdmdiff::parse_config_file(args.config_path);
  if (args.seed) {
    cfg.master_seed = *args.seed;
    cfg.has_master_seed = true;
  }
  if (args.deterministic) cfg.deterministic = *args.deterministic;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.threads) wdmdiff::set_thread_count(*args.threads);
  return cfg;
}

std::vector<int> parse_depths(const std::vector<std::string>& items) {
  std::vector<int> out;
  for (const std::string& s : items) {
    if (s == "continuous") out.push_back(wdmdiff::kContinuousDepth);
    else out.push_back(static_cast<int>(wdmdiff::parse_long(s)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavelength-multiplexed diffractive processor designer"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, all_args;
  bool gen_cache = false;
  std::optional<std::string> resume;
  wdmdiff::EvalOptions eval_opts;
  std::vector<std::string> bitdepth_items;

  CLI::App* gen = app.add_subcommand("gen-tasks", "generate target transforms (and dataset cache)");
  add_common(gen, gen_args);
  gen->add_flag("--cache", gen_cache, "also write dataset cache files");

  CLI::App* train = app.add_subcommand("train", "train a model from the config");
  add_common(train, train_args);
  train->add_option("--resume", resume, "continue from a checkpoint");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint; writes metrics.csv");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint path");
  eval->add_option("--jitter", eval_opts.jitter,
                   "comma-separated wavelength offsets (reference units)")
      ->delimiter(',');
  eval->add_option("--bitdepth", bitdepth_items,
                   "comma-separated bit depths (integers or 'continuous')")
      ->delimiter(',');

  CLI::App* all = app.add_subcommand("all", "gen-tasks, train, eval in sequence");
  add_common(all, all_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      wdmdiff::cmd_gen_tasks(load_config(gen_args), gen_cache, std::cout);
    } else if (train->parsed()) {
      wdmdiff::cmd_train(load_config(train_args), resume, std::cout);
    } else if (eval->parsed()) {
      eval_opts.bitdepths = parse_depths(bitdepth_items);
      wdmdiff::cmd_eval(load_config(eval_args), eval_opts, std::cout);
    } else if (all->parsed()) {
      wdmdiff::cmd_all(load_config(all_args), std::cout);
    }
  } catch (const wdmdiff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const wdmdiff::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const wdmdiff::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
