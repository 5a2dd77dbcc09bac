#include "wdmdiff/commands.hpp"

#include <filesystem>
#include <ostream>

#include "wdmdiff/evaluation.hpp"
#include "wdmdiff/util.hpp"

namespace wdmdiff {

namespace fs = std::filesystem;

namespace {

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
  return dir;
}

TransformSet transforms_for(const RunConfig& cfg, const StackGeometry& geo) {
  const int n = geo.fov_pixel_count();
  return gen_transforms(geo.channel_count(), n, n, cfg.master_seed);
}

RunInfo run_info(const RunConfig& cfg, const StackGeometry& geo) {
  RunInfo info;
  info.run_id = cfg.run_id;
  info.n_w = geo.channel_count();
  info.n = geo.total_neurons();
  info.k = geo.layer_count;
  return info;
}

std::string geometry_summary(const StackGeometry& geo) {
  std::string s = "K=" + std::to_string(geo.layer_count) +
                  " layer_side=" + std::to_string(geo.layer_side) +
                  " fov_side=" + std::to_string(geo.fov_side) + " channels=[";
  for (int w = 0; w < geo.channel_count(); ++w) {
    if (w) s += ", ";
    s += fmt_double(geo.channels[w]);
  }
  return s + "]";
}

}  // namespace

void cmd_gen_tasks(const RunConfig& cfg, bool write_cache, std::ostream& log) {
  validate_config(cfg);
  const StackGeometry geo = make_geometry(cfg);
  const fs::path dir = ensure_out_dir(cfg);

  const TransformSet transforms = transforms_for(cfg, geo);
  for (int w = 0; w < transforms.channel_count(); ++w) {
    const fs::path path = dir / ("transform_ch" + std::to_string(w + 1) + ".bin");
    write_transform_file(path.string(), transforms, w);
    log << "wrote " << path.string() << "\n";
  }
  if (transforms.channel_count() > 1) {
    log << "max pairwise |CosSim| over " << transforms.channel_count() << " transforms: "
        << fmt_double(max_pairwise_cosine(transforms)) << "\n";
  } else {
    log << "single transform; no pairwise similarity to report\n";
  }

  if (write_cache) {
    const Dataset dataset(transforms, {cfg.train, cfg.val, cfg.test}, cfg.master_seed);
    for (int w = 0; w < transforms.channel_count(); ++w) {
      for (Split s : {Split::train, Split::val, Split::test}) {
        const fs::path path =
            dir / ("dataset_ch" + std::to_string(w + 1) + "_" + split_name(s) + ".bin");
        write_dataset_cache(path.string(), dataset, w, s);
        log << "wrote " << path.string() << "\n";
      }
    }
  }
}

void cmd_train(const RunConfig& cfg, const std::optional<std::string>& resume,
               std::ostream& log) {
  validate_config(cfg);
  const StackGeometry geo = make_geometry(cfg);
  const Material material = make_material(cfg);
  const TrainConfig train_cfg = make_train_config(cfg, material);
  const fs::path dir = ensure_out_dir(cfg);

  DiffractiveModel model;
  int start_epoch = 0;
  if (resume) {
    model = load_checkpoint(*resume);
    if (!(model.geometry == geo))
      throw ConfigError("resume checkpoint geometry does not match the config\n  checkpoint: " +
                        geometry_summary(model.geometry) + "\n  config:     " +
                        geometry_summary(geo));
    start_epoch = model.epoch + 1;
    if (start_epoch >= cfg.epochs)
      throw ConfigError("resume checkpoint is already at the final epoch");
    log << "resuming from epoch " << model.epoch << " (lr "
        << fmt_double(schedule_lr(train_cfg.lr0, start_epoch)) << ")\n";
  } else {
    model = build_model(geo, material, resolved_init_seed(cfg), cfg.bit_depth);
  }

  const TransformSet transforms = transforms_for(cfg, geo);
  const Dataset dataset(transforms, {cfg.train, cfg.val, cfg.test}, cfg.master_seed);

  const FitResult result = fit(model, dataset, train_cfg, start_epoch);
  const fs::path best_path = dir / "checkpoint_best.wdc";
  const fs::path last_path = dir / "checkpoint_last.wdc";
  const fs::path history_path = dir / "history.csv";
  save_checkpoint(best_path.string(), result.model);
  save_checkpoint(last_path.string(), result.final_model);
  write_history_csv(history_path.string(), result);
  log << "wrote " << best_path.string() << " (epoch " << result.best_epoch << ", val mse "
      << fmt_double(result.best_val) << ")\n";
  log << "wrote " << last_path.string() << " and " << history_path.string() << "\n";
  if (result.diverged)
    throw NumericError("training diverged; last good checkpoints retained in " +
                       dir.string());
}

void cmd_eval(const RunConfig& cfg, const EvalOptions& opts, std::ostream& log) {
  validate_config(cfg);
  const StackGeometry geo = make_geometry(cfg);
  const fs::path dir = ensure_out_dir(cfg);
  const std::string ckpt_path =
      opts.checkpoint ? *opts.checkpoint : (dir / "checkpoint_best.wdc").string();

  DiffractiveModel model = load_checkpoint(ckpt_path);
  if (!(model.geometry == geo))
    throw ConfigError("checkpoint geometry does not match the config\n  checkpoint: " +
                      geometry_summary(model.geometry) + "\n  config:     " +
                      geometry_summary(geo));

  const TransformSet transforms = transforms_for(cfg, geo);
  const Dataset dataset(transforms, {cfg.train, cfg.val, cfg.test}, cfg.master_seed);
  const StackEvaluator eval(model);

  std::vector<ChannelMetrics> rows;
  if (opts.jitter.empty() && opts.bitdepths.empty()) {
    rows = evaluate_all_channels(eval, transforms, dataset, Split::test);
  }
  if (!opts.jitter.empty()) {
    for (int w = 0; w < eval.channel_count(); ++w) {
      auto r = sweep_jitter(eval, transforms, dataset, Split::test, w, opts.jitter);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  }
  if (!opts.bitdepths.empty()) {
    auto r = sweep_bitdepth(model, transforms, dataset, Split::test, opts.bitdepths);
    rows.insert(rows.end(), r.begin(), r.end());
  }

  const fs::path metrics_path = dir / "metrics.csv";
  write_metrics_csv(metrics_path.string(), run_info(cfg, geo), rows);
  log << "wrote " << metrics_path.string() << " (" << rows.size() << " rows)\n";
}

void cmd_all(const RunConfig& cfg, std::ostream& log) {
  cmd_gen_tasks(cfg, false, log);
  cmd_train(cfg, std::nullopt, log);
  cmd_eval(cfg, EvalOptions{}, log);
}

}  // namespace wdmdiff
