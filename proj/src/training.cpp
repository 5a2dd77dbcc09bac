#include "wdmdiff/training.hpp"

#include <cmath>
#include <fstream>

#include "wdmdiff/util.hpp"

namespace wdmdiff {

LossTerms channel_loss_terms(std::span<const Complex> target, std::span<const Complex> output) {
  if (target.size() != output.size())
    throw ConfigError("channel_loss: target/output length mismatch");
  const double target_energy = energy_of(target);
  if (!(target_energy > 0.0)) throw NumericError("channel_loss: degenerate zero target field");
  const size_t n = target.size();

  LossTerms terms;
  terms.sigma = 1.0 / std::sqrt(target_energy);
  terms.output_energy = energy_of(output);
  if (terms.output_energy > 0.0) {
    // sum o[n] * conj(o'[n])
    Complex s{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) s += target[i] * std::conj(output[i]);
    terms.sigma_prime = terms.sigma * s / terms.output_energy;
  }
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    acc += std::norm(terms.sigma * target[i] - terms.sigma_prime * output[i]);
  terms.mse = acc / static_cast<double>(n);
  return terms;
}

double channel_loss(std::span<const Complex> target, std::span<const Complex> output) {
  return channel_loss_terms(target, output).mse;
}

int reference_channel(int n_w) {
  if (n_w < 1) throw ConfigError("reference_channel: channel count must be >= 1");
  const int one_based = (n_w % 2 == 0) ? n_w / 2 : (n_w + 1) / 2;
  return one_based - 1;
}

TrainState TrainState::init(const DiffractiveModel& model) {
  TrainState s;
  const int n_w = model.geometry.channel_count();
  s.alpha.assign(n_w, 1.0);
  s.w_ref = reference_channel(n_w);
  s.m1.resize(model.latents.size());
  s.m2.resize(model.latents.size());
  for (size_t k = 0; k < model.latents.size(); ++k) {
    s.m1[k].assign(model.latents[k].size(), 0.0);
    s.m2[k].assign(model.latents[k].size(), 0.0);
  }
  s.best_latents = model.latents;
  return s;
}

void update_spectral_weights(TrainState& state, std::span<const double> losses) {
  if (losses.size() != state.alpha.size())
    throw ConfigError("update_spectral_weights: loss count mismatch");
  const double ref = losses[state.w_ref];
  for (size_t w = 0; w < state.alpha.size(); ++w) {
    if (static_cast<int>(w) == state.w_ref) continue;
    state.alpha[w] = std::max(0.1 * (losses[w] - ref) + state.alpha[w], 0.0);
  }
}

EfficiencyTerms efficiency_terms(std::span<const double> output_energies,
                                 std::span<const double> input_energies, double eta_th) {
  if (output_energies.size() != input_energies.size() || output_energies.empty())
    throw ConfigError("efficiency_terms: bad batch");
  double acc = 0.0;
  for (size_t i = 0; i < output_energies.size(); ++i) {
    if (!(input_energies[i] > 0.0))
      throw NumericError("efficiency_terms: degenerate zero-energy input");
    acc += output_energies[i] / input_energies[i];
  }
  EfficiencyTerms t;
  t.eta = acc / static_cast<double>(output_energies.size());
  t.penalty = std::max(eta_th - t.eta, 0.0);
  t.active = eta_th > t.eta;  // at equality the hinge gradient is zero
  return t;
}

double total_loss(std::span<const double> mse, std::span<const double> alpha,
                  std::span<const double> penalties, double beta) {
  if (mse.size() != alpha.size() || mse.size() != penalties.size())
    throw ConfigError("total_loss: length mismatch");
  double acc = 0.0;
  for (size_t w = 0; w < mse.size(); ++w) acc += alpha[w] * mse[w] + beta * penalties[w];
  return acc / static_cast<double>(mse.size());
}

double schedule_lr(double lr0, int epoch) {
  return lr0 * std::pow(0.5, epoch / 10);
}

namespace {

struct TaskOut {
  StackEvaluator::Tape tape;
  LossTerms terms;
  double input_energy = 0.0;
  const SamplePair* pair = nullptr;
};

// Shared forward sweep over (sample, channel) tasks. Task index = s*n_w + w.
void forward_sweep(const StackEvaluator& eval, const Dataset& data, Split split,
                   std::span<const long> indices, bool keep_tapes,
                   std::vector<TaskOut>& tasks) {
  const int n_w = eval.channel_count();
  const long b = static_cast<long>(indices.size());
  tasks.resize(static_cast<size_t>(b) * n_w);
  // Materialize the splits up-front (lazy generation takes a lock).
  for (int w = 0; w < n_w; ++w) data.split(w, split);

  parallel_for(b * n_w, [&](long task) {
    const long s = task / n_w;
    const int w = static_cast<int>(task % n_w);
    const auto& pair = data.split(w, split).at(indices[s]);
    TaskOut& out = tasks[task];
    out.pair = &pair;
    FovField input(eval.model().geometry.fov_side, pair.input);
    if (keep_tapes) {
      eval.forward_tape(input, w, out.tape);
    } else {
      out.tape.output = eval.forward(input, w);
    }
    out.terms = channel_loss_terms(pair.target, out.tape.output.values);
    out.input_energy = energy_of(pair.input);
  });
}

BatchStats batch_stats_from_tasks(const std::vector<TaskOut>& tasks, int n_w, long b,
                                  std::span<const double> alpha, double beta, double eta_th,
                                  std::vector<EfficiencyTerms>* eff_out) {
  BatchStats stats;
  stats.mse.assign(n_w, 0.0);
  stats.eta.assign(n_w, 0.0);
  std::vector<double> penalties(n_w, 0.0);
  for (int w = 0; w < n_w; ++w) {
    double mse_acc = 0.0;
    std::vector<double> out_e(b), in_e(b);
    for (long s = 0; s < b; ++s) {
      const TaskOut& t = tasks[static_cast<size_t>(s) * n_w + w];
      mse_acc += t.terms.mse;
      out_e[s] = t.terms.output_energy;
      in_e[s] = t.input_energy;
    }
    stats.mse[w] = mse_acc / static_cast<double>(b);
    const EfficiencyTerms eff = efficiency_terms(out_e, in_e, eta_th);
    stats.eta[w] = eff.eta;
    penalties[w] = eff.penalty;
    if (eff_out) (*eff_out)[w] = eff;
  }
  stats.loss = total_loss(stats.mse, alpha, penalties, beta);
  return stats;
}

}  // namespace

BatchStats batch_forward_stats(const StackEvaluator& eval, const Dataset& data, Split split,
                               std::span<const long> indices, std::span<const double> alpha,
                               double beta, double eta_th) {
  const int n_w = eval.channel_count();
  const long b = static_cast<long>(indices.size());
  if (b < 1) throw ConfigError("batch: empty");
  std::vector<TaskOut> tasks;
  forward_sweep(eval, data, split, indices, false, tasks);
  return batch_stats_from_tasks(tasks, n_w, b, alpha, beta, eta_th, nullptr);
}

BatchStats batch_gradients(const StackEvaluator& eval, const Dataset& data, Split split,
                           std::span<const long> indices, const TrainState& state,
                           const TrainConfig& cfg,
                           std::vector<std::vector<double>>& grad_hv) {
  const DiffractiveModel& model = eval.model();
  const int n_w = eval.channel_count();
  const long b = static_cast<long>(indices.size());
  if (b < 1) throw ConfigError("batch: empty");
  if (grad_hv.size() != model.latents.size())
    throw ConfigError("batch_gradients: gradient shape mismatch");

  std::vector<TaskOut> tasks;
  forward_sweep(eval, data, split, indices, true, tasks);
  std::vector<EfficiencyTerms> eff(n_w);
  BatchStats stats =
      batch_stats_from_tasks(tasks, n_w, b, state.alpha, cfg.beta, cfg.eta_th, &eff);

  // Backward sweep into per-task buffers, then an ordered reduction so the
  // result does not depend on the thread count.
  const size_t n_layers = model.latents.size();
  const size_t neurons = model.latents.empty() ? 0 : model.latents[0].size();
  const int n_o = model.geometry.fov_pixel_count();
  std::vector<std::vector<std::vector<double>>> task_grads(
      tasks.size(),
      std::vector<std::vector<double>>(n_layers, std::vector<double>(neurons, 0.0)));

  parallel_for(static_cast<long>(tasks.size()), [&](long task) {
    const int w = static_cast<int>(task % n_w);
    const TaskOut& t = tasks[task];
    const double c_mse = state.alpha[w] / (static_cast<double>(n_w) * b);
    const double c_eff = (cfg.beta > 0.0 && eff[w].active)
                             ? -cfg.beta / (static_cast<double>(n_w) * b * t.input_energy)
                             : 0.0;
    const auto& target = t.pair->target;
    const auto& output = t.tape.output.values;
    std::vector<Complex> obar(output.size());
    const Complex sp = t.terms.sigma_prime;
    for (size_t i = 0; i < output.size(); ++i) {
      const Complex residual = t.terms.sigma * target[i] - sp * output[i];
      obar[i] = c_mse * (-std::conj(sp) * residual / static_cast<double>(n_o)) +
                c_eff * output[i];
    }
    eval.backward(t.tape, w, obar, task_grads[task]);
  });

  for (const auto& tg : task_grads)
    for (size_t k = 0; k < n_layers; ++k)
      for (size_t i = 0; i < neurons; ++i) grad_hv[k][i] += tg[k][i];

  // Chain through h = quantize(h_learnable(h_v)) + h_base; the rounding is
  // straight-through, the reparameterization is analytic.
  for (size_t k = 0; k < n_layers; ++k)
    for (size_t i = 0; i < neurons; ++i)
      grad_hv[k][i] *= latent_thickness_grad(model.latents[k][i], model.h_max);

  for (const auto& layer : grad_hv)
    for (double g : layer)
      if (!std::isfinite(g))
        throw NumericError("batch_gradients: non-finite gradient encountered");
  return stats;
}

void optimizer_step(TrainState& state, DiffractiveModel& model,
                    const std::vector<std::vector<double>>& grad_hv, double lr,
                    const TrainConfig& cfg) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (size_t k = 0; k < model.latents.size(); ++k) {
    auto& theta = model.latents[k];
    auto& m1 = state.m1[k];
    auto& m2 = state.m2[k];
    const auto& g = grad_hv[k];
    for (size_t i = 0; i < theta.size(); ++i) {
      m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * g[i];
      m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
      const double mhat = m1[i] / bias1;
      const double vhat = m2[i] / bias2;
      theta[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) + cfg.weight_decay * theta[i]);
    }
  }
}

std::vector<double> evaluate_split_mse(const StackEvaluator& eval, const Dataset& data,
                                       Split split) {
  const int n_w = eval.channel_count();
  const long count = data.counts().of(split);
  for (int w = 0; w < n_w; ++w) data.split(w, split);

  std::vector<double> per_task(static_cast<size_t>(count) * n_w);
  parallel_for(count * n_w, [&](long task) {
    const long s = task / n_w;
    const int w = static_cast<int>(task % n_w);
    const auto& pair = data.split(w, split)[s];
    FovField input(eval.model().geometry.fov_side, pair.input);
    const FovField out = eval.forward(input, w);
    per_task[task] = channel_loss(pair.target, out.values);
  });

  std::vector<double> mse(n_w, 0.0);
  for (long s = 0; s < count; ++s)
    for (int w = 0; w < n_w; ++w) mse[w] += per_task[static_cast<size_t>(s) * n_w + w];
  for (int w = 0; w < n_w; ++w) mse[w] /= static_cast<double>(count);
  return mse;
}

FitResult fit(const DiffractiveModel& init, const Dataset& data, const TrainConfig& cfg,
              int start_epoch) {
  if (data.channel_count() != init.geometry.channel_count())
    throw ConfigError("fit: dataset channel count does not match the model");
  if (data.transforms().n_i != init.geometry.fov_pixel_count() ||
      data.transforms().n_o != init.geometry.fov_pixel_count())
    throw ConfigError("fit: dataset vector size does not match the FOV");
  if (cfg.epochs < 1 || cfg.batch < 1) throw ConfigError("fit: epochs and batch must be >= 1");
  if (start_epoch < 0 || start_epoch >= cfg.epochs)
    throw ConfigError("fit: start epoch outside schedule");

  DiffractiveModel model = init;
  TrainState state = TrainState::init(model);
  const int n_w = model.geometry.channel_count();
  const long train_count = data.counts().train;

  FitResult result;
  result.start_epoch = start_epoch;
  std::vector<std::vector<double>> last_good_latents = model.latents;
  int last_good_epoch = start_epoch - 1;

  std::vector<std::vector<double>> grad_hv(model.latents.size());
  for (size_t k = 0; k < model.latents.size(); ++k)
    grad_hv[k].assign(model.latents[k].size(), 0.0);

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const double lr = schedule_lr(cfg.lr0, epoch);
    std::vector<double> epoch_mse(n_w, 0.0), epoch_eta(n_w, 0.0);
    long batches = 0;

    for (long begin = 0; begin < train_count; begin += cfg.batch) {
      const long end = std::min(begin + cfg.batch, train_count);
      std::vector<long> indices(end - begin);
      for (long i = begin; i < end; ++i) indices[i - begin] = i;

      StackEvaluator eval(model);
      for (auto& layer : grad_hv) std::fill(layer.begin(), layer.end(), 0.0);
      BatchStats stats;
      try {
        stats = batch_gradients(eval, data, Split::train, indices, state, cfg, grad_hv);
      } catch (const NumericError&) {
        result.diverged = true;
      }
      if (!result.diverged && !std::isfinite(stats.loss)) result.diverged = true;
      if (result.diverged) break;

      optimizer_step(state, model, grad_hv, lr, cfg);
      if (cfg.adaptive_alpha) update_spectral_weights(state, stats.mse);
      for (int w = 0; w < n_w; ++w) {
        epoch_mse[w] += stats.mse[w];
        epoch_eta[w] += stats.eta[w];
      }
      ++batches;
    }
    if (result.diverged) break;

    StackEvaluator eval(model);
    const std::vector<double> val = evaluate_split_mse(eval, data, Split::val);
    double val_mean = 0.0;
    for (double v : val) val_mean += v;
    val_mean /= static_cast<double>(n_w);
    if (val_mean < state.best_val) {
      state.best_val = val_mean;
      state.best_epoch = epoch;
      state.best_latents = model.latents;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.val_mse = val;
    rec.alpha = state.alpha;
    rec.train_mse.resize(n_w);
    rec.eta.resize(n_w);
    for (int w = 0; w < n_w; ++w) {
      rec.train_mse[w] = epoch_mse[w] / static_cast<double>(batches);
      rec.eta[w] = epoch_eta[w] / static_cast<double>(batches);
    }
    result.history.push_back(std::move(rec));
    last_good_latents = model.latents;
    last_good_epoch = epoch;
  }

  result.model = init;
  result.model.latents = state.best_latents;
  result.model.epoch = state.best_epoch;
  result.best_epoch = state.best_epoch;
  result.best_val = state.best_val;
  result.final_model = init;
  result.final_model.latents = std::move(last_good_latents);
  result.final_model.epoch = last_good_epoch;
  result.final_epoch = last_good_epoch;
  return result;
}

void write_history_csv(const std::string& path, const FitResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write history: " + path);
  out << "epoch,channel,train_mse,val_mse,alpha,eta,lr\n";
  for (const EpochRecord& rec : result.history) {
    for (size_t w = 0; w < rec.train_mse.size(); ++w) {
      out << rec.epoch << ',' << (w + 1) << ',' << fmt_double(rec.train_mse[w]) << ','
          << fmt_double(rec.val_mse[w]) << ',' << fmt_double(rec.alpha[w]) << ','
          << fmt_double(rec.eta[w]) << ',' << fmt_double(rec.lr) << '\n';
    }
  }
  if (!out) throw IoError("short write to history: " + path);
}

}  // namespace wdmdiff
