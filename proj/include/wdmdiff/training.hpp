#pragma once

#include <limits>
#include <span>
#include <vector>

#include "wdmdiff/stack.hpp"
#include "wdmdiff/taskgen.hpp"

namespace wdmdiff {

/// Per-sample energy-normalized loss pieces:
///   sigma      = (sum |o[n]|^2)^(-1/2)
///   sigma'     = sum(sigma*o[n]*conj(o'[n])) / sum |o'[n]|^2   (0 when o' == 0)
///   mse        = (1/N_o) * sum |sigma*o[n] - sigma'*o'[n]|^2
struct LossTerms {
  double mse = 0.0;
  double sigma = 0.0;
  Complex sigma_prime{0.0, 0.0};
  double output_energy = 0.0;
};

LossTerms channel_loss_terms(std::span<const Complex> target, std::span<const Complex> output);
double channel_loss(std::span<const Complex> target, std::span<const Complex> output);

// Reference channel (0-based index): the middle channel, lower middle for even
// counts.
int reference_channel(int n_w);

struct TrainConfig {
  double lr0 = 1e-3;
  int epochs = 50;
  int batch = 8;
  double beta = 0.0;     // efficiency penalty weight
  double eta_th = 3e-4;  // efficiency penalty threshold
  double weight_decay = 1e-2;
  bool adaptive_alpha = true;
  bool deterministic = true;  // retained for the CLI surface; reductions are
                              // always run in a fixed order (see README)
  // Adaptive-moment defaults.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainState {
  std::vector<double> alpha;  // spectral weights, reference stays at 1
  int w_ref = 0;
  long step = 0;
  std::vector<std::vector<double>> m1;  // first moments, shaped like the latents
  std::vector<std::vector<double>> m2;  // second moments
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  std::vector<std::vector<double>> best_latents;

  static TrainState init(const DiffractiveModel& model);
};

// alpha_w <- max(0.1*(L_w - L_ref) + alpha_w, 0); the reference is untouched.
void update_spectral_weights(TrainState& state, std::span<const double> losses);

struct EfficiencyTerms {
  double eta = 0.0;      // mean over the batch of output/input energy ratios
  double penalty = 0.0;  // max(eta_th - eta, 0)
  bool active = false;   // strictly below threshold (gradient-side convention)
};
EfficiencyTerms efficiency_terms(std::span<const double> output_energies,
                                 std::span<const double> input_energies, double eta_th);

// (1/N_w) * sum_w (alpha_w * mse_w + beta * penalty_w)
double total_loss(std::span<const double> mse, std::span<const double> alpha,
                  std::span<const double> penalties, double beta);

double schedule_lr(double lr0, int epoch);  // lr0 * 0.5^floor(epoch/10)

struct BatchStats {
  std::vector<double> mse;  // per channel, batch mean
  std::vector<double> eta;  // per channel, batch mean
  double loss = 0.0;        // total training objective
};

// Forward+backward over every (sample, channel) of the batch. grad_hv must be
// latent-shaped and zeroed by the caller; contributions are reduced in a fixed
// order and chained through the thickness reparameterization (quantization
// passes gradients straight through).
BatchStats batch_gradients(const StackEvaluator& eval, const Dataset& data, Split split,
                           std::span<const long> indices, const TrainState& state,
                           const TrainConfig& cfg,
                           std::vector<std::vector<double>>& grad_hv);

// Loss-only variant (used by finite-difference checks).
BatchStats batch_forward_stats(const StackEvaluator& eval, const Dataset& data, Split split,
                               std::span<const long> indices, std::span<const double> alpha,
                               double beta, double eta_th);

// Decoupled-weight-decay adaptive moment update of the latents.
void optimizer_step(TrainState& state, DiffractiveModel& model,
                    const std::vector<std::vector<double>>& grad_hv, double lr,
                    const TrainConfig& cfg);

// Per-channel mean of per-sample channel_loss over a whole split.
std::vector<double> evaluate_split_mse(const StackEvaluator& eval, const Dataset& data,
                                       Split split);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  std::vector<double> train_mse;  // per channel, mean over the epoch's batches
  std::vector<double> val_mse;
  std::vector<double> alpha;  // after the epoch's final update
  std::vector<double> eta;    // per channel, mean over the epoch's batches
};

struct FitResult {
  DiffractiveModel model;  // best-validation snapshot
  int best_epoch = -1;
  double best_val = 0.0;
  std::vector<EpochRecord> history;
  bool diverged = false;
  int start_epoch = 0;
  // State after the last completed epoch (pre-divergence state when diverged);
  // what a resumed run continues from.
  DiffractiveModel final_model;
  int final_epoch = -1;
};

// Epoch loop with the halving schedule and validation-based selection. The
// returned model carries the best-validation latents, not the final ones.
// start_epoch > 0 resumes the schedule mid-way (fresh moments and weights).
FitResult fit(const DiffractiveModel& init, const Dataset& data, const TrainConfig& cfg,
              int start_epoch = 0);

void write_history_csv(const std::string& path, const FitResult& result);

}  // namespace wdmdiff
