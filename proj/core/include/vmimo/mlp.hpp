#pragma once

#include <span>
#include <string>
#include <vector>

#include "vmimo/rng.hpp"

namespace vmimo {

/// RPROP constants. The update rules fix only 0 < eta_minus < 1 < eta_plus;
/// the numeric defaults follow the original RPROP recommendations.
struct RpropConfig {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_init = 0.1;
  double delta_min = 1e-6;
  double delta_max = 50.0;
  double mse_threshold = 0.01;
  int max_epochs = 2000;
};

/// tanh, the activation of every layer.
double activation(double x);

struct LabeledVector {
  std::vector<double> input;
  std::vector<double> target;
};

/// (+1,-1) for willing, (-1,+1) for unwilling: one output per class on the
/// tanh scale.
std::vector<double> target_for_label(int label);

/// Fully-connected feed-forward net with tanh on every layer and per-weight
/// RPROP state. Weight layout per layer: output neuron j owns the block
/// [j*(in+1), (j+1)*(in+1)) — fan-in weights first, bias last.
struct MlpNetwork {
  std::vector<int> layer_sizes;               // e.g. {19, 10, 2}
  std::vector<std::vector<double>> weights;   // [layer][(in+1)*out]
  std::vector<std::vector<double>> step_sizes;
  std::vector<std::vector<double>> prev_grads;

  static MlpNetwork create(std::vector<int> sizes, double delta_init = 0.1);

  /// Uniform [-range, range] weights in a fixed traversal order
  /// (layer-major, then neuron block), so a seed pins the whole net.
  void randomize_weights(RngStream& rng, double range = 0.5);
  void reset_rprop_state(double delta_init);

  std::vector<double> forward(std::span<const double> input) const;
  /// argmax decision; exact tie goes to -1 (never poll on a coin flip).
  int predict(std::span<const double> input) const;

  std::size_t weight_count() const;
};

/// Gradient of the batch-summed squared error sum_samples sum_k (o_k - t_k)^2
/// by backpropagation. Shape mirrors MlpNetwork::weights.
std::vector<std::vector<double>> mlp_gradient(
    const MlpNetwork& net, std::span<const LabeledVector> batch);

/// Mean over all scalar output components of the squared deviation.
double mse(const std::vector<std::vector<double>>& outputs,
           const std::vector<std::vector<double>>& targets);

double dataset_mse(const MlpNetwork& net, std::span<const LabeledVector> data);

/// One full-batch iRPROP- step; returns the post-update dataset MSE.
/// Sign agreement grows the step (capped at delta_max), a sign flip shrinks
/// it (floored at delta_min), suppresses this weight's update and clears
/// its gradient memory; otherwise w -= sign(grad) * delta.
double rprop_epoch(MlpNetwork& net, std::span<const LabeledVector> data,
                   const RpropConfig& config);

struct TrainResult {
  std::vector<double> mse_trace;  // post-update MSE per epoch
  bool converged = false;
  int epochs() const { return static_cast<int>(mse_trace.size()); }
  double final_mse() const {
    return mse_trace.empty() ? 0.0 : mse_trace.back();
  }
};

/// Full training run: seeded uniform [-0.5, 0.5] init, epochs until the MSE
/// threshold or max_epochs. Produces the exact trace a rprop_epoch loop
/// would, with one shared forward pass per epoch instead of two.
TrainResult train(MlpNetwork& net, std::span<const LabeledVector> data,
                  const RpropConfig& config, RngStream& rng);

std::string mlp_to_json(const MlpNetwork& net, const RpropConfig& config,
                        const TrainResult* result = nullptr);
MlpNetwork mlp_from_json(const std::string& text, RpropConfig* config = nullptr);

}  // namespace vmimo
