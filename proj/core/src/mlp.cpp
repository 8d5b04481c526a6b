#include "vmimo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace vmimo {
namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

struct Workspace {
  std::vector<std::vector<double>> activations;  // [layer] incl. input copy
  std::vector<std::vector<double>> deltas;       // [layer > 0]

  explicit Workspace(const std::vector<int>& sizes) {
    activations.resize(sizes.size());
    deltas.resize(sizes.size());
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      activations[l].resize(sizes[l]);
      if (l > 0) deltas[l].resize(sizes[l]);
    }
  }
};

void forward_into(const MlpNetwork& net, std::span<const double> input,
                  Workspace& ws) {
  std::copy(input.begin(), input.end(), ws.activations[0].begin());
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const auto& w = net.weights[l];
    const auto& prev = ws.activations[l];
    auto& next = ws.activations[l + 1];
    for (int j = 0; j < out; ++j) {
      const double* row = w.data() + static_cast<std::size_t>(j) * (in + 1);
      double z = row[in];  // bias
      for (int k = 0; k < in; ++k) z += row[k] * prev[k];
      next[j] = std::tanh(z);
    }
  }
}

// One fused pass: accumulates the batch gradient and sums squared output
// error in sample order. The error sum matches dataset_mse bit for bit.
double accumulate_gradient(const MlpNetwork& net,
                           std::span<const LabeledVector> batch,
                           std::vector<std::vector<double>>& grads,
                           Workspace& ws) {
  const auto& sizes = net.layer_sizes;
  const std::size_t layers = sizes.size();
  double sq_error = 0.0;
  for (const auto& sample : batch) {
    if (static_cast<int>(sample.input.size()) != sizes.front() ||
        static_cast<int>(sample.target.size()) != sizes.back())
      throw std::invalid_argument("mlp_gradient: sample dimension mismatch");
    forward_into(net, sample.input, ws);

    const auto& out_act = ws.activations[layers - 1];
    auto& out_delta = ws.deltas[layers - 1];
    for (int k = 0; k < sizes.back(); ++k) {
      const double err = out_act[k] - sample.target[k];
      sq_error += err * err;
      out_delta[k] = 2.0 * err * (1.0 - out_act[k] * out_act[k]);
    }

    for (std::size_t l = layers - 1; l-- > 1;) {
      const int width = sizes[l];
      const int next_width = sizes[l + 1];
      const auto& w_next = net.weights[l];
      const auto& delta_next = ws.deltas[l + 1];
      auto& delta = ws.deltas[l];
      for (int j = 0; j < width; ++j) {
        double back = 0.0;
        for (int k = 0; k < next_width; ++k)
          back += w_next[static_cast<std::size_t>(k) * (width + 1) + j] *
                  delta_next[k];
        const double a = ws.activations[l][j];
        delta[j] = back * (1.0 - a * a);
      }
    }

    for (std::size_t l = 0; l + 1 < layers; ++l) {
      const int in = sizes[l];
      const int out = sizes[l + 1];
      const auto& prev = ws.activations[l];
      const auto& delta = ws.deltas[l + 1];
      auto& g = grads[l];
      for (int j = 0; j < out; ++j) {
        double* row = g.data() + static_cast<std::size_t>(j) * (in + 1);
        const double d = delta[j];
        for (int k = 0; k < in; ++k) row[k] += d * prev[k];
        row[in] += d;
      }
    }
  }
  return sq_error;
}

// iRPROP-: the sign-flip branch shrinks the step, clears the gradient
// memory and skips this weight's update for the epoch.
void apply_rprop(MlpNetwork& net,
                 const std::vector<std::vector<double>>& grads,
                 const RpropConfig& config) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    auto& delta = net.step_sizes[l];
    auto& prev = net.prev_grads[l];
    const auto& g = grads[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double agreement = prev[i] * g[i];
      if (agreement > 0.0) {
        delta[i] = std::min(delta[i] * config.eta_plus, config.delta_max);
        w[i] -= sign(g[i]) * delta[i];
        prev[i] = g[i];
      } else if (agreement < 0.0) {
        delta[i] = std::max(delta[i] * config.eta_minus, config.delta_min);
        prev[i] = 0.0;
      } else {
        w[i] -= sign(g[i]) * delta[i];
        prev[i] = g[i];
      }
    }
  }
}

std::vector<std::vector<double>> zero_like_weights(const MlpNetwork& net) {
  std::vector<std::vector<double>> grads(net.weights.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    grads[l].assign(net.weights[l].size(), 0.0);
  return grads;
}

std::size_t total_components(const MlpNetwork& net,
                             std::span<const LabeledVector> data) {
  return data.size() * static_cast<std::size_t>(net.layer_sizes.back());
}

}  // namespace

double activation(double x) { return std::tanh(x); }

std::vector<double> target_for_label(int label) {
  if (label == 1) return {1.0, -1.0};
  if (label == -1) return {-1.0, 1.0};
  throw std::invalid_argument("target_for_label: label must be +1 or -1");
}

MlpNetwork MlpNetwork::create(std::vector<int> sizes, double delta_init) {
  if (sizes.size() < 2)
    throw std::invalid_argument("MlpNetwork needs at least input and output layers");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("MlpNetwork layer sizes must be > 0");
  MlpNetwork net;
  net.layer_sizes = std::move(sizes);
  const std::size_t layers = net.layer_sizes.size();
  net.weights.resize(layers - 1);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    const std::size_t count =
        static_cast<std::size_t>(net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
    net.weights[l].assign(count, 0.0);
  }
  net.reset_rprop_state(delta_init);
  return net;
}

void MlpNetwork::randomize_weights(RngStream& rng, double range) {
  for (auto& layer : weights)
    for (auto& w : layer) w = rng.uniform(-range, range);
}

void MlpNetwork::reset_rprop_state(double delta_init) {
  step_sizes.resize(weights.size());
  prev_grads.resize(weights.size());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    step_sizes[l].assign(weights[l].size(), delta_init);
    prev_grads[l].assign(weights[l].size(), 0.0);
  }
}

std::vector<double> MlpNetwork::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != layer_sizes.front())
    throw std::invalid_argument("forward: input dimension mismatch");
  Workspace ws(layer_sizes);
  forward_into(*this, input, ws);
  return ws.activations.back();
}

int MlpNetwork::predict(std::span<const double> input) const {
  const auto out = forward(input);
  if (out.size() != 2)
    throw std::invalid_argument("predict: needs a two-neuron output layer");
  return out[0] > out[1] ? +1 : -1;
}

std::size_t MlpNetwork::weight_count() const {
  std::size_t count = 0;
  for (const auto& layer : weights) count += layer.size();
  return count;
}

std::vector<std::vector<double>> mlp_gradient(
    const MlpNetwork& net, std::span<const LabeledVector> batch) {
  if (batch.empty()) throw std::invalid_argument("mlp_gradient: empty batch");
  auto grads = zero_like_weights(net);
  Workspace ws(net.layer_sizes);
  accumulate_gradient(net, batch, grads, ws);
  return grads;
}

double mse(const std::vector<std::vector<double>>& outputs,
           const std::vector<std::vector<double>>& targets) {
  if (outputs.size() != targets.size() || outputs.empty())
    throw std::invalid_argument("mse: outputs/targets size mismatch or empty");
  double sum = 0.0;
  std::size_t components = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != targets[i].size())
      throw std::invalid_argument("mse: row width mismatch");
    for (std::size_t k = 0; k < outputs[i].size(); ++k) {
      const double err = outputs[i][k] - targets[i][k];
      sum += err * err;
    }
    components += outputs[i].size();
  }
  return sum / static_cast<double>(components);
}

double dataset_mse(const MlpNetwork& net, std::span<const LabeledVector> data) {
  if (data.empty()) throw std::invalid_argument("dataset_mse: empty dataset");
  Workspace ws(net.layer_sizes);
  double sq_error = 0.0;
  for (const auto& sample : data) {
    forward_into(net, sample.input, ws);
    const auto& out = ws.activations.back();
    for (std::size_t k = 0; k < sample.target.size(); ++k) {
      const double err = out[k] - sample.target[k];
      sq_error += err * err;
    }
  }
  return sq_error / static_cast<double>(total_components(net, data));
}

double rprop_epoch(MlpNetwork& net, std::span<const LabeledVector> data,
                   const RpropConfig& config) {
  const auto grads = mlp_gradient(net, data);
  apply_rprop(net, grads, config);
  return dataset_mse(net, data);
}

TrainResult train(MlpNetwork& net, std::span<const LabeledVector> data,
                  const RpropConfig& config, RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& s : data) {
    if (s.target.size() >= 2 && s.target[0] > s.target[1]) has_pos = true;
    else has_neg = true;
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("train: dataset must contain both classes");

  net.randomize_weights(rng, 0.5);
  net.reset_rprop_state(config.delta_init);

  TrainResult result;
  result.mse_trace.reserve(config.max_epochs);
  auto grads = zero_like_weights(net);
  Workspace ws(net.layer_sizes);
  const double denom = static_cast<double>(total_components(net, data));

  // The gradient pass at W_e reuses its forward sweep to report the MSE at
  // W_e, which is exactly the post-update MSE of epoch e-1.
  int applied = 0;
  while (true) {
    for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
    const double current_mse = accumulate_gradient(net, data, grads, ws) / denom;
    if (applied > 0) {
      result.mse_trace.push_back(current_mse);
      if (current_mse <= config.mse_threshold) {
        result.converged = true;
        break;
      }
    }
    if (applied == config.max_epochs) break;
    apply_rprop(net, grads, config);
    ++applied;
  }
  return result;
}

std::string mlp_to_json(const MlpNetwork& net, const RpropConfig& config,
                        const TrainResult* result) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes;
  auto flat = nlohmann::json::array();
  for (const auto& layer : net.weights)
    for (double w : layer) flat.push_back(w);
  j["weights"] = std::move(flat);
  j["rprop"] = {{"eta_plus", config.eta_plus},
                {"eta_minus", config.eta_minus},
                {"delta_init", config.delta_init},
                {"delta_min", config.delta_min},
                {"delta_max", config.delta_max},
                {"mse_threshold", config.mse_threshold},
                {"max_epochs", config.max_epochs}};
  if (result != nullptr)
    j["training"] = {{"final_mse", result->final_mse()},
                     {"epochs", result->epochs()},
                     {"converged", result->converged}};
  return j.dump(2);
}

MlpNetwork mlp_from_json(const std::string& text, RpropConfig* config) {
  const auto j = nlohmann::json::parse(text);
  auto net = MlpNetwork::create(j.at("layer_sizes").get<std::vector<int>>());
  const auto flat = j.at("weights").get<std::vector<double>>();
  if (flat.size() != net.weight_count())
    throw std::invalid_argument("mlp_from_json: weight count mismatch");
  std::size_t pos = 0;
  for (auto& layer : net.weights)
    for (auto& w : layer) w = flat[pos++];
  if (config != nullptr && j.contains("rprop")) {
    const auto& r = j.at("rprop");
    config->eta_plus = r.at("eta_plus").get<double>();
    config->eta_minus = r.at("eta_minus").get<double>();
    config->delta_init = r.at("delta_init").get<double>();
    config->delta_min = r.at("delta_min").get<double>();
    config->delta_max = r.at("delta_max").get<double>();
    config->mse_threshold = r.at("mse_threshold").get<double>();
    config->max_epochs = r.at("max_epochs").get<int>();
  }
  return net;
}

}  // namespace vmimo
