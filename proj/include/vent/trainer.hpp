#ifndef VENT_TRAINER_HPP
#define VENT_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vent/net_graph.hpp"
#include "vent/signal.hpp"

namespace vent {

// Fixed input normalization applied when windows become network batches.
constexpr float kRespScale = 2.0f;        // L/s -> ~unit range
constexpr float kHeartMean = 75.0f;       // bpm
constexpr float kHeartScale = 1.0f / 25.0f;

struct TrainConfig {
    enum class Opt { adam, sgd_momentum };
    Opt optimizer = Opt::adam;
    double lr = 1e-3;
    double momentum = 0.9;  // sgd-momentum only
    int batch_size = 32;
    int max_epochs = 50;
    int patience = 5;  // early stop, epochs past the validation minimum
    std::uint64_t seed = 7;
    int finetune_epochs = 10;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
    double wall_seconds = 0.0;
};

// Moment buffers in canonical parameter order (see collect_params).
struct OptimizerState {
    std::vector<std::vector<float>> m;  // adam first moment / sgd velocity
    std::vector<std::vector<float>> v;  // adam second moment
    long step = 0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    double best_val_rmse = 0.0;
    int best_epoch = 0;
};

// Canonical, deterministic parameter ordering: layer weights and biases by
// ascending layer index, then skip kernels. Checkpoints and optimizer state
// rely on this order.
std::vector<Tensor<float>*> collect_params(NetworkGraph<float>& g);

Tensor<float> windows_to_batch(const std::vector<const SignalWindow*>& ws,
                               const std::vector<int>& idx);
Tensor<float> windows_to_labels(const std::vector<const SignalWindow*>& ws,
                                const std::vector<int>& idx);

TrainResult train(NetworkGraph<float>& g, const std::vector<const SignalWindow*>& train_ws,
                  const std::vector<const SignalWindow*>& val_ws, const TrainConfig& cfg,
                  OptimizerState* state_out = nullptr);

std::vector<double> predict(NetworkGraph<float>& g, const std::vector<const SignalWindow*>& ws,
                            int batch_size = 32);

// ---- transfer pretraining on a synthetic proxy classification task ----

struct ProxyDataset {
    int n_classes = 0;
    Tensor<float> inputs;   // [N, channels, len]
    Tensor<float> targets;  // [N, n_classes] one-hot
    std::vector<int> labels;
};

// Multiclass 1-D signal task shape-compatible with the regression input:
// classes differ by base frequency and harmonic mix.
ProxyDataset make_proxy_dataset(int n_classes, int per_class, int channels, int len,
                                std::uint64_t seed);

struct PretrainResult {
    TrainResult train;
    double holdout_accuracy = 0.0;
    int holdout_n = 0;
};

// Trains a classification head on the proxy task in place.
PretrainResult pretrain_proxy(NetworkGraph<float>& proxy_graph, const ProxyDataset& ds,
                              const TrainConfig& cfg);

// Transplants conv trunk weights; dense head layers stay untouched.
void transfer_conv_weights(const NetworkGraph<float>& from, NetworkGraph<float>& to);

}  // namespace vent

#endif
