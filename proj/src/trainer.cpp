#include "vent/trainer.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "vent/errors.hpp"

namespace vent {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Re-zero pruned coordinates so they stay exactly 0 through fine-tuning.
void enforce_masks(NetworkGraph<float>& g) {
    for (auto& [id, m] : g.masks) {
        Tensor<float>& w = g.weights.at(id);
        for (long i = 0; i < m.numel(); ++i)
            if (m.data[i] == 0.0f) w.data[i] = 0.0f;
    }
    for (std::size_t j = 0; j < g.skip_kernels.size(); ++j) {
        Tensor<float>& k = g.skip_kernels[j];
        const Tensor<float>& m = g.skip_masks[j];
        for (long i = 0; i < m.numel(); ++i)
            if (m.data[i] == 0.0f) k.data[i] = 0.0f;
    }
}

struct Stepper {
    const TrainConfig& cfg;
    OptimizerState& state;

    void step(std::vector<Tensor<float>*>& params) {
        state.step += 1;
        if (cfg.optimizer == TrainConfig::Opt::adam) {
            const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
            const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
            const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
            for (std::size_t p = 0; p < params.size(); ++p) {
                Tensor<float>& t = *params[p];
                auto& m = state.m[p];
                auto& v = state.v[p];
                for (long i = 0; i < t.numel(); ++i) {
                    double gr = t.grad[i];
                    m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * gr);
                    v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * gr * gr);
                    double mhat = m[i] / bc1;
                    double vhat = v[i] / bc2;
                    t.data[i] -= static_cast<float>(cfg.lr * mhat / (std::sqrt(vhat) + eps));
                }
            }
        } else {
            for (std::size_t p = 0; p < params.size(); ++p) {
                Tensor<float>& t = *params[p];
                auto& m = state.m[p];
                for (long i = 0; i < t.numel(); ++i) {
                    m[i] = static_cast<float>(cfg.momentum * m[i] + t.grad[i]);
                    t.data[i] -= static_cast<float>(cfg.lr * m[i]);
                }
            }
        }
    }
};

double grad_norm(const std::vector<Tensor<float>*>& params) {
    double s = 0.0;
    for (const auto* t : params)
        for (float g : t->grad) s += static_cast<double>(g) * g;
    return std::sqrt(s);
}

struct GraphSnapshot {
    std::vector<std::vector<float>> values;
    void capture(const std::vector<Tensor<float>*>& params) {
        values.clear();
        for (const auto* t : params) values.push_back(t->data);
    }
    void restore(std::vector<Tensor<float>*>& params) const {
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = values[i];
    }
};

// Shared epoch loop over pre-assembled (x, y) batch providers.
TrainResult train_batches(NetworkGraph<float>& g,
                          const std::function<std::pair<Tensor<float>, Tensor<float>>(
                              const std::vector<int>&)>& make_batch,
                          int n_train, const Tensor<float>& val_x, const Tensor<float>& val_y,
                          const TrainConfig& cfg, OptimizerState* state_out) {
    cfg.validate();
    g.set_trainable(true);
    auto params = collect_params(g);

    OptimizerState local_state;
    OptimizerState& state = state_out ? *state_out : local_state;
    if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        state.step = 0;
        for (const auto* t : params) {
            state.m.emplace_back(t->numel(), 0.0f);
            state.v.emplace_back(t->numel(), 0.0f);
        }
    }
    Stepper stepper{cfg, state};

    std::vector<int> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    auto eval_rmse = [&](const Tensor<float>& x, const Tensor<float>& y) {
        if (x.numel() == 0) return 0.0;
        Tensor<float> pred = forward(g, x);
        double ss = 0.0;
        for (long i = 0; i < pred.numel(); ++i) {
            double d = pred.data[i] - y.data[i];
            ss += d * d;
        }
        return std::sqrt(ss / static_cast<double>(pred.numel()));
    };

    TrainResult res;
    GraphSnapshot best;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    auto t0 = Clock::now();

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        // fixed shuffle stream: depends only on (seed, epoch)
        Rng shuffle_rng = Rng(cfg.seed).derive(0x5E0FULL + epoch);
        for (int i = n_train - 1; i > 0; --i) {
            int j = static_cast<int>(shuffle_rng.uniform_int(0, i));
            std::swap(order[i], order[j]);
        }

        double train_se = 0.0;
        long train_n = 0;
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min(n_train, start + cfg.batch_size));
            auto [bx, by] = make_batch(idx);

            Tape<float> tape;
            auto in = tape.input(std::move(bx));
            auto out = forward_on_tape(g, tape, in);
            auto target = tape.input(std::move(by));
            auto loss = tape.mse(out, target);

            double loss_val = tape.value(loss).data[0];
            if (!std::isfinite(loss_val)) {
                g.zero_grad();
                throw NumericError("NaN/Inf loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(start / cfg.batch_size) + ", grad-norm " +
                                   std::to_string(grad_norm(params)));
            }
            train_se += loss_val * tape.value(out).numel();
            train_n += tape.value(out).numel();

            g.zero_grad();
            tape.backward(loss);
            stepper.step(params);
            enforce_masks(g);
        }

        double val_rmse = eval_rmse(val_x, val_y);
        res.history.push_back({epoch, std::sqrt(train_se / std::max(1L, train_n)), val_rmse,
                               seconds_since(t0)});

        if (val_rmse < best_val) {
            best_val = val_rmse;
            best_epoch = epoch;
            best.capture(params);
        }
        if (epoch - best_epoch >= cfg.patience) break;
    }

    if (best_epoch >= 0) best.restore(params);
    enforce_masks(g);
    res.best_val_rmse = best_val;
    res.best_epoch = best_epoch;
    return res;
}

}  // namespace

void TrainConfig::validate() const {
    if (lr <= 0 || batch_size <= 0 || max_epochs <= 0 || patience <= 0 || finetune_epochs <= 0)
        throw ConfigError("train config: lr, batch_size, max_epochs, patience, finetune_epochs "
                          "must be positive");
    if (patience > max_epochs)
        throw ConfigError("train config: patience must be <= max_epochs");
}

std::vector<Tensor<float>*> collect_params(NetworkGraph<float>& g) {
    std::vector<Tensor<float>*> params;
    for (auto& [id, w] : g.weights) {
        params.push_back(&w);
        params.push_back(&g.biases.at(id));
    }
    for (auto& k : g.skip_kernels) params.push_back(&k);
    return params;
}

Tensor<float> windows_to_batch(const std::vector<const SignalWindow*>& ws,
                               const std::vector<int>& idx) {
    if (idx.empty()) return Tensor<float>({0, 2, 0});
    const int len = static_cast<int>(ws[idx[0]]->resp_flow.size());
    Tensor<float> out({static_cast<int>(idx.size()), 2, len});
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const SignalWindow& w = *ws[idx[n]];
        float* resp = out.data.data() + (n * 2 + 0) * len;
        float* heart = out.data.data() + (n * 2 + 1) * len;
        for (int i = 0; i < len; ++i) {
            resp[i] = w.resp_flow[i] * kRespScale;
            heart[i] = (w.heart_series[i] - kHeartMean) * kHeartScale;
        }
    }
    return out;
}

Tensor<float> windows_to_labels(const std::vector<const SignalWindow*>& ws,
                                const std::vector<int>& idx) {
    Tensor<float> out({static_cast<int>(idx.size()), 1});
    for (std::size_t n = 0; n < idx.size(); ++n) out.data[n] = ws[idx[n]]->mv_true;
    return out;
}

TrainResult train(NetworkGraph<float>& g, const std::vector<const SignalWindow*>& train_ws,
                  const std::vector<const SignalWindow*>& val_ws, const TrainConfig& cfg,
                  OptimizerState* state_out) {
    if (train_ws.empty()) throw ConfigError("train: empty training split");
    std::vector<int> val_idx(val_ws.size());
    std::iota(val_idx.begin(), val_idx.end(), 0);
    Tensor<float> val_x = windows_to_batch(val_ws, val_idx);
    Tensor<float> val_y = windows_to_labels(val_ws, val_idx);

    auto make_batch = [&](const std::vector<int>& idx) {
        return std::make_pair(windows_to_batch(train_ws, idx), windows_to_labels(train_ws, idx));
    };
    return train_batches(g, make_batch, static_cast<int>(train_ws.size()), val_x, val_y, cfg,
                         state_out);
}

std::vector<double> predict(NetworkGraph<float>& g, const std::vector<const SignalWindow*>& ws,
                            int batch_size) {
    std::vector<double> out;
    out.reserve(ws.size());
    for (std::size_t start = 0; start < ws.size(); start += batch_size) {
        std::vector<int> idx;
        for (std::size_t i = start; i < std::min(ws.size(), start + batch_size); ++i)
            idx.push_back(static_cast<int>(i));
        Tensor<float> x = windows_to_batch(ws, idx);
        Tensor<float> pred = forward(g, x);
        for (long i = 0; i < pred.numel(); ++i) out.push_back(pred.data[i]);
    }
    return out;
}

ProxyDataset make_proxy_dataset(int n_classes, int per_class, int channels, int len,
                                std::uint64_t seed) {
    if (n_classes < 2 || per_class < 1 || channels < 1 || len < 8)
        throw ConfigError("proxy dataset: need n_classes >= 2, per_class >= 1, len >= 8");
    ProxyDataset ds;
    ds.n_classes = n_classes;
    const int n = n_classes * per_class;
    ds.inputs = Tensor<float>({n, channels, len});
    ds.targets = Tensor<float>({n, n_classes});
    Rng root(seed);
    int row = 0;
    for (int c = 0; c < n_classes; ++c)
        for (int s = 0; s < per_class; ++s, ++row) {
            Rng r = root.derive(static_cast<std::uint64_t>(row) + 1);
            double base_cycles = 3.0 + 4.0 * c + r.uniform(-0.8, 0.8);
            double harmonic = 0.3 + 0.1 * (c % 3);
            double phase = r.uniform(0.0, 6.283185307179586);
            for (int ch = 0; ch < channels; ++ch) {
                float* p = ds.inputs.data.data() +
                           (static_cast<long>(row) * channels + ch) * len;
                double ch_phase = phase + 0.7 * ch;
                for (int i = 0; i < len; ++i) {
                    double t = static_cast<double>(i) / len;
                    double v = std::sin(6.283185307179586 * base_cycles * t + ch_phase) +
                               harmonic * std::sin(2 * 6.283185307179586 * base_cycles * t) +
                               0.1 * r.normal();
                    p[i] = static_cast<float>(v);
                }
            }
            ds.targets.data[static_cast<long>(row) * n_classes + c] = 1.0f;
            ds.labels.push_back(c);
        }
    return ds;
}

PretrainResult pretrain_proxy(NetworkGraph<float>& proxy_graph, const ProxyDataset& ds,
                              const TrainConfig& cfg) {
    auto io = compute_layer_io(proxy_graph.spec);
    if (proxy_graph.spec.input_channels != ds.inputs.dim(1) ||
        proxy_graph.spec.input_len != ds.inputs.dim(2))
        throw ConfigError("pretrain_proxy: proxy dataset shape " + ds.inputs.shape_string() +
                          " is incompatible with the graph input");
    if (io.back().length != ds.n_classes)
        throw ConfigError("pretrain_proxy: graph output width " + std::to_string(io.back().length) +
                          " != n_classes " + std::to_string(ds.n_classes));

    // deterministic holdout: every 5th sample
    const int n = ds.inputs.dim(0);
    std::vector<int> train_idx, hold_idx;
    for (int i = 0; i < n; ++i) (i % 5 == 4 ? hold_idx : train_idx).push_back(i);

    const int channels = ds.inputs.dim(1), len = ds.inputs.dim(2);
    auto gather = [&](const std::vector<int>& idx) {
        Tensor<float> x({static_cast<int>(idx.size()), channels, len});
        Tensor<float> y({static_cast<int>(idx.size()), ds.n_classes});
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::copy_n(ds.inputs.data.begin() + static_cast<long>(idx[k]) * channels * len,
                        static_cast<long>(channels) * len,
                        x.data.begin() + static_cast<long>(k) * channels * len);
            std::copy_n(ds.targets.data.begin() + static_cast<long>(idx[k]) * ds.n_classes,
                        ds.n_classes, y.data.begin() + static_cast<long>(k) * ds.n_classes);
        }
        return std::make_pair(std::move(x), std::move(y));
    };

    auto [hx, hy] = gather(hold_idx);
    auto make_batch = [&](const std::vector<int>& idx) {
        std::vector<int> mapped;
        for (int i : idx) mapped.push_back(train_idx[i]);
        return gather(mapped);
    };

    PretrainResult res;
    res.train = train_batches(proxy_graph, make_batch, static_cast<int>(train_idx.size()), hx, hy,
                              cfg, nullptr);

    // holdout accuracy by argmax
    Tensor<float> pred = forward(proxy_graph, hx);
    int correct = 0;
    for (int i = 0; i < pred.dim(0); ++i) {
        int best = 0;
        for (int c = 1; c < ds.n_classes; ++c)
            if (pred.data[static_cast<long>(i) * ds.n_classes + c] >
                pred.data[static_cast<long>(i) * ds.n_classes + best])
                best = c;
        if (ds.labels[hold_idx[i]] == best) ++correct;
    }
    res.holdout_n = static_cast<int>(hold_idx.size());
    res.holdout_accuracy =
        res.holdout_n ? static_cast<double>(correct) / res.holdout_n : 0.0;
    return res;
}

void transfer_conv_weights(const NetworkGraph<float>& from, NetworkGraph<float>& to) {
    for (std::size_t i = 0; i < to.spec.layers.size(); ++i) {
        if (to.spec.layers[i].kind != LayerKind::conv1d) continue;
        int li = static_cast<int>(i);
        auto src_w = from.weights.find(li);
        auto src_b = from.biases.find(li);
        if (src_w == from.weights.end() || src_b == from.biases.end())
            throw ContractError("transfer: source graph lacks conv layer " + std::to_string(li));
        if (src_w->second.shape != to.weights.at(li).shape)
            throw ContractError("transfer: conv layer " + std::to_string(li) + " shape mismatch " +
                                src_w->second.shape_string() + " vs " +
                                to.weights.at(li).shape_string());
        to.weights.at(li).data = src_w->second.data;
        to.biases.at(li).data = src_b->second.data;
    }
}

}  // namespace vent
