#include "vent/config.hpp"

#include "vent/errors.hpp"
#include "vent/kv.hpp"

namespace vent {

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
    auto as_int = [](const std::string& k, const std::string& v) {
        try {
            return std::stoi(v);
        } catch (...) {
            throw ConfigError("config key '" + k + "': expected integer, got '" + v + "'");
        }
    };
    auto as_double = [](const std::string& k, const std::string& v) {
        try {
            return std::stod(v);
        } catch (...) {
            throw ConfigError("config key '" + k + "': expected number, got '" + v + "'");
        }
    };
    auto as_u64 = [](const std::string& k, const std::string& v) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (...) {
            throw ConfigError("config key '" + k + "': expected unsigned integer, got '" + v + "'");
        }
    };
    auto as_bool = [](const std::string& k, const std::string& v) {
        if (v == "1" || v == "true") return true;
        if (v == "0" || v == "false") return false;
        throw ConfigError("config key '" + k + "': expected 0/1, got '" + v + "'");
    };

    for (const auto& [k, v] : kv) {
        if (k == "subjects") subjects = as_int(k, v);
        else if (k == "female") female = as_int(k, v);
        else if (k == "windows_per_subject") windows_per_subject = as_int(k, v);
        else if (k == "fs_hz") fs_hz = as_double(k, v);
        else if (k == "window_seconds") window_seconds = as_double(k, v);
        else if (k == "seed") seed = as_u64(k, v);
        else if (k == "split_train") split_train = as_double(k, v);
        else if (k == "split_val") split_val = as_double(k, v);
        else if (k == "split_test") split_test = as_double(k, v);
        else if (k == "age_min") age_min = as_int(k, v);
        else if (k == "age_max") age_max = as_int(k, v);
        else if (k == "conv_width") conv_width = as_int(k, v);
        else if (k == "dense1") dense1 = as_int(k, v);
        else if (k == "dense2") dense2 = as_int(k, v);
        else if (k == "optimizer") optimizer = v;
        else if (k == "lr") lr = as_double(k, v);
        else if (k == "batch") batch = as_int(k, v);
        else if (k == "epochs") epochs = as_int(k, v);
        else if (k == "patience") patience = as_int(k, v);
        else if (k == "train_seed") train_seed = as_u64(k, v);
        else if (k == "finetune_epochs") finetune_epochs = as_int(k, v);
        else if (k == "pretrain") pretrain = as_bool(k, v);
        else if (k == "proxy_classes") proxy_classes = as_int(k, v);
        else if (k == "proxy_per_class") proxy_per_class = as_int(k, v);
        else if (k == "proxy_epochs") proxy_epochs = as_int(k, v);
        else if (k == "sparsity") sparsity = as_double(k, v);
        else if (k == "prune_scope") prune_scope = v;
        else if (k == "skip_pattern") skip_pattern = v;
        else if (k == "skip_density") skip_density = as_double(k, v);
        else if (k == "alpha") alpha = as_double(k, v);
        else
            throw ConfigError("unknown config key '" + k + "'");
    }
}

void RunConfig::validate() const {
    validate_manifest(manifest());
    if (conv_width <= 0 || dense1 <= 0 || dense2 <= 0)
        throw ConfigError("config: conv_width, dense1, dense2 must be positive");
    if (optimizer != "adam" && optimizer != "sgd-momentum")
        throw ConfigError("config: optimizer must be adam or sgd-momentum, got '" + optimizer + "'");
    train_config().validate();
    if (!(sparsity >= 0.0 && sparsity < 1.0))
        throw ConfigError("config: sparsity must be in [0,1)");
    if (prune_scope != "global" && prune_scope != "per-layer")
        throw ConfigError("config: prune_scope must be global or per-layer, got '" + prune_scope + "'");
    parse_skip_pattern(skip_pattern);
    if (!(skip_density > 0.0 && skip_density <= 1.0))
        throw ConfigError("config: skip_density must be in (0,1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: alpha must be in (0,1)");
    if (proxy_classes < 2 || proxy_per_class < 1 || proxy_epochs < 1)
        throw ConfigError("config: proxy task parameters must be positive (>=2 classes)");
}

DatasetManifest RunConfig::manifest() const {
    DatasetManifest m;
    m.n_subjects = subjects;
    m.n_female = female;
    m.n_male = subjects - female;
    m.windows_per_subject = windows_per_subject;
    m.fs_hz = fs_hz;
    m.window_seconds = window_seconds;
    m.rng_seed = seed;
    m.split_train = split_train;
    m.split_val = split_val;
    m.split_test = split_test;
    m.age_min = age_min;
    m.age_max = age_max;
    return m;
}

ArchConfig RunConfig::arch(int output_units) const {
    ArchConfig a;
    a.input_channels = 2;
    a.input_len = static_cast<int>(window_seconds * fs_hz);
    a.block_channels = {conv_width, 2 * conv_width, 4 * conv_width, 8 * conv_width,
                        8 * conv_width};
    a.dense_units = {dense1, dense2};
    a.output_units = output_units;
    return a;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.optimizer = optimizer == "adam" ? TrainConfig::Opt::adam : TrainConfig::Opt::sgd_momentum;
    t.lr = lr;
    t.batch_size = batch;
    t.max_epochs = epochs;
    t.patience = patience;
    t.seed = train_seed;
    t.finetune_epochs = finetune_epochs;
    return t;
}

PruneScope RunConfig::scope() const {
    return prune_scope == "global" ? PruneScope::global : PruneScope::per_layer;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    cfg.apply(read_kv_file(path));
    cfg.validate();
    return cfg;
}

}  // namespace vent
