#ifndef VENT_CONFIG_HPP
#define VENT_CONFIG_HPP

#include <map>
#include <string>

#include "vent/net_graph.hpp"
#include "vent/pruning.hpp"
#include "vent/signal.hpp"
#include "vent/trainer.hpp"

namespace vent {

// One flat key=value configuration for the whole pipeline. Config keys and
// CLI flags are bijective; unknown keys are rejected before any work starts.
struct RunConfig {
    // dataset
    int subjects = 103;
    int female = 53;
    int windows_per_subject = 400;
    double fs_hz = 25.0;
    double window_seconds = 60.0;
    std::uint64_t seed = 42;
    double split_train = 0.7;
    double split_val = 0.15;
    double split_test = 0.15;
    int age_min = 8;
    int age_max = 75;

    // architecture (block widths are conv_width * {1,2,4,8,8})
    int conv_width = 64;
    int dense1 = 360;
    int dense2 = 128;

    // training
    std::string optimizer = "adam";
    double lr = 1e-3;
    int batch = 32;
    int epochs = 50;
    int patience = 5;
    std::uint64_t train_seed = 7;
    int finetune_epochs = 10;

    // transfer pretraining (synthetic proxy classification)
    bool pretrain = true;
    int proxy_classes = 4;
    int proxy_per_class = 40;
    int proxy_epochs = 8;

    // pruning / rewiring
    double sparsity = 0.9;
    std::string prune_scope = "global";
    std::string skip_pattern = "block-skip";
    double skip_density = 0.1;

    // evaluation
    double alpha = 0.05;

    void apply(const std::map<std::string, std::string>& kv);
    void validate() const;

    DatasetManifest manifest() const;
    ArchConfig arch(int output_units = 1) const;
    TrainConfig train_config() const;
    PruneScope scope() const;
};

RunConfig load_run_config(const std::string& path);

}  // namespace vent

#endif
