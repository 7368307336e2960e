#ifndef VENT_CHECKPOINT_HPP
#define VENT_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "vent/net_graph.hpp"
#include "vent/trainer.hpp"

namespace vent {

// Checkpoint format, little-endian:
//   magic "VNTC", version u16
//   arch-spec: u32 length + UTF-8 text (graph_spec_to_text)
//   u32 tensor count, then per tensor: u16 name length + name, dtype u8
//   (0 = f32), rank u8, dims u32 each, payload f32
//   trailer: CRC32 over everything before it
// Tensor names: layer<i>.w/.b/.mask, skip<j>.k/.mask, opt.m<k>/opt.v<k>,
// meta (step, epoch), history ([n,4] epoch/train_rmse/val_rmse/wall_seconds).

constexpr std::uint16_t kCheckpointFormatVersion = 1;

struct Checkpoint {
    NetworkGraph<float> graph;
    OptimizerState opt;
    bool has_opt = false;
    int epoch = 0;
    std::vector<EpochStats> history;
};

std::vector<unsigned char> serialize_checkpoint(const NetworkGraph<float>& g,
                                                const OptimizerState* opt, int epoch,
                                                const std::vector<EpochStats>& history);

void save_checkpoint(const NetworkGraph<float>& g, const OptimizerState* opt, int epoch,
                     const std::vector<EpochStats>& history, const std::string& path);

// eval_only discards optimizer state but keeps the metrics history.
Checkpoint load_checkpoint(const std::string& path, bool eval_only = false);

// Metrics history as CSV text (epoch, train_rmse, val_rmse, wall_seconds).
std::string history_to_csv(const std::vector<EpochStats>& history);

}  // namespace vent

#endif
