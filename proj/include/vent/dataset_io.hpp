#ifndef VENT_DATASET_IO_HPP
#define VENT_DATASET_IO_HPP

#include <string>
#include <vector>

#include "vent/signal.hpp"

namespace vent {

// Binary dataset format, little-endian:
//   magic "VNTD", version u16
//   header: n_windows u32, fs_hz f32, window_len u32, n_channels u16
//   per record: subject_id u32, window_id u32, artifact_level u8, sex u8,
//               age u16, mv_true f32, then n_channels * window_len f32 samples
//               (resp_flow first, heart_series second)
//   trailer: CRC32 over everything before it
// A sidecar "<path>.manifest" key=value file records the manifest and seed so
// splits are recomputable on import.

constexpr std::uint16_t kDatasetFormatVersion = 1;

std::vector<unsigned char> serialize_dataset(const Dataset& ds);
void export_dataset(const Dataset& ds, const std::string& path);
Dataset import_dataset(const std::string& path);

// Raw record reader, used when the sidecar manifest is not needed.
std::vector<SignalWindow> read_dataset_windows(const std::string& path, double* fs_hz_out,
                                               int* window_len_out);

}  // namespace vent

#endif
