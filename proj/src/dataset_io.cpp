#include "vent/dataset_io.hpp"

#include <cmath>
#include <sstream>

#include "vent/bytes.hpp"
#include "vent/crc32.hpp"
#include "vent/kv.hpp"

namespace vent {

namespace {

std::string manifest_sidecar_text(const Dataset& ds) {
    const DatasetManifest& m = ds.manifest;
    std::ostringstream seed;
    seed << m.rng_seed;
    return format_kv({
        {"n_subjects", std::to_string(m.n_subjects)},
        {"n_female", std::to_string(m.n_female)},
        {"n_male", std::to_string(m.n_male)},
        {"windows_per_subject", std::to_string(m.windows_per_subject)},
        {"fs_hz", std::to_string(m.fs_hz)},
        {"window_seconds", std::to_string(m.window_seconds)},
        {"rng_seed", seed.str()},
        {"split_train", std::to_string(m.split_train)},
        {"split_val", std::to_string(m.split_val)},
        {"split_test", std::to_string(m.split_test)},
        {"age_min", std::to_string(m.age_min)},
        {"age_max", std::to_string(m.age_max)},
    });
}

DatasetManifest manifest_from_sidecar(const std::string& path) {
    auto kv = read_kv_file(path);
    DatasetManifest m;
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw DataFormatError(DataFormatError::Kind::malformed,
                                  "sidecar " + path + " is missing key '" + key + "'");
        return it->second;
    };
    m.n_subjects = std::stoi(need("n_subjects"));
    m.n_female = std::stoi(need("n_female"));
    m.n_male = std::stoi(need("n_male"));
    m.windows_per_subject = std::stoi(need("windows_per_subject"));
    m.fs_hz = std::stod(need("fs_hz"));
    m.window_seconds = std::stod(need("window_seconds"));
    m.rng_seed = std::stoull(need("rng_seed"));
    m.split_train = std::stod(need("split_train"));
    m.split_val = std::stod(need("split_val"));
    m.split_test = std::stod(need("split_test"));
    m.age_min = std::stoi(need("age_min"));
    m.age_max = std::stoi(need("age_max"));
    return m;
}

}  // namespace

std::vector<unsigned char> serialize_dataset(const Dataset& ds) {
    const int window_len = ds.windows.empty() ? 0 : static_cast<int>(ds.windows[0].resp_flow.size());
    ByteWriter w;
    w.put_string("VNTD");
    w.put<std::uint16_t>(kDatasetFormatVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.windows.size()));
    w.put<float>(static_cast<float>(ds.manifest.fs_hz));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(window_len));
    w.put<std::uint16_t>(2);  // resp_flow, heart_series

    for (const auto& win : ds.windows) {
        if (win.resp_flow.size() != static_cast<std::size_t>(window_len) ||
            win.heart_series.size() != static_cast<std::size_t>(window_len))
            throw ContractError("dataset export: inconsistent window length");
        w.put<std::uint32_t>(win.subject_id);
        w.put<std::uint32_t>(win.window_id);
        w.put<std::uint8_t>(win.artifact_level);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(win.sex));
        w.put<std::uint16_t>(win.age);
        w.put<float>(win.mv_true);
        w.put_bytes(win.resp_flow.data(), win.resp_flow.size() * sizeof(float));
        w.put_bytes(win.heart_series.data(), win.heart_series.size() * sizeof(float));
    }
    std::uint32_t crc = Crc32::of(w.bytes().data(), w.size());
    w.put<std::uint32_t>(crc);
    return w.bytes();
}

void export_dataset(const Dataset& ds, const std::string& path) {
    auto bytes = serialize_dataset(ds);
    write_file_atomic(path, bytes.data(), bytes.size());
    write_file_atomic(path + ".manifest", manifest_sidecar_text(ds));
}

std::vector<SignalWindow> read_dataset_windows(const std::string& path, double* fs_hz_out,
                                               int* window_len_out) {
    std::string blob = read_file(path);
    constexpr std::size_t header_size = 4 + 2 + 4 + 4 + 4 + 2;
    if (blob.size() < header_size + 4)
        throw DataFormatError(DataFormatError::Kind::truncated,
                              path + ": file too small for a dataset header",
                              static_cast<long>(blob.size()));

    ByteReader r(blob.data(), blob.size() - 4);
    if (r.get_string(4) != "VNTD")
        throw DataFormatError(DataFormatError::Kind::bad_magic, path + ": bad magic, not a dataset file");
    std::uint16_t version = r.get<std::uint16_t>();
    if (version != kDatasetFormatVersion)
        throw DataFormatError(DataFormatError::Kind::bad_version,
                              path + ": unsupported dataset format version " + std::to_string(version));

    std::uint32_t n_windows = r.get<std::uint32_t>();
    float fs_hz = r.get<float>();
    std::uint32_t window_len = r.get<std::uint32_t>();
    std::uint16_t n_channels = r.get<std::uint16_t>();
    if (n_channels != 2)
        throw DataFormatError(DataFormatError::Kind::malformed,
                              path + ": expected 2 channels, got " + std::to_string(n_channels));

    // Structural size check before the CRC so a truncated file is reported as
    // truncation at its byte offset, not as a checksum failure.
    const std::size_t record_size = 4 + 4 + 1 + 1 + 2 + 4 +
                                    static_cast<std::size_t>(n_channels) * window_len * sizeof(float);
    const std::size_t expected = header_size + static_cast<std::size_t>(n_windows) * record_size + 4;
    if (blob.size() < expected)
        throw DataFormatError(DataFormatError::Kind::truncated,
                              path + ": truncated at byte " + std::to_string(blob.size()) +
                                  " (expected " + std::to_string(expected) + " bytes)",
                              static_cast<long>(blob.size()));
    if (blob.size() > expected)
        throw DataFormatError(DataFormatError::Kind::malformed,
                              path + ": " + std::to_string(blob.size() - expected) +
                                  " unexpected trailing bytes");

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, blob.data() + blob.size() - 4, 4);
    std::uint32_t actual_crc = Crc32::of(blob.data(), blob.size() - 4);
    if (stored_crc != actual_crc)
        throw DataFormatError(DataFormatError::Kind::crc_mismatch,
                              path + ": CRC mismatch (stored " + std::to_string(stored_crc) +
                                  ", computed " + std::to_string(actual_crc) + ")");

    std::vector<SignalWindow> windows;
    windows.reserve(n_windows);
    for (std::uint32_t i = 0; i < n_windows; ++i) {
        SignalWindow win;
        win.subject_id = r.get<std::uint32_t>();
        win.window_id = r.get<std::uint32_t>();
        win.artifact_level = r.get<std::uint8_t>();
        win.sex = static_cast<Sex>(r.get<std::uint8_t>());
        win.age = r.get<std::uint16_t>();
        win.mv_true = r.get<float>();
        win.resp_flow.resize(window_len);
        win.heart_series.resize(window_len);
        r.get_bytes(win.resp_flow.data(), window_len * sizeof(float));
        r.get_bytes(win.heart_series.data(), window_len * sizeof(float));
        windows.push_back(std::move(win));
    }
    if (fs_hz_out) *fs_hz_out = fs_hz;
    if (window_len_out) *window_len_out = static_cast<int>(window_len);
    return windows;
}

Dataset import_dataset(const std::string& path) {
    Dataset ds;
    double fs = 0.0;
    int window_len = 0;
    ds.windows = read_dataset_windows(path, &fs, &window_len);
    ds.manifest = manifest_from_sidecar(path + ".manifest");
    if (std::abs(ds.manifest.fs_hz - fs) > 1e-4)
        throw DataFormatError(DataFormatError::Kind::malformed,
                              path + ": sidecar fs_hz disagrees with file header");
    assign_splits(ds.manifest, ds.train_subjects, ds.val_subjects, ds.test_subjects);
    return ds;
}

}  // namespace vent
