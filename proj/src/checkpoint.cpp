#include "vent/checkpoint.hpp"

#include <cstring>
#include <map>
#include <sstream>

#include "vent/bytes.hpp"
#include "vent/crc32.hpp"
#include "vent/kv.hpp"

namespace vent {

namespace {

void put_tensor(ByteWriter& w, const std::string& name, const std::vector<int>& shape,
                const float* data, long numel) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_string(name);
    w.put<std::uint8_t>(0);  // dtype f32
    w.put<std::uint8_t>(static_cast<std::uint8_t>(shape.size()));
    for (int d : shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.put_bytes(data, static_cast<std::size_t>(numel) * sizeof(float));
}

struct RawTensor {
    std::vector<int> shape;
    std::vector<float> data;
};

std::map<std::string, RawTensor> read_tensors(ByteReader& r, std::uint32_t count,
                                              const std::string& path) {
    std::map<std::string, RawTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t name_len = r.get<std::uint16_t>();
        std::string name = r.get_string(name_len);
        std::uint8_t dtype = r.get<std::uint8_t>();
        if (dtype != 0)
            throw DataFormatError(DataFormatError::Kind::malformed,
                                  path + ": unsupported dtype " + std::to_string(dtype) +
                                      " for tensor '" + name + "'");
        std::uint8_t rank = r.get<std::uint8_t>();
        RawTensor t;
        long numel = 1;
        for (int d = 0; d < rank; ++d) {
            int dim = static_cast<int>(r.get<std::uint32_t>());
            t.shape.push_back(dim);
            numel *= dim;
        }
        t.data.resize(numel);
        r.get_bytes(t.data.data(), static_cast<std::size_t>(numel) * sizeof(float));
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

}  // namespace

std::vector<unsigned char> serialize_checkpoint(const NetworkGraph<float>& g,
                                                const OptimizerState* opt, int epoch,
                                                const std::vector<EpochStats>& history) {
    ByteWriter w;
    w.put_string("VNTC");
    w.put<std::uint16_t>(kCheckpointFormatVersion);
    std::string arch = graph_spec_to_text(g.spec);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(arch.size()));
    w.put_string(arch);

    std::uint32_t count = 0;
    for (const auto& [id, wt] : g.weights) count += 2;  // w + b
    count += static_cast<std::uint32_t>(g.masks.size());
    count += static_cast<std::uint32_t>(2 * g.skip_kernels.size());
    std::size_t n_params = 0;
    {
        // number of entries collect_params would yield; must match opt state
        n_params = 2 * g.weights.size() + g.skip_kernels.size();
    }
    if (opt) count += static_cast<std::uint32_t>(2 * n_params);
    count += 2;  // meta + history
    w.put<std::uint32_t>(count);

    for (const auto& [id, wt] : g.weights) {
        put_tensor(w, "layer" + std::to_string(id) + ".w", wt.shape, wt.data.data(), wt.numel());
        const Tensor<float>& b = g.biases.at(id);
        put_tensor(w, "layer" + std::to_string(id) + ".b", b.shape, b.data.data(), b.numel());
    }
    for (const auto& [id, m] : g.masks)
        put_tensor(w, "layer" + std::to_string(id) + ".mask", m.shape, m.data.data(), m.numel());
    for (std::size_t j = 0; j < g.skip_kernels.size(); ++j) {
        put_tensor(w, "skip" + std::to_string(j) + ".k", g.skip_kernels[j].shape,
                   g.skip_kernels[j].data.data(), g.skip_kernels[j].numel());
        put_tensor(w, "skip" + std::to_string(j) + ".mask", g.skip_masks[j].shape,
                   g.skip_masks[j].data.data(), g.skip_masks[j].numel());
    }
    if (opt) {
        if (opt->m.size() != n_params || opt->v.size() != n_params)
            throw ContractError("checkpoint: optimizer state does not match parameter count");
        for (std::size_t k = 0; k < n_params; ++k) {
            put_tensor(w, "opt.m" + std::to_string(k),
                       {static_cast<int>(opt->m[k].size())}, opt->m[k].data(),
                       static_cast<long>(opt->m[k].size()));
            put_tensor(w, "opt.v" + std::to_string(k),
                       {static_cast<int>(opt->v[k].size())}, opt->v[k].data(),
                       static_cast<long>(opt->v[k].size()));
        }
    }
    {
        float meta[3] = {static_cast<float>(epoch),
                         static_cast<float>(opt ? opt->step : 0),
                         opt ? 1.0f : 0.0f};
        put_tensor(w, "meta", {3}, meta, 3);
    }
    {
        std::vector<float> h;
        h.reserve(history.size() * 4);
        for (const auto& e : history) {
            h.push_back(static_cast<float>(e.epoch));
            h.push_back(static_cast<float>(e.train_rmse));
            h.push_back(static_cast<float>(e.val_rmse));
            h.push_back(static_cast<float>(e.wall_seconds));
        }
        put_tensor(w, "history", {static_cast<int>(history.size()), 4}, h.data(),
                   static_cast<long>(h.size()));
    }

    std::uint32_t crc = Crc32::of(w.bytes().data(), w.size());
    w.put<std::uint32_t>(crc);
    return w.bytes();
}

void save_checkpoint(const NetworkGraph<float>& g, const OptimizerState* opt, int epoch,
                     const std::vector<EpochStats>& history, const std::string& path) {
    auto bytes = serialize_checkpoint(g, opt, epoch, history);
    write_file_atomic(path, bytes.data(), bytes.size());
}

Checkpoint load_checkpoint(const std::string& path, bool eval_only) {
    std::string blob = read_file(path);
    if (blob.size() < 4 + 2 + 4 + 4 + 4)
        throw DataFormatError(DataFormatError::Kind::truncated,
                              path + ": file too small for a checkpoint header",
                              static_cast<long>(blob.size()));

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, blob.data() + blob.size() - 4, 4);
    std::uint32_t actual_crc = Crc32::of(blob.data(), blob.size() - 4);

    ByteReader r(blob.data(), blob.size() - 4);
    if (r.get_string(4) != "VNTC")
        throw DataFormatError(DataFormatError::Kind::bad_magic,
                              path + ": bad magic, not a checkpoint file");
    std::uint16_t version = r.get<std::uint16_t>();
    if (version != kCheckpointFormatVersion)
        throw DataFormatError(DataFormatError::Kind::bad_version,
                              path + ": unsupported checkpoint version " + std::to_string(version));
    if (stored_crc != actual_crc)
        throw DataFormatError(DataFormatError::Kind::crc_mismatch,
                              path + ": CRC mismatch (stored " + std::to_string(stored_crc) +
                                  ", computed " + std::to_string(actual_crc) + ")");

    std::uint32_t arch_len = r.get<std::uint32_t>();
    std::string arch = r.get_string(arch_len);
    std::uint32_t count = r.get<std::uint32_t>();
    auto tensors = read_tensors(r, count, path);

    Checkpoint ck;
    ck.graph = allocate_graph<float>(parse_graph_spec(arch));

    auto take = [&](const std::string& name) -> RawTensor* {
        auto it = tensors.find(name);
        return it == tensors.end() ? nullptr : &it->second;
    };
    auto require_fill = [&](const std::string& name, Tensor<float>& dst) {
        RawTensor* t = take(name);
        if (!t)
            throw DataFormatError(DataFormatError::Kind::malformed,
                                  path + ": missing tensor '" + name + "'");
        if (t->shape != dst.shape)
            throw DataFormatError(DataFormatError::Kind::malformed,
                                  path + ": tensor '" + name + "' has wrong shape");
        dst.data = t->data;
    };

    for (auto& [id, wt] : ck.graph.weights) {
        require_fill("layer" + std::to_string(id) + ".w", wt);
        require_fill("layer" + std::to_string(id) + ".b", ck.graph.biases.at(id));
        if (RawTensor* m = take("layer" + std::to_string(id) + ".mask")) {
            Tensor<float> mask(m->shape, m->data);
            ck.graph.masks.emplace(id, std::move(mask));
        }
    }
    for (std::size_t j = 0; j < ck.graph.skip_kernels.size(); ++j) {
        require_fill("skip" + std::to_string(j) + ".k", ck.graph.skip_kernels[j]);
        require_fill("skip" + std::to_string(j) + ".mask", ck.graph.skip_masks[j]);
    }

    RawTensor* meta = take("meta");
    bool stored_opt = false;
    long opt_step = 0;
    if (meta && meta->data.size() == 3) {
        ck.epoch = static_cast<int>(meta->data[0]);
        opt_step = static_cast<long>(meta->data[1]);
        stored_opt = meta->data[2] != 0.0f;
    }
    if (RawTensor* h = take("history")) {
        for (std::size_t i = 0; i + 3 < h->data.size(); i += 4)
            ck.history.push_back({static_cast<int>(h->data[i]), h->data[i + 1], h->data[i + 2],
                                  h->data[i + 3]});
    }
    if (stored_opt && !eval_only) {
        std::size_t n_params = 2 * ck.graph.weights.size() + ck.graph.skip_kernels.size();
        for (std::size_t k = 0; k < n_params; ++k) {
            RawTensor* m = take("opt.m" + std::to_string(k));
            RawTensor* v = take("opt.v" + std::to_string(k));
            if (!m || !v)
                throw DataFormatError(DataFormatError::Kind::malformed,
                                      path + ": incomplete optimizer state");
            ck.opt.m.push_back(m->data);
            ck.opt.v.push_back(v->data);
        }
        ck.opt.step = opt_step;
        ck.has_opt = true;
    }
    return ck;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::ostringstream os;
    os << "epoch,train_rmse,val_rmse,wall_seconds\n";
    for (const auto& e : history)
        os << e.epoch << "," << e.train_rmse << "," << e.val_rmse << "," << e.wall_seconds << "\n";
    return os.str();
}

}  // namespace vent
