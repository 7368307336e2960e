#ifndef VENT_TENSOR_HPP
#define VENT_TENSOR_HPP

#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vent/errors.hpp"
#include "vent/rng.hpp"

namespace vent {

// Dense n-d array. f32 for training, f64 for verification runs; the scalar
// type is a template parameter throughout the engine.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty unless requires_grad
    bool requires_grad = false;

    Tensor() = default;

    explicit Tensor(std::vector<int> s, bool rg = false) : shape(std::move(s)), requires_grad(rg) {
        data.assign(numel(), T(0));
        if (requires_grad) grad.assign(numel(), T(0));
    }

    Tensor(std::vector<int> s, std::vector<T> values, bool rg = false)
        : shape(std::move(s)), data(std::move(values)), requires_grad(rg) {
        if (static_cast<std::size_t>(numel()) != data.size())
            throw ContractError("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_string());
        if (requires_grad) grad.assign(numel(), T(0));
    }

    long numel() const {
        long n = 1;
        for (int d : shape) n *= d;
        return n;
    }

    int dim(std::size_t i) const { return shape.at(i); }
    int rank() const { return static_cast<int>(shape.size()); }

    void set_requires_grad(bool rg) {
        requires_grad = rg;
        grad.assign(rg ? numel() : 0, T(0));
    }

    void zero_grad() {
        if (requires_grad) grad.assign(numel(), T(0));
    }

    void fill_uniform(Rng& rng, double lo, double hi) {
        for (auto& v : data) v = static_cast<T>(rng.uniform(lo, hi));
    }

    std::string shape_string() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.reserve(data.size());
        for (T v : data) out.data.push_back(static_cast<U>(v));
        out.set_requires_grad(requires_grad);
        return out;
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

template <typename T>
inline void require_shape(const Tensor<T>& t, const std::vector<int>& s, const char* what) {
    if (t.shape != s) {
        Tensor<T> want(s);
        throw ContractError(std::string(what) + ": expected shape " + want.shape_string() +
                            ", got " + t.shape_string());
    }
}

}  // namespace vent

#endif
