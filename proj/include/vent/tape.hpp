#ifndef VENT_TAPE_HPP
#define VENT_TAPE_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vent/kernels.hpp"
#include "vent/tensor.hpp"

namespace vent {

// Reverse-mode tape. Nodes are appended in execution order, which is already
// a topological order; backward() walks it once in reverse. Forward passes
// never mutate their inputs. Calling backward() twice without zeroing leaf
// grads accumulates, by contract.
template <typename T>
class Tape {
public:
    struct Ref {
        int idx = -1;
    };

    // Trainable or external tensor; gradients accumulate into external->grad.
    Ref leaf(Tensor<T>* external) {
        Node n;
        n.external = external;
        n.needs_grad = external->requires_grad;
        return push(std::move(n));
    }

    // Constant input owned by the tape (batches, targets, masks).
    Ref input(Tensor<T> value) {
        Node n;
        n.value = std::move(value);
        n.needs_grad = false;
        return push(std::move(n));
    }

    const Tensor<T>& value(Ref r) const { return val(r.idx); }

    Ref conv1d(Ref x, Ref w, Ref b, int stride, int padding) {
        const Tensor<T>& xv = val(x.idx);
        const Tensor<T>& wv = val(w.idx);
        const Tensor<T>& bv = val(b.idx);
        if (xv.rank() != 3 || wv.rank() != 3)
            throw ContractError("conv1d: expected input rank 3 and weight rank 3, got " +
                                xv.shape_string() + " and " + wv.shape_string());
        const int n_batch = xv.dim(0), c_in = xv.dim(1), len = xv.dim(2);
        const int c_out = wv.dim(0), k = wv.dim(2);
        if (wv.dim(1) != c_in)
            throw ContractError("conv1d: weight in-channels " + std::to_string(wv.dim(1)) +
                                " != input channels " + std::to_string(c_in));
        if (bv.shape != std::vector<int>{c_out})
            throw ContractError("conv1d: bias shape " + bv.shape_string() + " != [" +
                                std::to_string(c_out) + "]");
        if (stride < 1 || len + 2 * padding < k)
            throw ContractError("conv1d: invalid stride/padding for L=" + std::to_string(len) +
                                " K=" + std::to_string(k));
        const int l_out = kernels::conv1d_out_len(len, k, stride, padding);

        Node n;
        n.value = Tensor<T>({n_batch, c_out, l_out});
        kernels::conv1d_forward(xv.data.data(), wv.data.data(), bv.data.data(),
                                n.value.data.data(), n_batch, c_in, len, c_out, k, stride, padding);
        n.needs_grad = needs(x) || needs(w) || needs(b);
        int xi = x.idx, wi = w.idx, bi = b.idx;
        n.backward = [this, xi, wi, bi, n_batch, c_in, len, c_out, k, stride, padding](Node& self) {
            kernels::conv1d_backward(
                val(xi).data.data(), val(wi).data.data(), self.grad.data(),
                grad_ptr(xi), grad_ptr(wi), grad_ptr(bi),
                n_batch, c_in, len, c_out, k, stride, padding);
        };
        return push(std::move(n));
    }

    Ref dense(Ref x, Ref w, Ref b) {
        const Tensor<T>& xv = val(x.idx);
        const Tensor<T>& wv = val(w.idx);
        const Tensor<T>& bv = val(b.idx);
        if (xv.rank() != 2 || wv.rank() != 2)
            throw ContractError("dense: expected input rank 2 and weight rank 2, got " +
                                xv.shape_string() + " and " + wv.shape_string());
        const int n_batch = xv.dim(0), in = xv.dim(1), out = wv.dim(0);
        if (wv.dim(1) != in)
            throw ContractError("dense: weight fan-in " + std::to_string(wv.dim(1)) +
                                " != input width " + std::to_string(in));
        if (bv.shape != std::vector<int>{out})
            throw ContractError("dense: bias shape " + bv.shape_string() + " != [" +
                                std::to_string(out) + "]");

        Node n;
        n.value = Tensor<T>({n_batch, out});
        kernels::dense_forward(xv.data.data(), wv.data.data(), bv.data.data(),
                               n.value.data.data(), n_batch, in, out);
        n.needs_grad = needs(x) || needs(w) || needs(b);
        int xi = x.idx, wi = w.idx, bi = b.idx;
        n.backward = [this, xi, wi, bi, n_batch, in, out](Node& self) {
            kernels::dense_backward(val(xi).data.data(), val(wi).data.data(), self.grad.data(),
                                    grad_ptr(xi), grad_ptr(wi), grad_ptr(bi), n_batch, in, out);
        };
        return push(std::move(n));
    }

    Ref relu(Ref x) {
        const Tensor<T>& xv = val(x.idx);
        Node n;
        n.value = Tensor<T>(xv.shape);
        for (long i = 0; i < xv.numel(); ++i) n.value.data[i] = xv.data[i] > T(0) ? xv.data[i] : T(0);
        n.needs_grad = needs(x);
        int xi = x.idx;
        n.backward = [this, xi](Node& self) {
            T* dx = grad_ptr(xi);
            if (!dx) return;
            const Tensor<T>& xv2 = val(xi);
            for (long i = 0; i < xv2.numel(); ++i)
                if (xv2.data[i] > T(0)) dx[i] += self.grad[i];
        };
        return push(std::move(n));
    }

    Ref maxpool1d(Ref x, int k, int stride) {
        const Tensor<T>& xv = val(x.idx);
        if (xv.rank() != 3) throw ContractError("maxpool1d: expected rank 3, got " + xv.shape_string());
        if (k < 1 || stride < 1 || xv.dim(2) < k)
            throw ContractError("maxpool1d: invalid window k=" + std::to_string(k) + " for L=" +
                                std::to_string(xv.dim(2)));
        const int n_batch = xv.dim(0), c = xv.dim(1), len = xv.dim(2);
        const int l_out = (len - k) / stride + 1;

        Node n;
        n.value = Tensor<T>({n_batch, c, l_out});
        auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(n_batch) * c * l_out);
        for (int nn = 0; nn < n_batch; ++nn)
            for (int cc = 0; cc < c; ++cc) {
                const T* xp = xv.data.data() + (static_cast<long>(nn) * c + cc) * len;
                long base = (static_cast<long>(nn) * c + cc) * l_out;
                for (int lo = 0; lo < l_out; ++lo) {
                    int best = lo * stride;
                    for (int kk = 1; kk < k; ++kk)
                        if (xp[lo * stride + kk] > xp[best]) best = lo * stride + kk;
                    n.value.data[base + lo] = xp[best];
                    (*argmax)[base + lo] = best;
                }
            }
        n.needs_grad = needs(x);
        int xi = x.idx;
        n.backward = [this, xi, argmax, n_batch, c, len, l_out](Node& self) {
            T* dx = grad_ptr(xi);
            if (!dx) return;
            for (long nc = 0; nc < static_cast<long>(n_batch) * c; ++nc)
                for (int lo = 0; lo < l_out; ++lo)
                    dx[nc * len + (*argmax)[nc * l_out + lo]] += self.grad[nc * l_out + lo];
        };
        return push(std::move(n));
    }

    Ref flatten(Ref x) {
        const Tensor<T>& xv = val(x.idx);
        if (xv.rank() < 2) throw ContractError("flatten: expected rank >= 2, got " + xv.shape_string());
        const int n_batch = xv.dim(0);
        const int width = static_cast<int>(xv.numel() / n_batch);
        Node n;
        n.value = Tensor<T>({n_batch, width}, xv.data);
        n.needs_grad = needs(x);
        int xi = x.idx;
        n.backward = [this, xi](Node& self) {
            T* dx = grad_ptr(xi);
            if (!dx) return;
            for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i];
        };
        return push(std::move(n));
    }

    Ref add(Ref a, Ref b) {
        const Tensor<T>& av = val(a.idx);
        const Tensor<T>& bv = val(b.idx);
        if (av.shape != bv.shape)
            throw ContractError("add: shape mismatch " + av.shape_string() + " vs " + bv.shape_string());
        Node n;
        n.value = Tensor<T>(av.shape);
        for (long i = 0; i < av.numel(); ++i) n.value.data[i] = av.data[i] + bv.data[i];
        n.needs_grad = needs(a) || needs(b);
        int ai = a.idx, bi = b.idx;
        n.backward = [this, ai, bi](Node& self) {
            for (int src : {ai, bi}) {
                T* d = grad_ptr(src);
                if (!d) continue;
                for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += self.grad[i];
            }
        };
        return push(std::move(n));
    }

    Ref mul(Ref a, Ref b) {
        const Tensor<T>& av = val(a.idx);
        const Tensor<T>& bv = val(b.idx);
        if (av.shape != bv.shape)
            throw ContractError("mul: shape mismatch " + av.shape_string() + " vs " + bv.shape_string());
        Node n;
        n.value = Tensor<T>(av.shape);
        for (long i = 0; i < av.numel(); ++i) n.value.data[i] = av.data[i] * bv.data[i];
        n.needs_grad = needs(a) || needs(b);
        int ai = a.idx, bi = b.idx;
        n.backward = [this, ai, bi](Node& self) {
            if (T* da = grad_ptr(ai)) {
                const Tensor<T>& bb = val(bi);
                for (std::size_t i = 0; i < self.grad.size(); ++i) da[i] += self.grad[i] * bb.data[i];
            }
            if (T* db = grad_ptr(bi)) {
                const Tensor<T>& aa = val(ai);
                for (std::size_t i = 0; i < self.grad.size(); ++i) db[i] += self.grad[i] * aa.data[i];
            }
        };
        return push(std::move(n));
    }

    // 1x1 channel projection with strided subsampling; the skip-edge merge
    // primitive. Takes the first l_out strided samples of x.
    Ref skip_project(Ref x, Ref w, int stride, int l_out) {
        const Tensor<T>& xv = val(x.idx);
        const Tensor<T>& wv = val(w.idx);
        if (xv.rank() != 3 || wv.rank() != 2)
            throw ContractError("skip_project: expected input rank 3 and kernel rank 2, got " +
                                xv.shape_string() + " and " + wv.shape_string());
        const int n_batch = xv.dim(0), c_in = xv.dim(1), len = xv.dim(2);
        const int c_out = wv.dim(0);
        if (wv.dim(1) != c_in)
            throw ContractError("skip_project: kernel fan-in " + std::to_string(wv.dim(1)) +
                                " != source channels " + std::to_string(c_in));
        if (stride < 1 || l_out < 1 || static_cast<long>(l_out - 1) * stride >= len)
            throw ContractError("skip_project: l_out=" + std::to_string(l_out) + " stride=" +
                                std::to_string(stride) + " exceeds source length " + std::to_string(len));
        Node n;
        n.value = Tensor<T>({n_batch, c_out, l_out});
        for (int nn = 0; nn < n_batch; ++nn)
            for (int co = 0; co < c_out; ++co)
                for (int j = 0; j < l_out; ++j) {
                    T acc = T(0);
                    for (int ci = 0; ci < c_in; ++ci)
                        acc += wv.data[static_cast<long>(co) * c_in + ci] *
                               xv.data[(static_cast<long>(nn) * c_in + ci) * len + j * stride];
                    n.value.data[(static_cast<long>(nn) * c_out + co) * l_out + j] = acc;
                }
        n.needs_grad = needs(x) || needs(w);
        int xi = x.idx, wi = w.idx;
        n.backward = [this, xi, wi, n_batch, c_in, len, c_out, stride, l_out](Node& self) {
            const Tensor<T>& xv2 = val(xi);
            const Tensor<T>& wv2 = val(wi);
            if (T* dx = grad_ptr(xi)) {
                for (int nn = 0; nn < n_batch; ++nn)
                    for (int ci = 0; ci < c_in; ++ci)
                        for (int j = 0; j < l_out; ++j) {
                            T acc = T(0);
                            for (int co = 0; co < c_out; ++co)
                                acc += wv2.data[static_cast<long>(co) * c_in + ci] *
                                       self.grad[(static_cast<long>(nn) * c_out + co) * l_out + j];
                            dx[(static_cast<long>(nn) * c_in + ci) * len + j * stride] += acc;
                        }
            }
            if (T* dw = grad_ptr(wi)) {
                for (int co = 0; co < c_out; ++co)
                    for (int ci = 0; ci < c_in; ++ci) {
                        T acc = T(0);
                        for (int nn = 0; nn < n_batch; ++nn)
                            for (int j = 0; j < l_out; ++j)
                                acc += self.grad[(static_cast<long>(nn) * c_out + co) * l_out + j] *
                                       xv2.data[(static_cast<long>(nn) * c_in + ci) * len + j * stride];
                        dw[static_cast<long>(co) * c_in + ci] += acc;
                    }
            }
        };
        return push(std::move(n));
    }

    Ref mse(Ref pred, Ref target) {
        const Tensor<T>& pv = val(pred.idx);
        const Tensor<T>& tv = val(target.idx);
        if (pv.shape != tv.shape)
            throw ContractError("mse: shape mismatch " + pv.shape_string() + " vs " + tv.shape_string());
        Node n;
        n.value = Tensor<T>({1});
        T acc = T(0);
        for (long i = 0; i < pv.numel(); ++i) {
            T d = pv.data[i] - tv.data[i];
            acc += d * d;
        }
        n.value.data[0] = acc / static_cast<T>(pv.numel());
        n.needs_grad = needs(pred) || needs(target);
        int pi = pred.idx, ti = target.idx;
        long count = pv.numel();
        n.backward = [this, pi, ti, count](Node& self) {
            const Tensor<T>& pv2 = val(pi);
            const Tensor<T>& tv2 = val(ti);
            T scale = self.grad[0] * T(2) / static_cast<T>(count);
            if (T* dp = grad_ptr(pi))
                for (long i = 0; i < count; ++i) dp[i] += scale * (pv2.data[i] - tv2.data[i]);
            if (T* dt = grad_ptr(ti))
                for (long i = 0; i < count; ++i) dt[i] -= scale * (pv2.data[i] - tv2.data[i]);
        };
        return push(std::move(n));
    }

    Ref sum(Ref x) {
        const Tensor<T>& xv = val(x.idx);
        Node n;
        n.value = Tensor<T>({1});
        T acc = T(0);
        for (T v : xv.data) acc += v;
        n.value.data[0] = acc;
        n.needs_grad = needs(x);
        int xi = x.idx;
        n.backward = [this, xi](Node& self) {
            if (T* dx = grad_ptr(xi)) {
                const Tensor<T>& xv2 = val(xi);
                for (long i = 0; i < xv2.numel(); ++i) dx[i] += self.grad[0];
            }
        };
        return push(std::move(n));
    }

    void backward(Ref loss) {
        const Tensor<T>& lv = val(loss.idx);
        if (lv.numel() != 1)
            throw ContractError("backward: loss must be scalar, got " + lv.shape_string());
        for (auto& n : nodes_)
            if (n->needs_grad && !n->external) n->grad.assign(n->value.numel(), T(0));
        Node& root = *nodes_[loss.idx];
        if (root.external)
            root.external->grad[0] += T(1);
        else
            root.grad[0] = T(1);
        for (int i = loss.idx; i >= 0; --i) {
            Node& n = *nodes_[i];
            if (n.needs_grad && n.backward) n.backward(n);
        }
    }

private:
    struct Node {
        Tensor<T> value;                      // owned, unless external
        Tensor<T>* external = nullptr;        // leaf parameter
        std::vector<T> grad;                  // adjoint buffer for owned nodes
        bool needs_grad = false;
        std::function<void(Node&)> backward;  // pulls self.grad into inputs
    };

    const Tensor<T>& val(int i) const { return nodes_[i]->external ? *nodes_[i]->external : nodes_[i]->value; }

    bool needs(Ref r) const { return nodes_[r.idx]->needs_grad; }

    // nullptr when the input does not require a gradient
    T* grad_ptr(int i) {
        Node& n = *nodes_[i];
        if (!n.needs_grad) return nullptr;
        if (n.external) return n.external->grad.data();
        return n.grad.data();
    }

    Ref push(Node n) {
        nodes_.push_back(std::make_unique<Node>(std::move(n)));
        return Ref{static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace vent

#endif
