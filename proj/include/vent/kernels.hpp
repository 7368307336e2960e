#ifndef VENT_KERNELS_HPP
#define VENT_KERNELS_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vent::kernels {

// Both variants accumulate each output element in the same fixed inner-loop
// order, so serial and OpenMP results are bit-identical at any thread count.
// The parallel loops split only over independent output elements.

// ---- serial reference (kept for testing and the kernel benchmark) ----
namespace serial {

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* b, T* y,
                    int n_batch, int c_in, int len, int c_out, int k, int stride, int pad) {
    const int l_out = (len + 2 * pad - k) / stride + 1;
    for (int n = 0; n < n_batch; ++n)
        for (int co = 0; co < c_out; ++co) {
            T* yp = y + (static_cast<long>(n) * c_out + co) * l_out;
            for (int lo = 0; lo < l_out; ++lo) {
                T acc = b ? b[co] : T(0);
                const int li0 = lo * stride - pad;
                for (int ci = 0; ci < c_in; ++ci) {
                    const T* xp = x + (static_cast<long>(n) * c_in + ci) * len;
                    const T* wp = w + (static_cast<long>(co) * c_in + ci) * k;
                    for (int kk = 0; kk < k; ++kk) {
                        const int li = li0 + kk;
                        if (li >= 0 && li < len) acc += wp[kk] * xp[li];
                    }
                }
                yp[lo] = acc;
            }
        }
}

// dx, dw, db accumulate (+=); pass nullptr to skip a gradient.
template <typename T>
void conv1d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db,
                     int n_batch, int c_in, int len, int c_out, int k, int stride, int pad) {
    const int l_out = (len + 2 * pad - k) / stride + 1;
    if (dx)
        for (int n = 0; n < n_batch; ++n)
            for (int ci = 0; ci < c_in; ++ci) {
                T* dxp = dx + (static_cast<long>(n) * c_in + ci) * len;
                for (int li = 0; li < len; ++li) {
                    T acc = T(0);
                    for (int co = 0; co < c_out; ++co) {
                        const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                        const T* wp = w + (static_cast<long>(co) * c_in + ci) * k;
                        for (int kk = 0; kk < k; ++kk) {
                            const int num = li + pad - kk;
                            if (num >= 0 && num % stride == 0) {
                                const int lo = num / stride;
                                if (lo < l_out) acc += wp[kk] * dyp[lo];
                            }
                        }
                    }
                    dxp[li] += acc;
                }
            }
    if (dw)
        for (int co = 0; co < c_out; ++co)
            for (int ci = 0; ci < c_in; ++ci)
                for (int kk = 0; kk < k; ++kk) {
                    T acc = T(0);
                    for (int n = 0; n < n_batch; ++n) {
                        const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                        const T* xp = x + (static_cast<long>(n) * c_in + ci) * len;
                        for (int lo = 0; lo < l_out; ++lo) {
                            const int li = lo * stride - pad + kk;
                            if (li >= 0 && li < len) acc += dyp[lo] * xp[li];
                        }
                    }
                    dw[(static_cast<long>(co) * c_in + ci) * k + kk] += acc;
                }
    if (db)
        for (int co = 0; co < c_out; ++co) {
            T acc = T(0);
            for (int n = 0; n < n_batch; ++n) {
                const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                for (int lo = 0; lo < l_out; ++lo) acc += dyp[lo];
            }
            db[co] += acc;
        }
}

template <typename T>
void dense_forward(const T* x, const T* w, const T* b, T* y, int n_batch, int in, int out) {
    for (int n = 0; n < n_batch; ++n)
        for (int o = 0; o < out; ++o) {
            T acc = b ? b[o] : T(0);
            const T* xp = x + static_cast<long>(n) * in;
            const T* wp = w + static_cast<long>(o) * in;
            for (int i = 0; i < in; ++i) acc += wp[i] * xp[i];
            y[static_cast<long>(n) * out + o] = acc;
        }
}

template <typename T>
void dense_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db,
                    int n_batch, int in, int out) {
    if (dx)
        for (int n = 0; n < n_batch; ++n)
            for (int i = 0; i < in; ++i) {
                T acc = T(0);
                for (int o = 0; o < out; ++o)
                    acc += dy[static_cast<long>(n) * out + o] * w[static_cast<long>(o) * in + i];
                dx[static_cast<long>(n) * in + i] += acc;
            }
    if (dw)
        for (int o = 0; o < out; ++o)
            for (int i = 0; i < in; ++i) {
                T acc = T(0);
                for (int n = 0; n < n_batch; ++n)
                    acc += dy[static_cast<long>(n) * out + o] * x[static_cast<long>(n) * in + i];
                dw[static_cast<long>(o) * in + i] += acc;
            }
    if (db)
        for (int o = 0; o < out; ++o) {
            T acc = T(0);
            for (int n = 0; n < n_batch; ++n) acc += dy[static_cast<long>(n) * out + o];
            db[o] += acc;
        }
}

}  // namespace serial

// ---- OpenMP variants ----
namespace par {

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* b, T* y,
                    int n_batch, int c_in, int len, int c_out, int k, int stride, int pad) {
    const int l_out = (len + 2 * pad - k) / stride + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < n_batch; ++n)
        for (int co = 0; co < c_out; ++co) {
            T* yp = y + (static_cast<long>(n) * c_out + co) * l_out;
            for (int lo = 0; lo < l_out; ++lo) {
                T acc = b ? b[co] : T(0);
                const int li0 = lo * stride - pad;
                for (int ci = 0; ci < c_in; ++ci) {
                    const T* xp = x + (static_cast<long>(n) * c_in + ci) * len;
                    const T* wp = w + (static_cast<long>(co) * c_in + ci) * k;
                    for (int kk = 0; kk < k; ++kk) {
                        const int li = li0 + kk;
                        if (li >= 0 && li < len) acc += wp[kk] * xp[li];
                    }
                }
                yp[lo] = acc;
            }
        }
}

template <typename T>
void conv1d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db,
                     int n_batch, int c_in, int len, int c_out, int k, int stride, int pad) {
    const int l_out = (len + 2 * pad - k) / stride + 1;
    if (dx) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int n = 0; n < n_batch; ++n)
            for (int ci = 0; ci < c_in; ++ci) {
                T* dxp = dx + (static_cast<long>(n) * c_in + ci) * len;
                for (int li = 0; li < len; ++li) {
                    T acc = T(0);
                    for (int co = 0; co < c_out; ++co) {
                        const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                        const T* wp = w + (static_cast<long>(co) * c_in + ci) * k;
                        for (int kk = 0; kk < k; ++kk) {
                            const int num = li + pad - kk;
                            if (num >= 0 && num % stride == 0) {
                                const int lo = num / stride;
                                if (lo < l_out) acc += wp[kk] * dyp[lo];
                            }
                        }
                    }
                    dxp[li] += acc;
                }
            }
    }
    if (dw) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int co = 0; co < c_out; ++co)
            for (int ci = 0; ci < c_in; ++ci)
                for (int kk = 0; kk < k; ++kk) {
                    T acc = T(0);
                    for (int n = 0; n < n_batch; ++n) {
                        const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                        const T* xp = x + (static_cast<long>(n) * c_in + ci) * len;
                        for (int lo = 0; lo < l_out; ++lo) {
                            const int li = lo * stride - pad + kk;
                            if (li >= 0 && li < len) acc += dyp[lo] * xp[li];
                        }
                    }
                    dw[(static_cast<long>(co) * c_in + ci) * k + kk] += acc;
                }
    }
    if (db) {
#pragma omp parallel for schedule(static)
        for (int co = 0; co < c_out; ++co) {
            T acc = T(0);
            for (int n = 0; n < n_batch; ++n) {
                const T* dyp = dy + (static_cast<long>(n) * c_out + co) * l_out;
                for (int lo = 0; lo < l_out; ++lo) acc += dyp[lo];
            }
            db[co] += acc;
        }
    }
}

template <typename T>
void dense_forward(const T* x, const T* w, const T* b, T* y, int n_batch, int in, int out) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < n_batch; ++n)
        for (int o = 0; o < out; ++o) {
            T acc = b ? b[o] : T(0);
            const T* xp = x + static_cast<long>(n) * in;
            const T* wp = w + static_cast<long>(o) * in;
            for (int i = 0; i < in; ++i) acc += wp[i] * xp[i];
            y[static_cast<long>(n) * out + o] = acc;
        }
}

template <typename T>
void dense_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db,
                    int n_batch, int in, int out) {
    if (dx) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int n = 0; n < n_batch; ++n)
            for (int i = 0; i < in; ++i) {
                T acc = T(0);
                for (int o = 0; o < out; ++o)
                    acc += dy[static_cast<long>(n) * out + o] * w[static_cast<long>(o) * in + i];
                dx[static_cast<long>(n) * in + i] += acc;
            }
    }
    if (dw) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int o = 0; o < out; ++o)
            for (int i = 0; i < in; ++i) {
                T acc = T(0);
                for (int n = 0; n < n_batch; ++n)
                    acc += dy[static_cast<long>(n) * out + o] * x[static_cast<long>(n) * in + i];
                dw[static_cast<long>(o) * in + i] += acc;
            }
    }
    if (db) {
#pragma omp parallel for schedule(static)
        for (int o = 0; o < out; ++o) {
            T acc = T(0);
            for (int n = 0; n < n_batch; ++n) acc += dy[static_cast<long>(n) * out + o];
            db[o] += acc;
        }
    }
}

}  // namespace par

// Default entry points used by the tape.
using par::conv1d_backward;
using par::conv1d_forward;
using par::dense_backward;
using par::dense_forward;

inline int conv1d_out_len(int len, int k, int stride, int pad) {
    return (len + 2 * pad - k) / stride + 1;
}

}  // namespace vent::kernels

#endif
