#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "lemmarec/errors.hpp"
#include "lemmarec/rng.hpp"

// Dense n-dimensional tensors with reverse-mode automatic differentiation.
// Design rules:
//   * every kernel walks memory in one fixed order, so forward and backward
//     are bit-deterministic for fixed inputs (no atomics, no reordering);
//   * a node records its parents and a backward closure only while gradient
//     mode is on and some input requires a gradient;
//   * backward() runs the tape in reverse topological order and accumulates
//     into parent gradients with plain +=.

namespace lemmarec {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string format_shape(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

namespace detail {

inline thread_local bool grad_mode_enabled = true;

}  // namespace detail

// RAII guard that disables tape recording (inference / finite differences).
struct NoGradGuard {
    bool previous;
    NoGradGuard() : previous(detail::grad_mode_enabled) { detail::grad_mode_enabled = false; }
    ~NoGradGuard() { detail::grad_mode_enabled = previous; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

inline bool grad_mode() { return detail::grad_mode_enabled; }

// Integer id/index tensor (targets, token ids). No gradients.
struct IntTensor {
    Shape shape;
    std::vector<std::int32_t> data;

    IntTensor() = default;
    IntTensor(Shape s, std::vector<std::int32_t> d) : shape(std::move(s)), data(std::move(d)) {
        if (numel(shape) != data.size()) throw ShapeError("IntTensor data does not match shape " + format_shape(shape));
    }
};

template <class S>
class Tensor {
public:
    struct Node {
        Shape shape;
        std::vector<S> value;
        std::vector<S> grad;  // sized lazily during backward
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backward_fn;
    };

    Tensor() = default;

    static Tensor from(Shape shape, std::vector<S> value) {
        if (numel(shape) != value.size()) {
            throw ShapeError("value count " + std::to_string(value.size()) + " does not match shape " +
                             format_shape(shape));
        }
        Tensor t;
        t.node_ = std::make_shared<Node>();
        t.node_->shape = std::move(shape);
        t.node_->value = std::move(value);
        return t;
    }

    static Tensor zeros(Shape shape) {
        const std::size_t n = numel(shape);
        return from(std::move(shape), std::vector<S>(n, S(0)));
    }

    static Tensor full(Shape shape, S v) {
        const std::size_t n = numel(shape);
        return from(std::move(shape), std::vector<S>(n, v));
    }

    static Tensor scalar(S v) { return from({}, {v}); }

    // Leaf parameter: participates in the tape.
    static Tensor param(Shape shape, std::vector<S> value) {
        Tensor t = from(std::move(shape), std::move(value));
        t.node_->requires_grad = true;
        return t;
    }

    static Tensor randn(Shape shape, Rng& rng, double stddev) {
        const std::size_t n = numel(shape);
        std::vector<S> v(n);
        for (auto& x : v) x = static_cast<S>(rng.normal() * stddev);
        Tensor t = from(std::move(shape), std::move(v));
        t.node_->requires_grad = true;
        return t;
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t size() const { return node_->value.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }

    const std::vector<S>& value() const { return node_->value; }
    std::vector<S>& value_mut() { return node_->value; }
    const std::vector<S>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }

    void zero_grad() {
        if (node_) std::fill(node_->grad.begin(), node_->grad.end(), S(0));
    }

    // Deep copy of the value, detached from any tape.
    Tensor clone_detached() const { return from(node_->shape, node_->value); }

    S item() const {
        if (size() != 1) throw ShapeError("item() on non-scalar tensor of shape " + format_shape(shape()));
        return node_->value[0];
    }

    // Reverse-mode sweep from a scalar root.
    void backward() {
        if (size() != 1) throw ShapeError("backward() requires a scalar root, got " + format_shape(shape()));
        std::vector<Node*> order;
        std::unordered_set<Node*> seen;
        std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
        seen.insert(node_.get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                Node* parent = node->parents[next++].get();
                if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        ensure_grad(*node_);
        node_->grad[0] += S(1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if ((*it)->backward_fn) (*it)->backward_fn(**it);
        }
    }

    static void ensure_grad(Node& node) {
        if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), S(0));
    }

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

namespace detail {

template <class S>
Tensor<S> make_result(Shape shape, std::vector<S> value, std::vector<Tensor<S>> inputs,
                      std::function<void(typename Tensor<S>::Node&)> backward_fn) {
    Tensor<S> out = Tensor<S>::from(std::move(shape), std::move(value));
    if (!grad_mode_enabled) return out;
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.requires_grad();
    if (!needs) return out;
    auto node = out.node();
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward_fn = std::move(backward_fn);
    return out;
}

// ---- raw matrix kernels (row-major) ----

// C(MxN) += A(MxK) * B(KxN); i-k-j order keeps the inner loop contiguous.
template <class S>
void mm_accum(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        S* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const S apk = arow[p];
            const S* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += apk * brow[j];
        }
    }
}

// dB(KxN) += A(MxK)^T * dC(MxN)
template <class S>
void mm_accum_at(const S* a, const S* dc, S* db, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        const S* crow = dc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const S apk = arow[p];
            S* brow = db + p * n;
            for (std::size_t j = 0; j < n; ++j) brow[j] += apk * crow[j];
        }
    }
}

template <class S>
std::vector<S> transpose2d(const S* a, std::size_t rows, std::size_t cols) {
    std::vector<S> out(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
    }
    return out;
}

// Strides for broadcasting `from` into `to` (left-padded with size-1 axes);
// throws when the shapes are incompatible.
inline std::vector<std::size_t> broadcast_strides(const Shape& from, const Shape& to) {
    if (from.size() > to.size()) {
        throw ShapeError("cannot broadcast " + format_shape(from) + " into " + format_shape(to));
    }
    std::vector<std::size_t> strides(to.size(), 0);
    std::size_t stride = 1;
    // walk from the trailing axis
    for (std::size_t i = 0; i < to.size(); ++i) {
        const std::size_t to_axis = to.size() - 1 - i;
        if (i < from.size()) {
            const std::size_t from_dim = from[from.size() - 1 - i];
            if (from_dim == to[to_axis]) {
                strides[to_axis] = stride;
            } else if (from_dim == 1) {
                strides[to_axis] = 0;
            } else {
                throw ShapeError("cannot broadcast " + format_shape(from) + " into " + format_shape(to));
            }
            stride *= from_dim;
        } else {
            strides[to_axis] = 0;
        }
    }
    return strides;
}

}  // namespace detail

// ---- elementwise binary ops with numpy-style broadcasting of b into a ----

template <class S, class Fwd, class BwdA, class BwdB>
Tensor<S> binary_op(const Tensor<S>& a, const Tensor<S>& b, Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
    const Shape& out_shape = a.shape();
    const auto b_strides = detail::broadcast_strides(b.shape(), out_shape);
    const std::size_t n = a.size();

    std::vector<S> value(n);
    const auto& av = a.value();
    const auto& bv = b.value();

    const bool same_shape = a.shape() == b.shape();
    std::vector<std::size_t> b_index_of;  // per output element, only for the generic path
    if (same_shape) {
        for (std::size_t i = 0; i < n; ++i) value[i] = fwd(av[i], bv[i]);
    } else {
        b_index_of.resize(n);
        std::vector<std::size_t> idx(out_shape.size(), 0);
        std::size_t bi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            value[i] = fwd(av[i], bv[bi]);
            b_index_of[i] = bi;
            // odometer increment
            for (std::size_t d = out_shape.size(); d-- > 0;) {
                ++idx[d];
                bi += b_strides[d];
                if (idx[d] < out_shape[d]) break;
                bi -= b_strides[d] * out_shape[d];
                idx[d] = 0;
            }
        }
    }

    auto a_node = a.node();
    auto b_node = b.node();
    return detail::make_result<S>(
        out_shape, std::move(value), {a, b},
        [a_node, b_node, bwd_a, bwd_b, b_index_of = std::move(b_index_of),
         same_shape](typename Tensor<S>::Node& self) {
            const std::size_t n = self.value.size();
            if (a_node->requires_grad) {
                Tensor<S>::ensure_grad(*a_node);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t bi = same_shape ? i : b_index_of[i];
                    a_node->grad[i] += bwd_a(self.grad[i], a_node->value[i], b_node->value[bi]);
                }
            }
            if (b_node->requires_grad) {
                Tensor<S>::ensure_grad(*b_node);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t bi = same_shape ? i : b_index_of[i];
                    b_node->grad[bi] += bwd_b(self.grad[i], a_node->value[i], b_node->value[bi]);
                }
            }
        });
}

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    return binary_op(
        a, b, [](S x, S y) { return x + y; }, [](S g, S, S) { return g; }, [](S g, S, S) { return g; });
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    return binary_op(
        a, b, [](S x, S y) { return x - y; }, [](S g, S, S) { return g; }, [](S g, S, S) { return -g; });
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
    return binary_op(
        a, b, [](S x, S y) { return x * y; }, [](S g, S, S y) { return g * y; }, [](S g, S x, S) { return g * x; });
}

template <class S>
Tensor<S> mul_scalar(const Tensor<S>& a, double s) {
    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] = static_cast<S>(av[i] * s);
    auto a_node = a.node();
    return detail::make_result<S>(a.shape(), std::move(value), {a}, [a_node, s](typename Tensor<S>::Node& self) {
        Tensor<S>::ensure_grad(*a_node);
        for (std::size_t i = 0; i < self.grad.size(); ++i) a_node->grad[i] += static_cast<S>(self.grad[i] * s);
    });
}

template <class S>
Tensor<S> add_scalar(const Tensor<S>& a, double s) {
    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] = static_cast<S>(av[i] + s);
    auto a_node = a.node();
    return detail::make_result<S>(a.shape(), std::move(value), {a}, [a_node](typename Tensor<S>::Node& self) {
        Tensor<S>::ensure_grad(*a_node);
        for (std::size_t i = 0; i < self.grad.size(); ++i) a_node->grad[i] += self.grad[i];
    });
}

template <class S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) { return add(a, b); }
template <class S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) { return sub(a, b); }
template <class S>
Tensor<S> operator*(const Tensor<S>& a, const Tensor<S>& b) { return mul(a, b); }

// ---- matmul ----
//
// Supported: (M,K)x(K,N); (L...,M,K)x(K,N) with a shared right operand;
// (L...,M,K)x(L...,K,N) with identical leading dims.
template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() < 2 || sb.size() < 2) {
        throw ShapeError("matmul needs rank >= 2 operands, got " + format_shape(sa) + " and " + format_shape(sb));
    }
    const std::size_t m = sa[sa.size() - 2];
    const std::size_t k = sa[sa.size() - 1];
    const std::size_t kb = sb[sb.size() - 2];
    const std::size_t n = sb[sb.size() - 1];
    const bool shared_b = sb.size() == 2;
    if (k != kb) {
        throw ShapeError("matmul inner dims disagree: " + format_shape(sa) + " x " + format_shape(sb));
    }
    if (!shared_b) {
        if (Shape(sa.begin(), sa.end() - 2) != Shape(sb.begin(), sb.end() - 2)) {
            throw ShapeError("matmul leading dims disagree: " + format_shape(sa) + " x " + format_shape(sb));
        }
    }
    std::size_t batch = 1;
    for (std::size_t i = 0; i + 2 < sa.size(); ++i) batch *= sa[i];

    Shape out_shape(sa.begin(), sa.end() - 2);
    out_shape.push_back(m);
    out_shape.push_back(n);

    std::vector<S> value(batch * m * n, S(0));
    const S* av = a.value().data();
    const S* bv = b.value().data();
    for (std::size_t l = 0; l < batch; ++l) {
        detail::mm_accum(av + l * m * k, shared_b ? bv : bv + l * k * n, value.data() + l * m * n, m, k, n);
    }

    auto a_node = a.node();
    auto b_node = b.node();
    return detail::make_result<S>(
        std::move(out_shape), std::move(value), {a, b},
        [a_node, b_node, m, k, n, batch, shared_b](typename Tensor<S>::Node& self) {
            const S* dc = self.grad.data();
            if (a_node->requires_grad) {
                Tensor<S>::ensure_grad(*a_node);
                // dA = dC * B^T, batch by batch
                if (shared_b) {
                    const auto bt = detail::transpose2d(b_node->value.data(), k, n);
                    for (std::size_t l = 0; l < batch; ++l) {
                        detail::mm_accum(dc + l * m * n, bt.data(), a_node->grad.data() + l * m * k, m, n, k);
                    }
                } else {
                    for (std::size_t l = 0; l < batch; ++l) {
                        const auto bt = detail::transpose2d(b_node->value.data() + l * k * n, k, n);
                        detail::mm_accum(dc + l * m * n, bt.data(), a_node->grad.data() + l * m * k, m, n, k);
                    }
                }
            }
            if (b_node->requires_grad) {
                Tensor<S>::ensure_grad(*b_node);
                for (std::size_t l = 0; l < batch; ++l) {
                    S* db = shared_b ? b_node->grad.data() : b_node->grad.data() + l * k * n;
                    detail::mm_accum_at(a_node->value.data() + l * m * k, dc + l * m * n, db, m, k, n);
                }
            }
        });
}

// ---- shape ops ----

template <class S>
Tensor<S> reshape(const Tensor<S>& a, Shape shape) {
    if (numel(shape) != a.size()) {
        throw ShapeError("cannot reshape " + format_shape(a.shape()) + " to " + format_shape(shape));
    }
    auto a_node = a.node();
    return detail::make_result<S>(std::move(shape), a.value(), {a}, [a_node](typename Tensor<S>::Node& self) {
        Tensor<S>::ensure_grad(*a_node);
        for (std::size_t i = 0; i < self.grad.size(); ++i) a_node->grad[i] += self.grad[i];
    });
}

namespace detail {

inline std::vector<std::size_t> row_major_strides(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
    return strides;
}

// Destination index of each source element under an axis permutation.
inline std::vector<std::size_t> permute_index_map(const Shape& in_shape, const std::vector<std::size_t>& perm) {
    Shape out_shape(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = in_shape[perm[i]];
    const auto out_strides = row_major_strides(out_shape);
    std::vector<std::size_t> dst_stride_of_in_axis(in_shape.size(), 0);
    for (std::size_t i = 0; i < perm.size(); ++i) dst_stride_of_in_axis[perm[i]] = out_strides[i];

    const std::size_t n = numel(in_shape);
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> idx(in_shape.size(), 0);
    std::size_t dst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        map[i] = dst;
        for (std::size_t d = in_shape.size(); d-- > 0;) {
            ++idx[d];
            dst += dst_stride_of_in_axis[d];
            if (idx[d] < in_shape[d]) break;
            dst -= dst_stride_of_in_axis[d] * in_shape[d];
            idx[d] = 0;
        }
    }
    return map;
}

}  // namespace detail

template <class S>
Tensor<S> permute(const Tensor<S>& a, const std::vector<std::size_t>& perm) {
    if (perm.size() != a.rank()) {
        throw ShapeError("permutation rank " + std::to_string(perm.size()) + " does not match tensor " +
                         format_shape(a.shape()));
    }
    std::vector<bool> used(perm.size(), false);
    for (std::size_t p : perm) {
        if (p >= perm.size() || used[p]) throw ShapeError("invalid axis permutation");
        used[p] = true;
    }
    Shape out_shape(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = a.shape()[perm[i]];

    auto map = detail::permute_index_map(a.shape(), perm);
    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t i = 0; i < av.size(); ++i) value[map[i]] = av[i];

    auto a_node = a.node();
    return detail::make_result<S>(std::move(out_shape), std::move(value), {a},
                                  [a_node, map = std::move(map)](typename Tensor<S>::Node& self) {
                                      Tensor<S>::ensure_grad(*a_node);
                                      for (std::size_t i = 0; i < map.size(); ++i) {
                                          a_node->grad[i] += self.grad[map[i]];
                                      }
                                  });
}

// Swap the last two axes.
template <class S>
Tensor<S> transpose_last2(const Tensor<S>& a) {
    std::vector<std::size_t> perm(a.rank());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    if (perm.size() < 2) throw ShapeError("transpose needs rank >= 2, got " + format_shape(a.shape()));
    std::swap(perm[perm.size() - 1], perm[perm.size() - 2]);
    return permute(a, perm);
}

template <class S>
Tensor<S> slice(const Tensor<S>& a, std::size_t axis, std::size_t start, std::size_t end) {
    if (axis >= a.rank() || start >= end || end > a.shape()[axis]) {
        throw ShapeError("bad slice [" + std::to_string(start) + ", " + std::to_string(end) + ") on axis " +
                         std::to_string(axis) + " of " + format_shape(a.shape()));
    }
    Shape out_shape = a.shape();
    out_shape[axis] = end - start;
    std::size_t outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.shape()[i];
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.shape()[i];
    const std::size_t in_axis = a.shape()[axis];
    const std::size_t out_axis = end - start;

    std::vector<S> value(outer * out_axis * inner);
    const auto& av = a.value();
    for (std::size_t o = 0; o < outer; ++o) {
        const S* src = av.data() + (o * in_axis + start) * inner;
        S* dst = value.data() + o * out_axis * inner;
        std::copy(src, src + out_axis * inner, dst);
    }

    auto a_node = a.node();
    return detail::make_result<S>(std::move(out_shape), std::move(value), {a},
                                  [a_node, outer, inner, in_axis, out_axis, start](typename Tensor<S>::Node& self) {
                                      Tensor<S>::ensure_grad(*a_node);
                                      for (std::size_t o = 0; o < outer; ++o) {
                                          const S* g = self.grad.data() + o * out_axis * inner;
                                          S* dst = a_node->grad.data() + (o * in_axis + start) * inner;
                                          for (std::size_t i = 0; i < out_axis * inner; ++i) dst[i] += g[i];
                                      }
                                  });
}

template <class S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat of zero tensors");
    const Shape& first = parts.front().shape();
    if (axis >= first.size()) throw ShapeError("concat axis out of range for " + format_shape(first));
    std::size_t axis_total = 0;
    for (const auto& p : parts) {
        if (p.rank() != first.size()) throw ShapeError("concat rank mismatch");
        for (std::size_t i = 0; i < first.size(); ++i) {
            if (i != axis && p.shape()[i] != first[i]) {
                throw ShapeError("concat shape mismatch: " + format_shape(p.shape()) + " vs " + format_shape(first));
            }
        }
        axis_total += p.shape()[axis];
    }
    Shape out_shape = first;
    out_shape[axis] = axis_total;

    std::size_t outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];

    std::vector<S> value(numel(out_shape));
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t p_axis = p.shape()[axis];
        const auto& pv = p.value();
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy(pv.data() + o * p_axis * inner, pv.data() + (o + 1) * p_axis * inner,
                      value.data() + (o * axis_total + offset) * inner);
        }
        offset += p_axis;
    }

    std::vector<std::shared_ptr<typename Tensor<S>::Node>> nodes;
    std::vector<std::size_t> part_axis;
    for (const auto& p : parts) {
        nodes.push_back(p.node());
        part_axis.push_back(p.shape()[axis]);
    }
    return detail::make_result<S>(
        std::move(out_shape), std::move(value), parts,
        [nodes, part_axis, outer, inner, axis_total](typename Tensor<S>::Node& self) {
            std::size_t offset = 0;
            for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
                auto& node = *nodes[pi];
                const std::size_t p_axis = part_axis[pi];
                if (node.requires_grad) {
                    Tensor<S>::ensure_grad(node);
                    for (std::size_t o = 0; o < outer; ++o) {
                        const S* g = self.grad.data() + (o * axis_total + offset) * inner;
                        S* dst = node.grad.data() + o * p_axis * inner;
                        for (std::size_t i = 0; i < p_axis * inner; ++i) dst[i] += g[i];
                    }
                }
                offset += p_axis;
            }
        });
}

// torch-style roll: the element at index i moves to (i + shift) mod n.
template <class S>
Tensor<S> roll(const Tensor<S>& a, std::size_t axis, std::int64_t shift) {
    if (axis >= a.rank()) throw ShapeError("roll axis out of range for " + format_shape(a.shape()));
    const auto n = static_cast<std::int64_t>(a.shape()[axis]);
    std::int64_t s = shift % n;
    if (s < 0) s += n;
    if (s == 0) return reshape(a, a.shape());

    std::size_t outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.shape()[i];
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.shape()[i];
    const auto un = static_cast<std::size_t>(n);
    const auto us = static_cast<std::size_t>(s);

    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < un; ++i) {
            const std::size_t j = (i + us) % un;
            std::copy(av.data() + (o * un + i) * inner, av.data() + (o * un + i + 1) * inner,
                      value.data() + (o * un + j) * inner);
        }
    }

    auto a_node = a.node();
    return detail::make_result<S>(a.shape(), std::move(value), {a},
                                  [a_node, outer, inner, un, us](typename Tensor<S>::Node& self) {
                                      Tensor<S>::ensure_grad(*a_node);
                                      for (std::size_t o = 0; o < outer; ++o) {
                                          for (std::size_t i = 0; i < un; ++i) {
                                              const std::size_t j = (i + us) % un;
                                              const S* g = self.grad.data() + (o * un + j) * inner;
                                              S* dst = a_node->grad.data() + (o * un + i) * inner;
                                              for (std::size_t t = 0; t < inner; ++t) dst[t] += g[t];
                                          }
                                      }
                                  });
}

// ---- activations, normalization, reductions ----

template <class S>
Tensor<S> softmax_lastdim(const Tensor<S>& a) {
    if (a.rank() == 0) throw ShapeError("softmax needs rank >= 1");
    const std::size_t v = a.shape().back();
    const std::size_t rows = a.size() / v;
    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t r = 0; r < rows; ++r) {
        const S* x = av.data() + r * v;
        S* y = value.data() + r * v;
        S max = x[0];
        for (std::size_t i = 1; i < v; ++i) max = std::max(max, x[i]);
        S sum = S(0);
        for (std::size_t i = 0; i < v; ++i) {
            y[i] = std::exp(x[i] - max);
            sum += y[i];
        }
        const S inv = S(1) / sum;
        for (std::size_t i = 0; i < v; ++i) y[i] *= inv;
    }
    auto a_node = a.node();
    return detail::make_result<S>(a.shape(), std::move(value), {a},
                                  [a_node, rows, v](typename Tensor<S>::Node& self) {
                                      Tensor<S>::ensure_grad(*a_node);
                                      for (std::size_t r = 0; r < rows; ++r) {
                                          const S* y = self.value.data() + r * v;
                                          const S* dy = self.grad.data() + r * v;
                                          S dot = S(0);
                                          for (std::size_t i = 0; i < v; ++i) dot += dy[i] * y[i];
                                          S* dx = a_node->grad.data() + r * v;
                                          for (std::size_t i = 0; i < v; ++i) dx[i] += y[i] * (dy[i] - dot);
                                      }
                                  });
}

// Normalizes the last dimension; gamma and beta have shape (D).
template <class S>
Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, double eps = 1e-5) {
    if (x.rank() == 0) throw ShapeError("layer_norm needs rank >= 1");
    const std::size_t d = x.shape().back();
    if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
        throw ShapeError("layer_norm affine params must have shape (" + std::to_string(d) + "), got " +
                         format_shape(gamma.shape()) + " and " + format_shape(beta.shape()));
    }
    const std::size_t rows = x.size() / d;
    std::vector<S> value(x.size());
    std::vector<S> xhat(x.size());
    std::vector<S> inv_std(rows);
    const auto& xv = x.value();
    const auto& gv = gamma.value();
    const auto& bv = beta.value();
    for (std::size_t r = 0; r < rows; ++r) {
        const S* row = xv.data() + r * d;
        S mean = S(0);
        for (std::size_t i = 0; i < d; ++i) mean += row[i];
        mean /= static_cast<S>(d);
        S var = S(0);
        for (std::size_t i = 0; i < d; ++i) {
            const S c = row[i] - mean;
            var += c * c;
        }
        var /= static_cast<S>(d);
        const S inv = S(1) / std::sqrt(var + static_cast<S>(eps));
        inv_std[r] = inv;
        for (std::size_t i = 0; i < d; ++i) {
            const S h = (row[i] - mean) * inv;
            xhat[r * d + i] = h;
            value[r * d + i] = gv[i] * h + bv[i];
        }
    }

    auto x_node = x.node();
    auto g_node = gamma.node();
    auto b_node = beta.node();
    return detail::make_result<S>(
        x.shape(), std::move(value), {x, gamma, beta},
        [x_node, g_node, b_node, rows, d, xhat = std::move(xhat),
         inv_std = std::move(inv_std)](typename Tensor<S>::Node& self) {
            for (std::size_t r = 0; r < rows; ++r) {
                const S* dy = self.grad.data() + r * d;
                const S* h = xhat.data() + r * d;
                if (g_node->requires_grad) {
                    Tensor<S>::ensure_grad(*g_node);
                    for (std::size_t i = 0; i < d; ++i) g_node->grad[i] += dy[i] * h[i];
                }
                if (b_node->requires_grad) {
                    Tensor<S>::ensure_grad(*b_node);
                    for (std::size_t i = 0; i < d; ++i) b_node->grad[i] += dy[i];
                }
                if (x_node->requires_grad) {
                    Tensor<S>::ensure_grad(*x_node);
                    const auto& gv = g_node->value;
                    S sum_dh = S(0);
                    S sum_dh_h = S(0);
                    for (std::size_t i = 0; i < d; ++i) {
                        const S dh = dy[i] * gv[i];
                        sum_dh += dh;
                        sum_dh_h += dh * h[i];
                    }
                    S* dx = x_node->grad.data() + r * d;
                    const S inv = inv_std[r];
                    const S invd = S(1) / static_cast<S>(d);
                    for (std::size_t i = 0; i < d; ++i) {
                        const S dh = dy[i] * gv[i];
                        dx[i] += inv * (dh - invd * sum_dh - h[i] * invd * sum_dh_h);
                    }
                }
            }
        });
}

// Exact GELU: x * Phi(x).
template <class S>
Tensor<S> gelu(const Tensor<S>& a) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    std::vector<S> value(a.size());
    const auto& av = a.value();
    for (std::size_t i = 0; i < value.size(); ++i) {
        const double x = static_cast<double>(av[i]);
        value[i] = static_cast<S>(x * 0.5 * (1.0 + std::erf(x * kInvSqrt2)));
    }
    auto a_node = a.node();
    return detail::make_result<S>(a.shape(), std::move(value), {a}, [a_node](typename Tensor<S>::Node& self) {
        Tensor<S>::ensure_grad(*a_node);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double x = static_cast<double>(a_node->value[i]);
            const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            a_node->grad[i] += static_cast<S>(self.grad[i] * static_cast<S>(phi + x * pdf));
        }
    });
}

// table (V, D), ids of any shape -> ids.shape + (D).
template <class S>
Tensor<S> embedding_lookup(const Tensor<S>& table, const IntTensor& ids) {
    if (table.rank() != 2) throw ShapeError("embedding table must be rank 2, got " + format_shape(table.shape()));
    const std::size_t v = table.dim(0);
    const std::size_t d = table.dim(1);
    Shape out_shape = ids.shape;
    out_shape.push_back(d);
    std::vector<S> value(ids.data.size() * d);
    const auto& tv = table.value();
    for (std::size_t i = 0; i < ids.data.size(); ++i) {
        const auto id = ids.data[i];
        if (id < 0 || static_cast<std::size_t>(id) >= v) {
            throw ShapeError("embedding id " + std::to_string(id) + " out of range for table " +
                             format_shape(table.shape()));
        }
        std::copy(tv.data() + static_cast<std::size_t>(id) * d, tv.data() + (static_cast<std::size_t>(id) + 1) * d,
                  value.data() + i * d);
    }
    auto t_node = table.node();
    auto ids_copy = ids.data;
    return detail::make_result<S>(std::move(out_shape), std::move(value), {table},
                                  [t_node, d, ids_copy = std::move(ids_copy)](typename Tensor<S>::Node& self) {
                                      Tensor<S>::ensure_grad(*t_node);
                                      for (std::size_t i = 0; i < ids_copy.size(); ++i) {
                                          const S* g = self.grad.data() + i * d;
                                          S* dst = t_node->grad.data() + static_cast<std::size_t>(ids_copy[i]) * d;
                                          for (std::size_t j = 0; j < d; ++j) dst[j] += g[j];
                                      }
                                  });
}

template <class S>
Tensor<S> sum(const Tensor<S>& a) {
    S total = S(0);
    for (S v : a.value()) total += v;
    auto a_node = a.node();
    return detail::make_result<S>(Shape{}, std::vector<S>{total}, {a}, [a_node](typename Tensor<S>::Node& self) {
        Tensor<S>::ensure_grad(*a_node);
        for (auto& g : a_node->grad) g += self.grad[0];
    });
}

template <class S>
Tensor<S> mean(const Tensor<S>& a) {
    return mul_scalar(sum(a), 1.0 / static_cast<double>(a.size()));
}

// Mean negative log-likelihood over positions whose target is not pad_id.
// logits: (..., V) with one row per target entry.
template <class S>
Tensor<S> cross_entropy_with_logits(const Tensor<S>& logits, const IntTensor& targets, int pad_id) {
    if (logits.rank() < 1) throw ShapeError("cross entropy needs a vocab axis");
    const std::size_t v = logits.shape().back();
    const std::size_t rows = logits.size() / v;
    if (rows != targets.data.size()) {
        throw ShapeError("cross entropy: " + std::to_string(rows) + " logit rows vs " +
                         std::to_string(targets.data.size()) + " targets");
    }
    const auto& lv = logits.value();
    std::size_t count = 0;
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto t = targets.data[r];
        if (t == pad_id) continue;
        if (t < 0 || static_cast<std::size_t>(t) >= v) {
            throw ShapeError("target id " + std::to_string(t) + " out of vocab " + std::to_string(v));
        }
        const S* x = lv.data() + r * v;
        S max = x[0];
        for (std::size_t i = 1; i < v; ++i) max = std::max(max, x[i]);
        double sum_exp = 0.0;
        for (std::size_t i = 0; i < v; ++i) sum_exp += std::exp(static_cast<double>(x[i] - max));
        total += static_cast<double>(max) + std::log(sum_exp) - static_cast<double>(x[static_cast<std::size_t>(t)]);
        ++count;
    }
    if (count == 0) throw NumericError("cross entropy over an all-PAD batch has no defined mean");
    const double loss = total / static_cast<double>(count);

    auto l_node = logits.node();
    auto tgt = targets.data;
    return detail::make_result<S>(
        Shape{}, std::vector<S>{static_cast<S>(loss)}, {logits},
        [l_node, tgt = std::move(tgt), v, rows, count, pad_id](typename Tensor<S>::Node& self) {
            Tensor<S>::ensure_grad(*l_node);
            const S g = self.grad[0] / static_cast<S>(count);
            for (std::size_t r = 0; r < rows; ++r) {
                const auto t = tgt[r];
                if (t == pad_id) continue;
                const S* x = l_node->value.data() + r * v;
                S* dx = l_node->grad.data() + r * v;
                S max = x[0];
                for (std::size_t i = 1; i < v; ++i) max = std::max(max, x[i]);
                S sum_exp = S(0);
                for (std::size_t i = 0; i < v; ++i) sum_exp += std::exp(x[i] - max);
                const S inv = S(1) / sum_exp;
                for (std::size_t i = 0; i < v; ++i) {
                    const S p = std::exp(x[i] - max) * inv;
                    dx[i] += g * (p - (static_cast<std::size_t>(t) == i ? S(1) : S(0)));
                }
            }
        });
}

}  // namespace lemmarec
