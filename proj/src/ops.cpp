#include "lobcast/ops.hpp"

#include "lobcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lobcast {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

Tensor record(Shape shape, std::vector<double> values, std::vector<NodePtr> inputs, const char* op,
              std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    node->id = detail::next_node_id();
    node->op = op;
    const bool tracked =
        std::any_of(inputs.begin(), inputs.end(), [](const NodePtr& n) { return n->requires_grad; });
    if (tracked) {
        node->requires_grad = true;
        node->inputs = std::move(inputs);
        node->backward = std::move(backward_fn);
    }
    return Tensor(std::move(node));
}

[[noreturn]] void shape_error(const std::string& what, const Shape& a, const Shape& b) {
    throw Error(ErrorKind::ShapeMismatch, what + ": " + shape_str(a) + " vs " + shape_str(b));
}

void check_axis(const Tensor& x, std::size_t axis, const char* op) {
    if (axis >= x.rank()) {
        throw Error(ErrorKind::IndexOutOfRange,
                    std::string(op) + ": axis " + std::to_string(axis) + " invalid for " + shape_str(x.shape()));
    }
}

// Splits a shape around `axis` into (outer, extent, inner) element counts.
struct AxisSplit {
    std::size_t outer;
    std::size_t extent;
    std::size_t inner;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
    AxisSplit s{1, shape[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank, 1);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (ea != eb && ea != 1 && eb != 1) shape_error("cannot broadcast", a, b);
        out[i] = std::max(ea, eb);
    }
    return out;
}

// Flat input offset for every flat output offset.
std::vector<std::size_t> broadcast_map(const Shape& out, const Shape& in) {
    const std::size_t rank = out.size();
    const std::size_t lead = rank - in.size();
    std::vector<std::size_t> stride(rank, 0);
    std::size_t s = 1;
    for (std::size_t i = rank; i-- > lead;) {
        const std::size_t extent = in[i - lead];
        stride[i] = extent == 1 ? 0 : s;
        s *= extent;
    }
    const std::size_t n = shape_size(out);
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> index(rank, 0);
    std::size_t offset = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        map[flat] = offset;
        for (std::size_t i = rank; i-- > 0;) {
            ++index[i];
            offset += stride[i];
            if (index[i] < out[i]) break;
            offset -= stride[i] * index[i];
            index[i] = 0;
        }
    }
    return map;
}

enum class BinaryOp { Add, Sub, Mul, Div };

Tensor binary(const Tensor& a, const Tensor& b, BinaryOp op, const char* name) {
    auto na = a.node();
    auto nb = b.node();
    const Shape out_shape = a.shape() == b.shape() ? a.shape() : broadcast_shape(a.shape(), b.shape());
    const std::size_t n = shape_size(out_shape);
    const bool same_a = a.shape() == out_shape;
    const bool same_b = b.shape() == out_shape;
    auto map_a = std::make_shared<std::vector<std::size_t>>();
    auto map_b = std::make_shared<std::vector<std::size_t>>();
    if (!same_a) *map_a = broadcast_map(out_shape, a.shape());
    if (!same_b) *map_b = broadcast_map(out_shape, b.shape());

    const auto& va = na->values;
    const auto& vb = nb->values;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = va[same_a ? i : (*map_a)[i]];
        const double y = vb[same_b ? i : (*map_b)[i]];
        switch (op) {
            case BinaryOp::Add: out[i] = x + y; break;
            case BinaryOp::Sub: out[i] = x - y; break;
            case BinaryOp::Mul: out[i] = x * y; break;
            case BinaryOp::Div: out[i] = x / y; break;
        }
    }
    return record(out_shape, std::move(out), {na, nb}, name, [op, same_a, same_b, map_a, map_b, n](Node& self) {
        auto& A = *self.inputs[0];
        auto& B = *self.inputs[1];
        for (std::size_t i = 0; i < n; ++i) {
            const double g = self.grad[i];
            const std::size_t ia = same_a ? i : (*map_a)[i];
            const std::size_t ib = same_b ? i : (*map_b)[i];
            switch (op) {
                case BinaryOp::Add:
                    if (A.requires_grad) A.grad[ia] += g;
                    if (B.requires_grad) B.grad[ib] += g;
                    break;
                case BinaryOp::Sub:
                    if (A.requires_grad) A.grad[ia] += g;
                    if (B.requires_grad) B.grad[ib] -= g;
                    break;
                case BinaryOp::Mul:
                    if (A.requires_grad) A.grad[ia] += g * B.values[ib];
                    if (B.requires_grad) B.grad[ib] += g * A.values[ia];
                    break;
                case BinaryOp::Div: {
                    const double y = B.values[ib];
                    if (A.requires_grad) A.grad[ia] += g / y;
                    if (B.requires_grad) B.grad[ib] -= g * A.values[ia] / (y * y);
                    break;
                }
            }
        }
    });
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, const char* name, Fwd fwd, Deriv deriv) {
    auto nx = x.node();
    std::vector<double> out(x.size());
    std::transform(nx->values.begin(), nx->values.end(), out.begin(), fwd);
    return record(x.shape(), std::move(out), {nx}, name, [deriv](Node& self) {
        auto& X = *self.inputs[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            X.grad[i] += self.grad[i] * deriv(X.values[i], self.values[i]);
        }
    });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryOp::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryOp::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryOp::Mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryOp::Div, "div"); }

Tensor scale(const Tensor& x, double c) {
    return unary(x, "scale", [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& x, double c) {
    return unary(x, "add_scalar", [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor square(const Tensor& x) {
    return unary(x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor sin(const Tensor& x) {
    return unary(
        x, "sin", [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor relu(const Tensor& x) {
    return unary(
        x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 2 || b.rank() < 2) shape_error("matmul needs rank >= 2", a.shape(), b.shape());
    const std::size_t m = a.dim(a.rank() - 2);
    const std::size_t k = a.dim(a.rank() - 1);
    const std::size_t kb = b.dim(b.rank() - 2);
    const std::size_t n = b.dim(b.rank() - 1);
    if (k != kb) shape_error("matmul inner extents differ", a.shape(), b.shape());

    const Shape batch_a(a.shape().begin(), a.shape().end() - 2);
    const Shape batch_b(b.shape().begin(), b.shape().end() - 2);
    const Shape batch = broadcast_shape(batch_a, batch_b);
    const std::size_t batches = shape_size(batch);
    auto map_a = std::make_shared<std::vector<std::size_t>>(
        batch_a.empty() ? std::vector<std::size_t>(batches, 0) : broadcast_map(batch, batch_a));
    auto map_b = std::make_shared<std::vector<std::size_t>>(
        batch_b.empty() ? std::vector<std::size_t>(batches, 0) : broadcast_map(batch, batch_b));
    if (batch.empty()) {
        map_a->assign(1, 0);
        map_b->assign(1, 0);
    }

    Shape out_shape = batch;
    out_shape.push_back(m);
    out_shape.push_back(n);
    auto na = a.node();
    auto nb = b.node();
    std::vector<double> out(batches * m * n, 0.0);
    for (std::size_t t = 0; t < batches; ++t) {
        const double* A = na->values.data() + (*map_a)[t] * m * k;
        const double* B = nb->values.data() + (*map_b)[t] * k * n;
        double* C = out.data() + t * m * n;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = A[i * k + p];
                if (aip == 0.0) continue;
                const double* brow = B + p * n;
                double* crow = C + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
            }
        }
    }
    return record(std::move(out_shape), std::move(out), {na, nb}, "matmul",
                  [batches, m, k, n, map_a, map_b](Node& self) {
                      auto& NA = *self.inputs[0];
                      auto& NB = *self.inputs[1];
                      for (std::size_t t = 0; t < batches; ++t) {
                          const double* G = self.grad.data() + t * m * n;
                          const std::size_t oa = (*map_a)[t] * m * k;
                          const std::size_t ob = (*map_b)[t] * k * n;
                          if (NA.requires_grad) {
                              // dA = G * B^T
                              const double* B = NB.values.data() + ob;
                              double* dA = NA.grad.data() + oa;
                              if (k >= n) {
                                  // Row updates over a transposed copy of B keep
                                  // the long axis innermost.
                                  std::vector<double> bt(k * n);
                                  for (std::size_t p = 0; p < k; ++p) {
                                      for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = B[p * n + j];
                                  }
                                  for (std::size_t i = 0; i < m; ++i) {
                                      const double* grow = G + i * n;
                                      double* drow = dA + i * k;
                                      for (std::size_t j = 0; j < n; ++j) {
                                          const double gij = grow[j];
                                          if (gij == 0.0) continue;
                                          const double* btrow = bt.data() + j * k;
                                          for (std::size_t p = 0; p < k; ++p) drow[p] += gij * btrow[p];
                                      }
                                  }
                              } else {
                                  for (std::size_t i = 0; i < m; ++i) {
                                      const double* grow = G + i * n;
                                      for (std::size_t p = 0; p < k; ++p) {
                                          const double* brow = B + p * n;
                                          double acc[4] = {0.0, 0.0, 0.0, 0.0};
                                          std::size_t j = 0;
                                          for (; j + 4 <= n; j += 4) {
                                              acc[0] += grow[j] * brow[j];
                                              acc[1] += grow[j + 1] * brow[j + 1];
                                              acc[2] += grow[j + 2] * brow[j + 2];
                                              acc[3] += grow[j + 3] * brow[j + 3];
                                          }
                                          for (; j < n; ++j) acc[0] += grow[j] * brow[j];
                                          dA[i * k + p] += (acc[0] + acc[1]) + (acc[2] + acc[3]);
                                      }
                                  }
                              }
                          }
                          if (NB.requires_grad) {
                              // dB = A^T * G
                              const double* A = NA.values.data() + oa;
                              double* dB = NB.grad.data() + ob;
                              for (std::size_t i = 0; i < m; ++i) {
                                  const double* grow = G + i * n;
                                  for (std::size_t p = 0; p < k; ++p) {
                                      const double aip = A[i * k + p];
                                      if (aip == 0.0) continue;
                                      double* drow = dB + p * n;
                                      for (std::size_t j = 0; j < n; ++j) drow[j] += aip * grow[j];
                                  }
                              }
                          }
                      }
                  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    check_axis(x, axis, "softmax");
    const auto s = split_at(x.shape(), axis);
    auto nx = x.node();
    const auto& v = nx->values;
    std::vector<double> out(v.size());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.extent * s.inner + in;
            double mx = v[base];
            for (std::size_t e = 1; e < s.extent; ++e) mx = std::max(mx, v[base + e * s.inner]);
            double total = 0.0;
            for (std::size_t e = 0; e < s.extent; ++e) {
                const double w = std::exp(v[base + e * s.inner] - mx);
                out[base + e * s.inner] = w;
                total += w;
            }
            for (std::size_t e = 0; e < s.extent; ++e) out[base + e * s.inner] /= total;
        }
    }
    return record(x.shape(), std::move(out), {nx}, "softmax", [s](Node& self) {
        auto& X = *self.inputs[0];
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.extent * s.inner + in;
                double dot = 0.0;
                for (std::size_t e = 0; e < s.extent; ++e) {
                    const std::size_t i = base + e * s.inner;
                    dot += self.grad[i] * self.values[i];
                }
                for (std::size_t e = 0; e < s.extent; ++e) {
                    const std::size_t i = base + e * s.inner;
                    X.grad[i] += self.values[i] * (self.grad[i] - dot);
                }
            }
        }
    });
}

namespace {

Tensor reduce_axis(const Tensor& x, std::size_t axis, double factor, const char* name) {
    check_axis(x, axis, name);
    const auto s = split_at(x.shape(), axis);
    Shape out_shape = x.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
    auto nx = x.node();
    std::vector<double> out(s.outer * s.inner, 0.0);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t e = 0; e < s.extent; ++e) {
            const double* row = nx->values.data() + (o * s.extent + e) * s.inner;
            double* dst = out.data() + o * s.inner;
            for (std::size_t in = 0; in < s.inner; ++in) dst[in] += row[in];
        }
    }
    for (auto& value : out) value *= factor;
    return record(std::move(out_shape), std::move(out), {nx}, name, [s, factor](Node& self) {
        auto& X = *self.inputs[0];
        for (std::size_t o = 0; o < s.outer; ++o) {
            for (std::size_t e = 0; e < s.extent; ++e) {
                double* dst = X.grad.data() + (o * s.extent + e) * s.inner;
                const double* g = self.grad.data() + o * s.inner;
                for (std::size_t in = 0; in < s.inner; ++in) dst[in] += factor * g[in];
            }
        }
    });
}

Tensor reduce_all(const Tensor& x, double factor, const char* name) {
    auto nx = x.node();
    double total = 0.0;
    for (double v : nx->values) total += v;
    return record(Shape{}, {total * factor}, {nx}, name, [factor](Node& self) {
        auto& X = *self.inputs[0];
        const double g = self.grad[0] * factor;
        for (auto& d : X.grad) d += g;
    });
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis) { return reduce_axis(x, axis, 1.0, "sum"); }

Tensor mean(const Tensor& x, std::size_t axis) {
    check_axis(x, axis, "mean");
    return reduce_axis(x, axis, 1.0 / static_cast<double>(x.dim(axis)), "mean");
}

Tensor sum_all(const Tensor& x) { return reduce_all(x, 1.0, "sum_all"); }

Tensor mean_all(const Tensor& x) { return reduce_all(x, 1.0 / static_cast<double>(x.size()), "mean_all"); }

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
    if (parts.empty()) throw Error(ErrorKind::ShapeMismatch, "concat of nothing");
    check_axis(parts[0], axis, "concat");
    Shape out_shape = parts[0].shape();
    std::size_t total_extent = 0;
    std::vector<NodePtr> inputs;
    std::vector<std::size_t> extents;
    for (const auto& p : parts) {
        if (p.rank() != out_shape.size()) shape_error("concat rank mismatch", p.shape(), out_shape);
        for (std::size_t i = 0; i < out_shape.size(); ++i) {
            if (i != axis && p.dim(i) != out_shape[i]) shape_error("concat extent mismatch", p.shape(), out_shape);
        }
        total_extent += p.dim(axis);
        extents.push_back(p.dim(axis));
        inputs.push_back(p.node());
    }
    out_shape[axis] = total_extent;
    const auto s = split_at(out_shape, axis);
    std::vector<double> out(shape_size(out_shape));
    std::size_t start = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const std::size_t chunk = extents[pi] * s.inner;
        const auto& src = inputs[pi]->values;
        for (std::size_t o = 0; o < s.outer; ++o) {
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * chunk), chunk,
                        out.begin() + static_cast<std::ptrdiff_t>(o * s.extent * s.inner + start * s.inner));
        }
        start += extents[pi];
    }
    return record(std::move(out_shape), std::move(out), std::move(inputs), "concat", [s, extents](Node& self) {
        std::size_t begin = 0;
        for (std::size_t pi = 0; pi < extents.size(); ++pi) {
            auto& P = *self.inputs[pi];
            const std::size_t chunk = extents[pi] * s.inner;
            if (P.requires_grad) {
                for (std::size_t o = 0; o < s.outer; ++o) {
                    const double* g = self.grad.data() + o * s.extent * s.inner + begin * s.inner;
                    double* dst = P.grad.data() + o * chunk;
                    for (std::size_t i = 0; i < chunk; ++i) dst[i] += g[i];
                }
            }
            begin += extents[pi];
        }
    });
}

Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b) {
    check_axis(x, axis_a, "transpose");
    check_axis(x, axis_b, "transpose");
    const Shape& in_shape = x.shape();
    Shape out_shape = in_shape;
    std::swap(out_shape[axis_a], out_shape[axis_b]);
    const std::size_t rank = in_shape.size();
    std::vector<std::size_t> in_stride(rank, 1);
    for (std::size_t i = rank - 1; i-- > 0;) in_stride[i] = in_stride[i + 1] * in_shape[i + 1];
    std::vector<std::size_t> stride = in_stride;
    std::swap(stride[axis_a], stride[axis_b]);

    const std::size_t n = x.size();
    auto map = std::make_shared<std::vector<std::size_t>>(n);
    std::vector<std::size_t> index(rank, 0);
    std::size_t offset = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        (*map)[flat] = offset;
        for (std::size_t i = rank; i-- > 0;) {
            ++index[i];
            offset += stride[i];
            if (index[i] < out_shape[i]) break;
            offset -= stride[i] * index[i];
            index[i] = 0;
        }
    }
    auto nx = x.node();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = nx->values[(*map)[i]];
    return record(std::move(out_shape), std::move(out), {nx}, "transpose", [map](Node& self) {
        auto& X = *self.inputs[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) X.grad[(*map)[i]] += self.grad[i];
    });
}

Tensor transpose(const Tensor& x) {
    if (x.rank() < 2) throw Error(ErrorKind::ShapeMismatch, "transpose needs rank >= 2");
    return transpose(x, x.rank() - 2, x.rank() - 1);
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_size(shape) != x.size()) shape_error("reshape changes element count", x.shape(), shape);
    auto nx = x.node();
    return record(std::move(shape), nx->values, {nx}, "reshape", [](Node& self) {
        auto& X = *self.inputs[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) X.grad[i] += self.grad[i];
    });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
    if (table.rank() < 1) throw Error(ErrorKind::ShapeMismatch, "gather_rows needs rank >= 1");
    if (indices.empty()) throw Error(ErrorKind::ShapeMismatch, "gather_rows with no indices");
    const std::size_t rows = table.dim(0);
    const std::size_t width = table.size() / rows;
    for (auto idx : indices) {
        if (idx >= rows) {
            throw Error(ErrorKind::IndexOutOfRange,
                        "row " + std::to_string(idx) + " outside table of " + std::to_string(rows));
        }
    }
    Shape out_shape = table.shape();
    out_shape[0] = indices.size();
    auto nt = table.node();
    std::vector<double> out(indices.size() * width);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        std::copy_n(nt->values.begin() + static_cast<std::ptrdiff_t>(indices[r] * width), width,
                    out.begin() + static_cast<std::ptrdiff_t>(r * width));
    }
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return record(std::move(out_shape), std::move(out), {nt}, "gather_rows", [idx, width](Node& self) {
        auto& T = *self.inputs[0];
        for (std::size_t r = 0; r < idx.size(); ++r) {
            double* dst = T.grad.data() + idx[r] * width;
            const double* g = self.grad.data() + r * width;
            for (std::size_t c = 0; c < width; ++c) dst[c] += g[c];
        }
    });
}

Tensor gather_cols(const Tensor& x, std::span<const std::size_t> indices) {
    if (x.rank() < 1) throw Error(ErrorKind::ShapeMismatch, "gather_cols needs rank >= 1");
    if (indices.empty()) throw Error(ErrorKind::ShapeMismatch, "gather_cols with no indices");
    const std::size_t cols = x.dim(x.rank() - 1);
    for (auto idx : indices) {
        if (idx >= cols) {
            throw Error(ErrorKind::IndexOutOfRange,
                        "column " + std::to_string(idx) + " outside width " + std::to_string(cols));
        }
    }
    const std::size_t rows = x.size() / cols;
    const std::size_t width = indices.size();
    Shape out_shape = x.shape();
    out_shape.back() = width;
    auto nx = x.node();
    std::vector<double> out(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) out[r * width + c] = nx->values[r * cols + indices[c]];
    }
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return record(std::move(out_shape), std::move(out), {nx}, "gather_cols", [idx, rows, cols](Node& self) {
        auto& X = *self.inputs[0];
        const std::size_t width = idx.size();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) X.grad[r * cols + idx[c]] += self.grad[r * width + c];
        }
    });
}

Tensor cumprod_rows(const Tensor& x) {
    if (x.rank() != 2) throw Error(ErrorKind::ShapeMismatch, "cumprod_rows needs a matrix");
    const std::size_t rows = x.dim(0);
    const std::size_t cols = x.dim(1);
    auto nx = x.node();
    std::vector<double> out(x.size());
    for (std::size_t c = 0; c < cols; ++c) {
        double running = 1.0;
        for (std::size_t r = 0; r < rows; ++r) {
            running *= nx->values[r * cols + c];
            out[r * cols + c] = running;
        }
    }
    return record(x.shape(), std::move(out), {nx}, "cumprod_rows", [rows, cols](Node& self) {
        auto& X = *self.inputs[0];
        // d out[i] / d x[j] = prod_{k <= i, k != j} x[k] for j <= i; no division so zeros are safe.
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t j = 0; j < rows; ++j) {
                double prefix = 1.0;
                for (std::size_t k = 0; k < j; ++k) prefix *= X.values[k * cols + c];
                double acc = 0.0;
                double partial = prefix;
                for (std::size_t i = j; i < rows; ++i) {
                    if (i > j) partial *= X.values[i * cols + c];
                    acc += self.grad[i * cols + c] * partial;
                }
                X.grad[j * cols + c] += acc;
            }
        }
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    if (x.rank() < 1) throw Error(ErrorKind::ShapeMismatch, "layer_norm needs rank >= 1");
    const std::size_t d = x.dim(x.rank() - 1);
    if (gain.size() != d || bias.size() != d) shape_error("layer_norm parameter width", gain.shape(), x.shape());
    const std::size_t rows = x.size() / d;
    auto nx = x.node();
    auto ng = gain.node();
    auto nb = bias.node();
    auto xhat = std::make_shared<std::vector<double>>(x.size());
    auto inv_std = std::make_shared<std::vector<double>>(rows);
    std::vector<double> out(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = nx->values.data() + r * d;
        double mu = 0.0;
        for (std::size_t c = 0; c < d; ++c) mu += row[c];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
        var /= static_cast<double>(d);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = is;
        for (std::size_t c = 0; c < d; ++c) {
            const double h = (row[c] - mu) * is;
            (*xhat)[r * d + c] = h;
            out[r * d + c] = h * ng->values[c] + nb->values[c];
        }
    }
    return record(x.shape(), std::move(out), {nx, ng, nb}, "layer_norm", [d, rows, xhat, inv_std](Node& self) {
        auto& X = *self.inputs[0];
        auto& G = *self.inputs[1];
        auto& B = *self.inputs[2];
        std::vector<double> dh(d);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* g = self.grad.data() + r * d;
            const double* h = xhat->data() + r * d;
            if (G.requires_grad) {
                for (std::size_t c = 0; c < d; ++c) G.grad[c] += g[c] * h[c];
            }
            if (B.requires_grad) {
                for (std::size_t c = 0; c < d; ++c) B.grad[c] += g[c];
            }
            if (X.requires_grad) {
                double mean_dh = 0.0;
                double mean_dh_h = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    dh[c] = g[c] * G.values[c];
                    mean_dh += dh[c];
                    mean_dh_h += dh[c] * h[c];
                }
                mean_dh /= static_cast<double>(d);
                mean_dh_h /= static_cast<double>(d);
                for (std::size_t c = 0; c < d; ++c) {
                    X.grad[r * d + c] += (*inv_std)[r] * (dh[c] - mean_dh - h[c] * mean_dh_h);
                }
            }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.rank() < 1 || w.rank() != 2) shape_error("linear operand ranks", x.shape(), w.shape());
    const std::size_t in = w.dim(0);
    const std::size_t out_width = w.dim(1);
    if (x.dim(x.rank() - 1) != in) shape_error("linear input width", x.shape(), w.shape());
    if (b.size() != out_width) shape_error("linear bias width", b.shape(), w.shape());
    const std::size_t rows = x.size() / in;
    Shape out_shape = x.shape();
    out_shape.back() = out_width;
    auto nx = x.node();
    auto nw = w.node();
    auto nb = b.node();
    std::vector<double> out(rows * out_width);
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = out.data() + r * out_width;
        std::copy(nb->values.begin(), nb->values.end(), dst);
        const double* xr = nx->values.data() + r * in;
        for (std::size_t p = 0; p < in; ++p) {
            const double xv = xr[p];
            if (xv == 0.0) continue;
            const double* wr = nw->values.data() + p * out_width;
            for (std::size_t j = 0; j < out_width; ++j) dst[j] += xv * wr[j];
        }
    }
    return record(std::move(out_shape), std::move(out), {nx, nw, nb}, "linear",
                  [rows, in, out_width](Node& self) {
                      auto& X = *self.inputs[0];
                      auto& W = *self.inputs[1];
                      auto& B = *self.inputs[2];
                      for (std::size_t r = 0; r < rows; ++r) {
                          const double* g = self.grad.data() + r * out_width;
                          if (B.requires_grad) {
                              for (std::size_t j = 0; j < out_width; ++j) B.grad[j] += g[j];
                          }
                          if (X.requires_grad) {
                              for (std::size_t p = 0; p < in; ++p) {
                                  const double* wr = W.values.data() + p * out_width;
                                  double acc = 0.0;
                                  for (std::size_t j = 0; j < out_width; ++j) acc += g[j] * wr[j];
                                  X.grad[r * in + p] += acc;
                              }
                          }
                          if (W.requires_grad) {
                              const double* xr = X.values.data() + r * in;
                              for (std::size_t p = 0; p < in; ++p) {
                                  const double xv = xr[p];
                                  if (xv == 0.0) continue;
                                  double* dw = W.grad.data() + p * out_width;
                                  for (std::size_t j = 0; j < out_width; ++j) dw[j] += xv * g[j];
                              }
                          }
                      }
                  });
}

}  // namespace lobcast
