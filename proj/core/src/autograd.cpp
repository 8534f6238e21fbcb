#include "roca/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace roca::ag {

void Node::accumulate(const Matrix& g) {
    if (grad.size() == 0) {
        grad = g;
    } else {
        grad += g;
    }
}

namespace {

using NodePtr = std::shared_ptr<Node>;

Var make(Matrix value, std::vector<NodePtr> inputs, std::function<void(Node&)> fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    bool rg = false;
    for (const auto& in : inputs) rg = rg || in->requires_grad;
    n->requires_grad = rg;
    if (rg) {
        n->inputs = std::move(inputs);
        n->backward_fn = std::move(fn);
    }
    return Var(std::move(n));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

}  // namespace

Var constant(Matrix value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return Var(std::move(n));
}

Var parameter(Matrix value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Var(std::move(n));
}

void backward(const Var& root) {
    if (!root) throw std::invalid_argument("backward: empty root");
    if (root.rows() != 1 || root.cols() != 1) {
        throw std::invalid_argument("backward: root must be a 1x1 scalar");
    }
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node(), 0);
    visited.insert(root.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root.node()->accumulate(Matrix::Ones(1, 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && n->grad.size() > 0) n->backward_fn(*n);
    }
}

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    Matrix out = a.value() * b.value();
    return make(std::move(out), {a.shared(), b.shared()}, [](Node& self) {
        Node& x = *self.inputs[0];
        Node& y = *self.inputs[1];
        if (x.requires_grad) x.accumulate(self.grad * y.value.transpose());
        if (y.requires_grad) y.accumulate(x.value.transpose() * self.grad);
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    return make(a.value() + b.value(), {a.shared(), b.shared()}, [](Node& self) {
        for (auto& in : self.inputs)
            if (in->requires_grad) in->accumulate(self.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    return make(a.value() - b.value(), {a.shared(), b.shared()}, [](Node& self) {
        if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(self.grad);
        if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(-self.grad);
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    return make(a.value().cwiseProduct(b.value()), {a.shared(), b.shared()}, [](Node& self) {
        Node& x = *self.inputs[0];
        Node& y = *self.inputs[1];
        if (x.requires_grad) x.accumulate(self.grad.cwiseProduct(y.value));
        if (y.requires_grad) y.accumulate(self.grad.cwiseProduct(x.value));
    });
}

Var scale(const Var& a, double s) {
    return make(a.value() * s, {a.shared()}, [s](Node& self) {
        self.inputs[0]->accumulate(self.grad * s);
    });
}

Var add_scalar(const Var& a, double s) {
    Matrix out = a.value().array() + s;
    return make(std::move(out), {a.shared()}, [](Node& self) {
        self.inputs[0]->accumulate(self.grad);
    });
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: bad row shape");
    Matrix out = a.value().rowwise() + RowVector(row.value());
    return make(std::move(out), {a.shared(), row.shared()}, [](Node& self) {
        if (self.inputs[0]->requires_grad) self.inputs[0]->accumulate(self.grad);
        if (self.inputs[1]->requires_grad) self.inputs[1]->accumulate(self.grad.colwise().sum());
    });
}

Var mul_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("mul_row: bad row shape");
    Matrix out = a.value().array().rowwise() * RowVector(row.value()).array();
    return make(std::move(out), {a.shared(), row.shared()}, [](Node& self) {
        Node& x = *self.inputs[0];
        Node& r = *self.inputs[1];
        if (x.requires_grad) {
            Matrix g = self.grad.array().rowwise() * RowVector(r.value).array();
            x.accumulate(g);
        }
        if (r.requires_grad) r.accumulate(self.grad.cwiseProduct(x.value).colwise().sum());
    });
}

Var sigmoid(const Var& a) {
    Matrix y = (1.0 + (-a.value().array()).exp()).inverse();
    return make(std::move(y), {a.shared()}, [](Node& self) {
        Matrix g = self.grad.array() * self.value.array() * (1.0 - self.value.array());
        self.inputs[0]->accumulate(g);
    });
}

Var tanh(const Var& a) {
    Matrix y = a.value().array().tanh();
    return make(std::move(y), {a.shared()}, [](Node& self) {
        Matrix g = self.grad.array() * (1.0 - self.value.array().square());
        self.inputs[0]->accumulate(g);
    });
}

Var relu(const Var& a) {
    Matrix y = a.value().cwiseMax(0.0);
    return make(std::move(y), {a.shared()}, [](Node& self) {
        Node& x = *self.inputs[0];
        Matrix g = (x.value.array() > 0.0).select(self.grad, 0.0);
        x.accumulate(g);
    });
}

Var sqrt(const Var& a) {
    Matrix y = a.value().array().sqrt();
    return make(std::move(y), {a.shared()}, [](Node& self) {
        Matrix g = self.grad.array() * 0.5 / self.value.array();
        self.inputs[0]->accumulate(g);
    });
}

Var sum(const Var& a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return make(std::move(out), {a.shared()}, [](Node& self) {
        const Node& x = *self.inputs[0];
        self.inputs[0]->accumulate(Matrix::Constant(x.value.rows(), x.value.cols(), self.grad(0, 0)));
    });
}

Var mean(const Var& a) {
    const double n = static_cast<double>(a.value().size());
    if (n == 0) throw std::invalid_argument("mean: empty input");
    Matrix out(1, 1);
    out(0, 0) = a.value().sum() / n;
    return make(std::move(out), {a.shared()}, [n](Node& self) {
        const Node& x = *self.inputs[0];
        self.inputs[0]->accumulate(
            Matrix::Constant(x.value.rows(), x.value.cols(), self.grad(0, 0) / n));
    });
}

Var col_variance(const Var& a) {
    const Eigen::Index n = a.rows();
    if (n <= 1) {
        return make(Matrix::Zero(1, a.cols()), {a.shared()}, [](Node& self) {
            const Node& x = *self.inputs[0];
            self.inputs[0]->accumulate(Matrix::Zero(x.value.rows(), x.value.cols()));
        });
    }
    RowVector mu = a.value().colwise().mean();
    Matrix centered = a.value().rowwise() - mu;
    Matrix var = centered.colwise().squaredNorm() / static_cast<double>(n - 1);
    return make(std::move(var), {a.shared()}, [centered = std::move(centered), n](Node& self) {
        RowVector g = RowVector(self.grad) * (2.0 / static_cast<double>(n - 1));
        Matrix dx = centered.array().rowwise() * g.array();
        self.inputs[0]->accumulate(dx);
    });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != a.value().size()) throw std::invalid_argument("reshape: size mismatch");
    Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
    return make(std::move(out), {a.shared()}, [](Node& self) {
        const Node& x = *self.inputs[0];
        Matrix g = Eigen::Map<const Matrix>(self.grad.data(), x.value.rows(), x.value.cols());
        self.inputs[0]->accumulate(g);
    });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw std::invalid_argument("slice_cols: out of range");
    Matrix out = a.value().middleCols(start, count);
    return make(std::move(out), {a.shared()}, [start, count](Node& self) {
        const Node& x = *self.inputs[0];
        Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
        g.middleCols(start, count) = self.grad;
        self.inputs[0]->accumulate(g);
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const Eigen::Index rows = parts.front().rows();
    Eigen::Index cols = 0;
    std::vector<NodePtr> inputs;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
        cols += p.cols();
        inputs.push_back(p.shared());
    }
    Matrix out(rows, cols);
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
        out.middleCols(offset, p.cols()) = p.value();
        offset += p.cols();
    }
    return make(std::move(out), std::move(inputs), [](Node& self) {
        Eigen::Index off = 0;
        for (auto& in : self.inputs) {
            const Eigen::Index c = in->value.cols();
            if (in->requires_grad) in->accumulate(self.grad.middleCols(off, c));
            off += c;
        }
    });
}

Var time_step(const Var& a, Eigen::Index batch, Eigen::Index steps, Eigen::Index t) {
    if (a.rows() != batch * steps || t < 0 || t >= steps) throw std::invalid_argument("time_step: bad layout");
    Matrix out(batch, a.cols());
    for (Eigen::Index b = 0; b < batch; ++b) out.row(b) = a.value().row(b * steps + t);
    return make(std::move(out), {a.shared()}, [batch, steps, t](Node& self) {
        const Node& x = *self.inputs[0];
        Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
        for (Eigen::Index b = 0; b < batch; ++b) g.row(b * steps + t) = self.grad.row(b);
        self.inputs[0]->accumulate(g);
    });
}

Var interleave_steps(std::span<const Var> steps) {
    if (steps.empty()) throw std::invalid_argument("interleave_steps: no inputs");
    const Eigen::Index batch = steps.front().rows();
    const Eigen::Index cols = steps.front().cols();
    const auto n = static_cast<Eigen::Index>(steps.size());
    Matrix out(batch * n, cols);
    std::vector<NodePtr> inputs;
    for (Eigen::Index t = 0; t < n; ++t) {
        const Var& s = steps[static_cast<std::size_t>(t)];
        if (s.rows() != batch || s.cols() != cols) throw std::invalid_argument("interleave_steps: shape mismatch");
        for (Eigen::Index b = 0; b < batch; ++b) out.row(b * n + t) = s.value().row(b);
        inputs.push_back(s.shared());
    }
    return make(std::move(out), std::move(inputs), [batch, n](Node& self) {
        for (Eigen::Index t = 0; t < n; ++t) {
            auto& in = self.inputs[static_cast<std::size_t>(t)];
            if (!in->requires_grad) continue;
            Matrix g(batch, self.grad.cols());
            for (Eigen::Index b = 0; b < batch; ++b) g.row(b) = self.grad.row(b * n + t);
            in->accumulate(g);
        }
    });
}

Var im2col_1d(const Var& x, Eigen::Index batch, Eigen::Index length, Eigen::Index kernel) {
    if (x.rows() != batch * length || kernel < 1) throw std::invalid_argument("im2col_1d: bad layout");
    const Eigen::Index c = x.cols();
    const Eigen::Index pad = (kernel - 1) / 2;
    Matrix out = Matrix::Zero(batch * length, kernel * c);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index t = 0; t < length; ++t) {
            for (Eigen::Index j = 0; j < kernel; ++j) {
                const Eigen::Index src = t + j - pad;
                if (src < 0 || src >= length) continue;
                out.block(b * length + t, j * c, 1, c) = x.value().row(b * length + src);
            }
        }
    }
    return make(std::move(out), {x.shared()}, [batch, length, kernel, c, pad](Node& self) {
        Matrix g = Matrix::Zero(batch * length, c);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (Eigen::Index t = 0; t < length; ++t) {
                for (Eigen::Index j = 0; j < kernel; ++j) {
                    const Eigen::Index src = t + j - pad;
                    if (src < 0 || src >= length) continue;
                    g.row(b * length + src) += self.grad.block(b * length + t, j * c, 1, c);
                }
            }
        }
        self.inputs[0]->accumulate(g);
    });
}

Var maxpool_time(const Var& x, Eigen::Index batch, Eigen::Index length, Eigen::Index width) {
    if (x.rows() != batch * length || width < 1) throw std::invalid_argument("maxpool_time: bad layout");
    const Eigen::Index out_len = length / width;
    if (out_len < 1) throw std::invalid_argument("maxpool_time: pooled length would be zero");
    const Eigen::Index c = x.cols();
    Matrix out(batch * out_len, c);
    std::vector<Eigen::Index> argmax(static_cast<std::size_t>(batch * out_len * c));
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index u = 0; u < out_len; ++u) {
            for (Eigen::Index ch = 0; ch < c; ++ch) {
                Eigen::Index best = b * length + u * width;
                for (Eigen::Index j = 1; j < width; ++j) {
                    const Eigen::Index r = b * length + u * width + j;
                    if (x.value()(r, ch) > x.value()(best, ch)) best = r;
                }
                out(b * out_len + u, ch) = x.value()(best, ch);
                argmax[static_cast<std::size_t>((b * out_len + u) * c + ch)] = best;
            }
        }
    }
    return make(std::move(out), {x.shared()}, [argmax = std::move(argmax), c](Node& self) {
        const Node& in = *self.inputs[0];
        Matrix g = Matrix::Zero(in.value.rows(), in.value.cols());
        for (Eigen::Index r = 0; r < self.grad.rows(); ++r) {
            for (Eigen::Index ch = 0; ch < c; ++ch) {
                g(argmax[static_cast<std::size_t>(r * c + ch)], ch) += self.grad(r, ch);
            }
        }
        self.inputs[0]->accumulate(g);
    });
}

Var mean_time(const Var& x, Eigen::Index batch, Eigen::Index length) {
    if (x.rows() != batch * length) throw std::invalid_argument("mean_time: bad layout");
    Matrix out(batch, x.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        out.row(b) = x.value().middleRows(b * length, length).colwise().mean();
    }
    return make(std::move(out), {x.shared()}, [batch, length](Node& self) {
        Matrix g(batch * length, self.grad.cols());
        for (Eigen::Index b = 0; b < batch; ++b) {
            g.middleRows(b * length, length) = (self.grad.row(b) / static_cast<double>(length)).replicate(length, 1);
        }
        self.inputs[0]->accumulate(g);
    });
}

Var batch_norm_train(const Var& x, const Var& gamma, const Var& beta, double eps,
                     RowVector* batch_mean, RowVector* batch_var) {
    const Eigen::Index n = x.rows();
    if (n < 1) throw std::invalid_argument("batch_norm_train: empty batch");
    RowVector mu = x.value().colwise().mean();
    Matrix centered = x.value().rowwise() - mu;
    RowVector var = centered.colwise().squaredNorm() / static_cast<double>(n);
    RowVector inv_std = (var.array() + eps).rsqrt();
    Matrix xhat = centered.array().rowwise() * inv_std.array();
    Matrix out = (xhat.array().rowwise() * RowVector(gamma.value()).array()).rowwise() +
                 RowVector(beta.value()).array();
    if (batch_mean) *batch_mean = mu;
    if (batch_var) *batch_var = var;
    return make(std::move(out), {x.shared(), gamma.shared(), beta.shared()},
                [xhat = std::move(xhat), inv_std = std::move(inv_std), n](Node& self) {
                    Node& in = *self.inputs[0];
                    Node& g = *self.inputs[1];
                    Node& b = *self.inputs[2];
                    if (b.requires_grad) b.accumulate(self.grad.colwise().sum());
                    if (g.requires_grad) g.accumulate(self.grad.cwiseProduct(xhat).colwise().sum());
                    if (in.requires_grad) {
                        Matrix dxhat = self.grad.array().rowwise() * RowVector(g.value).array();
                        RowVector sum_d = dxhat.colwise().sum();
                        RowVector sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
                        const double nn = static_cast<double>(n);
                        Matrix dx = (nn * dxhat.array()).rowwise() - sum_d.array();
                        dx.array() -= xhat.array().rowwise() * sum_dx.array();
                        dx = dx.array().rowwise() * (inv_std.array() / nn);
                        in.accumulate(dx);
                    }
                });
}

Var l2_normalize_rows(const Var& a, std::size_t* zero_rows) {
    const Eigen::Index n = a.rows();
    const Eigen::Index c = a.cols();
    ColVector norms = a.value().rowwise().norm();
    Matrix out(n, c);
    std::size_t zeros = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (norms(i) == 0.0) {
            // x + eps * 1 normalises to the uniform direction.
            out.row(i).setConstant(1.0 / std::sqrt(static_cast<double>(c)));
            ++zeros;
        } else {
            out.row(i) = a.value().row(i) / norms(i);
        }
    }
    if (zero_rows) *zero_rows += zeros;
    return make(std::move(out), {a.shared()}, [norms = std::move(norms)](Node& self) {
        Matrix g = Matrix::Zero(self.value.rows(), self.value.cols());
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            if (norms(i) == 0.0) continue;
            const double proj = self.grad.row(i).dot(self.value.row(i));
            g.row(i) = (self.grad.row(i) - proj * self.value.row(i)) / norms(i);
        }
        self.inputs[0]->accumulate(g);
    });
}

Var soft_boundary(const Var& scores, double r) {
    if (scores.cols() != 1 || scores.rows() < 1) throw std::invalid_argument("soft_boundary: expects an Nx1 column");
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("soft_boundary: r must lie in (0, 1]");
    const Eigen::Index n = scores.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& s = scores.value();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return s(i, 0) < s(j, 0); });
    auto rank = static_cast<Eigen::Index>(std::floor((1.0 - r) * static_cast<double>(n) + 1e-9));
    rank = std::min(rank, n - 1);
    const Eigen::Index sel = order[static_cast<std::size_t>(rank)];
    const double qau = s(sel, 0);
    const double denom = r * static_cast<double>(n);
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) hinge += std::max(0.0, s(i, 0) - qau);
    Matrix out(1, 1);
    out(0, 0) = qau + hinge / denom;
    return make(std::move(out), {scores.shared()}, [sel, qau, denom](Node& self) {
        const Node& in = *self.inputs[0];
        const double g = self.grad(0, 0);
        Matrix dx = Matrix::Zero(in.value.rows(), 1);
        double active = 0.0;
        for (Eigen::Index i = 0; i < dx.rows(); ++i) {
            if (in.value(i, 0) > qau) {
                dx(i, 0) += g / denom;
                active += 1.0;
            }
        }
        dx(sel, 0) += g * (1.0 - active / denom);
        self.inputs[0]->accumulate(dx);
    });
}

}  // namespace roca::ag
