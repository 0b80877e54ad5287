#include "logicere/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "logicere/rng.hpp"

namespace logicere {

namespace kp = kernels::parallel;

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, nullptr, nullptr, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::param(Tensor& t) {
    nodes_.push_back(Node{t, {}, {}, nullptr, &t, t.requires_grad});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
    bool needs = false;
    for (auto i : inputs) needs = needs || nodes_[i].needs_grad;
    nodes_.push_back(Node{std::move(value), {}, std::move(inputs), needs ? std::move(fn) : nullptr,
                          nullptr, needs});
    return Var(this, nodes_.size() - 1);
}

std::vector<double>& Tape::grad(std::size_t id) {
    auto& n = nodes_[id];
    if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
    return n.grad;
}

void Tape::backward(const Var& loss) {
    if (loss.tape() != this) throw std::invalid_argument("backward: loss recorded on another tape");
    if (nodes_[loss.id()].value.size() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " +
                                    shape_string(nodes_[loss.id()].value.shape()));
    }
    if (!nodes_[loss.id()].needs_grad) {
        throw std::logic_error("backward: loss does not depend on any differentiable tensor");
    }
    grad(loss.id())[0] += 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        auto& n = nodes_[id];
        if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
        n.backward(*this, id);
    }
}

void Tape::accumulate_param_grads() const {
    for (const auto& n : nodes_) {
        if (!n.bound || !n.bound->requires_grad || n.grad.empty()) continue;
        n.bound->ensure_grad();
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.bound->grad[i] += n.grad[i];
    }
}

void Tape::visit_param_grads(
    const std::function<void(const Tensor&, const std::vector<double>&)>& f) const {
    for (const auto& n : nodes_) {
        if (n.bound && n.bound->requires_grad && !n.grad.empty()) f(*n.bound, n.grad);
    }
}

namespace ad {

namespace {

Tape& tape_of(const Var& a) {
    if (!a.valid()) throw std::invalid_argument("autodiff: uninitialized Var");
    return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
    if (a.tape() != b.tape()) throw std::invalid_argument("autodiff: operands on different tapes");
    return tape_of(a);
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value())) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_string(a.value().shape()) + " vs " +
                                    shape_string(b.value().shape()));
    }
}

template <typename F, typename D>
Var unary(const Var& a, F f, D df) {
    Tape& t = tape_of(a);
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    const std::size_t ai = a.id();
    return t.record(std::move(y), {ai}, [ai, df](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        const Tensor& xv = tp.value(ai);
        const Tensor& yv = tp.value(self);
        auto& gx = tp.grad(ai);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
    });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    if (bv.rows() != k) {
        throw std::invalid_argument("matmul: inner dimensions differ " + shape_string(av.shape()) +
                                    " x " + shape_string(bv.shape()));
    }
    Tensor c = Tensor::matrix(m, n);
    kp::matmul(av.data(), bv.data(), c.data(), m, k, n);
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(c), {ai, bi}, [ai, bi, m, k, n](Tape& tp, std::size_t self) {
        const auto& gc = tp.grad(self);
        if (tp.needs_grad(ai)) {
            kp::matmul_nt_acc(gc, tp.value(bi).data(), tp.grad(ai), m, n, k);
        }
        if (tp.needs_grad(bi)) {
            kp::matmul_tn_acc(tp.value(ai).data(), gc, tp.grad(bi), k, m, n);
        }
    });
}

Var transpose(const Var& a) {
    Tape& t = tape_of(a);
    const Tensor& x = a.value();
    const std::size_t r = x.rows(), c = x.cols();
    Tensor y = Tensor::matrix(c, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) y(j, i) = x(i, j);
    const std::size_t ai = a.id();
    return t.record(std::move(y), {ai}, [ai, r, c](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        auto& gx = tp.grad(ai);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += gy[j * r + i];
    });
}

Var add(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    require_same_shape(a, b, "add");
    Tensor y(a.value().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        for (auto in : {ai, bi}) {
            if (!tp.needs_grad(in)) continue;
            auto& g = tp.grad(in);
            for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    require_same_shape(a, b, "sub");
    Tensor y(a.value().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] - b.value()[i];
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        if (tp.needs_grad(ai)) {
            auto& g = tp.grad(ai);
            for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
        }
        if (tp.needs_grad(bi)) {
            auto& g = tp.grad(bi);
            for (std::size_t i = 0; i < gy.size(); ++i) g[i] -= gy[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    require_same_shape(a, b, "mul");
    Tensor y(a.value().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * b.value()[i];
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        if (tp.needs_grad(ai)) {
            auto& g = tp.grad(ai);
            const Tensor& bv = tp.value(bi);
            for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i] * bv[i];
        }
        if (tp.needs_grad(bi)) {
            auto& g = tp.grad(bi);
            const Tensor& av = tp.value(ai);
            for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i] * av[i];
        }
    });
}

Var scale(const Var& a, double s) {
    return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var tanh(const Var& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Var exp(const Var& a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var log_clamped(const Var& a, double floor) {
    return unary(a, [floor](double x) { return std::log(std::max(x, floor)); },
                 [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var abs(const Var& a) {
    return unary(a, [](double x) { return std::abs(x); },
                 [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var relu(const Var& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sum(const Var& a) {
    Tape& t = tape_of(a);
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    const std::size_t ai = a.id();
    return t.record(Tensor::scalar(s), {ai}, [ai](Tape& tp, std::size_t self) {
        const double gy = tp.grad(self)[0];
        for (auto& g : tp.grad(ai)) g += gy;
    });
}

Var mean(const Var& a) {
    const auto n = static_cast<double>(a.value().size());
    if (n == 0) throw std::invalid_argument("mean: empty tensor");
    return scale(sum(a), 1.0 / n);
}

Var reshape(const Var& a, std::vector<std::size_t> shape) {
    Tape& t = tape_of(a);
    Tensor y(std::move(shape), a.value().values());
    const std::size_t ai = a.id();
    return t.record(std::move(y), {ai}, [ai](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        auto& gx = tp.grad(ai);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    Tape& t = tape_of(parts[0]);
    const std::size_t rows = parts[0].rows();
    std::vector<std::size_t> ids, widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        tape_of(parts[0], p);
        if (p.rows() != rows) throw std::invalid_argument("concat_cols: row counts differ");
        ids.push_back(p.id());
        widths.push_back(p.cols());
        total += p.cols();
    }
    Tensor y = Tensor::matrix(rows, total);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const Tensor& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(v.data().data() + r * v.cols(), v.cols(), y.data().data() + r * total + off);
        off += v.cols();
    }
    return t.record(std::move(y), ids, [ids, widths, rows, total](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        std::size_t off = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
            if (tp.needs_grad(ids[p])) {
                auto& g = tp.grad(ids[p]);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < widths[p]; ++c) g[r * widths[p] + c] += gy[r * total + off + c];
            }
            off += widths[p];
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
    Tape& t = tape_of(parts[0]);
    const std::size_t cols = parts[0].cols();
    std::vector<std::size_t> ids, sizes;
    std::size_t rows = 0;
    std::vector<double> data;
    for (const auto& p : parts) {
        tape_of(parts[0], p);
        if (p.cols() != cols) throw std::invalid_argument("concat_rows: column counts differ");
        ids.push_back(p.id());
        sizes.push_back(p.value().size());
        rows += p.rows();
        data.insert(data.end(), p.value().values().begin(), p.value().values().end());
    }
    return t.record(Tensor({rows, cols}, std::move(data)), ids,
                    [ids, sizes](Tape& tp, std::size_t self) {
                        const auto& gy = tp.grad(self);
                        std::size_t off = 0;
                        for (std::size_t p = 0; p < ids.size(); ++p) {
                            if (tp.needs_grad(ids[p])) {
                                auto& g = tp.grad(ids[p]);
                                for (std::size_t i = 0; i < sizes[p]; ++i) g[i] += gy[off + i];
                            }
                            off += sizes[p];
                        }
                    });
}

Var gather_rows(const Var& a, std::span<const std::size_t> idx) {
    Tape& t = tape_of(a);
    const Tensor& x = a.value();
    const std::size_t c = x.cols();
    Tensor y = Tensor::matrix(idx.size(), c);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.rows()) throw std::out_of_range("gather_rows: index out of range");
        std::copy_n(x.data().data() + idx[i] * c, c, y.data().data() + i * c);
    }
    const std::size_t ai = a.id();
    std::vector<std::size_t> rows(idx.begin(), idx.end());
    return t.record(std::move(y), {ai}, [ai, c, rows = std::move(rows)](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        auto& gx = tp.grad(ai);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < c; ++j) gx[rows[i] * c + j] += gy[i * c + j];
    });
}

Var gather(const Var& a, std::span<const std::size_t> idx, std::vector<std::size_t> shape) {
    Tape& t = tape_of(a);
    const Tensor& x = a.value();
    std::vector<double> data(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.size()) throw std::out_of_range("gather: index out of range");
        data[i] = x[idx[i]];
    }
    const std::size_t ai = a.id();
    std::vector<std::size_t> where(idx.begin(), idx.end());
    return t.record(Tensor(std::move(shape), std::move(data)), {ai},
                    [ai, where = std::move(where)](Tape& tp, std::size_t self) {
                        const auto& gy = tp.grad(self);
                        auto& gx = tp.grad(ai);
                        for (std::size_t i = 0; i < where.size(); ++i) gx[where[i]] += gy[i];
                    });
}

Var softmax_rows(const Var& x, std::span<const unsigned char> mask, kernels::EmptyRow empty) {
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    const std::size_t m = xv.rows(), n = xv.cols();
    if (!mask.empty() && mask.size() != xv.size()) {
        throw std::invalid_argument("softmax_rows: mask shape mismatch");
    }
    Tensor y(xv.shape());
    kp::softmax_rows(xv.data(), mask, y.data(), m, n, empty);
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi}, [xi, m, n](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        const Tensor& yv = tp.value(self);
        auto& gx = tp.grad(xi);
        for (std::size_t r = 0; r < m; ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += yv[r * n + j] * gy[r * n + j];
            for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += yv[r * n + j] * (gy[r * n + j] - dot);
        }
    });
}

Var log_softmax_rows(const Var& x) {
    Tape& t = tape_of(x);
    const Tensor& xv = x.value();
    const std::size_t m = xv.rows(), n = xv.cols();
    Tensor y(xv.shape());
    kp::log_softmax_rows(xv.data(), y.data(), m, n);
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi}, [xi, m, n](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        const Tensor& yv = tp.value(self);
        auto& gx = tp.grad(xi);
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += gy[r * n + j];
            for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += gy[r * n + j] - std::exp(yv[r * n + j]) * s;
        }
    });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
    Tape& t = tape_of(x, gain);
    tape_of(x, bias);
    const Tensor& xv = x.value();
    const std::size_t m = xv.rows(), n = xv.cols();
    if (n == 0) throw std::invalid_argument("layer_norm_rows: zero-width rows");
    if (gain.value().size() != n || bias.value().size() != n) {
        throw std::invalid_argument("layer_norm_rows: gain/bias width mismatch");
    }
    Tensor y(xv.shape());
    std::vector<double> xhat(xv.size()), inv_std(m);
    kp::layer_norm_rows(xv.data(), gain.value().data(), bias.value().data(), eps, y.data(), xhat,
                        inv_std, m, n);
    const std::size_t xi = x.id(), gi = gain.id(), bi = bias.id();
    return t.record(
        std::move(y), {xi, gi, bi},
        [xi, gi, bi, m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp,
                                                                                 std::size_t self) {
            const auto& gy = tp.grad(self);
            const Tensor& gv = tp.value(gi);
            if (tp.needs_grad(gi)) {
                auto& gg = tp.grad(gi);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < n; ++j) gg[j] += gy[r * n + j] * xhat[r * n + j];
            }
            if (tp.needs_grad(bi)) {
                auto& gb = tp.grad(bi);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < n; ++j) gb[j] += gy[r * n + j];
            }
            if (tp.needs_grad(xi)) {
                auto& gx = tp.grad(xi);
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t r = 0; r < m; ++r) {
                    double s1 = 0.0, s2 = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dxh = gy[r * n + j] * gv[j];
                        s1 += dxh;
                        s2 += dxh * xhat[r * n + j];
                    }
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dxh = gy[r * n + j] * gv[j];
                        gx[r * n + j] += inv_std[r] * inv_n *
                                         (static_cast<double>(n) * dxh - s1 - xhat[r * n + j] * s2);
                    }
                }
            }
        });
}

Var dropout(const Var& x, double rate, std::uint64_t rng_key, bool training) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) return x;
    Tape& t = tape_of(x);
    std::vector<double> keep = dropout_scale(x.value().size(), rate, rng_key);
    Tensor y(x.value().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.value()[i] * keep[i];
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi}, [xi, keep = std::move(keep)](Tape& tp, std::size_t self) {
        const auto& gy = tp.grad(self);
        auto& gx = tp.grad(xi);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * keep[i];
    });
}

}  // namespace ad

std::vector<double> dropout_scale(std::size_t n, double rate, std::uint64_t rng_key) {
    std::vector<double> keep(n);
    const double s = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) keep[i] = counter_uniform(rng_key, i) >= rate ? s : 0.0;
    return keep;
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
    auto [it, inserted] = params_.emplace(name, std::move(t));
    if (!inserted) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
    return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return it->second;
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.size();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [_, t] : params_) t.zero_grad();
}

bool ParamStore::operator==(const ParamStore& o) const {
    if (params_.size() != o.params_.size()) return false;
    for (const auto& [name, t] : params_) {
        auto it = o.params_.find(name);
        if (it == o.params_.end() || !(it->second == t)) return false;
    }
    return true;
}

GradcheckReport gradcheck(const Objective& f, ParamStore& params, double h, double tol) {
    GradcheckReport report;
    report.tolerance = tol;
    params.zero_grad();
    f(params, true);
    std::map<std::string, std::vector<double>> analytic;
    for (auto& [name, t] : params) {
        if (!t.requires_grad) continue;
        t.ensure_grad();
        analytic[name] = t.grad;
    }
    for (auto& [name, t] : params) {
        if (!t.requires_grad) continue;
        const auto& a = analytic[name];
        double max_diff = 0.0, max_a = 0.0, max_n = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double orig = t[i];
            t[i] = orig + h;
            const double fp = f(params, false);
            t[i] = orig - h;
            const double fm = f(params, false);
            t[i] = orig;
            const double num = (fp - fm) / (2.0 * h);
            max_diff = std::max(max_diff, std::abs(a[i] - num));
            max_a = std::max(max_a, std::abs(a[i]));
            max_n = std::max(max_n, std::abs(num));
        }
        const double denom = std::max(max_a, max_n);
        const double rel = denom > 0.0 ? max_diff / denom : 0.0;
        report.tensors.push_back({name, rel});
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    report.passed = report.max_rel_error <= tol;
    return report;
}

std::string checkpoint_to_string(const Checkpoint& ckpt) {
    nlohmann::ordered_json j;
    j["format"] = kCheckpointFormat;
    j["config_hash"] = ckpt.config_hash;
    j["config"] = ckpt.config_json.empty() ? nlohmann::ordered_json::object()
                                           : nlohmann::ordered_json::parse(ckpt.config_json);
    auto& ps = j["params"] = nlohmann::ordered_json::object();
    for (const auto& [name, t] : ckpt.params) {
        ps[name] = {{"shape", t.shape()}, {"values", t.values()}};
    }
    return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(std::string_view text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
        throw std::runtime_error("checkpoint: unrecognized format");
    }
    Checkpoint c;
    c.config_hash = j.at("config_hash").get<std::string>();
    c.config_json = j.at("config").dump();
    for (const auto& [name, v] : j.at("params").items()) {
        auto shape = v.at("shape").get<std::vector<std::size_t>>();
        auto values = v.at("values").get<std::vector<double>>();
        Tensor& t = c.params.add(name, Tensor(std::move(shape), std::move(values)));
        t.requires_grad = true;
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out << checkpoint_to_string(ckpt);
    if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace logicere
