#include "logicere/tensor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "logicere/rng.hpp"

namespace logicere {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_)) {
        throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw std::invalid_argument("Tensor::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::rows() const {
    if (shape_.size() <= 1) return 1;
    if (shape_.size() == 2) return shape_[0];
    throw std::logic_error("Tensor::rows: rank > 2");
}

std::size_t Tensor::cols() const {
    if (shape_.empty()) return 1;
    if (shape_.size() == 1) return shape_[0];
    if (shape_.size() == 2) return shape_[1];
    throw std::logic_error("Tensor::cols: rank > 2");
}

double Tensor::item() const {
    if (data_.size() != 1) throw std::logic_error("Tensor::item: not a scalar " + shape_string(shape_));
    return data_[0];
}

void Tensor::zero_grad() { grad.assign(data_.size(), 0.0); }

void Tensor::ensure_grad() {
    if (grad.size() != data_.size()) grad.assign(data_.size(), 0.0);
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor random_uniform(std::vector<std::size_t> shape, double bound, std::uint64_t key) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = bound * (2.0 * counter_uniform(key, i) - 1.0);
    return t;
}

double standard_normal(std::mt19937_64& eng) {
    double u1 = uniform(eng);
    double u2 = uniform(eng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace logicere
