#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace logicere {

/// Dense row-major array of doubles. Rank 1 tensors are treated as a single row.
class Tensor {
   public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double item() const;

    bool requires_grad = false;
    /// Empty until a gradient is accumulated; otherwise the same length as the data.
    std::vector<double> grad;

    void zero_grad();
    void ensure_grad();

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

   private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Entries uniform in [-bound, bound), a pure function of `key`.
Tensor random_uniform(std::vector<std::size_t> shape, double bound, std::uint64_t key);

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace logicere
