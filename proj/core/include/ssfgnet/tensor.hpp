#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ssfgnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles.
///
/// Rank 0 (scalar), rank 1 and rank 2 are used throughout; higher ranks are
/// representable but no op consumes them.
class Tensor {
public:
    /// Scalar zero.
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);
    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t numel() const noexcept { return data_.size(); }

    /// Rows of a rank-2 tensor; a rank-1 tensor counts as one row.
    std::size_t rows() const;
    /// Columns of a rank-2 tensor; a rank-1 tensor's length.
    std::size_t cols() const;

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::vector<double>& storage() noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    const double& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> row(std::size_t r);
    std::span<const double> row(std::size_t r) const;

    /// The single value of a one-element tensor.
    double item() const;

    void fill(double v);
    /// this += other (shapes must match).
    void add_inplace(const Tensor& other);
    /// this += s * other.
    void axpy(double s, const Tensor& other);

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_{0.0};
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace ssfgnet
