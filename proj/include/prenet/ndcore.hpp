#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "prenet/rng.hpp"

namespace prenet {

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Copy of the listed rows, in order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a × b with the inner sum over k in ascending order. Throws ShapeError.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Elementwise max(0, x).
Matrix relu(const Matrix& x);

/// Adds `bias` to every row. Throws ShapeError if bias.size() != x.cols().
void add_row_vector(Matrix& x, std::span<const double> bias);

/// Entries i.i.d. uniform on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
/// Throws DomainError on a zero fan.
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(θ + h e_i) - f(θ - h e_i)) / 2h for every coordinate.
/// Throws ArgumentError for h <= 0 and NumericError if f is non-finite at a probe.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> theta,
                                     double h);

}  // namespace prenet
