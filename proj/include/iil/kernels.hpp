#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace iil {

/// Row-major dense matrix; one row per sample in a batch.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  std::span<double> row_span(std::size_t r) { return {row(r), cols}; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
};

// Dense-layer kernels. Weights are (out x in) row-major. The parallel versions
// accumulate every output element in the same order as the serial reference,
// so both paths produce bit-identical results for any thread count.
namespace kernels {

// y[r][o] = b[o] + sum_i x[r][i] * w[o][i]
void dense_forward(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& y);

// gw[o][i] = sum_r delta[r][o] * x[r][i];  gb[o] = sum_r delta[r][o]
void dense_backward_params(const Matrix& delta, const Matrix& x, std::span<double> gw, std::span<double> gb);

// dx[r][i] = sum_o delta[r][o] * w[o][i]
void dense_backward_input(const Matrix& delta, std::span<const double> w, std::size_t in_dim, Matrix& dx);

// In-place Leaky ReLU; `pre` keeps the pre-activation for the backward pass.
void leaky_relu(Matrix& z, double slope);

// delta[k] *= (pre[k] > 0 ? 1 : slope)
void leaky_relu_backward(const Matrix& pre, double slope, Matrix& delta);

// Row-wise numerically stable softmax.
void softmax_rows(Matrix& z);

namespace serial {
void dense_forward(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& y);
void dense_backward_params(const Matrix& delta, const Matrix& x, std::span<double> gw, std::span<double> gb);
void dense_backward_input(const Matrix& delta, std::span<const double> w, std::size_t in_dim, Matrix& dx);
void leaky_relu(Matrix& z, double slope);
void leaky_relu_backward(const Matrix& pre, double slope, Matrix& delta);
void softmax_rows(Matrix& z);
}  // namespace serial

// Work (multiply-adds) below which the parallel kernels stay on one thread.
inline constexpr std::size_t kParallelWorkThreshold = 16384;

}  // namespace kernels
}  // namespace iil
