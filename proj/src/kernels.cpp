#include "iil/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "iil/common.hpp"

namespace iil {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  if (rows.empty()) return m;
  m.rows = rows.size();
  m.cols = rows.front().size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw ShapeError("ragged rows in matrix");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

namespace kernels {

namespace {

void check_forward(const Matrix& x, std::span<const double> w, std::span<const double> b, const Matrix& y) {
  if (w.size() != b.size() * x.cols || y.rows != x.rows || y.cols != b.size())
    throw ShapeError("dense_forward: inconsistent shapes");
}

void check_params(const Matrix& delta, const Matrix& x, std::span<double> gw, std::span<double> gb) {
  if (delta.rows != x.rows || gb.size() != delta.cols || gw.size() != delta.cols * x.cols)
    throw ShapeError("dense_backward_params: inconsistent shapes");
}

}  // namespace

namespace serial {

void dense_forward(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& y) {
  check_forward(x, w, b, y);
  const std::size_t in = x.cols;
  const std::size_t out = b.size();
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double* yr = y.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w.data() + o * in;
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
}

void dense_backward_params(const Matrix& delta, const Matrix& x, std::span<double> gw, std::span<double> gb) {
  check_params(delta, x, gw, gb);
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
  const std::size_t in = x.cols;
  for (std::size_t r = 0; r < delta.rows; ++r) {
    const double* dr = delta.row(r);
    const double* xr = x.row(r);
    for (std::size_t o = 0; o < delta.cols; ++o) {
      gb[o] += dr[o];
      double* go = gw.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) go[i] += dr[o] * xr[i];
    }
  }
}

void dense_backward_input(const Matrix& delta, std::span<const double> w, std::size_t in_dim, Matrix& dx) {
  if (w.size() != delta.cols * in_dim || dx.rows != delta.rows || dx.cols != in_dim)
    throw ShapeError("dense_backward_input: inconsistent shapes");
  std::fill(dx.data.begin(), dx.data.end(), 0.0);
  for (std::size_t r = 0; r < delta.rows; ++r) {
    const double* dr = delta.row(r);
    double* xr = dx.row(r);
    for (std::size_t o = 0; o < delta.cols; ++o) {
      const double* wo = w.data() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) xr[i] += dr[o] * wo[i];
    }
  }
}

void leaky_relu(Matrix& z, double slope) {
  for (double& v : z.data)
    if (!(v > 0.0)) v *= slope;
}

void leaky_relu_backward(const Matrix& pre, double slope, Matrix& delta) {
  for (std::size_t k = 0; k < delta.data.size(); ++k)
    if (!(pre.data[k] > 0.0)) delta.data[k] *= slope;
}

void softmax_rows(Matrix& z) {
  for (std::size_t r = 0; r < z.rows; ++r) {
    double* zr = z.row(r);
    const double mx = *std::max_element(zr, zr + z.cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < z.cols; ++c) {
      zr[c] = std::exp(zr[c] - mx);
      sum += zr[c];
    }
    for (std::size_t c = 0; c < z.cols; ++c) zr[c] /= sum;
  }
}

}  // namespace serial

void dense_forward(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& y) {
  check_forward(x, w, b, y);
  const std::size_t in = x.cols;
  const std::size_t out = b.size();
  const auto rows = static_cast<long>(x.rows);
  const bool par = x.rows * in * out >= kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long r = 0; r < rows; ++r) {
    const double* xr = x.row(static_cast<std::size_t>(r));
    double* yr = y.row(static_cast<std::size_t>(r));
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w.data() + o * in;
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
}

void dense_backward_params(const Matrix& delta, const Matrix& x, std::span<double> gw, std::span<double> gb) {
  check_params(delta, x, gw, gb);
  const std::size_t in = x.cols;
  const auto out = static_cast<long>(delta.cols);
  const bool par = delta.rows * in * delta.cols >= kParallelWorkThreshold;
  // Each thread owns whole output rows of the gradient; the batch sum keeps the
  // serial order r = 0..rows-1.
#pragma omp parallel for schedule(static) if (par)
  for (long o = 0; o < out; ++o) {
    const auto uo = static_cast<std::size_t>(o);
    double* go = gw.data() + uo * in;
    std::fill(go, go + in, 0.0);
    double bsum = 0.0;
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double d = delta(r, uo);
      const double* xr = x.row(r);
      bsum += d;
      for (std::size_t i = 0; i < in; ++i) go[i] += d * xr[i];
    }
    gb[uo] = bsum;
  }
}

void dense_backward_input(const Matrix& delta, std::span<const double> w, std::size_t in_dim, Matrix& dx) {
  if (w.size() != delta.cols * in_dim || dx.rows != delta.rows || dx.cols != in_dim)
    throw ShapeError("dense_backward_input: inconsistent shapes");
  const auto rows = static_cast<long>(delta.rows);
  const bool par = delta.rows * in_dim * delta.cols >= kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long r = 0; r < rows; ++r) {
    const double* dr = delta.row(static_cast<std::size_t>(r));
    double* xr = dx.row(static_cast<std::size_t>(r));
    std::fill(xr, xr + in_dim, 0.0);
    for (std::size_t o = 0; o < delta.cols; ++o) {
      const double* wo = w.data() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) xr[i] += dr[o] * wo[i];
    }
  }
}

void leaky_relu(Matrix& z, double slope) {
  const auto n = static_cast<long>(z.data.size());
  double* p = z.data.data();
#pragma omp parallel for schedule(static) if (z.data.size() >= kParallelWorkThreshold)
  for (long k = 0; k < n; ++k)
    if (!(p[k] > 0.0)) p[k] *= slope;
}

void leaky_relu_backward(const Matrix& pre, double slope, Matrix& delta) {
  const auto n = static_cast<long>(delta.data.size());
  double* d = delta.data.data();
  const double* p = pre.data.data();
#pragma omp parallel for schedule(static) if (delta.data.size() >= kParallelWorkThreshold)
  for (long k = 0; k < n; ++k)
    if (!(p[k] > 0.0)) d[k] *= slope;
}

void softmax_rows(Matrix& z) {
  const auto rows = static_cast<long>(z.rows);
#pragma omp parallel for schedule(static) if (z.data.size() >= kParallelWorkThreshold)
  for (long r = 0; r < rows; ++r) {
    double* zr = z.row(static_cast<std::size_t>(r));
    const double mx = *std::max_element(zr, zr + z.cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < z.cols; ++c) {
      zr[c] = std::exp(zr[c] - mx);
      sum += zr[c];
    }
    for (std::size_t c = 0; c < z.cols; ++c) zr[c] /= sum;
  }
}

}  // namespace kernels
}  // namespace iil
