#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cfpred::nn {

/// Dense row-major matrix of 64-bit floats. All shapes are checked; a
/// mismatch throws ShapeMismatch. When debug checks are enabled (see
/// set_debug_checks) every operation asserts its output is finite.
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  Matrix(int rows, int cols, std::vector<double> data);

  static Matrix identity(int n);
  /// Builds a 1 x n row from an initializer-style vector.
  static Matrix row(const std::vector<double>& values);
  static Matrix column(const std::vector<double>& values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void fill(double value);

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Enables NaN/Inf assertions on the output of every matrix op (off by default).
void set_debug_checks(bool enabled);
bool debug_checks_enabled();
/// Throws Error if any entry is NaN or Inf (no-op unless debug checks are on).
void debug_check(const Matrix& m, const char* where);

// Core linear algebra. All return freshly-allocated results.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b); ///< transpose(a) * b
Matrix matmul_nt(const Matrix& a, const Matrix& b); ///< a * transpose(b)
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
Matrix transpose(const Matrix& a);
Matrix concat_cols(const Matrix& a, const Matrix& b);
/// Columns [begin, end) of a.
Matrix slice_cols(const Matrix& a, int begin, int end);
/// Copies src into dst starting at column offset (same row count).
void paste_cols(Matrix& dst, int offset, const Matrix& src);

// In-place helpers for hot paths.
void add_in_place(Matrix& a, const Matrix& b);
void sub_in_place(Matrix& a, const Matrix& b);
void hadamard_in_place(Matrix& a, const Matrix& b);
void scale_in_place(Matrix& a, double factor);
void axpy(Matrix& a, double factor, const Matrix& b); ///< a += factor * b
void matmul_acc(Matrix& out, const Matrix& a, const Matrix& b);    ///< out += a * b
void matmul_tn_acc(Matrix& out, const Matrix& a, const Matrix& b); ///< out += transpose(a) * b
void matmul_nt_acc(Matrix& out, const Matrix& a, const Matrix& b); ///< out += a * transpose(b)

/// a + row broadcast over every row of a (row must be 1 x a.cols()).
Matrix add_row_broadcast(const Matrix& a, const Matrix& row);
void add_row_broadcast_in_place(Matrix& a, const Matrix& row);
/// Column vector (rows x 1) of per-row sums.
Matrix row_sums(const Matrix& a);
/// Row vector (1 x cols) of per-column sums.
Matrix col_sums(const Matrix& a);
void col_sums_acc(Matrix& out, const Matrix& a); ///< out (1 x cols) += column sums
/// Column j of a as a rows x 1 matrix.
Matrix get_col(const Matrix& a, int j);
void set_col(Matrix& a, int j, const Matrix& col);
/// Each row i of a scaled by col(i, 0).
Matrix scale_rows(const Matrix& a, const Matrix& col);
void scale_rows_acc(Matrix& out, const Matrix& a, const Matrix& col); ///< out += scale_rows(a, col)
/// Column vector of per-row dot products of a and b (same shape).
Matrix row_dots(const Matrix& a, const Matrix& b);

// Elementwise nonlinearities and their derivative-given-output forms.
Matrix sigmoid(const Matrix& x);
Matrix tanh_act(const Matrix& x);
Matrix relu(const Matrix& x);
/// Row-wise softmax, max-subtracted for stability.
Matrix softmax_rows(const Matrix& x);
Matrix sigmoid_grad(const Matrix& y); ///< y * (1 - y), y = sigmoid output
Matrix tanh_grad(const Matrix& y);    ///< 1 - y^2, y = tanh output
Matrix relu_grad(const Matrix& y);    ///< 1 where y > 0 else 0, y = relu output

std::string shape_string(const Matrix& m);

} // namespace cfpred::nn
