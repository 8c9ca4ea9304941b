#include "cfpred/matrix.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

#include "cfpred/errors.hpp"

namespace cfpred::nn {

namespace {

std::atomic<bool> g_debug_checks{false};

void require(bool condition, const char* what) {
  if (!condition) {
    throw ShapeMismatch(what);
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(where) + ": " + shape_string(a) + " vs " + shape_string(b));
  }
}

} // namespace

Matrix::Matrix(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeMismatch("Matrix: data length does not match rows*cols");
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Matrix Matrix::row(const std::vector<double>& values) {
  return Matrix(1, static_cast<int>(values.size()), values);
}

Matrix Matrix::column(const std::vector<double>& values) {
  return Matrix(static_cast<int>(values.size()), 1, values);
}

void Matrix::fill(double value) {
  for (double& v : data_) {
    v = value;
  }
}

void set_debug_checks(bool enabled) { g_debug_checks.store(enabled); }
bool debug_checks_enabled() { return g_debug_checks.load(); }

void debug_check(const Matrix& m, const char* where) {
  if (!g_debug_checks.load(std::memory_order_relaxed)) {
    return;
  }
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(p[i])) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: non-finite value at flat index %zu", where, i);
      throw Error(buf);
    }
  }
}

std::string shape_string(const Matrix& m) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%dx%d", m.rows(), m.cols());
  return buf;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  matmul_acc(out, a, b);
  debug_check(out, "matmul");
  return out;
}

void matmul_acc(Matrix& out, const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  require(out.rows() == a.rows() && out.cols() == b.cols(), "matmul: output shape");
  const int m = a.rows();
  const int k = a.cols();
  const int n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  // i-k-j order: streams over b and out rows, friendly to row-major storage.
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<std::size_t>(i) * k;
    double* orow = po + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) {
        continue;
      }
      const double* brow = pb + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  matmul_tn_acc(out, a, b);
  debug_check(out, "matmul_tn");
  return out;
}

void matmul_tn_acc(Matrix& out, const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  require(out.rows() == a.cols() && out.cols() == b.cols(), "matmul_tn: output shape");
  const int m = a.cols();
  const int k = a.rows();
  const int n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (int kk = 0; kk < k; ++kk) {
    const double* arow = pa + static_cast<std::size_t>(kk) * m;
    const double* brow = pb + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) {
        continue;
      }
      double* orow = po + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  matmul_nt_acc(out, a, b);
  debug_check(out, "matmul_nt");
  return out;
}

void matmul_nt_acc(Matrix& out, const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  require(out.rows() == a.rows() && out.cols() == b.rows(), "matmul_nt: output shape");
  const int m = a.rows();
  const int k = a.cols();
  const int n = b.rows();
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<std::size_t>(i) * k;
    double* orow = po + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = pb + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        acc += arow[kk] * brow[kk];
      }
      orow[j] += acc;
    }
  }
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  add_in_place(out, b);
  debug_check(out, "add");
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  sub_in_place(out, b);
  debug_check(out, "sub");
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  hadamard_in_place(out, b);
  debug_check(out, "hadamard");
  return out;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix out = a;
  scale_in_place(out, factor);
  debug_check(out, "scale");
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add_in_place");
  double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[i] += pb[i];
  }
}

void sub_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub_in_place");
  double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[i] -= pb[i];
  }
}

void hadamard_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard_in_place");
  double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[i] *= pb[i];
  }
}

void scale_in_place(Matrix& a, double factor) {
  double* pa = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[i] *= factor;
  }
}

void axpy(Matrix& a, double factor, const Matrix& b) {
  require_same_shape(a, b, "axpy");
  double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[i] += factor * pb[i];
  }
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "concat_cols: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out(i, j) = a(i, j);
    }
    for (int j = 0; j < b.cols(); ++j) {
      out(i, a.cols() + j) = b(i, j);
    }
  }
  return out;
}

Matrix slice_cols(const Matrix& a, int begin, int end) {
  require(0 <= begin && begin <= end && end <= a.cols(), "slice_cols: range out of bounds");
  Matrix out(a.rows(), end - begin);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = begin; j < end; ++j) {
      out(i, j - begin) = a(i, j);
    }
  }
  return out;
}

void paste_cols(Matrix& dst, int offset, const Matrix& src) {
  require(src.rows() == dst.rows() && offset >= 0 && offset + src.cols() <= dst.cols(),
          "paste_cols: shape");
  for (int i = 0; i < src.rows(); ++i) {
    for (int j = 0; j < src.cols(); ++j) {
      dst(i, offset + j) = src(i, j);
    }
  }
}

Matrix add_row_broadcast(const Matrix& a, const Matrix& row) {
  Matrix out = a;
  add_row_broadcast_in_place(out, row);
  return out;
}

void add_row_broadcast_in_place(Matrix& a, const Matrix& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row_broadcast: row shape");
  const double* pr = row.data();
  for (int i = 0; i < a.rows(); ++i) {
    double* pa = a.data() + static_cast<std::size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) {
      pa[j] += pr[j];
    }
  }
}

Matrix row_sums(const Matrix& a) {
  Matrix out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
      acc += a(i, j);
    }
    out(i, 0) = acc;
  }
  return out;
}

Matrix col_sums(const Matrix& a) {
  Matrix out(1, a.cols());
  col_sums_acc(out, a);
  return out;
}

void col_sums_acc(Matrix& out, const Matrix& a) {
  require(out.rows() == 1 && out.cols() == a.cols(), "col_sums_acc: output shape");
  double* po = out.data();
  for (int i = 0; i < a.rows(); ++i) {
    const double* pa = a.data() + static_cast<std::size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) {
      po[j] += pa[j];
    }
  }
}

Matrix get_col(const Matrix& a, int j) {
  require(0 <= j && j < a.cols(), "get_col: index out of bounds");
  Matrix out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    out(i, 0) = a(i, j);
  }
  return out;
}

void set_col(Matrix& a, int j, const Matrix& col) {
  require(0 <= j && j < a.cols() && col.rows() == a.rows() && col.cols() == 1, "set_col: shape");
  for (int i = 0; i < a.rows(); ++i) {
    a(i, j) = col(i, 0);
  }
}

Matrix scale_rows(const Matrix& a, const Matrix& col) {
  Matrix out(a.rows(), a.cols());
  scale_rows_acc(out, a, col);
  return out;
}

void scale_rows_acc(Matrix& out, const Matrix& a, const Matrix& col) {
  require(col.rows() == a.rows() && col.cols() == 1, "scale_rows: column shape");
  require(out.same_shape(a), "scale_rows: output shape");
  for (int i = 0; i < a.rows(); ++i) {
    const double s = col(i, 0);
    const double* pa = a.data() + static_cast<std::size_t>(i) * a.cols();
    double* po = out.data() + static_cast<std::size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) {
      po[j] += s * pa[j];
    }
  }
}

Matrix row_dots(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "row_dots");
  Matrix out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    const double* pa = a.data() + static_cast<std::size_t>(i) * a.cols();
    const double* pb = b.data() + static_cast<std::size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) {
      acc += pa[j] * pb[j];
    }
    out(i, 0) = acc;
  }
  return out;
}

namespace {

template <typename Fn>
Matrix map(const Matrix& x, Fn fn, const char* where) {
  Matrix out(x.rows(), x.cols());
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    po[i] = fn(px[i]);
  }
  debug_check(out, where);
  return out;
}

} // namespace

Matrix sigmoid(const Matrix& x) {
  return map(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, "sigmoid");
}

Matrix tanh_act(const Matrix& x) {
  return map(x, [](double v) { return std::tanh(v); }, "tanh_act");
}

Matrix relu(const Matrix& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; }, "relu");
}

Matrix sigmoid_grad(const Matrix& y) {
  return map(y, [](double v) { return v * (1.0 - v); }, "sigmoid_grad");
}

Matrix tanh_grad(const Matrix& y) {
  return map(y, [](double v) { return 1.0 - v * v; }, "tanh_grad");
}

Matrix relu_grad(const Matrix& y) {
  return map(y, [](double v) { return v > 0.0 ? 1.0 : 0.0; }, "relu_grad");
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    const double* px = x.data() + static_cast<std::size_t>(i) * x.cols();
    double* po = out.data() + static_cast<std::size_t>(i) * x.cols();
    double mx = px[0];
    for (int j = 1; j < x.cols(); ++j) {
      mx = std::max(mx, px[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      po[j] = std::exp(px[j] - mx);
      sum += po[j];
    }
    for (int j = 0; j < x.cols(); ++j) {
      po[j] /= sum;
    }
  }
  debug_check(out, "softmax_rows");
  return out;
}

} // namespace cfpred::nn
