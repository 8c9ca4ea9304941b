#include <cmath>
#include <doctest.h>

#include "cfpred/errors.hpp"
#include "cfpred/matrix.hpp"
#include "cfpred/nn.hpp"
#include "cfpred/rng.hpp"

using namespace cfpred;
using nn::Matrix;

namespace {

Matrix random_matrix(int rows, int cols, nn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = rng.uniform(lo, hi);
    }
  }
  return m;
}

} // namespace

TEST_CASE("matmul identity and hand-computed product") {
  nn::Rng rng(1);
  Matrix m = random_matrix(3, 4, rng);
  CHECK(nn::matmul(Matrix::identity(3), m) == m);

  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 1, {5, 6});
  Matrix p = nn::matmul(a, b);
  CHECK(p(0, 0) == doctest::Approx(17.0));
  CHECK(p(1, 0) == doctest::Approx(39.0));

  CHECK_THROWS_AS(nn::matmul(a, Matrix(3, 2)), ShapeMismatch);
}

TEST_CASE("matmul transpose variants agree with explicit transpose") {
  nn::Rng rng(2);
  Matrix a = random_matrix(4, 3, rng);
  Matrix b = random_matrix(4, 5, rng);
  CHECK(nn::matmul_tn(a, b) == nn::matmul(nn::transpose(a), b));
  Matrix c = random_matrix(5, 3, rng);
  CHECK(nn::matmul_nt(c, a) == nn::matmul(c, nn::transpose(a)));
}

TEST_CASE("concat_cols and slice_cols") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix b(2, 2, {7, 8, 9, 10});
  Matrix c = nn::concat_cols(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 5);
  CHECK(c(0, 0) == 1);
  CHECK(c(0, 3) == 7);
  CHECK(c(1, 4) == 10);
  CHECK(nn::slice_cols(c, 0, 3) == a);
  CHECK(nn::slice_cols(c, 3, 5) == b);
  CHECK_THROWS_AS(nn::concat_cols(a, Matrix(3, 1)), ShapeMismatch);
}

TEST_CASE("elementwise ops and hadamard") {
  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 2, {5, 6, 7, 8});
  CHECK(nn::add(a, b) == Matrix(2, 2, {6, 8, 10, 12}));
  CHECK(nn::sub(b, a) == Matrix(2, 2, {4, 4, 4, 4}));
  CHECK(nn::hadamard(a, b) == Matrix(2, 2, {5, 12, 21, 32}));
  CHECK(nn::scale(a, 2.0) == Matrix(2, 2, {2, 4, 6, 8}));
  CHECK_THROWS_AS(nn::add(a, Matrix(1, 2)), ShapeMismatch);
}

TEST_CASE("activations at reference points") {
  Matrix x(1, 3, {0.0, std::log(3.0), -3.0});
  Matrix s = nn::sigmoid(x);
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 1) == doctest::Approx(0.75)); // 1/(1+e^{-ln 3}) = 3/4
  Matrix t = nn::tanh_act(x);
  CHECK(t(0, 0) == doctest::Approx(0.0));
  Matrix r = nn::relu(x);
  CHECK(r(0, 2) == 0.0);
  CHECK(r(0, 1) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("derivative-given-output forms match finite differences") {
  nn::Rng rng(3);
  Matrix x = random_matrix(2, 5, rng, -2.0, 2.0);
  const double eps = 1e-6;
  Matrix xp = x;
  Matrix xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp.data()[i] += eps;
    xm.data()[i] -= eps;
  }
  auto check_pair = [&](auto fn, auto grad_fn) {
    Matrix y = fn(x);
    Matrix g = grad_fn(y);
    Matrix fp = fn(xp);
    Matrix fm = fn(xm);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double numeric = (fp.data()[i] - fm.data()[i]) / (2 * eps);
      CHECK(g.data()[i] == doctest::Approx(numeric).epsilon(1e-5));
    }
  };
  check_pair([](const Matrix& m) { return nn::sigmoid(m); },
             [](const Matrix& y) { return nn::sigmoid_grad(y); });
  check_pair([](const Matrix& m) { return nn::tanh_act(m); },
             [](const Matrix& y) { return nn::tanh_grad(y); });
}

TEST_CASE("softmax rows: symmetry, normalization, shift invariance") {
  Matrix flat(1, 3, {0, 0, 0});
  Matrix s = nn::softmax_rows(flat);
  for (int j = 0; j < 3; ++j) {
    CHECK(s(0, j) == doctest::Approx(1.0 / 3.0));
  }

  nn::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = random_matrix(3, 7, rng, -30.0, 30.0);
    Matrix p = nn::softmax_rows(x);
    for (int i = 0; i < p.rows(); ++i) {
      double sum = 0.0;
      for (int j = 0; j < p.cols(); ++j) {
        sum += p(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    const double shift = rng.uniform(-5.0, 5.0);
    Matrix shifted = x;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      shifted.data()[i] += shift;
    }
    Matrix q = nn::softmax_rows(shifted);
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(std::abs(q.data()[i] - p.data()[i]) < 1e-12);
    }
  }
}

TEST_CASE("forward ops are pure: repeated evaluation is bit-identical") {
  nn::Rng rng(5);
  Matrix x = random_matrix(4, 4, rng);
  CHECK(nn::sigmoid(x) == nn::sigmoid(x));
  CHECK(nn::softmax_rows(x) == nn::softmax_rows(x));
  CHECK(nn::matmul(x, x) == nn::matmul(x, x));
}

TEST_CASE("mae loss values and subgradient") {
  Matrix p1(1, 1, {2});
  Matrix t1(1, 1, {5});
  auto r1 = nn::mae_loss(p1, t1);
  CHECK(r1.value == doctest::Approx(3.0));
  CHECK(r1.grad(0, 0) == doctest::Approx(-1.0));

  Matrix p2(1, 2, {1, 4});
  Matrix t2(1, 2, {2, 2});
  auto r2 = nn::mae_loss(p2, t2);
  CHECK(r2.value == doctest::Approx(1.5));
  CHECK(r2.grad(0, 0) == doctest::Approx(-0.5));
  CHECK(r2.grad(0, 1) == doctest::Approx(0.5));

  auto r3 = nn::mae_loss(t2, t2);
  CHECK(r3.value == 0.0);
  CHECK(r3.grad == Matrix(1, 2));

  CHECK_THROWS_AS(nn::mae_loss(p1, t2), ShapeMismatch);
}

TEST_CASE("dropout: identity cases") {
  nn::Rng rng(6);
  Matrix x = random_matrix(3, 3, rng);
  auto eval = nn::dropout_forward(x, 0.5, rng, false);
  CHECK(eval.output == x);
  CHECK(eval.mask == [] { Matrix m(3, 3); m.fill(1.0); return m; }());

  auto zero_rate = nn::dropout_forward(x, 0.0, rng, true);
  CHECK(zero_rate.output == x);

  CHECK_THROWS_AS(nn::dropout_forward(x, 1.0, rng, true), InvalidRate);
  CHECK_THROWS_AS(nn::dropout_forward(x, -0.1, rng, true), InvalidRate);
}

TEST_CASE("dropout: keep fraction and inverted scaling at p=0.5") {
  nn::Rng rng(7);
  Matrix x(1000, 1000);
  x.fill(1.0);
  auto result = nn::dropout_forward(x, 0.5, rng, true);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = result.output.data()[i];
    if (v != 0.0) {
      ++kept;
      CHECK(v == 2.0); // kept entries exactly doubled
    }
  }
  const double fraction = static_cast<double>(kept) / static_cast<double>(x.size());
  CHECK(fraction > 0.495);
  CHECK(fraction < 0.505);

  // backward routes gradient only through kept entries
  Matrix upstream(1000, 1000);
  upstream.fill(3.0);
  Matrix back = nn::dropout_backward(upstream, result.mask);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back.data()[i] == 0.0 || back.data()[i] == 6.0));
  }
}

TEST_CASE("adam single-step hand computation") {
  nn::Param p(1, 1, "theta");
  p.value(0, 0) = 1.0;
  p.grad(0, 0) = 1.0;
  nn::adam_step({&p}, nn::AdamConfig{}, 1);
  // m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.001 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.grad(0, 0) == 0.0); // grads zeroed by the step
}

TEST_CASE("adam: zero gradient and zero lr leave parameters untouched") {
  nn::Rng rng(8);
  nn::Param p(2, 3, "w");
  p.value = random_matrix(2, 3, rng);
  const Matrix before = p.value;
  nn::adam_step({&p}, nn::AdamConfig{}, 1);
  CHECK(p.value == before);

  p.grad = random_matrix(2, 3, rng);
  nn::AdamConfig zero_lr;
  zero_lr.lr = 0.0;
  nn::adam_step({&p}, zero_lr, 1);
  CHECK(p.value == before);
}

TEST_CASE("adam: identical params with identical grads stay identical") {
  nn::Param a(2, 2, "a");
  nn::Param b(2, 2, "b");
  nn::Rng rng(9);
  a.value = random_matrix(2, 2, rng);
  b.value = a.value;
  Matrix g = random_matrix(2, 2, rng);
  for (int t = 1; t <= 5; ++t) {
    a.grad = g;
    b.grad = g;
    nn::adam_step({&a, &b}, nn::AdamConfig{}, t);
  }
  CHECK(a.value == b.value);
}

TEST_CASE("grad_check: quadratic is exact up to roundoff") {
  nn::Param theta(1, 1, "theta");
  theta.value(0, 0) = 3.0;
  theta.grad(0, 0) = 6.0; // d/dx x^2 at 3
  auto f = [&] { return theta.value(0, 0) * theta.value(0, 0); };
  CHECK(nn::grad_check(f, {&theta}) < 1e-9);
}

TEST_CASE("grad_check through a frozen dropout mask") {
  nn::Rng rng(10);
  Matrix x = random_matrix(4, 3, rng);
  Matrix target = random_matrix(4, 2, rng);
  nn::Param w(3, 2, "w");
  w.value = random_matrix(3, 2, rng);
  Matrix probe(4, 2);
  probe.fill(1.0);
  const Matrix mask = nn::dropout_forward(probe, 0.5, rng, true).mask;

  auto loss = [&] {
    Matrix pred = nn::hadamard(nn::matmul(x, w.value), mask);
    return nn::mae_loss(pred, target).value;
  };
  // analytic: dW = x' * (mask . dL/dpred)
  Matrix pred = nn::hadamard(nn::matmul(x, w.value), mask);
  Matrix d_pred = nn::mae_loss(pred, target).grad;
  w.grad = nn::matmul_tn(x, nn::hadamard(d_pred, mask));
  CHECK(nn::grad_check(loss, {&w}) < 1e-4);
}

TEST_CASE("clip_grad_norm scales to the requested norm") {
  nn::Param p(1, 2, "p");
  p.grad(0, 0) = 3.0;
  p.grad(0, 1) = 4.0; // norm 5
  nn::clip_grad_norm({&p}, 10.0);
  CHECK(p.grad(0, 0) == 3.0); // below max: untouched
  nn::clip_grad_norm({&p}, 2.5);
  CHECK(p.grad(0, 0) == doctest::Approx(1.5));
  CHECK(p.grad(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("rng: fixed algorithm, reproducible streams") {
  nn::Rng a(42);
  nn::Rng b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  nn::Rng c(43);
  CHECK(c.next_u64() != nn::Rng(42).next_u64());

  nn::Rng d(0);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }

  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  nn::Rng s1(7);
  nn::Rng s2(7);
  s1.shuffle(v1);
  s2.shuffle(v2);
  CHECK(v1 == v2);
}

TEST_CASE("rng: normal moments are sane") {
  nn::Rng rng(11);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("debug checks flag catches non-finite outputs") {
  nn::set_debug_checks(true);
  Matrix bad(1, 1, {1e308});
  CHECK_THROWS_AS(nn::scale(bad, 10.0), Error); // overflows to inf
  nn::set_debug_checks(false);
  CHECK_NOTHROW(nn::scale(bad, 10.0));
}
