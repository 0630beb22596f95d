#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasor_sentinel/svm.hpp"

using namespace phasor_sentinel;

namespace {

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m(rows.front().size());
  for (const auto& r : rows) m.append(r);
  return m;
}

std::vector<std::vector<double>> to_rows(const FeatureMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

// Two overlapping Gaussian blobs.
void blobs(std::mt19937_64& rng, std::size_t n, std::size_t dim, double sep, FeatureMatrix& x, std::vector<int>& y) {
  std::normal_distribution<double> g(0.0, 1.0);
  x = FeatureMatrix(dim);
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    std::vector<double> v(dim);
    for (auto& e : v) e = g(rng) + label * sep;
    x.append(v);
    y.push_back(label);
  }
}

double accuracy(const SvmModel& m, const FeatureMatrix& x, const std::vector<int>& y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) ok += static_cast<int>(decide(m, x.row(i)).label) == y[i];
  return static_cast<double>(ok) / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("standardizer") {
  const auto x = matrix({{1.0, 7.0}, {2.0, 7.0}, {3.0, 7.0}});
  const auto s = fit_standardizer(x);
  const auto z0 = s.apply(x.row(0));
  const auto z2 = s.apply(x.row(2));
  const double k = 1.0 / std::sqrt(2.0 / 3.0);
  CHECK(z0[0] == doctest::Approx(-k));
  CHECK(s.apply(x.row(1))[0] == doctest::Approx(0.0));
  CHECK(z2[0] == doctest::Approx(k));
  CHECK(k == doctest::Approx(1.2247).epsilon(1e-4));
  // The constant column passes through unscaled.
  CHECK(s.constant_features == std::vector<std::size_t>{1});
  CHECK(s.scale[1] == 1.0);
  CHECK(z0[1] == 7.0);

  const std::vector<double> v = {4.5, -1.0};
  const auto back = s.inverse(s.apply(v));
  CHECK(back[0] == doctest::Approx(4.5));
  CHECK(back[1] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(fit_standardizer(matrix({{1.0}})), ValidationError);
  CHECK_THROWS_AS(fit_standardizer(FeatureMatrix(3)), ValidationError);
}

TEST_CASE("rbf kernel") {
  const std::vector<double> a = {1, 0, 0, 0, 0}, b = {0, 1, 0, 0, 0};
  CHECK(rbf_kernel(a, a, 0.2) == 1.0);
  CHECK(rbf_kernel(a, b, 0.2) == doctest::Approx(std::exp(-0.4)));
  CHECK(rbf_kernel(a, b, 0.2) == doctest::Approx(0.670320).epsilon(1e-6));
  const std::vector<double> c = {0, 0}, d = {1, 2};
  CHECK(rbf_kernel(c, d, 0.2) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS_AS(rbf_kernel(a, c, 0.2), ValidationError);
}

TEST_CASE("two separable points") {
  const auto x = matrix({{0.0, 0.0}, {2.0, 1.0}});
  const std::vector<int> y = {-1, 1};
  const auto m = train_svm(x, y);
  const auto lo = decide(m, x.row(0));
  const auto hi = decide(m, x.row(1));
  CHECK(lo.label == Label::Normal);
  CHECK(hi.label == Label::Spoofed);
  CHECK(lo.margin < 0.0);
  CHECK(hi.margin > 0.0);
  CHECK(m.coef.size() == 2);
}

TEST_CASE("XOR") {
  const auto x = matrix({{1, 1}, {-1, -1}, {1, -1}, {-1, 1}});
  const std::vector<int> y = {1, 1, -1, -1};
  SvmParams p;
  p.tol = 1e-10;
  const auto m = train_svm(x, y, p);
  CHECK(m.coef.size() == 4);
  CHECK(accuracy(m, x, y) == 1.0);
  const std::vector<double> q = {1, 1};
  CHECK(decide(m, q).label == Label::Spoofed);

  // Same optimum as the oracle. Standardization leaves these points alone.
  const auto ref = oracle::box_qp(oracle::rbf_gram(to_rows(x), 0.2), y, 1.0);
  CHECK(m.diagnostics.objective == doctest::Approx(ref.objective).epsilon(1e-9));
}

TEST_CASE("SMO matches the QP oracle on small random problems") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(4, 25), dim(1, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  double worst_obj = 0.0, worst_feas = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    const auto d = static_cast<std::size_t>(dim(rng));
    FeatureMatrix x(d);
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = i == 0 ? 1 : (i == 1 ? -1 : (coin(rng) ? 1 : -1));
      std::vector<double> v(d);
      for (auto& e : v) e = g(rng) + 0.7 * label;
      x.append(v);
      y.push_back(label);
    }
    // Exactness needs a converged solve; the default stopping tolerance
    // leaves gaps of order 1e-4.
    SvmParams params;
    params.tol = 1e-6;
    const auto sol = solve_dual(x, y, params);
    const auto ref = oracle::box_qp(oracle::rbf_gram(to_rows(x), params.gamma), y, params.C);
    double feas = 0.0;
    for (std::size_t i = 0; i < n; ++i) feas += sol.alpha[i] * y[i];
    worst_obj = std::max(worst_obj, std::abs(sol.objective - ref.objective));
    worst_feas = std::max(worst_feas, std::abs(feas));
    CHECK(dual_objective(x, y, sol.alpha, params.gamma) == doctest::Approx(sol.objective).epsilon(1e-12));
  }
  MESSAGE("worst |objective - oracle| " << worst_obj << ", worst |sum a y| " << worst_feas);
  CHECK(worst_obj <= 1e-6);
  CHECK(worst_feas <= 1e-8);
}

TEST_CASE("free support vectors sit on the margin") {
  std::mt19937_64 rng(3);
  FeatureMatrix x;
  std::vector<int> y;
  blobs(rng, 300, 3, 0.8, x, y);
  SvmParams p;
  const auto m = train_svm(x, y, p);
  std::size_t free = 0;
  for (std::size_t k = 0; k < m.coef.size(); ++k) {
    const double a = std::abs(m.coef[k]);
    if (a <= 1e-8 || a >= m.C - 1e-8) continue;
    ++free;
    double margin = m.bias;
    for (std::size_t t = 0; t < m.coef.size(); ++t)
      margin += m.coef[t] * rbf_kernel(m.support_vectors.row(t), m.support_vectors.row(k), m.gamma);
    const double label = m.coef[k] > 0 ? 1.0 : -1.0;
    CHECK(std::abs(label * margin - 1.0) <= p.tol);
  }
  CHECK(free > 0);
  CHECK(accuracy(m, x, y) > 0.8);
}

TEST_CASE("duplicating every example at half the cost gives the same machine") {
  std::mt19937_64 rng(4);
  FeatureMatrix x;
  std::vector<int> y;
  blobs(rng, 120, 2, 0.6, x, y);
  SvmParams p;
  p.tol = 1e-9;
  const auto base = train_svm(x, y, p);

  FeatureMatrix x2 = x;
  x2.values.insert(x2.values.end(), x.values.begin(), x.values.end());
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  SvmParams half = p;
  half.C = p.C / 2;
  const auto dup = train_svm(x2, y2, half);

  // Each copy carries half of the original alpha, so the objective is unchanged.
  CHECK(dup.diagnostics.objective == doctest::Approx(base.diagnostics.objective).epsilon(1e-7));
  FeatureMatrix probe(2);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int i = 0; i < 200; ++i) probe.append(std::vector<double>{g(rng), g(rng)});
  const auto a = decide_batch(base, probe);
  const auto b = decide_batch(dup, probe);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("shifting raw features changes nothing after standardization") {
  std::mt19937_64 rng(5);
  FeatureMatrix x;
  std::vector<int> y;
  blobs(rng, 150, 4, 0.7, x, y);
  SvmParams p;
  p.tol = 1e-10;
  const auto m = train_svm(x, y, p);
  FeatureMatrix shifted = x;
  for (std::size_t i = 0; i < shifted.rows(); ++i) {
    shifted.row(i)[2] += 0.25;
    shifted.row(i)[0] = 3.0 * shifted.row(i)[0] - 1.0;
  }
  const auto ms = train_svm(shifted, y, p);
  const auto a = decide_batch(m, x);
  const auto b = decide_batch(ms, shifted);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) <= 1e-9);
}

TEST_CASE("RBF Gram matrices are positive semidefinite") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(rng, 60, 5, 0.3, x, y);
    const auto s = fit_standardizer(x);
    s.apply_in_place(x);
    Eigen::MatrixXd k(60, 60);
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 60; ++j) k(i, j) = rbf_kernel(x.row(i), x.row(j), 0.2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("training input validation and the iteration cap") {
  const auto x = matrix({{0.0}, {1.0}, {2.0}});
  CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, -1}), ValidationError);
  CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, -1, 0}), ValidationError);
  auto bad = x;
  bad.values[1] = std::nan("");
  CHECK_THROWS_AS(train_svm(bad, std::vector<int>{1, -1, 1}), ValidationError);

  std::mt19937_64 rng(7);
  FeatureMatrix hx;
  std::vector<int> hy;
  blobs(rng, 400, 2, 0.1, hx, hy);
  SvmParams p;
  p.max_passes = 1;
  p.tol = 1e-12;
  bool caught = false;
  try {
    train_svm(hx, hy, p);
  } catch (const ConvergenceError& e) {
    caught = true;
    CHECK(e.iterations == 400);
    CHECK(e.violation > p.tol);
    CHECK(e.objective > 0.0);
  }
  CHECK(caught);
}

TEST_CASE("decision function") {
  std::mt19937_64 rng(8);
  FeatureMatrix x;
  std::vector<int> y;
  blobs(rng, 200, 3, 0.9, x, y);
  const auto m = train_svm(x, y);
  CHECK(decide_batch(m, x) == decide_batch_serial(m, x));
  CHECK(decide_batch(m, x, 1) == decide_batch_serial(m, x));
  CHECK(decide(m, x.row(17)).margin == decide_batch_serial(m, x)[17]);
  CHECK(label_of(0.0) == Label::Normal);
  CHECK(label_of(1e-300) == Label::Spoofed);
  CHECK_THROWS_AS(decide(m, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST_CASE("grid search") {
  std::mt19937_64 rng(9);
  GridData d;
  d.feature_set = "three";
  blobs(rng, 200, 3, 0.9, d.train.x, d.train.y);
  d.train.minute.assign(200, 1);
  blobs(rng, 100, 3, 0.9, d.validate.x, d.validate.y);
  d.validate.minute.assign(100, 2);

  const std::vector<double> one_c = {1.0}, one_g = {0.2};
  auto r = grid_search({d}, one_c, one_g);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.best == 0);
  CHECK(r.cells[0].C == 1.0);
  CHECK(r.cells[0].f1 > 0.7);
  CHECK_FALSE(r.cells[0].f1_undefined);

  const std::vector<double> cs = {0.1, 1.0, 10.0}, gs = {0.05, 0.2};
  r = grid_search({d}, cs, gs);
  CHECK(r.cells.size() == 6);
  for (const auto& c : r.cells) CHECK(c.f1 <= r.cells[r.best].f1);

  auto normal_only = d;
  normal_only.validate.y.assign(100, -1);
  r = grid_search({normal_only}, one_c, one_g);
  CHECK(r.cells[0].f1 == 0.0);
  CHECK(r.cells[0].f1_undefined);

  auto overlap = d;
  overlap.validate.minute[5] = 1;
  CHECK_THROWS_AS(grid_search({overlap}, one_c, one_g), ValidationError);
}

TEST_CASE("kernel cache size does not change the solution") {
  std::mt19937_64 rng(10);
  FeatureMatrix x;
  std::vector<int> y;
  blobs(rng, 300, 3, 0.5, x, y);
  SvmParams big, tiny;
  tiny.cache_mb = 0;
  const auto a = solve_dual(x, y, big);
  const auto b = solve_dual(x, y, tiny);
  CHECK(a.alpha == b.alpha);
  CHECK(a.iterations == b.iterations);
}
