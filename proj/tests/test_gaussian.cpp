#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sds/gaussian.hpp"

using namespace sds;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

// Direct density formula with explicit determinant and inverse; used as an
// independent oracle for the Cholesky-based implementation.
double logpdf_direct(const VectorXd& x, const gm::Gaussian& g) {
  const int d = g.dim();
  const MatrixXd inv = g.cov.inverse();
  const double det = g.cov.determinant();
  const VectorXd e = x - g.mean;
  return -0.5 * (d * std::log(2.0 * M_PI) + std::log(det) + e.dot(inv * e));
}

}  // namespace

TEST_CASE("gaussian logpdf matches standard normal values") {
  gm::Gaussian g{vec({0.0}), MatrixXd::Identity(1, 1)};
  CHECK(gm::logpdf(vec({0.0}), g) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(gm::logpdf(vec({1.0}), g) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5).epsilon(1e-12));
}

TEST_CASE("gaussian logpdf matches direct formula oracle") {
  gm::Gaussian g{vec({0.0, 0.0}), MatrixXd::Identity(2, 2) * 2.0};
  const VectorXd x = vec({1.0, 2.0});
  CHECK(gm::logpdf(x, g) == doctest::Approx(logpdf_direct(x, g)).epsilon(1e-12));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + rep % 4;
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = n(rng);
    gm::Gaussian gr;
    gr.mean = VectorXd::NullaryExpr(d, [&](int) { return n(rng); });
    gr.cov = a * a.transpose() + 0.1 * MatrixXd::Identity(d, d);
    const VectorXd xr = VectorXd::NullaryExpr(d, [&](int) { return n(rng); });
    CHECK(gm::logpdf(xr, gr) == doctest::Approx(logpdf_direct(xr, gr)).epsilon(1e-10));
  }
}

TEST_CASE("gaussian logpdf rejects bad inputs") {
  gm::Gaussian g{vec({0.0, 0.0}), MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(gm::logpdf(vec({0.0}), g), std::invalid_argument);
  gm::Gaussian bad{vec({0.0}), -MatrixXd::Identity(1, 1)};
  CHECK_THROWS_AS(gm::logpdf(vec({0.0}), bad), std::invalid_argument);
}

TEST_CASE("mixture logpdf degenerate cases and naive-sum oracle") {
  gm::Gaussian g{vec({0.0}), MatrixXd::Identity(1, 1)};
  gm::GaussianMixture single{{1.0}, {g}};
  CHECK(gm::mixture_logpdf(vec({0.3}), single) ==
        doctest::Approx(gm::logpdf(vec({0.3}), g)).epsilon(1e-12));

  gm::GaussianMixture dup{{0.5, 0.5}, {g, g}};
  CHECK(gm::mixture_logpdf(vec({0.3}), dup) ==
        doctest::Approx(gm::logpdf(vec({0.3}), g)).epsilon(1e-12));

  gm::Gaussian g2{vec({5.0}), MatrixXd::Identity(1, 1) * 0.5};
  gm::GaussianMixture two{{0.3, 0.7}, {g, g2}};
  const VectorXd x = vec({2.0});
  const long double naive = 0.3L * std::exp((long double)gm::logpdf(x, g)) +
                            0.7L * std::exp((long double)gm::logpdf(x, g2));
  CHECK(gm::mixture_logpdf(x, two) ==
        doctest::Approx((double)std::log(naive)).epsilon(1e-12));

  CHECK_THROWS_AS(gm::mixture_logpdf(x, gm::GaussianMixture{}), std::invalid_argument);
}

TEST_CASE("mixture logpdf stays finite for extreme components") {
  gm::Gaussian far{vec({2000.0}), MatrixXd::Identity(1, 1) * 1e-6};
  gm::Gaussian near{vec({0.0}), MatrixXd::Identity(1, 1)};
  gm::GaussianMixture m{{0.5, 0.5}, {far, near}};
  const double v = gm::mixture_logpdf(vec({0.0}), m);  // far term ~ -2e12
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(std::log(0.5) + gm::logpdf(vec({0.0}), near)).epsilon(1e-9));
}

TEST_CASE("mixture logpdf equals integrated density mass on a 1-D grid") {
  gm::GaussianMixture m{{0.4, 0.6},
                        {gm::Gaussian{vec({-1.0}), MatrixXd::Identity(1, 1) * 0.7},
                         gm::Gaussian{vec({2.0}), MatrixXd::Identity(1, 1) * 1.3}}};
  // Trapezoid integration of exp(logpdf) must give total mass 1.
  const double lo = -40.0, hi = 40.0;
  const int n = 400000;
  const double h = (hi - lo) / n;
  double mass = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    mass += w * std::exp(gm::mixture_logpdf(vec({lo + i * h}), m));
  }
  mass *= h;
  CHECK(std::log(mass) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("em with k=1 recovers sample mean and covariance") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(vec({n(rng) * 2.0 + 1.0, n(rng) - 0.5}));
  VectorXd mean = VectorXd::Zero(2);
  for (const auto& x : xs) mean += x;
  mean /= xs.size();
  MatrixXd cov = MatrixXd::Zero(2, 2);
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= xs.size();

  const auto res = gm::fit_gmm_em(xs, 1, 3);
  CHECK((res.mixture.components[0].mean - mean).norm() < 1e-9);
  CHECK((res.mixture.components[0].cov - cov).norm() < 1e-5);  // floor-adjusted
  CHECK(res.mixture.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("em separates two well-spaced clusters") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 150; ++i) xs.push_back(vec({-10.0 + n(rng), n(rng)}));
  for (int i = 0; i < 150; ++i) xs.push_back(vec({10.0 + n(rng), n(rng)}));
  const auto res = gm::fit_gmm_em(xs, 2, 42);
  res.mixture.validate();
  std::vector<double> mx{res.mixture.components[0].mean(0),
                         res.mixture.components[1].mean(0)};
  std::sort(mx.begin(), mx.end());
  CHECK(std::abs(mx[0] + 10.0) < 0.1);
  CHECK(std::abs(mx[1] - 10.0) < 0.1);
  CHECK(std::abs(res.mixture.weights[0] - 0.5) < 0.05);
}

TEST_CASE("em rejects fewer samples than components") {
  std::vector<VectorXd> xs{vec({0.0}), vec({1.0})};
  CHECK_THROWS_AS(gm::fit_gmm_em(xs, 3, 0), std::invalid_argument);
}

TEST_CASE("em log-likelihood trace is non-decreasing") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<VectorXd> xs;
    for (int i = 0; i < 120; ++i)
      xs.push_back(vec({n(rng) + (i % 3) * 4.0, n(rng) * 0.5}));
    const auto res = gm::fit_gmm_em(xs, 3, 100 + rep);
    for (size_t i = 1; i < res.loglik_trace.size(); ++i)
      CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-9);
  }
}

TEST_CASE("em survives degenerate duplicated samples via covariance floor") {
  std::vector<VectorXd> xs(40, vec({1.0, 2.0}));
  xs.push_back(vec({1.0 + 1e-9, 2.0}));
  const auto res = gm::fit_gmm_em(xs, 3, 9);
  res.mixture.validate();
  for (const auto& c : res.mixture.components) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(c.cov);
    CHECK(es.eigenvalues().minCoeff() >= 1e-6 * 0.99);
  }
}

TEST_CASE("em diagonal mode produces diagonal covariances") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(vec({n(rng), n(rng) + 0.3 * n(rng)}));
  gm::EmOptions opts;
  opts.mode = gm::CovarianceMode::Diagonal;
  const auto res = gm::fit_gmm_em(xs, 2, 1, opts);
  for (const auto& c : res.mixture.components) {
    CHECK(c.cov(0, 1) == 0.0);
    CHECK(c.cov(1, 0) == 0.0);
  }
}

TEST_CASE("moment match identities") {
  gm::Gaussian g{vec({1.0, -2.0}), MatrixXd::Identity(2, 2) * 3.0};
  const auto same = gm::moment_match(gm::GaussianMixture{{1.0}, {g}});
  CHECK((same.mean - g.mean).norm() < 1e-12);
  CHECK((same.cov - g.cov).norm() < 1e-12);

  const double a = 2.0, s2 = 0.25;
  gm::GaussianMixture sym{{0.5, 0.5},
                          {gm::Gaussian{vec({a, 0.0}), MatrixXd::Identity(2, 2) * s2},
                           gm::Gaussian{vec({-a, 0.0}), MatrixXd::Identity(2, 2) * s2}}};
  const auto mm = gm::moment_match(sym);
  CHECK(mm.mean.norm() < 1e-12);
  CHECK(mm.cov(0, 0) == doctest::Approx(s2 + a * a).epsilon(1e-12));
  CHECK(mm.cov(1, 1) == doctest::Approx(s2).epsilon(1e-12));
}

TEST_CASE("moment match agrees with Monte Carlo moments") {
  gm::GaussianMixture m{
      {0.2, 0.5, 0.3},
      {gm::Gaussian{vec({1.0, 0.0}), MatrixXd::Identity(2, 2) * 0.3},
       gm::Gaussian{vec({-2.0, 1.0}), (MatrixXd(2, 2) << 0.5, 0.2, 0.2, 0.4).finished()},
       gm::Gaussian{vec({0.5, -1.5}), MatrixXd::Identity(2, 2) * 1.1}}};
  std::mt19937_64 rng(31);
  const int N = 1000000;
  VectorXd mean = VectorXd::Zero(2);
  MatrixXd second = MatrixXd::Zero(2, 2);
  for (int i = 0; i < N; ++i) {
    const VectorXd x = gm::sample(m, rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= N;
  MatrixXd cov = second / N - mean * mean.transpose();
  const auto mm = gm::moment_match(m);
  CHECK((mm.mean - mean).norm() / mm.mean.norm() < 0.01);
  CHECK((mm.cov - cov).norm() / mm.cov.norm() < 0.01);
}

TEST_CASE("sampling matches the density it claims (mean within 5 SE)") {
  gm::Gaussian g{vec({2.0, -1.0}),
                 (MatrixXd(2, 2) << 1.5, 0.4, 0.4, 0.8).finished()};
  std::mt19937_64 rng(13);
  const int N = 1000000;
  VectorXd mean = VectorXd::Zero(2);
  for (int i = 0; i < N; ++i) mean += gm::sample(g, rng);
  mean /= N;
  for (int dim = 0; dim < 2; ++dim) {
    const double se = std::sqrt(g.cov(dim, dim) / N);
    CHECK(std::abs(mean(dim) - g.mean(dim)) < 5.0 * se);
  }
}

TEST_CASE("mixture validation catches bad weights") {
  gm::Gaussian g{vec({0.0}), MatrixXd::Identity(1, 1)};
  gm::GaussianMixture bad{{0.7, 0.7}, {g, g}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
