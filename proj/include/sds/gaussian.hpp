#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace sds::gm {

/// Dense multivariate Gaussian. Covariance must be symmetric positive
/// definite; validate() enforces symmetry to 1e-12 relative error.
struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

/// Finite mixture of Gaussians. Weights live on the probability simplex.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Gaussian> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }
  void validate() const;
};

/// Log density of x under g. Throws std::invalid_argument on dimension
/// mismatch or a covariance that is not SPD.
double logpdf(const Eigen::VectorXd& x, const Gaussian& g);

/// Log density under a mixture, computed with log-sum-exp. Throws on an
/// empty mixture.
double mixture_logpdf(const Eigen::VectorXd& x, const GaussianMixture& gmm);

/// Draw one sample (Cholesky transform of standard normals).
Eigen::VectorXd sample(const Gaussian& g, std::mt19937_64& rng);

/// Draw one sample from the mixture.
Eigen::VectorXd sample(const GaussianMixture& gmm, std::mt19937_64& rng);

enum class CovarianceMode { Full, Diagonal };

struct EmOptions {
  int max_iters = 200;
  double tol = 1e-6;  // relative change of average log-likelihood
  CovarianceMode mode = CovarianceMode::Full;
  double variance_floor = 1e-6;  // eigenvalue floor, m^2
};

struct EmResult {
  GaussianMixture mixture;
  std::vector<double> loglik_trace;  // average log-likelihood per iteration
  int iterations = 0;
};

/// EM fit of a k-component mixture, k-means++ seeding from `seed`.
/// Requires samples.size() >= k. Degenerate clusters get a covariance floor;
/// empty clusters are reinitialized at the lowest-likelihood sample.
EmResult fit_gmm_em(const std::vector<Eigen::VectorXd>& samples, int k,
                    std::uint64_t seed, const EmOptions& opts = {});

/// Single Gaussian with the mixture's mean and covariance.
Gaussian moment_match(const GaussianMixture& gmm);

}  // namespace sds::gm
