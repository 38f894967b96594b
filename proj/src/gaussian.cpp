#include "sds/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sds::gm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Clamp eigenvalues of a symmetric matrix from below.
Eigen::MatrixXd floor_spd(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void Gaussian::validate() const {
  if (mean.size() == 0) throw std::invalid_argument("Gaussian: empty mean");
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw std::invalid_argument("Gaussian: covariance shape mismatch");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("Gaussian: covariance not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Gaussian: covariance not positive definite");
}

void GaussianMixture::validate() const {
  if (components.empty())
    throw std::invalid_argument("GaussianMixture: no components");
  if (weights.size() != components.size())
    throw std::invalid_argument("GaussianMixture: weight/component count mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("GaussianMixture: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("GaussianMixture: weights do not sum to 1");
  for (const auto& c : components) c.validate();
}

double logpdf(const Eigen::VectorXd& x, const Gaussian& g) {
  if (x.size() != g.mean.size())
    throw std::invalid_argument("logpdf: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("logpdf: covariance not positive definite");
  const Eigen::MatrixXd& L = llt.matrixL();
  double logdet = 0.0;
  for (int i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  Eigen::VectorXd d = x - g.mean;
  Eigen::VectorXd z = llt.matrixL().solve(d);
  return -0.5 * (g.dim() * kLog2Pi + logdet + z.squaredNorm());
}

double mixture_logpdf(const Eigen::VectorXd& x, const GaussianMixture& gmm) {
  if (gmm.components.empty())
    throw std::invalid_argument("mixture_logpdf: empty mixture");
  std::vector<double> terms(gmm.components.size());
  for (size_t i = 0; i < gmm.components.size(); ++i) {
    double lw = gmm.weights[i] > 0.0 ? std::log(gmm.weights[i])
                                     : -std::numeric_limits<double>::infinity();
    terms[i] = lw + logpdf(x, gmm.components[i]);
  }
  return logsumexp(terms);
}

Eigen::VectorXd sample(const Gaussian& g, std::mt19937_64& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample: covariance not positive definite");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(g.dim());
  for (int i = 0; i < g.dim(); ++i) z(i) = normal(rng);
  return g.mean + llt.matrixL() * z;
}

Eigen::VectorXd sample(const GaussianMixture& gmm, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(gmm.weights.begin(), gmm.weights.end());
  return sample(gmm.components[pick(rng)], rng);
}

namespace {

// k-means++ seeding followed by a few Lloyd iterations.
std::vector<Eigen::VectorXd> kmeans_centers(
    const std::vector<Eigen::VectorXd>& samples, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(samples.size());
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(k);
  std::uniform_int_distribution<int> uni(0, n - 1);
  centers.push_back(samples[uni(rng)]);
  std::vector<double> d2(n, 0.0);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers)
        best = std::min(best, (samples[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
    }
    int pick = uni(rng);  // fallback when all points coincide with centers
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng), acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(samples[pick]);
  }
  // Lloyd refinement
  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 10; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = (samples[i] - centers[c]).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
    }
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(samples[0].size());
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (assign[i] == c) {
          sum += samples[i];
          ++cnt;
        }
      if (cnt > 0) centers[c] = sum / cnt;
    }
    if (!changed) break;
  }
  return centers;
}

}  // namespace

EmResult fit_gmm_em(const std::vector<Eigen::VectorXd>& samples, int k,
                    std::uint64_t seed, const EmOptions& opts) {
  if (k < 1) throw std::invalid_argument("fit_gmm_em: k must be >= 1");
  if (static_cast<int>(samples.size()) < k)
    throw std::invalid_argument("fit_gmm_em: fewer samples than components");
  const int n = static_cast<int>(samples.size());
  const int d = static_cast<int>(samples.front().size());
  std::mt19937_64 rng(seed);

  auto apply_mode = [&](Eigen::MatrixXd cov) {
    if (opts.mode == CovarianceMode::Diagonal) {
      Eigen::VectorXd diag = cov.diagonal().cwiseMax(opts.variance_floor);
      return Eigen::MatrixXd(diag.asDiagonal());
    }
    return floor_spd(cov, opts.variance_floor);
  };

  // Seed from k-means clusters.
  auto centers = kmeans_centers(samples, k, rng);
  GaussianMixture gmm;
  gmm.weights.assign(k, 1.0 / k);
  gmm.components.resize(k);
  {
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double dist = (samples[i] - centers[c]).squaredNorm();
        if (dist < bd) {
          bd = dist;
          best = c;
        }
      }
      members[best].push_back(i);
    }
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd mu = centers[c];
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      if (!members[c].empty()) {
        mu = Eigen::VectorXd::Zero(d);
        for (int i : members[c]) mu += samples[i];
        mu /= static_cast<double>(members[c].size());
        for (int i : members[c]) {
          Eigen::VectorXd dd = samples[i] - mu;
          cov += dd * dd.transpose();
        }
        cov /= static_cast<double>(members[c].size());
        gmm.weights[c] = static_cast<double>(members[c].size()) / n;
      }
      gmm.components[c] = Gaussian{mu, apply_mode(cov)};
    }
    double wsum = std::accumulate(gmm.weights.begin(), gmm.weights.end(), 0.0);
    for (auto& w : gmm.weights) w /= wsum;
  }

  EmResult result;
  Eigen::MatrixXd log_resp(n, k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // E-step
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      std::vector<double> terms(k);
      for (int c = 0; c < k; ++c)
        terms[c] = std::log(std::max(gmm.weights[c], 1e-300)) +
                   logpdf(samples[i], gmm.components[c]);
      double norm = logsumexp(terms);
      ll += norm;
      for (int c = 0; c < k; ++c) log_resp(i, c) = terms[c] - norm;
    }
    ll /= n;
    result.loglik_trace.push_back(ll);
    result.iterations = iter + 1;
    if (iter > 0 && std::abs(ll - prev_ll) <=
                        opts.tol * std::max(1.0, std::abs(prev_ll)))
      break;
    prev_ll = ll;

    // M-step
    for (int c = 0; c < k; ++c) {
      double nk = 0.0;
      for (int i = 0; i < n; ++i) nk += std::exp(log_resp(i, c));
      if (nk < 1e-8) {
        // Empty component: reinitialize at the worst-explained sample.
        int worst = 0;
        double worst_ll = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
          double li = mixture_logpdf(samples[i], gmm);
          if (li < worst_ll) {
            worst_ll = li;
            worst = i;
          }
        }
        gmm.components[c].mean = samples[worst];
        gmm.components[c].cov = apply_mode(
            Eigen::MatrixXd::Identity(d, d) * std::max(opts.variance_floor, 1e-2));
        gmm.weights[c] = 1.0 / n;
        continue;
      }
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) mu += std::exp(log_resp(i, c)) * samples[i];
      mu /= nk;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd dd = samples[i] - mu;
        cov += std::exp(log_resp(i, c)) * (dd * dd.transpose());
      }
      cov /= nk;
      gmm.components[c] = Gaussian{mu, apply_mode(cov)};
      gmm.weights[c] = nk / n;
    }
    double wsum = std::accumulate(gmm.weights.begin(), gmm.weights.end(), 0.0);
    for (auto& w : gmm.weights) w /= wsum;
  }
  result.mixture = std::move(gmm);
  return result;
}

Gaussian moment_match(const GaussianMixture& gmm) {
  gmm.validate();
  const int d = gmm.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int c = 0; c < gmm.size(); ++c)
    mean += gmm.weights[c] * gmm.components[c].mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < gmm.size(); ++c) {
    Eigen::VectorXd dd = gmm.components[c].mean - mean;
    cov += gmm.weights[c] * (gmm.components[c].cov + dd * dd.transpose());
  }
  return Gaussian{mean, cov};
}

}  // namespace sds::gm
