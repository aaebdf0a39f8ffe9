#include "icc/synthetic.hpp"

#include <cmath>
#include <string>

#include "icc/dates.hpp"
#include "icc/errors.hpp"
#include "icc/linalg.hpp"
#include "icc/rng.hpp"

namespace icc {

namespace {

void validate_spec(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.T < 1) {
    throw std::invalid_argument("synthetic spec needs n >= 1 and T >= 1");
  }
  if (spec.persistence < 1.0) {
    throw std::invalid_argument("persistence must be >= 1");
  }
  if (spec.regimes.empty()) {
    throw std::invalid_argument("synthetic spec needs at least one regime");
  }
  for (std::size_t k = 0; k < spec.regimes.size(); ++k) {
    const auto& r = spec.regimes[k];
    if (r.mean.size() != spec.n || r.cov.rows() != spec.n || r.cov.cols() != spec.n) {
      throw std::invalid_argument("regime " + std::to_string(k) +
                                  " dimensions do not match n=" + std::to_string(spec.n));
    }
    if (!is_spd(r.cov)) {
      throw NumericError("regime " + std::to_string(k) +
                         " covariance is not symmetric positive definite");
    }
  }
}

}  // namespace

SyntheticPanel generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  const int K = static_cast<int>(spec.regimes.size());
  const double stay = 1.0 - 1.0 / spec.persistence;

  SyntheticPanel out;
  out.true_labels.resize(static_cast<std::size_t>(spec.T));

  Rng label_rng(derive_seed(spec.seed, "synthetic-labels"));
  int state = (K == 1) ? 0
                       : static_cast<int>(label_rng.uniform_int(0, static_cast<std::uint64_t>(K - 1)));
  for (int t = 0; t < spec.T; ++t) {
    out.true_labels[t] = state;
    if (K > 1 && label_rng.uniform() >= stay) {
      // uniform over the other regimes
      int next = static_cast<int>(label_rng.uniform_int(0, static_cast<std::uint64_t>(K - 2)));
      if (next >= state) ++next;
      state = next;
    }
  }

  std::vector<Eigen::MatrixXd> chol;
  chol.reserve(spec.regimes.size());
  for (const auto& r : spec.regimes) chol.push_back(cholesky_spd(r.cov));

  Rng obs_rng(derive_seed(spec.seed, "synthetic-obs"));
  out.panel.returns.resize(spec.T, spec.n);
  Eigen::VectorXd z(spec.n);
  for (int t = 0; t < spec.T; ++t) {
    const int k = out.true_labels[t];
    for (int i = 0; i < spec.n; ++i) z(i) = obs_rng.normal();
    out.panel.returns.row(t) =
        (spec.regimes[k].mean + chol[k] * z).transpose();
  }

  out.panel.dates = weekday_sequence("1995-01-02", spec.T);
  out.panel.tickers.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", i + 1);
    out.panel.tickers.emplace_back(buf);
  }
  return out;
}

Eigen::MatrixXd equicorr_cov(int n, double sigma, double rho) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n, n, sigma * sigma * rho);
  cov.diagonal().setConstant(sigma * sigma);
  return cov;
}

Eigen::MatrixXd ar1_cov(int n, double sigma, double rho) {
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cov(i, j) = sigma * sigma * std::pow(rho, std::abs(i - j));
    }
  }
  return cov;
}

Eigen::MatrixXd scale_to_logdet(const Eigen::MatrixXd& cov, double target_logdet) {
  const double current = logdet_spd(cov);
  const double n = static_cast<double>(cov.rows());
  return cov * std::exp((target_logdet - current) / n);
}

SyntheticSpec two_regime_spec(int n, int T, double persistence, double mean_shift,
                              double sigma, double rho_bull, double rho_bear,
                              std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.T = T;
  spec.persistence = persistence;
  spec.seed = seed;

  RegimeSpec bull;
  bull.mean = Eigen::VectorXd::Constant(n, mean_shift);
  bull.cov = equicorr_cov(n, sigma, rho_bull);

  RegimeSpec bear;
  bear.mean = Eigen::VectorXd::Constant(n, -mean_shift);
  bear.cov = scale_to_logdet(ar1_cov(n, sigma, rho_bear), logdet_spd(bull.cov));

  spec.regimes = {std::move(bull), std::move(bear)};
  return spec;
}

}  // namespace icc
