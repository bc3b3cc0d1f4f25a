#include "svolab/logistic.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

namespace svolab {
namespace {

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double LogisticLogLikelihood(const Eigen::MatrixXd& design,
                             std::span<const std::uint8_t> labels,
                             const Eigen::VectorXd& coefficients) {
  const Eigen::VectorXd eta = design * coefficients;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += (labels[i] ? eta(i) : 0.0) - Softplus(eta(i));
  }
  return ll;
}

LogisticFit FitLogistic(const Eigen::MatrixXd& design,
                        std::span<const std::uint8_t> labels,
                        std::vector<std::string> predictors,
                        const IrlsOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (n == 0 || k == 0) throw std::invalid_argument("empty design matrix");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw std::invalid_argument("design rows and label count differ");
  }
  if (!(design.col(0).array() == 1.0).all()) {
    throw std::invalid_argument("first design column must be the intercept (all ones)");
  }
  if (predictors.empty()) {
    predictors.push_back("(Intercept)");
    for (Eigen::Index j = 1; j < k; ++j) predictors.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(predictors.size()) != k) {
    throw std::invalid_argument("predictor names do not match design columns");
  }
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(design).rank() < k) {
    throw SingularDesign("design matrix is rank deficient");
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[i] ? 1.0 : 0.0;

  LogisticFit fit;
  fit.predictors = std::move(predictors);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double ll = LogisticLogLikelihood(design, labels, beta);
  fit.log_likelihood_trace.push_back(ll);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = Sigmoid(eta(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd score = design.transpose() * (y - p);
    const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SingularDesign("weighted information matrix is not positive definite");
    }
    const Eigen::VectorXd delta = ldlt.solve(score);
    if (!delta.allFinite()) throw SingularDesign("IRLS step is not finite");

    // Newton step with halving; the log-likelihood must not decrease.
    double step = 1.0;
    Eigen::VectorXd next = beta + delta;
    double ll_next = LogisticLogLikelihood(design, labels, next);
    const double slack = 1e-12 * std::max(1.0, std::abs(ll));
    for (int h = 0; h < 40 && !(ll_next >= ll - slack); ++h) {
      step *= 0.5;
      next = beta + step * delta;
      ll_next = LogisticLogLikelihood(design, labels, next);
    }
    if (!(ll_next >= ll - slack)) {
      throw std::runtime_error("IRLS log-likelihood decreased at iteration " +
                               std::to_string(iter));
    }
    if (ll_next < ll) {
      // Only rounding noise is left; keep the better point and stop.
      fit.converged = true;
      break;
    }
    fit.log_likelihood_trace.push_back(ll_next);
    fit.iterations = iter;
    if (next.cwiseAbs().maxCoeff() > options.separation_bound) {
      throw SeparationDetected("coefficient magnitude exceeded " +
                               std::to_string(options.separation_bound) +
                               " at iteration " + std::to_string(iter) +
                               " (perfect or quasi-perfect separation)");
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    ll = ll_next;
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.log_likelihood = ll;
  Eigen::VectorXd p(n);
  const Eigen::VectorXd eta = design * beta;
  for (Eigen::Index i = 0; i < n; ++i) p(i) = Sigmoid(eta(i));
  fit.gradient_norm = (design.transpose() * (y - p)).norm();
  return fit;
}

double ChiSquareUpperTail(double x, int df) {
  if (df <= 0) throw std::invalid_argument("chi-square df must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

LikelihoodRatio LikelihoodRatioTest(const LogisticFit& full,
                                    const LogisticFit& reduced, int df) {
  if (!full.converged || !reduced.converged) {
    throw NotConverged("likelihood ratio test needs two converged fits");
  }
  std::set<std::string> full_names(full.predictors.begin(), full.predictors.end());
  for (const std::string& name : reduced.predictors) {
    if (!full_names.count(name)) {
      throw NotNested("reduced predictor '" + name + "' is not in the full model");
    }
  }
  LikelihoodRatio out;
  out.df = df;
  out.chi_sq = std::max(0.0, 2.0 * (full.log_likelihood - reduced.log_likelihood));
  out.p_value = ChiSquareUpperTail(out.chi_sq, df);
  return out;
}

}  // namespace svolab
