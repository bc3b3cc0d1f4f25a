// Fixed-effects logistic regression fit by iteratively reweighted least
// squares, plus likelihood-ratio tests between nested fits.

#ifndef SVOLAB_LOGISTIC_H_
#define SVOLAB_LOGISTIC_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace svolab {

class SeparationDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SingularDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotNested : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IrlsOptions {
  // Converged when the largest coefficient change falls below this.
  double tolerance = 1e-8;
  int max_iterations = 100;
  // Any |coefficient| above this during iteration is treated as separation.
  double separation_bound = 30.0;
};

struct LogisticFit {
  // predictors[k] names coefficients[k]; predictors[0] is the intercept.
  std::vector<std::string> predictors;
  Eigen::VectorXd coefficients;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  // Norm of the score vector X'(y - p) at the returned coefficients.
  double gradient_norm = 0.0;
  // Log-likelihood at the start and after every iteration.
  std::vector<double> log_likelihood_trace;
};

double LogisticLogLikelihood(const Eigen::MatrixXd& design,
                             std::span<const std::uint8_t> labels,
                             const Eigen::VectorXd& coefficients);

// The first design column must be all ones (intercept). When predictor names
// are omitted they default to "(Intercept)", "x1", "x2", ...
LogisticFit FitLogistic(const Eigen::MatrixXd& design,
                        std::span<const std::uint8_t> labels,
                        std::vector<std::string> predictors = {},
                        const IrlsOptions& options = {});

struct LikelihoodRatio {
  double chi_sq = 0.0;
  double p_value = 1.0;
  int df = 0;
};

// chi_sq = 2 (ll_full - ll_reduced), clamped at 0; p from the chi-square
// upper tail. The reduced predictor names must be a subset of the full ones.
LikelihoodRatio LikelihoodRatioTest(const LogisticFit& full,
                                    const LogisticFit& reduced, int df);

// P(X > x) for X ~ chi-square(df).
double ChiSquareUpperTail(double x, int df);

}  // namespace svolab

#endif  // SVOLAB_LOGISTIC_H_
