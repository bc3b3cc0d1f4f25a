#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svolab::testing {
namespace {

// Solves a x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> Solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

double Relu(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace

std::vector<double> NewtonLogistic(const std::vector<std::vector<double>>& rows,
                                   const std::vector<std::uint8_t>& labels,
                                   std::vector<double> beta, int iterations) {
  const std::size_t k = beta.size();
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> grad(k, 0.0);
    std::vector<std::vector<double>> hess(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += rows[i][j] * beta[j];
      const double p = 1.0 / (1.0 + std::exp(-eta));
      const double w = p * (1.0 - p);
      for (std::size_t a = 0; a < k; ++a) {
        grad[a] += (labels[i] - p) * rows[i][a];
        for (std::size_t b = 0; b < k; ++b) hess[a][b] += w * rows[i][a] * rows[i][b];
      }
    }
    const std::vector<double> step = Solve(hess, grad);
    double largest = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      beta[j] += step[j];
      largest = std::max(largest, std::abs(step[j]));
    }
    if (largest < 1e-13) break;
  }
  return beta;
}

double LoopLoss(const MlpModel& model, const RowMatrix& features, std::span<const std::uint8_t> labels) {
  const MlpShape& s = model.shape();
  double total = 0.0;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    std::vector<double> h1(s.hidden1), h2(s.hidden2);
    for (int i = 0; i < s.hidden1; ++i) {
      double z = model.b1()(i);
      for (int j = 0; j < s.input_dim; ++j) z += model.w1()(i, j) * features(r, j);
      h1[i] = Relu(z);
    }
    for (int i = 0; i < s.hidden2; ++i) {
      double z = model.b2()(i);
      for (int j = 0; j < s.hidden1; ++j) z += model.w2()(i, j) * h1[j];
      h2[i] = Relu(z);
    }
    double logits[2];
    for (int i = 0; i < 2; ++i) {
      logits[i] = model.b3()(i);
      for (int j = 0; j < s.hidden2; ++j) logits[i] += model.w3()(i, j) * h2[j];
    }
    // Class 0 is "first is subject", so label 1 maps to logit 0.
    const int target = labels[r] ? 0 : 1;
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    total += lse - logits[target];
  }
  return total / static_cast<double>(features.rows());
}

GradientCheck CheckGradients(const MlpModel& model, const RowMatrix& features,
                             std::span<const std::uint8_t> labels, double step) {
  const LossAndGradients analytic = ComputeLossAndGradients(model, features, labels);
  MlpModel probe = model;
  std::span<double> p = probe.parameters();
  GradientCheck out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double saved = p[k];
    p[k] = saved + step;
    const double up = ComputeLoss(probe, features, labels);
    p[k] = saved - step;
    const double down = ComputeLoss(probe, features, labels);
    p[k] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.gradients.parameters()[k];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-7});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / scale);
    ++out.entries;
  }
  return out;
}

CheckProblem RandomCheckProblem(std::mt19937_64& rng, double margin) {
  std::uniform_int_distribution<int> input_dim(1, 12), hidden(1, 8), batch(1, 6);
  std::uniform_real_distribution<double> bias(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    MlpShape shape{input_dim(rng), hidden(rng), hidden(rng)};
    CheckProblem p{MlpModel::GlorotUniform(shape, rng()), RowMatrix(batch(rng), shape.input_dim), {}};
    for (double& b : p.model.b1()) b = bias(rng);
    for (double& b : p.model.b2()) b = bias(rng);
    for (double& b : p.model.b3()) b = bias(rng);
    for (Eigen::Index i = 0; i < p.features.size(); ++i) p.features.data()[i] = normal(rng);
    for (Eigen::Index r = 0; r < p.features.rows(); ++r) p.labels.push_back(coin(rng) ? 1 : 0);

    bool clear = true;
    for (Eigen::Index r = 0; r < p.features.rows() && clear; ++r) {
      Eigen::VectorXd z1 = p.model.w1() * p.features.row(r).transpose() + p.model.b1();
      Eigen::VectorXd z2 = p.model.w2() * z1.cwiseMax(0.0) + p.model.b2();
      clear = z1.cwiseAbs().minCoeff() >= margin && z2.cwiseAbs().minCoeff() >= margin;
    }
    if (clear) return p;
  }
}

}  // namespace svolab::testing
