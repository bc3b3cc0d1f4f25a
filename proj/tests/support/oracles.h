// Reference computations written independently of the library code they
// check.

#ifndef SVOLAB_TESTS_ORACLES_H_
#define SVOLAB_TESTS_ORACLES_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "svolab/mlp.h"

namespace svolab::testing {

// Plain Newton-Raphson for logistic regression from an arbitrary start,
// using hand-rolled Gaussian elimination. `rows` are design rows including
// the leading 1.
std::vector<double> NewtonLogistic(const std::vector<std::vector<double>>& rows,
                                   const std::vector<std::uint8_t>& labels,
                                   std::vector<double> start, int iterations = 60);

// Loss computed with explicit loops: mean of -log softmax(label).
double LoopLoss(const MlpModel& model, const RowMatrix& features, std::span<const std::uint8_t> labels);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
};

// Central differences of ComputeLoss against ComputeLossAndGradients.
// Relative error is |a - n| / max(|a|, |n|, 1e-7).
GradientCheck CheckGradients(const MlpModel& model, const RowMatrix& features,
                             std::span<const std::uint8_t> labels, double step = 1e-5);

struct CheckProblem {
  MlpModel model;
  RowMatrix features;
  std::vector<std::uint8_t> labels;
};

// A random model (hidden <= 8, input dim <= 12) and batch whose hidden
// pre-activations all stay at least `margin` away from zero, so a central
// difference of size 1e-5 never straddles a ReLU kink.
CheckProblem RandomCheckProblem(std::mt19937_64& rng, double margin = 1e-3);

}  // namespace svolab::testing

#endif  // SVOLAB_TESTS_ORACLES_H_
