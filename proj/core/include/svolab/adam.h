#ifndef SVOLAB_ADAM_H_
#define SVOLAB_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svolab/mlp.h"

namespace svolab {

// Adam with bias-corrected moments (Kingma & Ba, 2014).
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  explicit AdamState(std::size_t parameter_count)
      : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0) {}
};

void AdamStep(AdamState& state, std::span<double> parameters,
              std::span<const double> gradients, double learning_rate);

void AdamStep(AdamState& state, MlpModel& model, const MlpModel& gradients,
              double learning_rate);

}  // namespace svolab

#endif  // SVOLAB_ADAM_H_
