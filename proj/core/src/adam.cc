#include "svolab/adam.h"

#include <cmath>
#include <string>

namespace svolab {

void AdamStep(AdamState& state, std::span<double> parameters,
              std::span<const double> gradients, double learning_rate) {
  const std::size_t n = parameters.size();
  if (gradients.size() != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw ShapeError("adam: parameter/gradient/state sizes differ (" +
                     std::to_string(n) + ", " + std::to_string(gradients.size()) +
                     ", " + std::to_string(state.first_moment.size()) + ")");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gradients[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    parameters[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

void AdamStep(AdamState& state, MlpModel& model, const MlpModel& gradients,
              double learning_rate) {
  if (!(model.shape() == gradients.shape())) {
    throw ShapeError("adam: gradient shape does not match model");
  }
  AdamStep(state, model.parameters(), gradients.parameters(), learning_rate);
}

}  // namespace svolab
