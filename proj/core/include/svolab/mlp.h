// Two-hidden-layer ReLU network with a two-way softmax output.
//
//   p = softmax(W3 relu(W2 relu(W1 x + b1) + b2) + b3)
//
// Output 0 is "first argument is the subject", output 1 is "first argument
// is the object". All parameters live in one contiguous buffer (W1, b1, W2,
// b2, W3, b3; matrices row-major) so optimizers and serializers can treat the
// model as a flat vector.

#ifndef SVOLAB_MLP_H_
#define SVOLAB_MLP_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "svolab/embeddings.h"

namespace svolab {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyBatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MlpShape {
  static constexpr int kOutputs = 2;

  int input_dim = 0;
  int hidden1 = 0;
  int hidden2 = 0;

  std::size_t parameter_count() const;
  bool operator==(const MlpShape&) const = default;
};

class MlpModel {
 public:
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  // All-zero parameters.
  explicit MlpModel(MlpShape shape);

  // Glorot-uniform weights, zero biases.
  static MlpModel GlorotUniform(MlpShape shape, std::uint64_t seed);

  const MlpShape& shape() const { return shape_; }

  MatrixMap w1() { return Matrix(0, shape_.hidden1, shape_.input_dim); }
  VectorMap b1() { return Vector(b1_offset_, shape_.hidden1); }
  MatrixMap w2() { return Matrix(w2_offset_, shape_.hidden2, shape_.hidden1); }
  VectorMap b2() { return Vector(b2_offset_, shape_.hidden2); }
  MatrixMap w3() { return Matrix(w3_offset_, MlpShape::kOutputs, shape_.hidden2); }
  VectorMap b3() { return Vector(b3_offset_, MlpShape::kOutputs); }

  ConstMatrixMap w1() const { return Matrix(0, shape_.hidden1, shape_.input_dim); }
  ConstVectorMap b1() const { return Vector(b1_offset_, shape_.hidden1); }
  ConstMatrixMap w2() const { return Matrix(w2_offset_, shape_.hidden2, shape_.hidden1); }
  ConstVectorMap b2() const { return Vector(b2_offset_, shape_.hidden2); }
  ConstMatrixMap w3() const { return Matrix(w3_offset_, MlpShape::kOutputs, shape_.hidden2); }
  ConstVectorMap b3() const { return Vector(b3_offset_, MlpShape::kOutputs); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  bool AllFinite() const;

  bool operator==(const MlpModel& other) const {
    return shape_ == other.shape_ && params_ == other.params_;
  }

 private:
  MatrixMap Matrix(std::size_t offset, int rows, int cols) {
    return MatrixMap(params_.data() + offset, rows, cols);
  }
  ConstMatrixMap Matrix(std::size_t offset, int rows, int cols) const {
    return ConstMatrixMap(params_.data() + offset, rows, cols);
  }
  VectorMap Vector(std::size_t offset, int n) {
    return VectorMap(params_.data() + offset, n);
  }
  ConstVectorMap Vector(std::size_t offset, int n) const {
    return ConstVectorMap(params_.data() + offset, n);
  }

  MlpShape shape_;
  std::size_t b1_offset_, w2_offset_, b2_offset_, w3_offset_, b3_offset_;
  std::vector<double> params_;
};

// Dense copy of a list of examples: one row per example.
struct Dataset {
  RowMatrix features;
  std::vector<std::uint8_t> first_is_subject;

  static Dataset FromExamples(std::span<const TriadExample> examples);
  std::size_t size() const { return first_is_subject.size(); }
  int feature_length() const { return static_cast<int>(features.cols()); }
};

// (p_first_is_subject, p_first_is_object).
std::array<double, 2> Forward(const MlpModel& model,
                              std::span<const double> features);

// Row-wise probabilities for a feature matrix, shape (n, 2).
RowMatrix ForwardBatch(const MlpModel& model, const RowMatrix& features);

struct LossAndGradients {
  double loss = 0.0;
  // Same shape as the model; entry k is d(loss)/d(parameter k).
  MlpModel gradients;
};

// Mean cross-entropy -mean(log p_label) and its exact gradient.
LossAndGradients ComputeLossAndGradients(const MlpModel& model,
                                         std::span<const TriadExample> batch);
LossAndGradients ComputeLossAndGradients(const MlpModel& model,
                                         const RowMatrix& features,
                                         std::span<const std::uint8_t> labels);

// Loss only; used by the finite-difference checks.
double ComputeLoss(const MlpModel& model, const RowMatrix& features,
                   std::span<const std::uint8_t> labels);

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  // Exact 0.5/0.5 outputs, resolved to "first is subject".
  std::size_t ties = 0;
};

Evaluation Evaluate(const MlpModel& model, const Dataset& dataset);
Evaluation Evaluate(const MlpModel& model, std::span<const TriadExample> examples);

// Weight files: one JSON header line {"input_dim","hidden1","hidden2",
// "layers":[{"name","rows","cols"},...]} followed by the flat parameter
// buffer as little-endian float64.
void WriteModelFile(const std::filesystem::path& path, const MlpModel& model);
MlpModel ReadModelFile(const std::filesystem::path& path);

}  // namespace svolab

#endif  // SVOLAB_MLP_H_
