#include "svolab/mlp.h"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"

namespace svolab {
namespace {

struct Activations {
  RowMatrix pre1, h1, pre2, h2, logits, log_probs;
};

void CheckInput(const MlpModel& model, Eigen::Index cols) {
  if (cols != model.shape().input_dim) {
    throw ShapeError("feature length " + std::to_string(cols) +
                     " does not match model input dim " +
                     std::to_string(model.shape().input_dim));
  }
}

Activations Run(const MlpModel& model, const RowMatrix& x) {
  CheckInput(model, x.cols());
  Activations a;
  a.pre1 = (x * model.w1().transpose()).rowwise() + model.b1().transpose();
  a.h1 = a.pre1.cwiseMax(0.0);
  a.pre2 = (a.h1 * model.w2().transpose()).rowwise() + model.b2().transpose();
  a.h2 = a.pre2.cwiseMax(0.0);
  a.logits = (a.h2 * model.w3().transpose()).rowwise() + model.b3().transpose();
  // Stable log-softmax per row.
  a.log_probs.resize(a.logits.rows(), MlpShape::kOutputs);
  for (Eigen::Index i = 0; i < a.logits.rows(); ++i) {
    const double z0 = a.logits(i, 0);
    const double z1 = a.logits(i, 1);
    const double m = std::max(z0, z1);
    const double log_sum = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    a.log_probs(i, 0) = z0 - log_sum;
    a.log_probs(i, 1) = z1 - log_sum;
  }
  return a;
}

// Class index: 0 when the first argument is the subject.
int ClassOf(std::uint8_t first_is_subject) { return first_is_subject ? 0 : 1; }

void CheckLabels(const RowMatrix& x, std::span<const std::uint8_t> labels) {
  if (labels.empty() || x.rows() == 0) throw EmptyBatch("empty batch");
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw ShapeError("label count does not match feature rows");
  }
}

}  // namespace

std::size_t MlpShape::parameter_count() const {
  const std::size_t d = input_dim, h1 = hidden1, h2 = hidden2, k = kOutputs;
  return h1 * d + h1 + h2 * h1 + h2 + k * h2 + k;
}

MlpModel::MlpModel(MlpShape shape) : shape_(shape) {
  if (shape.input_dim <= 0 || shape.hidden1 <= 0 || shape.hidden2 <= 0) {
    throw ShapeError("model dimensions must be positive");
  }
  const std::size_t d = shape.input_dim, h1 = shape.hidden1, h2 = shape.hidden2;
  b1_offset_ = h1 * d;
  w2_offset_ = b1_offset_ + h1;
  b2_offset_ = w2_offset_ + h2 * h1;
  w3_offset_ = b2_offset_ + h2;
  b3_offset_ = w3_offset_ + MlpShape::kOutputs * h2;
  params_.assign(shape.parameter_count(), 0.0);
}

MlpModel MlpModel::GlorotUniform(MlpShape shape, std::uint64_t seed) {
  MlpModel model(shape);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](MatrixMap w) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  };
  fill(model.w1());
  fill(model.w2());
  fill(model.w3());
  return model;
}

bool MlpModel::AllFinite() const {
  for (double p : params_) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

Dataset Dataset::FromExamples(std::span<const TriadExample> examples) {
  Dataset d;
  if (examples.empty()) return d;
  const std::size_t length = examples.front().features.size();
  d.features.resize(static_cast<Eigen::Index>(examples.size()),
                    static_cast<Eigen::Index>(length));
  d.first_is_subject.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].features.size() != length) {
      throw ShapeError("examples have inconsistent feature lengths");
    }
    d.features.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(examples[i].features.data(),
                                             static_cast<Eigen::Index>(length));
    d.first_is_subject.push_back(examples[i].first_is_subject ? 1 : 0);
  }
  return d;
}

std::array<double, 2> Forward(const MlpModel& model,
                              std::span<const double> features) {
  RowMatrix x = Eigen::Map<const RowMatrix>(features.data(), 1,
                                            static_cast<Eigen::Index>(features.size()));
  RowMatrix p = ForwardBatch(model, x);
  return {p(0, 0), p(0, 1)};
}

RowMatrix ForwardBatch(const MlpModel& model, const RowMatrix& features) {
  Activations a = Run(model, features);
  return a.log_probs.array().exp().matrix();
}

double ComputeLoss(const MlpModel& model, const RowMatrix& features,
                   std::span<const std::uint8_t> labels) {
  CheckLabels(features, labels);
  Activations a = Run(model, features);
  double total = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    total -= a.log_probs(i, ClassOf(labels[i]));
  }
  return total / static_cast<double>(features.rows());
}

LossAndGradients ComputeLossAndGradients(const MlpModel& model,
                                         const RowMatrix& features,
                                         std::span<const std::uint8_t> labels) {
  CheckLabels(features, labels);
  Activations a = Run(model, features);
  const Eigen::Index n = features.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossAndGradients out{0.0, MlpModel(model.shape())};
  // d(loss)/d(logits) = (softmax - onehot) / n.
  RowMatrix d_logits = a.log_probs.array().exp().matrix();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = ClassOf(labels[i]);
    total -= a.log_probs(i, y);
    d_logits(i, y) -= 1.0;
  }
  d_logits *= inv_n;
  out.loss = total * inv_n;

  MlpModel& g = out.gradients;
  g.w3() = d_logits.transpose() * a.h2;
  g.b3() = d_logits.colwise().sum().transpose();

  RowMatrix d_pre2 = d_logits * model.w3();
  d_pre2 = d_pre2.cwiseProduct((a.pre2.array() > 0.0).cast<double>().matrix());
  g.w2() = d_pre2.transpose() * a.h1;
  g.b2() = d_pre2.colwise().sum().transpose();

  RowMatrix d_pre1 = d_pre2 * model.w2();
  d_pre1 = d_pre1.cwiseProduct((a.pre1.array() > 0.0).cast<double>().matrix());
  g.w1() = d_pre1.transpose() * features;
  g.b1() = d_pre1.colwise().sum().transpose();
  return out;
}

LossAndGradients ComputeLossAndGradients(const MlpModel& model,
                                         std::span<const TriadExample> batch) {
  if (batch.empty()) throw EmptyBatch("empty batch");
  Dataset d = Dataset::FromExamples(batch);
  return ComputeLossAndGradients(model, d.features, d.first_is_subject);
}

Evaluation Evaluate(const MlpModel& model, const Dataset& dataset) {
  if (dataset.size() == 0) throw EmptyDataset("cannot evaluate on an empty dataset");
  RowMatrix p = ForwardBatch(model, dataset.features);
  Evaluation e;
  e.total = dataset.size();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double p0 = p(static_cast<Eigen::Index>(i), 0);
    const double p1 = p(static_cast<Eigen::Index>(i), 1);
    if (p0 == p1) ++e.ties;
    const bool predicted_subject_first = p0 >= p1;
    if (predicted_subject_first == (dataset.first_is_subject[i] != 0)) ++e.correct;
  }
  e.accuracy = static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

Evaluation Evaluate(const MlpModel& model, std::span<const TriadExample> examples) {
  if (examples.empty()) throw EmptyDataset("cannot evaluate on an empty dataset");
  return Evaluate(model, Dataset::FromExamples(examples));
}

void WriteModelFile(const std::filesystem::path& path, const MlpModel& model) {
  const MlpShape& s = model.shape();
  nlohmann::ordered_json header;
  header["input_dim"] = s.input_dim;
  header["hidden1"] = s.hidden1;
  header["hidden2"] = s.hidden2;
  auto layer = [](const char* name, int rows, int cols) {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["rows"] = rows;
    j["cols"] = cols;
    return j;
  };
  header["layers"] = {layer("W1", s.hidden1, s.input_dim), layer("b1", s.hidden1, 1),
                      layer("W2", s.hidden2, s.hidden1),   layer("b2", s.hidden2, 1),
                      layer("W3", MlpShape::kOutputs, s.hidden2),
                      layer("b3", MlpShape::kOutputs, 1)};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump() << '\n';
  auto params = model.parameters();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

MlpModel ReadModelFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::string header_line;
  std::getline(in, header_line);
  nlohmann::json header = nlohmann::json::parse(header_line);
  MlpModel model(MlpShape{header.at("input_dim").get<int>(),
                          header.at("hidden1").get<int>(),
                          header.at("hidden2").get<int>()});
  auto params = model.parameters();
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated model file " + path.string());
  return model;
}

}  // namespace svolab
