#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "support/synthetic.h"
#include "svolab/conllu.h"
#include "svolab/logistic.h"
#include "svolab/mlp.h"
#include "svolab/triad_io.h"
#include "svolab/triads.h"

namespace svolab {
namespace {

std::string RepeatedFixture(int copies) {
  const std::string one = ReadTextFile(testing::FixturePath("mini-ud-train.conllu"));
  std::string out;
  for (int i = 0; i < copies; ++i) out += one;
  return out;
}

void BM_ParseConllu(benchmark::State& state) {
  const std::string text = RepeatedFixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto sentences = ParseDocument(text);
    benchmark::DoNotOptimize(sentences);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseConllu)->Arg(10)->Arg(100);

void BM_ExtractTriads(benchmark::State& state) {
  Treebank tb;
  tb.corpus_name = "bench";
  tb.sentences = ParseDocument(RepeatedFixture(100));
  for (auto _ : state) benchmark::DoNotOptimize(ExtractTriads(tb, {}));
}
BENCHMARK(BM_ExtractTriads);

void BM_MlpForwardBackward(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  MlpModel model = MlpModel::GlorotUniform(MlpShape{900, hidden, hidden}, 1);
  Dataset batch = Dataset::FromExamples(testing::TwoGaussians(32, 900, 1.0, 1, 2));
  for (auto _ : state) {
    auto lg = ComputeLossAndGradients(model, batch.features, batch.first_is_subject);
    benchmark::DoNotOptimize(lg.loss);
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_Irls(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd x(n, 4);
  std::vector<std::uint8_t> y(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) << 1.0, normal(rng), normal(rng), normal(rng);
    y[i] = u(rng) < 1.0 / (1.0 + std::exp(-(0.5 - x(i, 1) + 0.3 * x(i, 2)))) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(FitLogistic(x, y).coefficients);
}
BENCHMARK(BM_Irls)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace svolab

BENCHMARK_MAIN();
