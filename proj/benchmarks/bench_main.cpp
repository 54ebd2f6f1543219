#include <benchmark/benchmark.h>

#include "atree/boosting.hpp"
#include "atree/dataset.hpp"
#include "atree/svm.hpp"
#include "atree/tree.hpp"

namespace {

using namespace atree;

// Two-class problem from the first two blob classes, `n` samples per class.
struct BinaryData {
  Dataset data;
  BinaryProblem problem;
};

BinaryData binary_data(std::size_t n, std::size_t dim) {
  BinaryData b{generate_gaussian_blobs(2, n, dim, 0.6, 3).normalized(), {}};
  for (std::size_t i = 0; i < b.data.size(); ++i) {
    b.problem.add(b.data.row(i), b.data[i].label == 0 ? -1 : 1, b.data[i].weight, i);
  }
  return b;
}

void BM_StumpSearch(benchmark::State& state) {
  const auto b = binary_data(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(train_stump(b.problem));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.problem.size()));
}
BENCHMARK(BM_StumpSearch)->Arg(100)->Arg(1000)->Arg(5000);

void BM_LinearSvmTrain(benchmark::State& state) {
  const auto b = binary_data(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(train_linear_svm(b.problem, SvmConfig{}));
}
BENCHMARK(BM_LinearSvmTrain)->Arg(100)->Arg(1000);

void BM_RbfSvmTrain(benchmark::State& state) {
  const auto b = binary_data(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_kernel_svm(b.problem, KernelSpec::rbf(0.5), SvmConfig{}));
  }
}
BENCHMARK(BM_RbfSvmTrain)->Arg(100)->Arg(500);

void BM_TreePredict(benchmark::State& state) {
  const int classes = static_cast<int>(state.range(0));
  const Dataset data = generate_gaussian_blobs(classes, 50, 16, 0.5, 5).normalized();
  AtreeConfig cfg;
  cfg.delta = 0.7;
  const Atree tree = train_atree(data, cfg);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(tree, data.row(i)));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_TreePredict)->Arg(8)->Arg(32);

}  // namespace
BENCHMARK_MAIN();
