#include <benchmark/benchmark.h>

#include <numeric>

#include "rad/data/split.hpp"
#include "rad/data/synth.hpp"
#include "rad/models/networks.hpp"
#include "rad/pipeline/training.hpp"
#include "rad/retrieval/inverted_index.hpp"

namespace {

using namespace rad;

// Default-sized synthetic data, built once.
struct Fixture {
  data::TemporalSplit split;
  std::shared_ptr<const retrieval::InvertedIndex> index;
  models::ModelDims dims;

  Fixture() {
    split = data::split_temporal(data::generate_synthetic_shift({}), {5, 2, 1});
    index = std::make_shared<const retrieval::InvertedIndex>(
        std::make_shared<const data::Dataset>(split.shifting));
    dims.cardinalities = split.train.schema().cardinalities();
  }

  static const Fixture& get() {
    static const Fixture f;
    return f;
  }
};

void BM_IndexBuild(benchmark::State& state) {
  const auto& f = Fixture::get();
  auto rows = std::make_shared<const data::Dataset>(f.split.shifting);
  for (auto _ : state) {
    retrieval::InvertedIndex index(rows);
    benchmark::DoNotOptimize(index.doc_count());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows->size()));
}
BENCHMARK(BM_IndexBuild)->Unit(benchmark::kMillisecond);

void BM_RetrieveTopK(benchmark::State& state) {
  const auto& f = Fixture::get();
  const auto k = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = f.split.test[i++ % f.split.test.size()];
    benchmark::DoNotOptimize(f.index->retrieve_topk(q.features, k));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RetrieveTopK)->Arg(1)->Arg(10)->Arg(30)->Arg(50);

template <typename Build>
void run_inference(benchmark::State& state, Build build) {
  const auto& f = Fixture::get();
  auto dims = f.dims;
  dims.k = static_cast<std::size_t>(state.range(0));
  nn::Rng rng(1);
  const auto model = build(f, dims, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->predict(f.split.test[i++ % f.split.test.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_InferOriginal(benchmark::State& state) {
  run_inference(state, [](const Fixture&, const models::ModelDims& d, nn::Rng& rng) {
    return std::make_unique<models::OriginalModel>(d, rng);
  });
}
BENCHMARK(BM_InferOriginal)->Arg(0);

void BM_InferDistillFramework(benchmark::State& state) {
  run_inference(state, [](const Fixture&, const models::ModelDims& d, nn::Rng& rng) {
    return std::make_unique<models::DistillFramework>(
        d, std::make_shared<models::OriginalModel>(d, rng),
        std::make_shared<models::SearchDistillModule>(d, rng), rng);
  });
}
BENCHMARK(BM_InferDistillFramework)->Arg(0);

void BM_InferRetrievalFramework(benchmark::State& state) {
  run_inference(state, [](const Fixture& f, const models::ModelDims& d, nn::Rng& rng) {
    models::TeacherRetrieval teacher(d, f.index, rng);
    return std::make_unique<models::RetrievalFramework>(
        d, std::make_shared<models::OriginalModel>(d, rng), teacher.relevance(), rng);
  });
}
BENCHMARK(BM_InferRetrievalFramework)->Arg(1)->Arg(10)->Arg(30)->Arg(50);

void BM_TrainStepOriginal(benchmark::State& state) {
  const auto& f = Fixture::get();
  nn::Rng rng(2);
  models::OriginalModel model(f.dims, rng);
  std::vector<std::size_t> rows(256);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto batch = f.split.train.subset(rows);
  for (auto _ : state) {
    pipeline::fit_binary(model, batch, {.epochs = 1, .batch_size = 256});
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TrainStepOriginal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
