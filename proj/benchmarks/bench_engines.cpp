#include <benchmark/benchmark.h>

#include "wsbm/bp.hpp"
#include "wsbm/synthgen.hpp"
#include "wsbm/vb.hpp"

namespace {

constexpr std::size_t kVertices = 10000;
constexpr int kGroups = 4;

struct Instance {
  wsbm::ObservedNetwork net;
  wsbm::ModelConfig cfg;
};

Instance make_instance(std::size_t edges) {
  auto s = wsbm::sparse_uniform(kVertices, kGroups, edges, 1.0, -1.0, 0.5, 11);
  wsbm::ModelConfig cfg;
  cfg.k = kGroups;
  cfg.alpha = 0.5;
  cfg = wsbm::resolve_config(cfg, s.network);
  return {std::move(s.network), cfg};
}

// One outer VB iteration: bundle update plus a single belief sweep.
void BM_VbIteration(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)));
  const wsbm::SparseView view(inst.net);
  wsbm::Rng rng(3);
  auto beliefs = wsbm::VertexBeliefs::random(kVertices, kGroups, rng);
  for (auto _ : state) {
    const auto post = wsbm::update_bundles(view, beliefs, inst.cfg);
    wsbm::update_beliefs(view, post, inst.cfg, beliefs, 0.0, 1);
    benchmark::DoNotOptimize(beliefs.matrix().data().data());
  }
  state.counters["edges"] = static_cast<double>(state.range(0));
}
BENCHMARK(BM_VbIteration)->Arg(100000)->Arg(200000)->Unit(benchmark::kMillisecond);

// One synchronous BP sweep with the non-edge field and belief readout.
void BM_BpSweep(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)));
  const wsbm::SparseView view(inst.net);
  const auto graph = wsbm::BpGraph::sparse(view);
  wsbm::Rng rng(3);
  auto beliefs = wsbm::VertexBeliefs::random(kVertices, kGroups, rng);
  const auto post = wsbm::update_bundles(view, beliefs, inst.cfg);
  const auto ev = wsbm::compute_evidence(graph, view, post, inst.cfg);
  auto messages = wsbm::MessageSet::perturbed(graph, kGroups, 0.01, rng);
  for (auto _ : state) {
    const auto field = wsbm::non_edge_field(graph, view, ev, beliefs, inst.cfg.alpha);
    wsbm::sweep_messages(graph, ev, field, inst.cfg.mu0, messages, 0.3);
    beliefs = wsbm::compute_vertex_beliefs(graph, ev, field, inst.cfg.mu0, messages);
    benchmark::DoNotOptimize(beliefs.matrix().data().data());
  }
  state.counters["edges"] = static_cast<double>(state.range(0));
}
BENCHMARK(BM_BpSweep)->Arg(100000)->Arg(200000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
