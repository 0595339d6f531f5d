#include <benchmark/benchmark.h>

#include <nnreach/closed_loop.hpp>
#include <nnreach/partitioners.hpp>

using namespace nnreach;

namespace {

Hyperrect unit_box(Eigen::Index n) { return Hyperrect(Vec::Zero(n), Vec::Ones(n)); }

LtvSystem double_integrator() {
    LtvSystem sys;
    Mat A(2, 2), B(2, 1);
    A << 1.0, 1.0, 0.0, 1.0;
    B << 0.5, 1.0;
    sys.A = {A};
    sys.B = {B};
    sys.C = {Mat::Identity(2, 2)};
    sys.c = {Vec::Zero(2)};
    sys.omega_lo = Vec::Zero(2);
    sys.omega_hi = Vec::Zero(2);
    sys.nu_lo = Vec::Zero(2);
    sys.nu_hi = Vec::Zero(2);
    sys.control_limits = std::make_pair(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
    return sys;
}

void BM_ibp(benchmark::State& state) {
    Network net = random_network({2, 64, 64, 2}, 1);
    Hyperrect in = unit_box(2);
    Specification spec = Specification::identity(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate(PropagatorKind::IBP, net, in, spec));
}
BENCHMARK(BM_ibp);

void BM_crown(benchmark::State& state) {
    Network net = random_network({2, 64, 64, 2}, 1);
    Hyperrect in = unit_box(2);
    Specification spec = Specification::identity(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate(PropagatorKind::CROWN, net, in, spec));
}
BENCHMARK(BM_crown);

void BM_gsg_partition(benchmark::State& state) {
    Network net = random_network({2, 50, 2}, 2);
    Hyperrect in = unit_box(2);
    AnalyzerConfig cfg;
    cfg.partitioner = PartitionerKind::GSG;
    cfg.term.propagator_call_budget = static_cast<int>(state.range(0));
    cfg.mc_samples = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(greedy_sim_guided(net, in, cfg));
}
BENCHMARK(BM_gsg_partition)->Arg(25)->Arg(100);

void BM_reach_step(benchmark::State& state) {
    NeuralFeedbackLoop nfl(double_integrator(), random_network({2, 5, 5, 1}, 42));
    Vec lo(2), hi(2);
    lo << 2.5, -0.25;
    hi << 3.0, 0.25;
    Hyperrect X0(lo, hi);
    for (auto _ : state) benchmark::DoNotOptimize(reach_step(nfl, 0, X0));
}
BENCHMARK(BM_reach_step);

void BM_reach_sequence(benchmark::State& state) {
    NeuralFeedbackLoop nfl(double_integrator(), random_network({2, 5, 5, 1}, 42));
    Vec lo(2), hi(2);
    lo << 2.5, -0.25;
    hi << 3.0, 0.25;
    Hyperrect X0(lo, hi);
    for (auto _ : state)
        benchmark::DoNotOptimize(reach_sequence(nfl, X0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_reach_sequence)->Arg(5)->Arg(10);

void BM_lp_solve(benchmark::State& state) {
    Polytope poly = Polytope::from_rect(unit_box(4));
    Vec c(4);
    c << 1.0, -2.0, 0.5, 1.5;
    for (auto _ : state) benchmark::DoNotOptimize(lp_solve(c, poly, LpSense::Max));
}
BENCHMARK(BM_lp_solve);

}  // namespace

BENCHMARK_MAIN();
