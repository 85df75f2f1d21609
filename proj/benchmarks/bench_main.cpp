#include <benchmark/benchmark.h>

#include <cmath>

#include "vhc/dynamics.hpp"
#include "vhc/fresnel.hpp"
#include "vhc/virtual_pair.hpp"

namespace {

using namespace vhc;

ReducedDynamics ex1() {
    ExprPtr p1 = parse("sin(2*s)/(2+cos(s))", {"s"});
    ExprPtr p2 = parse("-sin(s)/(2+cos(s))", {"s"});
    return make_reduced(ScalarFunction::from_expr(p1), ScalarFunction::from_expr(p2),
                        Topology::Circle, 2 * M_PI);
}

void BM_ExprTapeEval(benchmark::State& state) {
    ExprPtr e = parse("sin(2*s)/(2+cos(s)) + s^2*exp(-s)", {"s"});
    std::vector<std::string> vars{"s"};
    CompiledExpr tape(e, vars);
    double x = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tape(x));
        x += 1e-6;
    }
}
BENCHMARK(BM_ExprTapeEval);

void BM_ExprTreeEval(benchmark::State& state) {
    ExprPtr e = parse("sin(2*s)/(2+cos(s)) + s^2*exp(-s)", {"s"});
    std::map<std::string, double> b{{"s", 0.3}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(e, b));
        b["s"] += 1e-6;
    }
}
BENCHMARK(BM_ExprTreeEval);

void BM_VirtualPair(benchmark::State& state) {
    ReducedDynamics rd = ex1();
    for (auto _ : state) {
        benchmark::DoNotOptimize(virtual_pair(rd, static_cast<int>(state.range(0)), 1e-10));
    }
}
BENCHMARK(BM_VirtualPair)->Arg(512)->Arg(2048);

void BM_Integrate(benchmark::State& state) {
    ReducedDynamics rd = ex1();
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(rd, 0.5, 2.0, 50.0));
    }
}
BENCHMARK(BM_Integrate);

void BM_Fresnel(benchmark::State& state) {
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fresnel_C(x) + fresnel_S(2.9 - x));
        x = x < 2.9 ? x + 1e-4 : 0.0;
    }
}
BENCHMARK(BM_Fresnel);

}  // namespace

BENCHMARK_MAIN();
