#include <benchmark/benchmark.h>

#include "helmsense/shape_sensitivity.hpp"

using namespace helmsense;

static void bench_assemble_2d(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    const auto mesh = generate_mesh(Domain::rectangle(Vec(-1, -1), Vec(1, 1)), h);
    const ScalarFn source = [](const Vec& x) { return x.x() + x.y(); };
    for (auto _ : state) {
        LinearSystem sys = assemble(mesh, 2.0, {}, {}, source);
        benchmark::DoNotOptimize(sys.matrix.nonZeros());
    }
    state.SetItemsProcessed(state.iterations() * mesh->element_count());
}
BENCHMARK(bench_assemble_2d)->Arg(16)->Arg(32)->Arg(64);

static void bench_solve_2d(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    const auto mesh = generate_mesh(Domain::rectangle(Vec(-1, -1), Vec(1, 1)), h);
    const ProblemData data = make_data_preset("trig2d", 2.0);
    for (auto _ : state) {
        const FemField eta = solve_direct(mesh, data);
        benchmark::DoNotOptimize(eta.values.norm());
    }
}
BENCHMARK(bench_solve_2d)->Arg(16)->Arg(32)->Arg(64);

static void bench_polyline_distance(benchmark::State& state) {
    std::vector<Vec> vertices;
    for (int i = 0; i <= 64; ++i)
        vertices.push_back(Vec(-0.8 + 1.6 * i / 64.0, 0.3 * std::sin(0.5 * i)));
    const RectifiableSet set = RectifiableSet::polyline_through(vertices);
    double acc = 0.0;
    int i = 0;
    for (auto _ : state) {
        const Vec x(std::cos(0.01 * i), std::sin(0.017 * i));
        acc += set.distance(x).first;
        benchmark::DoNotOptimize(acc);
        ++i;
    }
}
BENCHMARK(bench_polyline_distance);

static void bench_shape_derivative_1d(benchmark::State& state) {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 256.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const VelocityField v = make_velocity_preset("bump1d");
    for (auto _ : state) {
        const auto report = shape_derivative(mesh, data, v);
        benchmark::DoNotOptimize(report.dJ);
    }
}
BENCHMARK(bench_shape_derivative_1d);

BENCHMARK_MAIN();
