// Microbenchmarks for the hot paths: field evaluation, RK4 propagation, and
// model prediction/training at desk scale.
#include <benchmark/benchmark.h>

#include "gravlearn/dataset.hpp"
#include "gravlearn/gp_regressor.hpp"
#include "gravlearn/nn_regressor.hpp"
#include "gravlearn/propagation.hpp"

using namespace gravlearn;

namespace {

const ZonalGravityField& bennu() {
    static const ZonalGravityField field = ZonalGravityField::bennu_normalized();
    return field;
}

SampledDataset make_dataset(int n_periods) {
    const KeplerianElements el{2.0, 0.3, 0.7, 0.4, 0.9, 0.2};
    TrajectorySpec spec{static_cast<double>(n_periods), 25, 1000};
    const auto traj = propagate_and_sample(bennu(), elements_to_state(el, 1.0), spec);
    DatasetProvenance prov;
    prov.role = "train";
    prov.initial_condition = el;
    prov.spec = spec;
    prov.noise.accel_scale = 48.0;
    return build_dataset(traj, prov);
}

void BM_PointMassAcceleration(benchmark::State& state) {
    const auto pm = ZonalGravityField::point_mass();
    const Vec3 x(1.3, -0.4, 0.8);
    for (auto _ : state) benchmark::DoNotOptimize(acceleration(pm, x));
}
BENCHMARK(BM_PointMassAcceleration);

void BM_ZonalAcceleration(benchmark::State& state) {
    const Vec3 x(1.3, -0.4, 0.8);
    for (auto _ : state) benchmark::DoNotOptimize(acceleration(bennu(), x));
}
BENCHMARK(BM_ZonalAcceleration);

void BM_Rk4Step(benchmark::State& state) {
    const CartesianState s{{1.5, 0, 0}, {0, 0.8, 0.1}};
    for (auto _ : state) benchmark::DoNotOptimize(rk4_step(bennu(), s, 1e-3));
}
BENCHMARK(BM_Rk4Step);

void BM_PropagateOnePeriod(benchmark::State& state) {
    const CartesianState s{{1.5, 0, 0}, {0, 0.8, 0.1}};
    TrajectorySpec spec{1.0, 25, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(propagate_and_sample(bennu(), s, spec));
}
BENCHMARK(BM_PropagateOnePeriod)->Arg(200)->Arg(1000);

void BM_CollisionScreen(benchmark::State& state) {
    const auto s = elements_to_state({2.0, 0.4, 0.6, 0.3, 0.8, 0.1}, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(classify_collision(bennu(), s, 50.0, 1.0));
}
BENCHMARK(BM_CollisionScreen);

void BM_NnForward(benchmark::State& state) {
    const MlpNetwork net(100.0, 7);
    std::vector<Vec3> xs(64, Vec3(1.4, -0.2, 0.9));
    for (auto _ : state) benchmark::DoNotOptimize(net.predict(xs));
}
BENCHMARK(BM_NnForward);

void BM_NnTrainEpochs(benchmark::State& state) {
    const SampledDataset ds = make_dataset(10);
    NnTrainConfig cfg;
    cfg.epochs = static_cast<int>(state.range(0));
    cfg.seed = 3;
    for (auto _ : state) benchmark::DoNotOptimize(train_nn(ds, cfg));
}
BENCHMARK(BM_NnTrainEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GpTrainEpochs(benchmark::State& state) {
    const SampledDataset ds = make_dataset(10);
    GpTrainConfig cfg;
    cfg.epochs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(train_gp(ds, cfg));
}
BENCHMARK(BM_GpTrainEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GpPredict(benchmark::State& state) {
    const SampledDataset ds = make_dataset(10);
    GpTrainConfig cfg;
    cfg.epochs = 5;
    const TrainedGp gp = train_gp(ds, cfg);
    std::vector<Vec3> xs(64, Vec3(1.4, -0.2, 0.9));
    for (auto _ : state) benchmark::DoNotOptimize(gp.predict(xs));
}
BENCHMARK(BM_GpPredict)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
