// Copyright 2026 The contextcalc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "contextcalc/kernels.hpp"
#include "contextcalc/ontomodels.hpp"
#include "contextcalc/qgames.hpp"

using namespace contextcalc;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (double &x : v) {
        x = u(rng);
    }
    return v;
}

void BM_HaarThresholdSerial(benchmark::State &state) {
    auto dim = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgames::qudit_haar_threshold_serial(dim, 20000, 1));
    }
}

void BM_HaarThresholdParallel(benchmark::State &state) {
    auto dim = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgames::qudit_haar_threshold(dim, 20000, 1));
    }
}

void BM_WeightedDotSerial(benchmark::State &state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::weighted_dot_serial(w, a, b));
    }
}

void BM_WeightedDotParallel(benchmark::State &state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::weighted_dot_parallel(w, a, b));
    }
}

void BM_WeightedL1Serial(benchmark::State &state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::weighted_l1_serial(w, a, b));
    }
}

void BM_WeightedL1Parallel(benchmark::State &state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::weighted_l1_parallel(w, a, b));
    }
}

std::vector<std::pair<qmath::BlochVector, qmath::BlochVector>> born_pairs(std::size_t count) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    auto unit = [&] {
        qmath::BlochVector v{n(rng), n(rng), n(rng)};
        return v * (1.0 / v.norm());
    };
    std::vector<std::pair<qmath::BlochVector, qmath::BlochVector>> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto s = unit();
        out.emplace_back(s, unit());
    }
    return out;
}

void BM_KsBornBatchSerial(benchmark::State &state) {
    auto grid = ontomodels::SphereGrid::product(64, 128);
    auto pairs = born_pairs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ontomodels::ks_born_batch_serial(grid, pairs));
    }
}

void BM_KsBornBatchParallel(benchmark::State &state) {
    auto grid = ontomodels::SphereGrid::product(64, 128);
    auto pairs = born_pairs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ontomodels::ks_born_batch_parallel(grid, pairs));
    }
}

}  // namespace

BENCHMARK(BM_HaarThresholdSerial)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HaarThresholdParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedDotSerial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WeightedDotParallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WeightedL1Serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WeightedL1Parallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_KsBornBatchSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KsBornBatchParallel)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
