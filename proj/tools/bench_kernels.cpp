// Copyright 2026 The steinkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include "steinkit/parallel_kernels.hpp"
#include "steinkit/rng.hpp"

namespace {

using steinkit::Matrix;
using steinkit::Vector;

constexpr Eigen::Index kDim = 10;
constexpr double kBandwidth = 2.0;

struct Inputs {
  Matrix x;
  Matrix scores;
  Vector coeffs;

  explicit Inputs(Eigen::Index n) {
    steinkit::Rng rng(7);
    x = rng.normal_matrix(n, kDim);
    scores = -x;
    coeffs = Vector::Constant(n, 1.0 / static_cast<double>(n));
  }
};

template <Matrix (*Fn)(const Matrix&, const Matrix&, double)>
void bench_gram(benchmark::State& state) {
  const Inputs in(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(in.x, in.x, kBandwidth));
  }
}

template <Matrix (*Fn)(const Matrix&, const Matrix&, const Vector&, const Matrix&, double)>
void bench_direction(benchmark::State& state) {
  const Inputs in(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(in.x, in.scores, in.coeffs, in.x, kBandwidth));
  }
}

template <Matrix (*Fn)(const Matrix&, const Matrix&, double)>
void bench_stein(benchmark::State& state) {
  const Inputs in(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(in.x, in.scores, kBandwidth));
  }
}

#define STEINKIT_BENCH(fn) BENCHMARK(fn)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMicrosecond)

STEINKIT_BENCH(bench_gram<steinkit::serial::rbf_gram>)->Name("rbf_gram/serial");
STEINKIT_BENCH(bench_gram<steinkit::omp::rbf_gram>)->Name("rbf_gram/omp");
STEINKIT_BENCH(bench_direction<steinkit::serial::stein_direction>)->Name("stein_direction/serial");
STEINKIT_BENCH(bench_direction<steinkit::omp::stein_direction>)->Name("stein_direction/omp");
STEINKIT_BENCH(bench_stein<steinkit::serial::stein_kernel_matrix>)->Name("stein_kernel_matrix/serial");
STEINKIT_BENCH(bench_stein<steinkit::omp::stein_kernel_matrix>)->Name("stein_kernel_matrix/omp");

}  // namespace

BENCHMARK_MAIN();
