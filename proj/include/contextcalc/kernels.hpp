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

#ifndef CONTEXTCALC_KERNELS_HPP
#define CONTEXTCALC_KERNELS_HPP

// Hot loops in two flavours: a plain serial reference and an OpenMP version.
// Both split the work into the same fixed chunks and combine the per-chunk
// partials in chunk order, so the two produce bit-identical results whatever
// the thread count. Monte-Carlo chunks draw from independent substreams
// seeded by splitmix64(seed, chunk).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace contextcalc::kernels {

struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    void merge(const Welford &o) {
        if (o.n == 0) {
            return;
        }
        if (n == 0) {
            *this = o;
            return;
        }
        double total = static_cast<double>(n + o.n);
        double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
};

struct MeanEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t samples = 0;
};

MeanEstimate finish(const Welford &w);

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t chunk);

/// Worker count: omp_get_max_threads(), capped by CONTEXTCALC_THREADS if set.
int worker_threads();

/// Number of Monte-Carlo chunks used for `samples` draws.
std::size_t mc_chunks(std::size_t samples);

namespace detail {
template <class Sampler>
Welford run_chunk(std::size_t samples, std::size_t chunks, std::size_t c, std::uint64_t seed, const Sampler &f) {
    std::size_t lo = samples * c / chunks;
    std::size_t hi = samples * (c + 1) / chunks;
    std::mt19937_64 rng(substream_seed(seed, c));
    Welford w;
    for (std::size_t i = lo; i < hi; ++i) {
        w.add(f(rng));
    }
    return w;
}
}  // namespace detail

/// Mean of f(rng) over `samples` draws; f must be callable concurrently.
template <class Sampler>
MeanEstimate mc_mean_serial(std::size_t samples, std::uint64_t seed, const Sampler &f) {
    std::size_t chunks = mc_chunks(samples);
    Welford total;
    for (std::size_t c = 0; c < chunks; ++c) {
        total.merge(detail::run_chunk(samples, chunks, c, seed, f));
    }
    return finish(total);
}

template <class Sampler>
MeanEstimate mc_mean_parallel(std::size_t samples, std::uint64_t seed, const Sampler &f) {
    std::size_t chunks = mc_chunks(samples);
    std::vector<Welford> parts(chunks);
    const long long nc = static_cast<long long>(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
    for (long long c = 0; c < nc; ++c) {
        parts[static_cast<std::size_t>(c)] =
            detail::run_chunk(samples, chunks, static_cast<std::size_t>(c), seed, f);
    }
    Welford total;
    for (const auto &w : parts) {
        total.merge(w);
    }
    return finish(total);
}

/// Sum_i w_i a_i b_i
double weighted_dot_serial(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double weighted_dot_parallel(std::span<const double> w, std::span<const double> a, std::span<const double> b);

/// Sum_i w_i |a_i - b_i|
double weighted_l1_serial(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double weighted_l1_parallel(std::span<const double> w, std::span<const double> a, std::span<const double> b);

/// Runs body(i) for i in [0, n); the parallel flavour uses dynamic scheduling.
template <class Body>
void for_each_serial(std::size_t n, const Body &body) {
    for (std::size_t i = 0; i < n; ++i) {
        body(i);
    }
}

template <class Body>
void for_each_parallel(std::size_t n, const Body &body) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
    for (long long i = 0; i < nn; ++i) {
        body(static_cast<std::size_t>(i));
    }
}

}  // namespace contextcalc::kernels

#endif
