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

#include "contextcalc/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

#include "contextcalc/errors.hpp"

namespace contextcalc::kernels {

namespace {

constexpr std::size_t kMaxMcChunks = 256;
constexpr std::size_t kReduceChunk = 4096;

void require_same_size(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    if (a.size() != w.size() || b.size() != w.size()) {
        throw ContractError("kernels: weight/value length mismatch");
    }
}

double dot_range(std::span<const double> w, std::span<const double> a, std::span<const double> b, std::size_t lo,
                 std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        s += w[i] * a[i] * b[i];
    }
    return s;
}

double l1_range(std::span<const double> w, std::span<const double> a, std::span<const double> b, std::size_t lo,
                std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        s += w[i] * std::abs(a[i] - b[i]);
    }
    return s;
}

template <class F>
double chunked_serial(std::size_t n, const F &f) {
    double total = 0.0;
    for (std::size_t lo = 0; lo < n; lo += kReduceChunk) {
        total += f(lo, std::min(n, lo + kReduceChunk));
    }
    return total;
}

template <class F>
double chunked_parallel(std::size_t n, const F &f) {
    std::size_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<double> parts(chunks, 0.0);
    const long long nc = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (long long c = 0; c < nc; ++c) {
        std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
        parts[static_cast<std::size_t>(c)] = f(lo, std::min(n, lo + kReduceChunk));
    }
    double total = 0.0;
    for (double p : parts) {
        total += p;
    }
    return total;
}

}  // namespace

MeanEstimate finish(const Welford &w) {
    MeanEstimate e;
    e.mean = w.mean;
    e.samples = w.n;
    if (w.n > 1) {
        double var = w.m2 / static_cast<double>(w.n - 1);
        e.std_err = std::sqrt(var / static_cast<double>(w.n));
    }
    return e;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t chunk) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

int worker_threads() {
    int n = omp_get_max_threads();
    if (const char *env = std::getenv("CONTEXTCALC_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) {
                n = std::min(n, cap);
            }
        } catch (const std::exception &) {
            // Ignore malformed values; the default applies.
        }
    }
    return std::max(n, 1);
}

std::size_t mc_chunks(std::size_t samples) { return std::clamp<std::size_t>(samples, 1, kMaxMcChunks); }

double weighted_dot_serial(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    require_same_size(w, a, b);
    return chunked_serial(w.size(), [&](std::size_t lo, std::size_t hi) { return dot_range(w, a, b, lo, hi); });
}

double weighted_dot_parallel(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    require_same_size(w, a, b);
    return chunked_parallel(w.size(), [&](std::size_t lo, std::size_t hi) { return dot_range(w, a, b, lo, hi); });
}

double weighted_l1_serial(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    require_same_size(w, a, b);
    return chunked_serial(w.size(), [&](std::size_t lo, std::size_t hi) { return l1_range(w, a, b, lo, hi); });
}

double weighted_l1_parallel(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    require_same_size(w, a, b);
    return chunked_parallel(w.size(), [&](std::size_t lo, std::size_t hi) { return l1_range(w, a, b, lo, hi); });
}

}  // namespace contextcalc::kernels
