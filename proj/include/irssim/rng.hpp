// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace irssim {

// Deterministic stream derivation: every consumer of randomness owns a named
// stream seeded from (master_seed, labels...). Streams are independent of
// thread scheduling, so runs reproduce bit-identically at any thread count.
//
// Stream assignment used by the simulator:
//   "channel"      initial path draws and per-block channel evolution
//   "codebook"     initial codebook, RA perturbations, RVQ regeneration,
//                  direction-codebook generation
//   "measurement"  pilot estimation noise at the BS
//   "exploration"  DPIC behavior-policy noise (training phase)
//   "agent"        DNN weight initialization and replay-batch sampling
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    // CN(0, var): real and imaginary parts are N(0, var/2).
    std::complex<double> complex_normal(double var) {
        const double s = std::sqrt(var * 0.5);
        const double re = normal(0.0, 1.0) * s;
        const double im = normal(0.0, 1.0) * s;
        return {re, im};
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

// SplitMix64 finalizer; decorrelates consecutive / structured inputs.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = mix64(master);
    for (char c : label) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

inline Rng make_stream(std::uint64_t master, std::string_view label,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(stream_seed(master, label, a, b));
}

}  // namespace irssim
