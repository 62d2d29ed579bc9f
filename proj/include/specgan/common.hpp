#pragma once

// Shared vocabulary types, error classes and RNG helpers.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace specgan {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;

/// Row-major dense matrix; one sample per row everywhere in the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Label = std::uint8_t;
using Labels = std::vector<Label>;

using Rng = std::mt19937_64;

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DatasetIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer. Used to derive independent, order-free RNG streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `stream` of a parent seed; (seed, stream) fully determines it.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// Draws a fresh seed from a running generator (for handing a child stream to a callee).
inline std::uint64_t next_seed(Rng& rng) { return rng(); }

/// Standard normal sample. std::normal_distribution caches a spare value, so a
/// fresh distribution per call keeps draws a pure function of the engine state.
inline double gauss(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline Complex complex_gauss(Rng& rng, double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gauss(rng);
    const double im = gauss(rng);
    return {s * re, s * im};
}

inline double uniform01(Rng& rng) {
    // 53 random mantissa bits; avoids implementation-defined generate_canonical.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Fisher-Yates shuffle driven only by uniform_index, so results do not depend on
/// the standard library's shuffle implementation.
template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

}  // namespace specgan
