#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace einkit {

// Deterministic RNG wrapper. All randomized scans in the library draw from
// this generator so that a fixed seed reproduces results bit-for-bit across
// platforms (std:: distributions are implementation-defined, so we roll the
// few transforms we need on top of the raw 64-bit stream).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift* variant; period 2^64-1.
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd gaussian_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = gaussian();
        return v;
    }

    Eigen::VectorXd unit_vector(int dim) {
        Eigen::VectorXd v = gaussian_vector(dim);
        while (v.norm() < 1e-12) v = gaussian_vector(dim);
        return v / v.norm();
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Halton low-discrepancy sequence, used for reproducible direction sweeps.
inline double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    std::uint64_t i = index + 1;  // skip the zero term
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

// n-th point of a Halton sequence in [0,1)^dim (first `dim` primes as bases).
inline Eigen::VectorXd halton_point(std::uint64_t index, int dim) {
    static const std::uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                           23, 29, 31, 37, 41, 43, 47, 53};
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v[d] = halton(index, primes[d % 16]);
    return v;
}

}  // namespace einkit
