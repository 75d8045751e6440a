#pragma once

#include <cstdint>

namespace gnbn {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value for a Student's t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// CDF of the standard Student's t distribution.
double student_t_cdf(double t, double df);

double normal_cdf(double x);

// Inverse of the standard normal CDF, accurate to ~1e-15 after refinement.
double normal_quantile(double p);

// Deterministic RNG with explicitly implemented distributions so that
// output streams are identical across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Derive an independent stream keyed by (this seed, a, b).
    Rng derive(std::uint64_t a, std::uint64_t b = 0) const;

    std::uint64_t next_u64();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);
    double normal();                        // standard normal, Box-Muller
    double normal(double mean, double sd);
    // Standard normal truncated to [lo, hi] via inverse-CDF sampling.
    double truncated_normal(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
    std::uint64_t seed_;
};

}  // namespace gnbn
