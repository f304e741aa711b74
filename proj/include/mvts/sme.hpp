#ifndef MVTS_SME_HPP
#define MVTS_SME_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "mvts/codec.hpp"

namespace mvts {

/// Standard normal CDF. Absolute error <= 1e-12 over the real line;
/// evaluated through erfc so both tails stay accurate.
double normal_cdf(double x);

/// Inputs for the roundtrip-distortion bound. With `per_element` set the
/// grid factor c*t is divided out (the tabulated reference values use that
/// convention); otherwise the bound is scaled by `ct`.
struct BoundQuery {
    int h;
    double ms;
    bool per_element = true;
    long long ct = 1;

    BoundQuery(int h_, double ms_, bool per_element_ = true, long long ct_ = 1);
};

/// Expected-distortion upper bound for standard-normal data quantized at
/// (h, ms):
///   ms * ((1/h) (Phi(ms) - Phi(-ms)) - 2 + 2 Phi(ms)) + sqrt(2/pi) e^{-ms^2/2}
/// times c*t unless per_element. Strictly positive for valid queries.
double sme_upper_bound(const BoundQuery& q);

/// Analytic d/d(ms) of sme_upper_bound:
///   (1/h)(Phi(ms) - Phi(-ms)) - 2 + 2 Phi(ms) + (ms/h) sqrt(2/pi) e^{-ms^2/2}
/// (same per_element / ct scaling as the bound).
double bound_derivative(const BoundQuery& q);

/// Per-element bound in the infinite-resolution limit (h -> inf): the 1/h
/// term drops and only  ms(-2 + 2 Phi(ms)) + sqrt(2/pi) e^{-ms^2/2}  remains.
/// Vanishes as ms grows; stalls at a positive value for small ms.
double sme_bound_h_limit(double ms);

/// The scale minimizing the per-element bound at fixed h: the unique root of
/// bound_derivative on (0, 20], found by bisection to within `tol`. Throws
/// NumericError if the bracket shows no sign change (not expected for h >= 2).
double solve_optimal_ms(int h, double tol = 1e-6);

struct OptimalMsRow {
    int h;
    double best_ms;
    double bound;  // per-element bound at best_ms
};

/// Optimal scale and bound for each resolution, ready for CSV output.
std::vector<OptimalMsRow> optimal_ms_table(std::span<const int> hs, double tol = 1e-6);

/// Default resolutions for the tabulated reference comparison.
inline constexpr int kReferenceResolutions[] = {50, 100, 200, 400, 800};

struct MonteCarloReport {
    double mean = 0.0;        ///< empirical per-element roundtrip L1 error
    double std_error = 0.0;   ///< standard error of the mean
    double bound = 0.0;       ///< theoretical per-element bound at (h, ms)
    long long n = 0;          ///< sample count
    std::uint64_t seed = 0;
    int channels = 0, steps = 0;
};

/// Draws n independent c-by-t standard-normal grids, runs each value through
/// the quantizer roundtrip, and averages the per-element absolute error.
/// Sample i always uses substream(seed, i), and aggregation is a fixed-order
/// pairwise sum, so the report is identical for any thread count.
MonteCarloReport monte_carlo_sme(const CodecParams& params, int channels, int steps,
                                 long long n, std::uint64_t seed);

struct ConvergenceRow {
    long long h;
    double bound;
};

struct ConvergenceReport {
    double ms = 0.0;
    std::vector<ConvergenceRow> rows;  ///< per-element bound along the schedule
    double h_limit = 0.0;              ///< sme_bound_h_limit(ms)
    bool strictly_decreasing = false;  ///< bound decreasing along the schedule
};

/// Evaluates the bound along an increasing resolution schedule at fixed ms
/// and reports the infinite-resolution limit value.
ConvergenceReport check_convergence(double ms, std::span<const long long> h_schedule);

namespace serial {
MonteCarloReport monte_carlo_sme(const CodecParams& params, int channels, int steps,
                                 long long n, std::uint64_t seed);
} // namespace serial

} // namespace mvts

#endif
