#include "mvts/sme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvts/reduce.hpp"
#include "mvts/rng.hpp"

namespace mvts {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

// Per-element bound profile and its ms-derivative. -2 + 2*Phi(ms) is written
// as -2*Phi(-ms) to avoid cancellation at large ms.
double bound_profile(double ms, double h) {
    const double span = normal_cdf(ms) - normal_cdf(-ms);
    const double tail = kSqrt2OverPi * std::exp(-0.5 * ms * ms);
    return ms * (span / h - 2.0 * normal_cdf(-ms)) + tail;
}

double bound_profile_derivative(double ms, double h) {
    const double span = normal_cdf(ms) - normal_cdf(-ms);
    const double tail = kSqrt2OverPi * std::exp(-0.5 * ms * ms);
    return span / h - 2.0 * normal_cdf(-ms) + (ms / h) * tail;
}

void check_ms(double ms, const char* who) {
    if (!(ms > 0.0) || !std::isfinite(ms))
        throw ValidationError(std::string(who) + ": ms must be a positive finite real");
}

} // namespace

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

BoundQuery::BoundQuery(int h_, double ms_, bool per_element_, long long ct_)
    : h(h_), ms(ms_), per_element(per_element_), ct(ct_) {
    if (h < 2) throw ValidationError("bound query: h must be >= 2");
    check_ms(ms, "bound query");
    if (!per_element && ct < 1) throw ValidationError("bound query: ct must be >= 1");
}

double sme_upper_bound(const BoundQuery& q) {
    const double profile = bound_profile(q.ms, static_cast<double>(q.h));
    return q.per_element ? profile : profile * static_cast<double>(q.ct);
}

double bound_derivative(const BoundQuery& q) {
    const double d = bound_profile_derivative(q.ms, static_cast<double>(q.h));
    return q.per_element ? d : d * static_cast<double>(q.ct);
}

double sme_bound_h_limit(double ms) {
    check_ms(ms, "sme_bound_h_limit");
    return -2.0 * ms * normal_cdf(-ms) + kSqrt2OverPi * std::exp(-0.5 * ms * ms);
}

double solve_optimal_ms(int h, double tol) {
    if (h < 2) throw ValidationError("solve_optimal_ms: h must be >= 2");
    if (!(tol > 0.0)) throw ValidationError("solve_optimal_ms: tol must be positive");

    const double hd = static_cast<double>(h);
    double lo = 1e-3, hi = 20.0;
    double f_lo = bound_profile_derivative(lo, hd);
    double f_hi = bound_profile_derivative(hi, hd);
    if (!(f_lo < 0.0) || !(f_hi > 0.0))
        throw NumericError("solve_optimal_ms: derivative has no sign change on [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] for h = " +
                           std::to_string(h));
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (bound_profile_derivative(mid, hd) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<OptimalMsRow> optimal_ms_table(std::span<const int> hs, double tol) {
    std::vector<OptimalMsRow> rows;
    rows.reserve(hs.size());
    for (int h : hs) {
        const double ms = solve_optimal_ms(h, tol);
        rows.push_back({h, ms, sme_upper_bound(BoundQuery(h, ms))});
    }
    return rows;
}

namespace {

// One sample: mean |roundtrip(s) - s| over a c*t grid of N(0,1) draws.
double sample_mean_error(const CodecParams& params, long long elements,
                         std::uint64_t seed, long long index) {
    SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(index)));
    double sum = 0.0;
    for (long long e = 0; e < elements; ++e) {
        const double s = rng.next_normal();
        sum += std::fabs(bin_midpoint(bin_index(s, params), params) - s);
    }
    return sum / static_cast<double>(elements);
}

MonteCarloReport monte_carlo_impl(const CodecParams& params, int channels, int steps,
                                  long long n, std::uint64_t seed, bool parallel) {
    if (channels < 1 || steps < 1)
        throw ValidationError("monte_carlo_sme: channels and steps must be >= 1");
    if (n < 1) throw ValidationError("monte_carlo_sme: n must be >= 1");

    const long long elements = static_cast<long long>(channels) * steps;
    std::vector<double> per_sample(static_cast<std::size_t>(n));
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i)
            per_sample[i] = sample_mean_error(params, elements, seed, i);
    } else {
        for (long long i = 0; i < n; ++i)
            per_sample[i] = sample_mean_error(params, elements, seed, i);
    }

    const double mean = pairwise_sum(per_sample) / static_cast<double>(n);
    std::vector<double> sq(per_sample.size());
    for (std::size_t i = 0; i < per_sample.size(); ++i) {
        const double d = per_sample[i] - mean;
        sq[i] = d * d;
    }
    const double variance = (n > 1) ? pairwise_sum(sq) / static_cast<double>(n - 1) : 0.0;

    MonteCarloReport report;
    report.mean = mean;
    report.std_error = std::sqrt(variance / static_cast<double>(n));
    report.bound = sme_upper_bound(BoundQuery(params.h, params.ms));
    report.n = n;
    report.seed = seed;
    report.channels = channels;
    report.steps = steps;
    return report;
}

} // namespace

MonteCarloReport monte_carlo_sme(const CodecParams& params, int channels, int steps,
                                 long long n, std::uint64_t seed) {
    return monte_carlo_impl(params, channels, steps, n, seed, true);
}

namespace serial {
MonteCarloReport monte_carlo_sme(const CodecParams& params, int channels, int steps,
                                 long long n, std::uint64_t seed) {
    return monte_carlo_impl(params, channels, steps, n, seed, false);
}
} // namespace serial

ConvergenceReport check_convergence(double ms, std::span<const long long> h_schedule) {
    check_ms(ms, "check_convergence");
    if (h_schedule.empty()) throw ValidationError("check_convergence: empty schedule");
    for (std::size_t i = 0; i < h_schedule.size(); ++i) {
        if (h_schedule[i] < 2)
            throw ValidationError("check_convergence: schedule entries must be >= 2");
        if (i > 0 && h_schedule[i] <= h_schedule[i - 1])
            throw ValidationError("check_convergence: schedule must be strictly increasing");
    }

    ConvergenceReport report;
    report.ms = ms;
    report.rows.reserve(h_schedule.size());
    report.strictly_decreasing = true;
    for (std::size_t i = 0; i < h_schedule.size(); ++i) {
        const double b = bound_profile(ms, static_cast<double>(h_schedule[i]));
        if (i > 0 && b >= report.rows.back().bound) report.strictly_decreasing = false;
        report.rows.push_back({h_schedule[i], b});
    }
    report.h_limit = sme_bound_h_limit(ms);
    return report;
}

} // namespace mvts
