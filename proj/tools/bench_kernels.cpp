// Times the OpenMP kernels against their serial references and checks that
// both produce identical bytes. Run manually:
//   ./build/tools/bench_kernels [scale]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mvts/codec.hpp"
#include "mvts/metric.hpp"
#include "mvts/rng.hpp"
#include "mvts/sme.hpp"

using namespace mvts;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = clock_type::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-18s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   identical %s\n",
                name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                identical ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv) {
    const int scale = argc > 1 ? std::atoi(argv[1]) : 1;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: built without OpenMP\n");
#endif

    const CodecParams params(200, 2.79);
    const int c = 8, t = 20000 * scale;
    SplitMix64 rng(1);
    NumericSeries series(c, t);
    for (int i = 0; i < c; ++i)
        for (int k = 0; k < t; ++k) series.at(i, k) = rng.next_normal();

    // encode
    BinaryVisionTensor v_par = encode(series, params);
    BinaryVisionTensor v_ser = serial::encode(series, params);
    report("encode", time_best_of(3, [&] { v_ser = serial::encode(series, params); }),
           time_best_of(3, [&] { v_par = encode(series, params); }), v_par == v_ser);

    // decode
    NumericSeries d_par = decode(v_par, params);
    NumericSeries d_ser = serial::decode(v_par, params);
    bool same = true;
    for (std::size_t i = 0; i < d_par.values().size(); ++i)
        same = same && d_par.values()[i] == d_ser.values()[i];
    report("decode", time_best_of(3, [&] { d_ser = serial::decode(v_par, params); }),
           time_best_of(3, [&] { d_par = decode(v_par, params); }), same);

    // transport distance between two random tensors
    NumericSeries series2(c, t);
    for (int i = 0; i < c; ++i)
        for (int k = 0; k < t; ++k) series2.at(i, k) = rng.next_normal();
    const BinaryVisionTensor w = encode(series2, params);
    double dist_par = 0.0, dist_ser = 0.0;
    report("emd_distance",
           time_best_of(3, [&] { dist_ser = serial::emd_distance(v_par, w); }),
           time_best_of(3, [&] { dist_par = emd_distance(v_par, w); }), dist_par == dist_ser);

    // loss + gradient on a soft prediction
    SoftVisionTensor soft(c, params.h, t / 10);
    for (int i = 0; i < c; ++i)
        for (int k = 0; k < t / 10; ++k) {
            double sum = 0.0;
            for (int j = 0; j < params.h; ++j) {
                const double e = 0.01 + rng.next_unit();
                soft.prob(i, j, k) = e;
                sum += e;
            }
            for (int j = 0; j < params.h; ++j) soft.prob(i, j, k) /= sum;
        }
    BinaryVisionTensor target(c, params.h, t / 10);
    for (int i = 0; i < c; ++i)
        for (int k = 0; k < t / 10; ++k) target.set_column(i, k, (int)(rng.next() % params.h));
    LossReport l_par, l_ser;
    report("emd_loss",
           time_best_of(3, [&] { l_ser = serial::emd_loss_and_grad(soft, target); }),
           time_best_of(3, [&] { l_par = emd_loss_and_grad(soft, target); }),
           l_par.loss == l_ser.loss && l_par.gradient == l_ser.gradient);

    // simulation
    const long long n = 200000LL * scale;
    MonteCarloReport m_par, m_ser;
    report("monte_carlo",
           time_best_of(3, [&] { m_ser = serial::monte_carlo_sme(params, 1, 1, n, 7); }),
           time_best_of(3, [&] { m_par = monte_carlo_sme(params, 1, 1, n, 7); }),
           m_par.mean == m_ser.mean && m_par.std_error == m_ser.std_error);

    return 0;
}
