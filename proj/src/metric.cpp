#include "mvts/metric.hpp"

#include <cmath>
#include <cstdint>

#include "mvts/reduce.hpp"

namespace mvts {

namespace {

// Strided view over one (channel, time) column of a tensor. Bins are t
// entries apart in the backing storage.
template <typename T>
struct ColumnView {
    const T* base;
    int bins;
    long long stride;
    double operator[](int j) const { return static_cast<double>(base[j * stride]); }
};

template <typename T>
ColumnView<T> column_of(std::span<const T> data, int bins, int steps, int channel, int step) {
    return {data.data() + static_cast<std::size_t>(channel) * bins * steps + step, bins, steps};
}

// Running CDF difference; |j1-j2| ground cost makes the optimal transport
// cost the L1 distance between the two CDFs.
template <typename P, typename Q>
double w1_core(const P& p, const Q& q, int bins) {
    double cdf_diff = 0.0;
    double total = 0.0;
    for (int m = 0; m < bins - 1; ++m) {
        cdf_diff += p[m] - q[m];
        total += std::fabs(cdf_diff);
    }
    return total;
}

void check_distribution(std::span<const double> p, const char* side) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            throw ValidationError(std::string("w1_column: ") + side +
                                  " has a negative or NaN entry");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError(std::string("w1_column: ") + side + " does not sum to 1");
}

template <typename TensorA, typename TensorB>
void check_shapes(const TensorA& a, const TensorB& b, const char* op) {
    if (a.channels() != b.channels() || a.bins() != b.bins() || a.steps() != b.steps())
        throw ValidationError(std::string(op) + ": tensor shapes differ");
}

// Distance kernel shared by every overload: per-column results land in a
// fixed-order buffer and are pairwise-summed, so parallel and serial runs
// agree bit-for-bit.
template <typename EA, typename EB>
double emd_impl(std::span<const EA> a, std::span<const EB> b, int c, int h, int t, bool parallel) {
    const long long columns = static_cast<long long>(c) * t;
    std::vector<double> per_column(static_cast<std::size_t>(columns));
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long col = 0; col < columns; ++col) {
            const int i = static_cast<int>(col / t);
            const int k = static_cast<int>(col % t);
            per_column[col] = w1_core(column_of(a, h, t, i, k), column_of(b, h, t, i, k), h);
        }
    } else {
        for (long long col = 0; col < columns; ++col) {
            const int i = static_cast<int>(col / t);
            const int k = static_cast<int>(col % t);
            per_column[col] = w1_core(column_of(a, h, t, i, k), column_of(b, h, t, i, k), h);
        }
    }
    return pairwise_sum(per_column);
}

// Per-column loss + gradient. The gradient of sum_m |C_m| w.r.t. p_l is
// sum_{m >= l} sign(C_m); computed as total minus the prefix so no scratch
// buffer is needed. Sign sums are small integers, so the two passes agree
// exactly.
template <typename TargetElem>
double loss_grad_column(ColumnView<double> pred, ColumnView<TargetElem> target, int h,
                        double inv_ct, double* grad, long long grad_stride) {
    const auto sign_of = [](double x) { return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    double cdf_diff = 0.0;
    double col_loss = 0.0;
    double total_sign = 0.0;
    for (int m = 0; m < h - 1; ++m) {
        cdf_diff += pred[m] - target[m];
        col_loss += std::fabs(cdf_diff);
        total_sign += sign_of(cdf_diff);
    }
    cdf_diff = 0.0;
    double prefix_sign = 0.0;
    for (int l = 0; l < h; ++l) {
        grad[l * grad_stride] = inv_ct * (total_sign - prefix_sign);
        if (l < h - 1) {
            cdf_diff += pred[l] - target[l];
            prefix_sign += sign_of(cdf_diff);
        }
    }
    return col_loss;
}

template <typename TargetElem>
LossReport loss_impl(const SoftVisionTensor& pred, std::span<const TargetElem> target_data,
                     bool parallel) {
    const int c = pred.channels(), h = pred.bins(), t = pred.steps();
    const long long columns = static_cast<long long>(c) * t;
    const double inv_ct = 1.0 / static_cast<double>(columns);

    LossReport report;
    report.channels = c;
    report.bins = h;
    report.steps = t;
    report.gradient.assign(pred.data().size(), 0.0);

    std::vector<double> per_column(static_cast<std::size_t>(columns));
    std::span<const double> pd = pred.data();
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long col = 0; col < columns; ++col) {
            const int i = static_cast<int>(col / t);
            const int k = static_cast<int>(col % t);
            double* g = report.gradient.data() + static_cast<std::size_t>(i) * h * t + k;
            per_column[col] = loss_grad_column(column_of(pd, h, t, i, k),
                                               column_of(target_data, h, t, i, k), h, inv_ct, g, t);
        }
    } else {
        for (long long col = 0; col < columns; ++col) {
            const int i = static_cast<int>(col / t);
            const int k = static_cast<int>(col % t);
            double* g = report.gradient.data() + static_cast<std::size_t>(i) * h * t + k;
            per_column[col] = loss_grad_column(column_of(pd, h, t, i, k),
                                               column_of(target_data, h, t, i, k), h, inv_ct, g, t);
        }
    }
    report.loss = pairwise_sum(per_column) * inv_ct;
    return report;
}

} // namespace

double w1_column(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ValidationError("w1_column: columns have different bin counts");
    if (p.empty()) throw ValidationError("w1_column: empty columns");
    check_distribution(p, "first column");
    check_distribution(q, "second column");
    return w1_core(p, q, static_cast<int>(p.size()));
}

double emd_distance(const BinaryVisionTensor& a, const BinaryVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), true);
}

double emd_distance(const SoftVisionTensor& a, const SoftVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), true);
}

double emd_distance(const SoftVisionTensor& a, const BinaryVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), true);
}

LossReport emd_loss_and_grad(const SoftVisionTensor& pred, const BinaryVisionTensor& target) {
    check_shapes(pred, target, "emd_loss_and_grad");
    return loss_impl(pred, target.data(), true);
}

namespace serial {

double emd_distance(const BinaryVisionTensor& a, const BinaryVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), false);
}

double emd_distance(const SoftVisionTensor& a, const SoftVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), false);
}

double emd_distance(const SoftVisionTensor& a, const BinaryVisionTensor& b) {
    check_shapes(a, b, "emd_distance");
    return emd_impl(a.data(), b.data(), a.channels(), a.bins(), a.steps(), false);
}

LossReport emd_loss_and_grad(const SoftVisionTensor& pred, const BinaryVisionTensor& target) {
    check_shapes(pred, target, "emd_loss_and_grad");
    return loss_impl(pred, target.data(), false);
}

} // namespace serial

} // namespace mvts
