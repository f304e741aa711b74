#ifndef MVTS_METRIC_HPP
#define MVTS_METRIC_HPP

#include <span>
#include <vector>

#include "mvts/codec.hpp"

namespace mvts {

/// Loss value plus its gradient with respect to every predicted column
/// probability. Gradient dimensions match the prediction tensor.
struct LossReport {
    double loss = 0.0;
    int channels = 0, bins = 0, steps = 0;
    std::vector<double> gradient;  // channel-major, then bin, then time

    double grad_at(int channel, int bin, int step) const {
        return gradient[(static_cast<std::size_t>(channel) * bins + bin) * steps + step];
    }
};

/// Exact 1-Wasserstein distance between two distributions over bin ordinals,
/// with |j1 - j2| as the ground cost: sum over m of |CDF_p(m) - CDF_q(m)|.
/// Units are bin indices; multiply by 2*ms/h for value units.
/// For one-hot columns at ordinals a and b this is exactly |a - b|.
double w1_column(std::span<const double> p, std::span<const double> q);

/// Transport distance between whole tensors: the per-column distance summed
/// over channels and time steps. Zero iff the columns are pairwise equal.
double emd_distance(const BinaryVisionTensor& a, const BinaryVisionTensor& b);
double emd_distance(const SoftVisionTensor& a, const SoftVisionTensor& b);
double emd_distance(const SoftVisionTensor& a, const BinaryVisionTensor& b);

/// Mean per-column transport distance between a soft prediction and a hard
/// target, with the analytic (sub)gradient:
///   d loss / d p[i,l,k] = (1 / (c t)) * sum_{m >= l} sign(C_m)
/// where C_m is the CDF difference of column (i, k) and sign(0) := 0.
LossReport emd_loss_and_grad(const SoftVisionTensor& pred, const BinaryVisionTensor& target);

namespace serial {
double emd_distance(const BinaryVisionTensor& a, const BinaryVisionTensor& b);
double emd_distance(const SoftVisionTensor& a, const SoftVisionTensor& b);
double emd_distance(const SoftVisionTensor& a, const BinaryVisionTensor& b);
LossReport emd_loss_and_grad(const SoftVisionTensor& pred, const BinaryVisionTensor& target);
} // namespace serial

} // namespace mvts

#endif
