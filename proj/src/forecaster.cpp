#include "mvts/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mvts/reduce.hpp"
#include "mvts/rng.hpp"

namespace mvts {

SoftVisionTensor persistence_predict(const BinaryVisionTensor& vx, int horizon) {
    if (vx.steps() < 1) throw ValidationError("persistence: input has no time steps");
    if (horizon < 1) throw ValidationError("persistence: horizon must be >= 1");
    vx.validate();
    SoftVisionTensor out(vx.channels(), vx.bins(), horizon);
    const int last = vx.steps() - 1;
    for (int i = 0; i < vx.channels(); ++i) {
        const int j = vx.column_bin(i, last);
        for (int o = 0; o < horizon; ++o) out.prob(i, j, o) = 1.0;
    }
    return out;
}

void ReferenceNetConfig::validate() const {
    if (hidden < 1) throw ValidationError("net config: hidden width must be >= 1");
    if (horizon < 1) throw ValidationError("net config: horizon must be >= 1");
    if (!(learning_rate >= 0.0)) throw ValidationError("net config: learning rate must be >= 0");
    if (epochs < 1) throw ValidationError("net config: epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("net config: batch size must be >= 1");
    if (!(init_scale > 0.0)) throw ValidationError("net config: init scale must be positive");
}

ReferenceNet::ReferenceNet(int bins, int lookback, const ReferenceNetConfig& cfg)
    : h_(bins), lookback_(lookback), hidden_(cfg.hidden), horizon_(cfg.horizon) {
    cfg.validate();
    if (bins < 2) throw ValidationError("reference net: bins must be >= 2");
    if (lookback < 1) throw ValidationError("reference net: lookback must be >= 1");

    const std::size_t in_dim = static_cast<std::size_t>(h_) * lookback_;
    const std::size_t out_dim = static_cast<std::size_t>(h_) * horizon_;
    b1_off_ = static_cast<std::size_t>(hidden_) * in_dim;
    w2_off_ = b1_off_ + hidden_;
    b2_off_ = w2_off_ + out_dim * hidden_;
    theta_.assign(b2_off_ + out_dim, 0.0);

    // Weights uniform in [-s, s] with s = init_scale / sqrt(fan-in); biases 0.
    SplitMix64 rng(cfg.seed);
    const double s1 = cfg.init_scale / std::sqrt(static_cast<double>(in_dim));
    for (std::size_t i = 0; i < b1_off_; ++i) theta_[i] = s1 * (2.0 * rng.next_unit() - 1.0);
    const double s2 = cfg.init_scale / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t i = w2_off_; i < b2_off_; ++i) theta_[i] = s2 * (2.0 * rng.next_unit() - 1.0);
}

void ReferenceNet::set_parameters(std::span<const double> theta) {
    if (theta.size() != theta_.size())
        throw ValidationError("reference net: parameter vector has " +
                              std::to_string(theta.size()) + " entries, expected " +
                              std::to_string(theta_.size()));
    std::copy(theta.begin(), theta.end(), theta_.begin());
}

void ReferenceNet::forward_channel(const BinaryVisionTensor& vx, int channel,
                                   std::span<double> z1, std::span<double> act,
                                   std::span<double> z2, std::span<double> probs) const {
    // Hidden pre-activation. The input grid is one-hot per time step, so the
    // matrix product reduces to summing one W1 column per step.
    for (int u = 0; u < hidden_; ++u) z1[u] = theta_[b1_at(u)];
    for (int k = 0; k < lookback_; ++k) {
        const int flat = vx.column_bin(channel, k) * lookback_ + k;
        for (int u = 0; u < hidden_; ++u) z1[u] += theta_[w1_at(u, flat)];
    }
    for (int u = 0; u < hidden_; ++u) act[u] = z1[u] > 0.0 ? z1[u] : 0.0;

    const int out_dim = h_ * horizon_;
    for (int r = 0; r < out_dim; ++r) {
        double v = theta_[b2_at(r)];
        for (int u = 0; u < hidden_; ++u) v += theta_[w2_at(r, u)] * act[u];
        z2[r] = v;
    }

    // Column-wise softmax over bins; output index r = j * horizon + o.
    for (int o = 0; o < horizon_; ++o) {
        double mx = z2[o];
        for (int j = 1; j < h_; ++j) mx = std::max(mx, z2[static_cast<std::size_t>(j) * horizon_ + o]);
        double denom = 0.0;
        for (int j = 0; j < h_; ++j) {
            const double e = std::exp(z2[static_cast<std::size_t>(j) * horizon_ + o] - mx);
            probs[static_cast<std::size_t>(j) * horizon_ + o] = e;
            denom += e;
        }
        for (int j = 0; j < h_; ++j) probs[static_cast<std::size_t>(j) * horizon_ + o] /= denom;
    }
}

SoftVisionTensor ReferenceNet::forward(const BinaryVisionTensor& vx, int horizon) const {
    if (horizon != horizon_)
        throw ValidationError("reference net: asked for horizon " + std::to_string(horizon) +
                              " but was built for " + std::to_string(horizon_));
    if (vx.bins() != h_ || vx.steps() != lookback_)
        throw ValidationError("reference net: input is " + std::to_string(vx.bins()) + "x" +
                              std::to_string(vx.steps()) + ", expected " + std::to_string(h_) +
                              "x" + std::to_string(lookback_));
    vx.validate();

    const int out_dim = h_ * horizon_;
    std::vector<double> z1(hidden_), act(hidden_), z2(out_dim), probs(out_dim);
    SoftVisionTensor out(vx.channels(), h_, horizon_);
    for (int i = 0; i < vx.channels(); ++i) {
        forward_channel(vx, i, z1, act, z2, probs);
        for (int j = 0; j < h_; ++j)
            for (int o = 0; o < horizon_; ++o)
                out.prob(i, j, o) = probs[static_cast<std::size_t>(j) * horizon_ + o];
    }
    return out;
}

double ReferenceNet::loss_and_param_grad(const BinaryVisionTensor& vx,
                                         const BinaryVisionTensor& vy,
                                         std::span<double> grad) const {
    if (grad.size() != theta_.size())
        throw ValidationError("reference net: gradient buffer size mismatch");
    if (vy.bins() != h_ || vy.steps() != horizon_ || vy.channels() != vx.channels())
        throw ValidationError("reference net: target shape mismatch");

    const SoftVisionTensor pred = forward(vx, horizon_);
    const LossReport report = emd_loss_and_grad(pred, vy);

    const int out_dim = h_ * horizon_;
    std::vector<double> z1(hidden_), act(hidden_), z2(out_dim), probs(out_dim);
    std::vector<double> dz2(out_dim), dact(hidden_);

    for (int i = 0; i < vx.channels(); ++i) {
        forward_channel(vx, i, z1, act, z2, probs);

        // Softmax backward per output column.
        for (int o = 0; o < horizon_; ++o) {
            double dot = 0.0;
            for (int j = 0; j < h_; ++j)
                dot += probs[static_cast<std::size_t>(j) * horizon_ + o] * report.grad_at(i, j, o);
            for (int j = 0; j < h_; ++j) {
                const std::size_t r = static_cast<std::size_t>(j) * horizon_ + o;
                dz2[r] = probs[r] * (report.grad_at(i, j, o) - dot);
            }
        }

        std::fill(dact.begin(), dact.end(), 0.0);
        for (int r = 0; r < out_dim; ++r) {
            const double g = dz2[r];
            grad[b2_at(r)] += g;
            for (int u = 0; u < hidden_; ++u) {
                grad[w2_at(r, u)] += g * act[u];
                dact[u] += theta_[w2_at(r, u)] * g;
            }
        }

        for (int u = 0; u < hidden_; ++u) {
            const double g = z1[u] > 0.0 ? dact[u] : 0.0;
            if (g == 0.0) continue;
            grad[b1_at(u)] += g;
            for (int k = 0; k < lookback_; ++k) {
                const int flat = vx.column_bin(i, k) * lookback_ + k;
                grad[w1_at(u, flat)] += g;
            }
        }
    }
    return report.loss;
}

TrainResult train(ReferenceNet& net, const WindowView& data, const CodecParams& params,
                  const ReferenceNetConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw ValidationError("train: empty window stream");
    if (params.h != net.bins())
        throw ValidationError("train: codec h does not match the network bin count");
    if (data.spec().lookback != net.lookback() || data.spec().horizon != net.horizon())
        throw ValidationError("train: window spec does not match the network shape");

    // Quantize every pair once; epochs then only touch tensors.
    const std::size_t n = data.size();
    std::vector<BinaryVisionTensor> vxs, vys;
    vxs.reserve(n);
    vys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WindowPair pair = data.get(i);
        vxs.push_back(encode(pair.x, params));
        vys.push_back(encode(pair.y, params));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(substream_seed(cfg.seed, 0x51bffull));

    TrainResult result;
    result.epoch_loss.reserve(cfg.epochs);
    std::vector<double> grad(net.parameters().size());
    std::span<double> theta = net.parameters();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with our own stream: identical order on every platform.
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next() % i);
            std::swap(order[i - 1], order[j]);
        }

        // Per-sample losses keyed by the original sample id, so the reported
        // curve does not depend on the shuffle order.
        std::vector<double> sample_loss(n, 0.0);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t s = start; s < stop; ++s)
                sample_loss[order[s]] =
                    net.loss_and_param_grad(vxs[order[s]], vys[order[s]], grad);
            const double scale = cfg.learning_rate / static_cast<double>(stop - start);
            for (std::size_t p = 0; p < theta.size(); ++p) theta[p] -= scale * grad[p];
        }
        const double epoch_loss = pairwise_sum(sample_loss) / static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw NumericError("train: loss diverged at epoch " + std::to_string(epoch));
        result.epoch_loss.push_back(epoch_loss);
    }
    return result;
}

namespace {

// Per-window normalization of a raw input segment, matching the window
// stream's convention (population std, floored for constant segments).
WindowPair normalize_window(const NumericSeries& recent) {
    WindowPair pair;
    const int c = recent.channels();
    const int len = recent.steps();
    pair.x = NumericSeries(c, len);
    pair.norm_mean.resize(c);
    pair.norm_std.resize(c);
    pair.std_floored.assign(c, 0);
    for (int i = 0; i < c; ++i) {
        double sum = 0.0;
        for (int k = 0; k < len; ++k) sum += recent.at(i, k);
        const double mean = sum / len;
        double sq = 0.0;
        for (int k = 0; k < len; ++k) {
            const double v = recent.at(i, k) - mean;
            sq += v * v;
        }
        double sd = std::sqrt(sq / len);
        const bool floored = sd < kStdFloor;
        if (floored) {
            sd = kStdFloor;
            pair.std_floored[i] = 1;
        }
        pair.norm_mean[i] = mean;
        pair.norm_std[i] = sd;
        for (int k = 0; k < len; ++k)
            pair.x.at(i, k) = floored ? 0.0 : (recent.at(i, k) - mean) / sd;
    }
    return pair;
}

NumericSeries decode_soft_expected(const SoftVisionTensor& soft, const CodecParams& params) {
    NumericSeries out(soft.channels(), soft.steps());
    for (int i = 0; i < soft.channels(); ++i) {
        for (int k = 0; k < soft.steps(); ++k) {
            double v = 0.0;
            for (int j = 0; j < soft.bins(); ++j)
                v += soft.prob(i, j, k) * bin_midpoint(j + 1, params);
            out.at(i, k) = v;
        }
    }
    return out;
}

} // namespace

NumericSeries predict(const Predictor& model, const NumericSeries& recent,
                      const CodecParams& params, int horizon, bool expected_value_decode) {
    recent.validate();
    const WindowPair pair = normalize_window(recent);
    const BinaryVisionTensor vx = encode(pair.x, params);
    const SoftVisionTensor vy_hat = model.forward(vx, horizon);
    vy_hat.validate();
    const NumericSeries normalized =
        expected_value_decode ? decode_soft_expected(vy_hat, params)
                              : decode(harden(vy_hat), params);
    return denormalize(normalized, pair);
}

namespace {

struct ErrorAccumulator {
    std::vector<double> abs_sum, sq_sum;  // per horizon step
    long long windows = 0;
    long long per_step = 0;  // value count per step

    explicit ErrorAccumulator(int horizon) : abs_sum(horizon, 0.0), sq_sum(horizon, 0.0) {}

    void add(const NumericSeries& pred, const NumericSeries& target) {
        for (int i = 0; i < pred.channels(); ++i) {
            for (int k = 0; k < pred.steps(); ++k) {
                const double e = pred.at(i, k) - target.at(i, k);
                abs_sum[k] += std::fabs(e);
                sq_sum[k] += e * e;
            }
        }
        ++windows;
        per_step += pred.channels();
    }

    EvalReport report() const {
        if (windows == 0) throw ValidationError("evaluate: no windows");
        EvalReport r;
        const int horizon = static_cast<int>(abs_sum.size());
        r.horizon_mae.resize(horizon);
        r.horizon_mse.resize(horizon);
        double at = 0.0, st = 0.0;
        for (int k = 0; k < horizon; ++k) {
            r.horizon_mae[k] = abs_sum[k] / static_cast<double>(per_step);
            r.horizon_mse[k] = sq_sum[k] / static_cast<double>(per_step);
            at += abs_sum[k];
            st += sq_sum[k];
        }
        const double total = static_cast<double>(per_step) * horizon;
        r.mae = at / total;
        r.mse = st / total;
        r.count = windows;
        r.space = 'S';
        return r;
    }
};

NumericSeries slice_series(const NumericSeries& s, int first_channel, int n_channels,
                           long long start, int len) {
    NumericSeries out(n_channels, len);
    for (int i = 0; i < n_channels; ++i)
        for (int k = 0; k < len; ++k)
            out.at(i, k) = s.at(first_channel + i, static_cast<int>(start + k));
    return out;
}

} // namespace

EvalReport evaluate(std::span<const NumericSeries> predictions,
                    std::span<const NumericSeries> targets) {
    if (predictions.size() != targets.size())
        throw ValidationError("evaluate: prediction/target counts differ");
    if (predictions.empty()) throw ValidationError("evaluate: empty input");
    const int horizon = predictions[0].steps();
    ErrorAccumulator acc(horizon);
    for (std::size_t w = 0; w < predictions.size(); ++w) {
        if (predictions[w].channels() != targets[w].channels() ||
            predictions[w].steps() != targets[w].steps() || predictions[w].steps() != horizon)
            throw ValidationError("evaluate: shape mismatch at window " + std::to_string(w));
        acc.add(predictions[w], targets[w]);
    }
    return acc.report();
}

EvalReport evaluate_vspace(std::span<const BinaryVisionTensor> predictions,
                           std::span<const BinaryVisionTensor> targets) {
    if (predictions.size() != targets.size())
        throw ValidationError("evaluate: prediction/target counts differ");
    if (predictions.empty()) throw ValidationError("evaluate: empty input");
    const int horizon = predictions[0].steps();
    EvalReport r;
    r.space = 'V';
    r.horizon_mae.assign(horizon, 0.0);
    r.horizon_mse.assign(horizon, 0.0);
    long long per_step = 0;
    for (std::size_t w = 0; w < predictions.size(); ++w) {
        const BinaryVisionTensor& p = predictions[w];
        const BinaryVisionTensor& t = targets[w];
        if (p.channels() != t.channels() || p.bins() != t.bins() || p.steps() != t.steps() ||
            p.steps() != horizon)
            throw ValidationError("evaluate: shape mismatch at window " + std::to_string(w));
        for (int i = 0; i < p.channels(); ++i) {
            for (int k = 0; k < horizon; ++k) {
                const double d = std::fabs(static_cast<double>(p.column_bin(i, k)) -
                                           static_cast<double>(t.column_bin(i, k)));
                r.horizon_mae[k] += d;
                r.horizon_mse[k] += d * d;
            }
        }
        per_step += p.channels();
    }
    double at = 0.0, st = 0.0;
    for (int k = 0; k < horizon; ++k) {
        at += r.horizon_mae[k];
        st += r.horizon_mse[k];
        r.horizon_mae[k] /= static_cast<double>(per_step);
        r.horizon_mse[k] /= static_cast<double>(per_step);
    }
    r.mae = at / (static_cast<double>(per_step) * horizon);
    r.mse = st / (static_cast<double>(per_step) * horizon);
    r.count = static_cast<long long>(predictions.size());
    return r;
}

EvalReport evaluate_windows(const Predictor& model, const Dataset& data, const WindowView& view,
                            const CodecParams& params, bool expected_value_decode) {
    if (view.size() == 0) throw ValidationError("evaluate: empty window stream");
    const WindowSpec& spec = view.spec();
    ErrorAccumulator acc(spec.horizon);
    for (std::size_t w = 0; w < view.size(); ++w) {
        const WindowPair pair = view.get(w);
        const int first_ch = pair.channel_id >= 0 ? pair.channel_id : 0;
        const int n_ch = pair.x.channels();
        const NumericSeries raw_x =
            slice_series(data.series, first_ch, n_ch, pair.position, spec.lookback);
        const NumericSeries raw_y = slice_series(data.series, first_ch, n_ch,
                                                 pair.position + spec.lookback, spec.horizon);
        const NumericSeries pred =
            predict(model, raw_x, params, spec.horizon, expected_value_decode);
        acc.add(pred, raw_y);
    }
    return acc.report();
}

EvalReport quantization_floor(const Dataset& data, const WindowView& view,
                              const CodecParams& params) {
    if (view.size() == 0) throw ValidationError("quantization_floor: empty window stream");
    const WindowSpec& spec = view.spec();
    ErrorAccumulator acc(spec.horizon);
    for (std::size_t w = 0; w < view.size(); ++w) {
        const WindowPair pair = view.get(w);
        const int first_ch = pair.channel_id >= 0 ? pair.channel_id : 0;
        const NumericSeries raw_y = slice_series(data.series, first_ch, pair.y.channels(),
                                                 pair.position + spec.lookback, spec.horizon);
        const NumericSeries roundtrip = decode(encode(pair.y, params), params);
        acc.add(denormalize(roundtrip, pair), raw_y);
    }
    return acc.report();
}

namespace {

// Mean roundtrip error per grid point over a shared set of normal draws.
double codec_mae_on_samples(const CodecParams& params, long long n, std::uint64_t seed) {
    std::vector<double> err(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
        const double s = rng.next_normal();
        err[i] = std::fabs(bin_midpoint(bin_index(s, params), params) - s);
    }
    return pairwise_sum(err) / static_cast<double>(n);
}

} // namespace

std::vector<SweepPoint> sweep_codec_ms(int h, std::span<const double> ms_grid, long long n,
                                       std::uint64_t seed) {
    if (ms_grid.empty()) throw ValidationError("sweep: empty grid");
    if (n < 1) throw ValidationError("sweep: n must be >= 1");
    std::vector<SweepPoint> out;
    out.reserve(ms_grid.size());
    for (double ms : ms_grid)
        out.push_back({ms, h, codec_mae_on_samples(CodecParams(h, ms), n, seed)});
    return out;
}

std::vector<SweepPoint> sweep_codec_h(double ms, std::span<const int> h_grid, long long n,
                                      std::uint64_t seed) {
    if (h_grid.empty()) throw ValidationError("sweep: empty grid");
    if (n < 1) throw ValidationError("sweep: n must be >= 1");
    std::vector<SweepPoint> out;
    out.reserve(h_grid.size());
    for (int h : h_grid)
        out.push_back({ms, h, codec_mae_on_samples(CodecParams(h, ms), n, seed)});
    return out;
}

void save_checkpoint(const std::string& path, std::span<const double> theta,
                     std::uint64_t config_digest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("checkpoint: cannot write '" + path + "'");
    out.write("MVCK", 4);
    const std::uint16_t version = 1;
    std::uint8_t buf[8];
    buf[0] = static_cast<std::uint8_t>(version & 0xff);
    buf[1] = static_cast<std::uint8_t>(version >> 8);
    out.write(reinterpret_cast<const char*>(buf), 2);
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<std::uint8_t>((config_digest >> (8 * b)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
    for (double v : theta) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int b = 0; b < 8; ++b) buf[b] = static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff);
        out.write(reinterpret_cast<const char*>(buf), 8);
    }
    if (!out) throw ValidationError("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint: cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 14) throw ValidationError("checkpoint: truncated header");
    if (std::memcmp(bytes.data(), "MVCK", 4) != 0)
        throw ValidationError("checkpoint: bad magic");
    const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != 1)
        throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ck;
    for (int b = 0; b < 8; ++b) ck.config_digest |= static_cast<std::uint64_t>(bytes[6 + b]) << (8 * b);
    if ((bytes.size() - 14) % 8 != 0)
        throw ValidationError("checkpoint: parameter payload is not a whole number of values");
    const std::size_t count = (bytes.size() - 14) / 8;
    ck.theta.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(bytes[14 + i * 8 + b]) << (8 * b);
        std::memcpy(&ck.theta[i], &bits, 8);
    }
    return ck;
}

} // namespace mvts
