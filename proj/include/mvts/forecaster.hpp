#ifndef MVTS_FORECASTER_HPP
#define MVTS_FORECASTER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvts/codec.hpp"
#include "mvts/metric.hpp"
#include "mvts/pipeline.hpp"

namespace mvts {

/// A model mapping a hard input tensor (c x h x I) to a soft prediction
/// (c x h x horizon) whose columns are probability distributions.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual SoftVisionTensor forward(const BinaryVisionTensor& vx, int horizon) const = 0;
    virtual std::span<const double> parameters() const { return {}; }
    virtual std::string name() const = 0;
};

/// Repeats the last observed column across the whole horizon.
SoftVisionTensor persistence_predict(const BinaryVisionTensor& vx, int horizon);

class PersistencePredictor final : public Predictor {
public:
    SoftVisionTensor forward(const BinaryVisionTensor& vx, int horizon) const override {
        return persistence_predict(vx, horizon);
    }
    std::string name() const override { return "persistence"; }
};

struct ReferenceNetConfig {
    int hidden = 128;            ///< width of the single hidden layer
    int horizon = 1;             ///< output length O
    double learning_rate = 0.05;
    int epochs = 10;
    int batch_size = 32;
    std::uint64_t seed = 0;      ///< fixes init and batch order
    double init_scale = 1.0;     ///< multiplier on the 1/sqrt(fan-in) range

    void validate() const;
};

/// Small fully-connected network, one sample per channel: the h x I bit grid
/// is flattened, passed through affine -> rectifier -> affine, and each of
/// the O output columns is softmax-normalized over bins. Weights are shared
/// across channels. Everything (init, forward, gradients) is deterministic
/// for a fixed seed.
class ReferenceNet final : public Predictor {
public:
    ReferenceNet(int bins, int lookback, const ReferenceNetConfig& cfg);

    SoftVisionTensor forward(const BinaryVisionTensor& vx, int horizon) const override;
    std::string name() const override { return "reference"; }

    std::span<const double> parameters() const override { return theta_; }
    std::span<double> parameters() { return theta_; }
    void set_parameters(std::span<const double> theta);

    /// Transport loss of forward(vx) against vy, with d(loss)/d(theta)
    /// accumulated (+=) into grad. grad must have parameters().size() slots.
    double loss_and_param_grad(const BinaryVisionTensor& vx, const BinaryVisionTensor& vy,
                               std::span<double> grad) const;

    int bins() const { return h_; }
    int lookback() const { return lookback_; }
    int hidden() const { return hidden_; }
    int horizon() const { return horizon_; }

private:
    int h_, lookback_, hidden_, horizon_;
    std::vector<double> theta_;

    // theta layout offsets
    std::size_t w1_at(int u, int flat) const { return static_cast<std::size_t>(u) * (h_ * lookback_) + flat; }
    std::size_t b1_at(int u) const { return b1_off_ + u; }
    std::size_t w2_at(int r, int u) const { return w2_off_ + static_cast<std::size_t>(r) * hidden_ + u; }
    std::size_t b2_at(int r) const { return b2_off_ + r; }
    std::size_t b1_off_, w2_off_, b2_off_;

    void forward_channel(const BinaryVisionTensor& vx, int channel, std::span<double> z1,
                         std::span<double> act, std::span<double> z2,
                         std::span<double> probs) const;
};

struct TrainResult {
    std::vector<double> epoch_loss;  ///< mean training loss per epoch
};

/// Mini-batch gradient descent on the transport loss, single-threaded and
/// reproducible: same data, config, and seed give the same loss curve and
/// parameters. Input/target windows are quantized once up front.
/// Throws NumericError (naming the epoch) if the loss stops being finite.
TrainResult train(ReferenceNet& net, const WindowView& data, const CodecParams& params,
                  const ReferenceNetConfig& cfg);

/// Full prediction chain: per-window normalization of the raw input, then
/// quantize, forward, collapse each column to its argmax bin, decode, and
/// map back through the stored window statistics. With
/// `expected_value_decode` the argmax step is replaced by the probability-
/// weighted mean of the bin midpoints (experimental).
NumericSeries predict(const Predictor& model, const NumericSeries& recent,
                      const CodecParams& params, int horizon,
                      bool expected_value_decode = false);

struct EvalReport {
    double mse = 0.0;
    double mae = 0.0;
    std::vector<double> horizon_mse;  ///< per future step
    std::vector<double> horizon_mae;
    long long count = 0;  ///< number of evaluated windows
    char space = 'S';     ///< 'S': squared/absolute value error; 'V': per-column transport
};

/// Value-space errors between paired series (equal shapes required).
EvalReport evaluate(std::span<const NumericSeries> predictions,
                    std::span<const NumericSeries> targets);

/// Tensor-space errors: per-column transport distance, averaged; the mse
/// slot carries the mean squared column distance.
EvalReport evaluate_vspace(std::span<const BinaryVisionTensor> predictions,
                           std::span<const BinaryVisionTensor> targets);

/// Runs the prediction chain over every window of a split and scores it
/// against the raw targets (in the dataset's value space).
EvalReport evaluate_windows(const Predictor& model, const Dataset& data, const WindowView& view,
                            const CodecParams& params, bool expected_value_decode = false);

/// Irreducible quantizer error on a split: targets roundtripped through
/// encode/decode and scored against themselves. No model can beat this
/// under the same codec.
EvalReport quantization_floor(const Dataset& data, const WindowView& view,
                              const CodecParams& params);

struct SweepPoint {
    double ms;
    int h;
    double mae;
};

/// Reconstruction error of the quantizer alone on standard-normal data,
/// one point per grid value. Samples are shared across the grid (common
/// random numbers) so neighboring points compare cleanly.
std::vector<SweepPoint> sweep_codec_ms(int h, std::span<const double> ms_grid, long long n,
                                       std::uint64_t seed);
std::vector<SweepPoint> sweep_codec_h(double ms, std::span<const int> h_grid, long long n,
                                      std::uint64_t seed);

/// Checkpoint file: "MVCK" | version u16 = 1 | config digest u64 | flat
/// parameters as little-endian 8-byte floats.
void save_checkpoint(const std::string& path, std::span<const double> theta,
                     std::uint64_t config_digest);

struct Checkpoint {
    std::uint64_t config_digest = 0;
    std::vector<double> theta;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace mvts

#endif
