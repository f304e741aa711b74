#ifndef MVTS_CODEC_HPP
#define MVTS_CODEC_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvts/errors.hpp"

namespace mvts {

/// Quantizer configuration: `h` vertical bins covering the value range
/// [-ms, ms]. Values outside the range saturate into the outermost bins.
struct CodecParams {
    int h;      ///< number of bins, >= 2
    double ms;  ///< maximum scale (half-width of the representable range), > 0

    CodecParams(int h_, double ms_);
};

/// A c-by-t grid of finite real values with optional channel labels.
class NumericSeries {
public:
    NumericSeries() = default;  ///< empty 0-by-0 grid
    NumericSeries(int channels, int steps);
    NumericSeries(int channels, int steps, std::vector<double> values,
                  std::vector<std::string> channel_names = {});

    int channels() const { return channels_; }
    int steps() const { return steps_; }

    double at(int channel, int step) const { return values_[idx(channel, step)]; }
    double& at(int channel, int step) { return values_[idx(channel, step)]; }

    std::span<const double> values() const { return values_; }
    const std::vector<std::string>& channel_names() const { return names_; }

    /// Throws ValidationError if any value is NaN or infinite.
    void validate() const;

private:
    std::size_t idx(int channel, int step) const {
        return static_cast<std::size_t>(channel) * steps_ + step;
    }

    int channels_ = 0;
    int steps_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

/// A c-by-h-by-t grid of bits where each (channel, time) column carries
/// exactly one set bit. Storage is channel-major, then bin, then time,
/// matching the on-disk layout.
class BinaryVisionTensor {
public:
    BinaryVisionTensor(int channels, int bins, int steps);

    int channels() const { return c_; }
    int bins() const { return h_; }
    int steps() const { return t_; }

    /// `bin` is 0-based here; the codec's 1-based bin ordinals map to bin-1.
    std::uint8_t bit(int channel, int bin, int step) const {
        return bits_[idx(channel, bin, step)];
    }

    /// Makes column (channel, step) one-hot at the given 0-based bin.
    void set_column(int channel, int step, int bin);

    /// 0-based bin of the single set bit in a column.
    /// Only meaningful on tensors satisfying the one-column-one-bit law.
    int column_bin(int channel, int step) const;

    std::span<const std::uint8_t> data() const { return bits_; }
    std::span<std::uint8_t> data() { return bits_; }

    /// Throws ValidationError unless every entry is 0/1 and every column
    /// sums to exactly 1.
    void validate() const;

    bool operator==(const BinaryVisionTensor&) const = default;

private:
    std::size_t idx(int channel, int bin, int step) const {
        return (static_cast<std::size_t>(channel) * h_ + bin) * t_ + step;
    }

    int c_ = 0, h_ = 0, t_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Relaxation of BinaryVisionTensor for differentiable use: each column is a
/// probability distribution over bins instead of a single set bit.
class SoftVisionTensor {
public:
    SoftVisionTensor(int channels, int bins, int steps);

    int channels() const { return c_; }
    int bins() const { return h_; }
    int steps() const { return t_; }

    double prob(int channel, int bin, int step) const { return probs_[idx(channel, bin, step)]; }
    double& prob(int channel, int bin, int step) { return probs_[idx(channel, bin, step)]; }

    std::span<const double> data() const { return probs_; }
    std::span<double> data() { return probs_; }

    /// Throws ValidationError unless entries are nonnegative and every
    /// column sums to 1 within 1e-9.
    void validate() const;

private:
    std::size_t idx(int channel, int bin, int step) const {
        return (static_cast<std::size_t>(channel) * h_ + bin) * t_ + step;
    }

    int c_ = 0, h_ = 0, t_ = 0;
    std::vector<double> probs_;
};

/// 1-based bin ordinal of a finite value. Total over finite inputs:
///   s >= ms       -> h
///   s <= -ms      -> 1
///   otherwise     -> clamp(floor(h * (s + ms) / (2 ms)) + 1, 1, h)
/// Values landing exactly on a bin edge go to the upper bin.
int bin_index(double s, const CodecParams& params);

/// Decoded value of the 1-based bin `j`: the bin midpoint
/// (j - 0.5) * (2 ms / h) - ms. Evaluated symmetrically from the nearer
/// boundary, so midpoint(j) == -midpoint(h + 1 - j) bit-for-bit and the
/// outermost bins decode to exactly +-(ms - ms / h).
double bin_midpoint(int j, const CodecParams& params);

/// Height of one bin. Transport distances are measured in bin-index units
/// (independent of ms); multiply by this to express them in value units.
inline double bin_width(const CodecParams& params) { return 2.0 * params.ms / params.h; }

/// Maps each value to a one-hot column at its bin ordinal.
/// Rejects non-finite input.
BinaryVisionTensor encode(const NumericSeries& series, const CodecParams& params);

/// Inverse mapping: each one-hot column becomes its bin midpoint.
/// Rejects tensors violating the one-bit-per-column law or with a bin
/// count different from params.h.
NumericSeries decode(const BinaryVisionTensor& tensor, const CodecParams& params);

/// Collapses each column to a one-hot at its argmax.
/// Ties break toward the lowest bin ordinal.
BinaryVisionTensor harden(const SoftVisionTensor& soft);

/// Views a hard tensor as degenerate one-point distributions.
SoftVisionTensor to_soft(const BinaryVisionTensor& tensor);

/// Tensor file bytes: little-endian header
///   magic "MVTS" | version u16 = 1 | flags u16 = 0 | c u32 | h u32 | t u32
/// followed by c*h*t payload bytes (0x00 or 0x01), channel-major, then bin,
/// then time. One byte per entry; no packing.
std::vector<std::uint8_t> serialize(const BinaryVisionTensor& tensor);

/// Rejects bad magic, unsupported version/flags, truncated or oversized
/// payloads, non-bit bytes, and one-hot violations.
BinaryVisionTensor deserialize(std::span<const std::uint8_t> bytes);

constexpr std::size_t kTensorFileHeaderSize = 20;

/// Plain portable bitmap ("P1") of one channel, t columns wide and h rows
/// tall. The top bin prints first so larger values appear higher.
std::string render_pbm(const BinaryVisionTensor& tensor, int channel);

/// Single-threaded reference kernels. The public encode/decode/harden run
/// the same per-column math in parallel; tests hold the two bit-for-bit
/// equal, and the bench tool times them against each other.
namespace serial {
BinaryVisionTensor encode(const NumericSeries& series, const CodecParams& params);
NumericSeries decode(const BinaryVisionTensor& tensor, const CodecParams& params);
BinaryVisionTensor harden(const SoftVisionTensor& soft);
} // namespace serial

} // namespace mvts

#endif
