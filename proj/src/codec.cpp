#include "mvts/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace mvts {

CodecParams::CodecParams(int h_, double ms_) : h(h_), ms(ms_) {
    if (h < 2) throw ValidationError("codec: h must be >= 2, got " + std::to_string(h));
    if (!(ms > 0.0) || !std::isfinite(ms))
        throw ValidationError("codec: ms must be a positive finite real");
}

NumericSeries::NumericSeries(int channels, int steps)
    : channels_(channels), steps_(steps),
      values_(static_cast<std::size_t>(channels) * steps, 0.0) {
    if (channels < 0 || steps < 0) throw ValidationError("series: negative dimensions");
}

NumericSeries::NumericSeries(int channels, int steps, std::vector<double> values,
                             std::vector<std::string> channel_names)
    : channels_(channels), steps_(steps), values_(std::move(values)),
      names_(std::move(channel_names)) {
    if (channels < 0 || steps < 0) throw ValidationError("series: negative dimensions");
    if (values_.size() != static_cast<std::size_t>(channels) * steps)
        throw ValidationError("series: value count does not match channels*steps");
    if (!names_.empty() && names_.size() != static_cast<std::size_t>(channels))
        throw ValidationError("series: channel name count does not match channel count");
    validate();
}

void NumericSeries::validate() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::ostringstream os;
            os << "series: non-finite value at channel " << (i / steps_)
               << ", step " << (i % steps_);
            throw ValidationError(os.str());
        }
    }
}

BinaryVisionTensor::BinaryVisionTensor(int channels, int bins, int steps)
    : c_(channels), h_(bins), t_(steps),
      bits_(static_cast<std::size_t>(channels) * bins * steps, 0) {
    if (channels < 0 || bins < 0 || steps < 0)
        throw ValidationError("tensor: negative dimensions");
}

void BinaryVisionTensor::set_column(int channel, int step, int bin) {
    for (int j = 0; j < h_; ++j) bits_[idx(channel, j, step)] = 0;
    bits_[idx(channel, bin, step)] = 1;
}

int BinaryVisionTensor::column_bin(int channel, int step) const {
    for (int j = 0; j < h_; ++j)
        if (bits_[idx(channel, j, step)]) return j;
    throw ValidationError("tensor: empty column");
}

void BinaryVisionTensor::validate() const {
    for (int i = 0; i < c_; ++i) {
        for (int k = 0; k < t_; ++k) {
            int ones = 0;
            for (int j = 0; j < h_; ++j) {
                const std::uint8_t b = bits_[idx(i, j, k)];
                if (b > 1)
                    throw ValidationError("tensor: entry outside {0,1} at channel " +
                                          std::to_string(i) + ", step " + std::to_string(k));
                ones += b;
            }
            if (ones != 1) {
                std::ostringstream os;
                os << "tensor: column (channel " << i << ", step " << k
                   << ") has " << ones << " set bits, expected exactly 1";
                throw ValidationError(os.str());
            }
        }
    }
}

SoftVisionTensor::SoftVisionTensor(int channels, int bins, int steps)
    : c_(channels), h_(bins), t_(steps),
      probs_(static_cast<std::size_t>(channels) * bins * steps, 0.0) {
    if (channels < 0 || bins < 0 || steps < 0)
        throw ValidationError("tensor: negative dimensions");
}

void SoftVisionTensor::validate() const {
    for (int i = 0; i < c_; ++i) {
        for (int k = 0; k < t_; ++k) {
            double sum = 0.0;
            for (int j = 0; j < h_; ++j) {
                const double p = probs_[idx(i, j, k)];
                if (!(p >= 0.0))
                    throw ValidationError("soft tensor: negative or NaN probability at channel " +
                                          std::to_string(i) + ", step " + std::to_string(k));
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-9) {
                std::ostringstream os;
                os << "soft tensor: column (channel " << i << ", step " << k
                   << ") sums to " << sum << ", expected 1";
                throw ValidationError(os.str());
            }
        }
    }
}

int bin_index(double s, const CodecParams& params) {
    if (s >= params.ms) return params.h;
    if (s <= -params.ms) return 1;
    const int j = static_cast<int>(std::floor(params.h * (s + params.ms) / (2.0 * params.ms))) + 1;
    return std::clamp(j, 1, params.h);
}

double bin_midpoint(int j, const CodecParams& params) {
    if (j < 1 || j > params.h)
        throw ValidationError("codec: bin ordinal out of range [1, h]");
    const double half_width = params.ms / params.h;
    const int from_top = params.h - j;
    const int from_bottom = j - 1;
    // Measuring from the nearer boundary keeps the midpoints exactly
    // symmetric about zero.
    if (from_top <= from_bottom)
        return params.ms - half_width * (2 * from_top + 1);
    return -(params.ms - half_width * (2 * from_bottom + 1));
}

namespace {

// Shared per-column kernels. The serial and parallel entry points differ
// only in the loop driver.

inline void encode_column(const NumericSeries& s, const CodecParams& p,
                          BinaryVisionTensor& out, int i, int k) {
    out.set_column(i, k, bin_index(s.at(i, k), p) - 1);
}

inline void decode_column(const BinaryVisionTensor& v, const CodecParams& p,
                          NumericSeries& out, int i, int k) {
    out.at(i, k) = bin_midpoint(v.column_bin(i, k) + 1, p);
}

inline void harden_column(const SoftVisionTensor& s, BinaryVisionTensor& out, int i, int k) {
    int best = 0;
    double best_p = s.prob(i, 0, k);
    for (int j = 1; j < s.bins(); ++j) {
        const double p = s.prob(i, j, k);
        if (p > best_p) {
            best_p = p;
            best = j;
        }
    }
    out.set_column(i, k, best);
}

void check_decode_input(const BinaryVisionTensor& tensor, const CodecParams& params) {
    if (tensor.bins() != params.h)
        throw ValidationError("decode: tensor has " + std::to_string(tensor.bins()) +
                              " bins but params.h is " + std::to_string(params.h));
    tensor.validate();
}

} // namespace

BinaryVisionTensor encode(const NumericSeries& series, const CodecParams& params) {
    series.validate();
    BinaryVisionTensor out(series.channels(), params.h, series.steps());
    const long long columns = static_cast<long long>(series.channels()) * series.steps();
#pragma omp parallel for schedule(static)
    for (long long col = 0; col < columns; ++col)
        encode_column(series, params, out, static_cast<int>(col / series.steps()),
                      static_cast<int>(col % series.steps()));
    return out;
}

NumericSeries decode(const BinaryVisionTensor& tensor, const CodecParams& params) {
    check_decode_input(tensor, params);
    NumericSeries out(tensor.channels(), tensor.steps());
    const long long columns = static_cast<long long>(tensor.channels()) * tensor.steps();
#pragma omp parallel for schedule(static)
    for (long long col = 0; col < columns; ++col)
        decode_column(tensor, params, out, static_cast<int>(col / tensor.steps()),
                      static_cast<int>(col % tensor.steps()));
    return out;
}

BinaryVisionTensor harden(const SoftVisionTensor& soft) {
    soft.validate();
    BinaryVisionTensor out(soft.channels(), soft.bins(), soft.steps());
    const long long columns = static_cast<long long>(soft.channels()) * soft.steps();
#pragma omp parallel for schedule(static)
    for (long long col = 0; col < columns; ++col)
        harden_column(soft, out, static_cast<int>(col / soft.steps()),
                      static_cast<int>(col % soft.steps()));
    return out;
}

namespace serial {

BinaryVisionTensor encode(const NumericSeries& series, const CodecParams& params) {
    series.validate();
    BinaryVisionTensor out(series.channels(), params.h, series.steps());
    for (int i = 0; i < series.channels(); ++i)
        for (int k = 0; k < series.steps(); ++k)
            encode_column(series, params, out, i, k);
    return out;
}

NumericSeries decode(const BinaryVisionTensor& tensor, const CodecParams& params) {
    check_decode_input(tensor, params);
    NumericSeries out(tensor.channels(), tensor.steps());
    for (int i = 0; i < tensor.channels(); ++i)
        for (int k = 0; k < tensor.steps(); ++k)
            decode_column(tensor, params, out, i, k);
    return out;
}

BinaryVisionTensor harden(const SoftVisionTensor& soft) {
    soft.validate();
    BinaryVisionTensor out(soft.channels(), soft.bins(), soft.steps());
    for (int i = 0; i < soft.channels(); ++i)
        for (int k = 0; k < soft.steps(); ++k)
            harden_column(soft, out, i, k);
    return out;
}

} // namespace serial

SoftVisionTensor to_soft(const BinaryVisionTensor& tensor) {
    SoftVisionTensor out(tensor.channels(), tensor.bins(), tensor.steps());
    const std::span<const std::uint8_t> src = tensor.data();
    const std::span<double> dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    return out;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
           (static_cast<std::uint32_t>(in[at + 2]) << 16) |
           (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

} // namespace

std::vector<std::uint8_t> serialize(const BinaryVisionTensor& tensor) {
    tensor.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kTensorFileHeaderSize + tensor.data().size());
    out.insert(out.end(), {'M', 'V', 'T', 'S'});
    put_u16(out, 1);  // version
    put_u16(out, 0);  // flags
    put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
    put_u32(out, static_cast<std::uint32_t>(tensor.bins()));
    put_u32(out, static_cast<std::uint32_t>(tensor.steps()));
    out.insert(out.end(), tensor.data().begin(), tensor.data().end());
    return out;
}

BinaryVisionTensor deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kTensorFileHeaderSize)
        throw ValidationError("tensor file: truncated header");
    if (std::memcmp(bytes.data(), "MVTS", 4) != 0)
        throw ValidationError("tensor file: bad magic");
    const std::uint16_t version = get_u16(bytes, 4);
    if (version != 1)
        throw ValidationError("tensor file: unsupported version " + std::to_string(version));
    const std::uint16_t flags = get_u16(bytes, 6);
    if (flags != 0)
        throw ValidationError("tensor file: unsupported flags");
    const std::uint32_t c = get_u32(bytes, 8);
    const std::uint32_t h = get_u32(bytes, 12);
    const std::uint32_t t = get_u32(bytes, 16);
    const std::uint64_t payload = static_cast<std::uint64_t>(c) * h * t;
    if (bytes.size() != kTensorFileHeaderSize + payload)
        throw ValidationError("tensor file: payload size mismatch (expected " +
                              std::to_string(payload) + " bytes)");
    BinaryVisionTensor out(static_cast<int>(c), static_cast<int>(h), static_cast<int>(t));
    std::span<std::uint8_t> dst = out.data();
    for (std::size_t i = 0; i < payload; ++i) {
        const std::uint8_t b = bytes[kTensorFileHeaderSize + i];
        if (b > 1) throw ValidationError("tensor file: payload byte outside {0,1}");
        dst[i] = b;
    }
    out.validate();
    return out;
}

std::string render_pbm(const BinaryVisionTensor& tensor, int channel) {
    if (channel < 0 || channel >= tensor.channels())
        throw ValidationError("render: channel out of range");
    if (tensor.steps() == 0 || tensor.bins() == 0)
        throw ValidationError("render: empty tensor");
    tensor.validate();
    std::string out = "P1\n";
    out += std::to_string(tensor.steps()) + " " + std::to_string(tensor.bins()) + "\n";
    for (int j = tensor.bins() - 1; j >= 0; --j) {
        for (int k = 0; k < tensor.steps(); ++k) {
            if (k) out += ' ';
            out += tensor.bit(channel, j, k) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

} // namespace mvts
