#ifndef MVTS_PIPELINE_HPP
#define MVTS_PIPELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvts/codec.hpp"

namespace mvts {

/// Floor applied to window standard deviations so constant inputs stay
/// finite. When it fires, the window's flag is set and the input segment
/// becomes exactly zero.
inline constexpr double kStdFloor = 1e-8;

struct Dataset {
    NumericSeries series;              ///< possibly globally z-scored values
    std::vector<double> global_mean;   ///< per-channel stats of the raw data
    std::vector<double> global_std;
    std::vector<std::uint8_t> constant_channel;  ///< channels with zero spread
    bool zscored = false;
    std::string source;                ///< provenance: path or generator tag
    long long raw_rows = 0;

    explicit Dataset(NumericSeries s) : series(std::move(s)) {}
};

/// Reads a CSV with a mandatory header row. The first column is skipped as a
/// timestamp when its header is a common timestamp name or its first data
/// cell is not numeric. Non-numeric cells and ragged rows are reported with
/// their (1-based) data row and column name.
Dataset load_csv(const std::string& path, bool global_zscore = true);

/// Builds a dataset from an in-memory series (same z-score handling).
Dataset make_dataset(NumericSeries series, bool global_zscore, std::string source);

/// Multi-channel sine with per-channel phase offsets plus Gaussian noise.
Dataset synthetic_sine(long long steps, int channels, double period, double noise_sigma,
                       std::uint64_t seed, bool global_zscore = true);

struct WindowSpec {
    int lookback;  ///< input length I
    int horizon;   ///< target length O
    int stride = 1;

    WindowSpec(int lookback_, int horizon_, int stride_ = 1);
};

struct RowRange {
    long long begin = 0;
    long long end = 0;  // half-open
    long long size() const { return end - begin; }
};

struct SplitRanges {
    RowRange train, val, test;
};

/// Chronological, contiguous, non-overlapping row ranges. Ratios must be
/// positive and sum to at most 1; any remainder is dropped from the tail.
/// Windows never cross a range boundary, so each split must hold at least
/// lookback + horizon rows.
SplitRanges split_dataset(const Dataset& d, double train, double val, double test,
                          const WindowSpec& spec);

/// One training/evaluation sample. `x` and `y` are normalized with x's
/// per-channel mean and std (y never uses its own statistics); the stats are
/// kept so predictions can be mapped back.
struct WindowPair {
    NumericSeries x;  ///< c-by-I, normalized
    NumericSeries y;  ///< c-by-O, normalized with x's stats
    std::vector<double> norm_mean;          ///< per channel
    std::vector<double> norm_std;           ///< per channel (after flooring)
    std::vector<std::uint8_t> std_floored;  ///< per channel
    long long position = 0;  ///< start row of x in the dataset
    int channel_id = -1;     ///< source channel for expanded samples, else -1
};

/// Lazy, deterministic window stream over one split. Samples are ordered by
/// window position; with channel-independent expansion each position yields
/// one single-channel pair per source channel (channel-minor order).
class WindowView {
public:
    WindowView(const Dataset& d, const WindowSpec& spec, RowRange range,
               bool channel_independent);

    std::size_t size() const { return count_; }
    WindowPair get(std::size_t index) const;

    const WindowSpec& spec() const { return spec_; }
    bool channel_independent() const { return channel_independent_; }

private:
    const Dataset* dataset_;
    WindowSpec spec_;
    RowRange range_;
    bool channel_independent_;
    long long positions_ = 0;
    std::size_t count_ = 0;
};

WindowView make_windows(const Dataset& d, const WindowSpec& spec, RowRange range,
                        bool channel_independent);

/// Inverse of the per-window normalization for one channel of values.
std::vector<double> denormalize(std::span<const double> values, const WindowPair& pair,
                                int channel = 0);

/// Inverse of the per-window normalization for a whole c-by-n series.
NumericSeries denormalize(const NumericSeries& values, const WindowPair& pair);

/// Debug dump: one row per (window_id, channel, role, step, value).
void export_windows_csv(std::ostream& out, const WindowView& view);

} // namespace mvts

#endif
