#include "mvts/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mvts/rng.hpp"

namespace mvts {

namespace {

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_double(std::string_view cell, double& out) {
    // Trim surrounding whitespace; from_chars wants a bare number.
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

bool looks_like_timestamp_header(const std::string& name) {
    const std::string n = to_lower(name);
    return n == "date" || n == "time" || n == "timestamp" || n == "datetime";
}

void apply_global_stats(Dataset& d, bool global_zscore) {
    const int c = d.series.channels();
    const int t = d.series.steps();
    d.global_mean.assign(c, 0.0);
    d.global_std.assign(c, 0.0);
    d.constant_channel.assign(c, 0);
    for (int i = 0; i < c; ++i) {
        double sum = 0.0;
        for (int k = 0; k < t; ++k) sum += d.series.at(i, k);
        const double mean = sum / t;
        double sq = 0.0;
        for (int k = 0; k < t; ++k) {
            const double v = d.series.at(i, k) - mean;
            sq += v * v;
        }
        const double sd = std::sqrt(sq / t);
        d.global_mean[i] = mean;
        d.global_std[i] = sd;
        if (sd == 0.0) d.constant_channel[i] = 1;
        if (global_zscore) {
            const double denom = (sd == 0.0) ? 1.0 : sd;
            for (int k = 0; k < t; ++k) d.series.at(i, k) = (d.series.at(i, k) - mean) / denom;
        }
    }
    d.zscored = global_zscore;
}

} // namespace

Dataset make_dataset(NumericSeries series, bool global_zscore, std::string source) {
    if (series.channels() < 1 || series.steps() < 1)
        throw ValidationError("dataset: needs at least one channel and one row");
    Dataset d(std::move(series));
    d.source = std::move(source);
    d.raw_rows = d.series.steps();
    apply_global_stats(d, global_zscore);
    return d;
}

Dataset load_csv(const std::string& path, bool global_zscore) {
    std::ifstream in(path);
    if (!in) throw ValidationError("csv: cannot open '" + path + "'");

    // Header: first line that is neither blank nor a '#' comment.
    std::string line;
    do {
        if (!std::getline(in, line)) throw ValidationError("csv: '" + path + "' is empty");
    } while (line.empty() || line[0] == '#');
    const std::vector<std::string> header = split_line(line);
    if (header.empty()) throw ValidationError("csv: missing header row");

    // Column 0 is a timestamp if its name says so, or if the first data cell
    // does not parse as a number.
    bool skip_first = looks_like_timestamp_header(header[0]);

    std::vector<std::vector<double>> rows;  // row-major while reading
    long long row_no = 0;
    bool first_data_row = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++row_no;
        const std::vector<std::string> cells = split_line(line);
        if (first_data_row && !skip_first && !cells.empty()) {
            double probe;
            if (!parse_double(cells[0], probe)) skip_first = true;
        }
        const std::size_t offset = skip_first ? 1 : 0;
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << "csv: row " << row_no << " has " << cells.size() << " cells, header has "
               << header.size();
            throw ValidationError(os.str());
        }
        std::vector<double> row(cells.size() - offset);
        for (std::size_t j = offset; j < cells.size(); ++j) {
            if (!parse_double(cells[j], row[j - offset])) {
                std::ostringstream os;
                os << "csv: non-numeric cell at row " << row_no << ", column '" << header[j]
                   << "'";
                throw ValidationError(os.str());
            }
        }
        rows.push_back(std::move(row));
        first_data_row = false;
    }
    if (rows.empty()) throw ValidationError("csv: '" + path + "' has no data rows");

    const int c = static_cast<int>(rows[0].size());
    const int t = static_cast<int>(rows.size());
    if (c < 1) throw ValidationError("csv: no value columns");

    std::vector<double> values(static_cast<std::size_t>(c) * t);
    for (int k = 0; k < t; ++k)
        for (int i = 0; i < c; ++i) values[static_cast<std::size_t>(i) * t + k] = rows[k][i];
    std::vector<std::string> names(header.begin() + (skip_first ? 1 : 0), header.end());

    Dataset d(NumericSeries(c, t, std::move(values), std::move(names)));
    d.source = path;
    d.raw_rows = t;
    apply_global_stats(d, global_zscore);
    return d;
}

Dataset synthetic_sine(long long steps, int channels, double period, double noise_sigma,
                       std::uint64_t seed, bool global_zscore) {
    if (steps < 1 || channels < 1) throw ValidationError("synthetic_sine: empty shape");
    if (!(period > 0.0)) throw ValidationError("synthetic_sine: period must be positive");
    NumericSeries series(channels, static_cast<int>(steps));
    SplitMix64 rng(seed);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < channels; ++i) {
        const double phase = 0.25 * two_pi * i / std::max(1, channels);
        for (long long k = 0; k < steps; ++k) {
            series.at(i, static_cast<int>(k)) =
                std::sin(two_pi * static_cast<double>(k) / period + phase) +
                noise_sigma * rng.next_normal();
        }
    }
    std::ostringstream tag;
    tag << "synthetic:sine(t=" << steps << ",c=" << channels << ",period=" << period
        << ",noise=" << noise_sigma << ",seed=" << seed << ")";
    return make_dataset(std::move(series), global_zscore, tag.str());
}

WindowSpec::WindowSpec(int lookback_, int horizon_, int stride_)
    : lookback(lookback_), horizon(horizon_), stride(stride_) {
    if (lookback < 1) throw ValidationError("window spec: lookback must be >= 1");
    if (horizon < 1) throw ValidationError("window spec: horizon must be >= 1");
    if (stride < 1) throw ValidationError("window spec: stride must be >= 1");
}

SplitRanges split_dataset(const Dataset& d, double train, double val, double test,
                          const WindowSpec& spec) {
    if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0))
        throw ValidationError("split: ratios must be positive");
    if (train + val + test > 1.0 + 1e-12)
        throw ValidationError("split: ratios must sum to at most 1");
    const long long t = d.series.steps();
    const long long n_train = static_cast<long long>(std::floor(t * train));
    const long long n_val = static_cast<long long>(std::floor(t * val));
    const long long n_test = static_cast<long long>(std::floor(t * test));

    SplitRanges r;
    r.train = {0, n_train};
    r.val = {n_train, n_train + n_val};
    r.test = {n_train + n_val, n_train + n_val + n_test};

    const long long need = spec.lookback + spec.horizon;
    for (const auto& [name, range] :
         {std::pair<const char*, RowRange>{"train", r.train}, {"val", r.val}, {"test", r.test}}) {
        if (range.size() < need) {
            std::ostringstream os;
            os << "split: " << name << " split has " << range.size()
               << " rows, needs at least lookback + horizon = " << need;
            throw ValidationError(os.str());
        }
    }
    return r;
}

WindowView::WindowView(const Dataset& d, const WindowSpec& spec, RowRange range,
                       bool channel_independent)
    : dataset_(&d), spec_(spec), range_(range), channel_independent_(channel_independent) {
    if (range.begin < 0 || range.end > d.series.steps() || range.begin >= range.end)
        throw ValidationError("windows: range outside the dataset");
    const long long need = spec.lookback + spec.horizon;
    if (range.size() < need)
        throw ValidationError("windows: window length " + std::to_string(need) +
                              " exceeds the split length " + std::to_string(range.size()));
    positions_ = (range.size() - need) / spec.stride + 1;
    const long long per_position = channel_independent ? d.series.channels() : 1;
    count_ = static_cast<std::size_t>(positions_ * per_position);
}

WindowPair WindowView::get(std::size_t index) const {
    if (index >= count_) throw ValidationError("windows: sample index out of range");
    const int c_total = dataset_->series.channels();
    const long long per_position = channel_independent_ ? c_total : 1;
    const long long position = static_cast<long long>(index) / per_position;
    const int channel = channel_independent_ ? static_cast<int>(index % per_position) : -1;

    const long long start = range_.begin + position * spec_.stride;
    const int first_ch = channel_independent_ ? channel : 0;
    const int n_ch = channel_independent_ ? 1 : c_total;

    WindowPair pair;
    pair.position = start;
    pair.channel_id = channel;
    pair.x = NumericSeries(n_ch, spec_.lookback);
    pair.y = NumericSeries(n_ch, spec_.horizon);
    pair.norm_mean.resize(n_ch);
    pair.norm_std.resize(n_ch);
    pair.std_floored.assign(n_ch, 0);

    for (int ci = 0; ci < n_ch; ++ci) {
        const int src = first_ch + ci;
        double sum = 0.0;
        for (int k = 0; k < spec_.lookback; ++k)
            sum += dataset_->series.at(src, static_cast<int>(start + k));
        const double mean = sum / spec_.lookback;
        double sq = 0.0;
        for (int k = 0; k < spec_.lookback; ++k) {
            const double v = dataset_->series.at(src, static_cast<int>(start + k)) - mean;
            sq += v * v;
        }
        double sd = std::sqrt(sq / spec_.lookback);
        const bool floored = sd < kStdFloor;
        if (floored) {
            sd = kStdFloor;
            pair.std_floored[ci] = 1;
        }
        pair.norm_mean[ci] = mean;
        pair.norm_std[ci] = sd;
        for (int k = 0; k < spec_.lookback; ++k) {
            pair.x.at(ci, k) =
                floored ? 0.0
                        : (dataset_->series.at(src, static_cast<int>(start + k)) - mean) / sd;
        }
        for (int k = 0; k < spec_.horizon; ++k) {
            pair.y.at(ci, k) =
                (dataset_->series.at(src, static_cast<int>(start + spec_.lookback + k)) - mean) /
                sd;
        }
    }
    return pair;
}

WindowView make_windows(const Dataset& d, const WindowSpec& spec, RowRange range,
                        bool channel_independent) {
    return WindowView(d, spec, range, channel_independent);
}

std::vector<double> denormalize(std::span<const double> values, const WindowPair& pair,
                                int channel) {
    if (channel < 0 || channel >= static_cast<int>(pair.norm_mean.size()))
        throw ValidationError("denormalize: channel out of range");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = values[i] * pair.norm_std[channel] + pair.norm_mean[channel];
    return out;
}

NumericSeries denormalize(const NumericSeries& values, const WindowPair& pair) {
    if (values.channels() != static_cast<int>(pair.norm_mean.size()))
        throw ValidationError("denormalize: channel count does not match the window stats");
    NumericSeries out(values.channels(), values.steps());
    for (int i = 0; i < values.channels(); ++i)
        for (int k = 0; k < values.steps(); ++k)
            out.at(i, k) = values.at(i, k) * pair.norm_std[i] + pair.norm_mean[i];
    return out;
}

void export_windows_csv(std::ostream& out, const WindowView& view) {
    out << "window_id,channel,role,step,value\n";
    char buf[64];
    for (std::size_t w = 0; w < view.size(); ++w) {
        const WindowPair pair = view.get(w);
        for (int i = 0; i < pair.x.channels(); ++i) {
            const int label = pair.channel_id >= 0 ? pair.channel_id : i;
            for (int k = 0; k < pair.x.steps(); ++k) {
                std::snprintf(buf, sizeof buf, "%.6f", pair.x.at(i, k));
                out << w << ',' << label << ",x," << k << ',' << buf << '\n';
            }
            for (int k = 0; k < pair.y.steps(); ++k) {
                std::snprintf(buf, sizeof buf, "%.6f", pair.y.at(i, k));
                out << w << ',' << label << ",y," << k << ',' << buf << '\n';
            }
        }
    }
}

} // namespace mvts
