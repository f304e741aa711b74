#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mvts/pipeline.hpp"
#include "mvts/rng.hpp"

using namespace mvts;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& contents)
        : path(std::filesystem::temp_directory_path() / name) {
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

std::string big_csv(int channels, int rows) {
    std::ostringstream os;
    os << "date";
    for (int i = 0; i < channels; ++i) os << ",ch" << i;
    os << "\n";
    for (int r = 0; r < rows; ++r) {
        os << "2016-07-01 " << r;
        for (int i = 0; i < channels; ++i) os << "," << (0.001 * r + i);
        os << "\n";
    }
    return os.str();
}

Dataset ramp_dataset(int channels, int steps) {
    NumericSeries s(channels, steps);
    for (int i = 0; i < channels; ++i)
        for (int k = 0; k < steps; ++k) s.at(i, k) = 10.0 * i + 0.5 * k;
    return make_dataset(std::move(s), false, "test:ramp");
}

} // namespace

TEST_CASE("csv loading") {
    SUBCASE("timestamp column is skipped, counts match") {
        TempFile f("mvts_t1.csv", "date,a,b\n2020-01-01,1.5,2\n2020-01-02,-0.5,4\n");
        const Dataset d = load_csv(f.path.string(), false);
        CHECK(d.series.channels() == 2);
        CHECK(d.series.steps() == 2);
        CHECK(d.series.at(0, 0) == 1.5);
        CHECK(d.series.at(1, 1) == 4.0);
        CHECK(d.series.channel_names()[0] == "a");
        CHECK(d.raw_rows == 2);
        CHECK(d.source == f.path.string());
    }
    SUBCASE("no timestamp column when the first cell is numeric") {
        TempFile f("mvts_t2.csv", "a,b\n1,2\n3,4\n");
        const Dataset d = load_csv(f.path.string(), false);
        CHECK(d.series.channels() == 2);
        CHECK(d.series.at(0, 1) == 3.0);
    }
    SUBCASE("reference dataset shapes") {
        // ILI-shaped: 7 value columns, 966 rows
        TempFile ili("mvts_ili.csv", big_csv(7, 966));
        const Dataset a = load_csv(ili.path.string());
        CHECK(a.series.channels() == 7);
        CHECK(a.series.steps() == 966);
        // ETTm2-shaped: 7 value columns, 69680 rows
        TempFile ett("mvts_ett.csv", big_csv(7, 69680));
        const Dataset b = load_csv(ett.path.string());
        CHECK(b.series.channels() == 7);
        CHECK(b.series.steps() == 69680);
    }
    SUBCASE("bad cell names the row and column") {
        TempFile f("mvts_t3.csv", "a,b\n1,2\n1,oops\n3,4\n");
        try {
            load_csv(f.path.string());
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 2") != std::string::npos);
            CHECK(msg.find("'b'") != std::string::npos);
        }
    }
    SUBCASE("ragged row is rejected") {
        TempFile f("mvts_t4.csv", "a,b\n1,2\n3\n");
        CHECK_THROWS_AS(load_csv(f.path.string()), ValidationError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv"), ValidationError);
    }
    SUBCASE("constant channels are flagged under z-scoring") {
        TempFile f("mvts_t5.csv", "a,b\n5,1\n5,2\n5,3\n");
        const Dataset d = load_csv(f.path.string(), true);
        CHECK(d.constant_channel[0] == 1);
        CHECK(d.constant_channel[1] == 0);
        CHECK(d.zscored);
        // z-scored non-constant channel has mean 0
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) sum += d.series.at(1, k);
        CHECK(std::fabs(sum) < 1e-12);
    }
}

TEST_CASE("chronological splits") {
    const Dataset d = ramp_dataset(1, 100);
    const WindowSpec spec(3, 2);
    SUBCASE("ratio arithmetic") {
        const SplitRanges r = split_dataset(d, 0.7, 0.1, 0.2, spec);
        CHECK(r.train.begin == 0);
        CHECK(r.train.end == 70);
        CHECK(r.val.begin == 70);
        CHECK(r.val.end == 80);
        CHECK(r.test.begin == 80);
        CHECK(r.test.end == 100);
    }
    SUBCASE("over-unity ratios are rejected") {
        CHECK_THROWS_AS(split_dataset(d, 0.5, 0.5, 0.5, spec), ValidationError);
    }
    SUBCASE("a split shorter than one window is rejected") {
        CHECK_THROWS_AS(split_dataset(d, 0.9, 0.04, 0.06, WindowSpec(10, 10)), ValidationError);
    }
    SUBCASE("order and disjointness on random sizes") {
        SplitMix64 rng(3);
        for (int rep = 0; rep < 20; ++rep) {
            const int t = 60 + (int)(rng.next() % 500);
            const Dataset dd = ramp_dataset(1, t);
            const SplitRanges r = split_dataset(dd, 0.6, 0.2, 0.2, WindowSpec(2, 1));
            CHECK(r.train.begin == 0);
            CHECK(r.train.end == r.val.begin);
            CHECK(r.val.end == r.test.begin);
            CHECK(r.test.end <= t);
        }
    }
}

TEST_CASE("window streams") {
    SUBCASE("count arithmetic") {
        const Dataset d = ramp_dataset(1, 10);
        const WindowView view = make_windows(d, WindowSpec(3, 2), {0, 10}, false);
        CHECK(view.size() == 6);
    }
    SUBCASE("normalization contract") {
        const Dataset d = ramp_dataset(2, 40);
        const WindowView view = make_windows(d, WindowSpec(8, 4), {0, 40}, false);
        for (std::size_t w = 0; w < view.size(); ++w) {
            const WindowPair pair = view.get(w);
            for (int i = 0; i < 2; ++i) {
                double mean = 0.0;
                for (int k = 0; k < 8; ++k) mean += pair.x.at(i, k);
                mean /= 8.0;
                CHECK(std::fabs(mean) < 1e-9);
                double var = 0.0;
                for (int k = 0; k < 8; ++k) var += pair.x.at(i, k) * pair.x.at(i, k);
                CHECK(std::fabs(std::sqrt(var / 8.0) - 1.0) < 1e-6);
                // the target was transformed with x's stats, not its own
                for (int k = 0; k < 4; ++k) {
                    const double raw = d.series.at(i, (int)pair.position + 8 + k);
                    CHECK(pair.y.at(i, k) * pair.norm_std[i] + pair.norm_mean[i] ==
                          doctest::Approx(raw).epsilon(1e-12));
                }
            }
        }
    }
    SUBCASE("constant input segment hits the std floor") {
        NumericSeries s(1, 12);
        for (int k = 0; k < 12; ++k) s.at(0, k) = (k < 6) ? 3.25 : (double)k;
        const Dataset d = make_dataset(std::move(s), false, "test:const");
        const WindowView view = make_windows(d, WindowSpec(4, 2), {0, 12}, false);
        const WindowPair pair = view.get(0);  // x = rows 0..3, all 3.25
        CHECK(pair.std_floored[0] == 1);
        CHECK(pair.norm_std[0] == kStdFloor);
        for (int k = 0; k < 4; ++k) CHECK(pair.x.at(0, k) == 0.0);
    }
    SUBCASE("channel-independent expansion") {
        const Dataset d = ramp_dataset(3, 20);
        const WindowView flat = make_windows(d, WindowSpec(5, 3), {0, 20}, false);
        const WindowView ci = make_windows(d, WindowSpec(5, 3), {0, 20}, true);
        CHECK(ci.size() == 3 * flat.size());
        // per-position value count is conserved: c*(I+O)
        const WindowPair w0 = ci.get(0);
        const WindowPair w1 = ci.get(1);
        const WindowPair w2 = ci.get(2);
        CHECK(w0.x.channels() == 1);
        CHECK(w0.channel_id == 0);
        CHECK(w1.channel_id == 1);
        CHECK(w2.channel_id == 2);
        CHECK(w0.position == w1.position);
        const int values = (w0.x.steps() + w0.y.steps()) * 3;
        CHECK(values == 3 * (5 + 3));
        // same channel content as the multivariate pair
        const WindowPair flat0 = flat.get(0);
        for (int k = 0; k < 3; ++k)
            CHECK(w1.y.at(0, k) == doctest::Approx(flat0.y.at(1, k)).epsilon(1e-12));
    }
    SUBCASE("no leakage across split boundaries") {
        const Dataset d = ramp_dataset(1, 100);
        const WindowSpec spec(6, 2);
        const SplitRanges r = split_dataset(d, 0.7, 0.1, 0.2, spec);
        const WindowView train = make_windows(d, spec, r.train, false);
        const WindowView test = make_windows(d, spec, r.test, false);
        long long max_train_row = -1;
        for (std::size_t w = 0; w < train.size(); ++w) {
            const WindowPair p = train.get(w);
            max_train_row = std::max(max_train_row, p.position + spec.lookback + spec.horizon - 1);
        }
        long long min_test_row = 1'000'000;
        for (std::size_t w = 0; w < test.size(); ++w)
            min_test_row = std::min(min_test_row, test.get(w).position);
        CHECK(max_train_row < r.val.begin);
        CHECK(min_test_row >= r.test.begin);
    }
    SUBCASE("stride") {
        const Dataset d = ramp_dataset(1, 20);
        CHECK(make_windows(d, WindowSpec(4, 2, 3), {0, 20}, false).size() == 5);
    }
    SUBCASE("count formula matches direct enumeration") {
        SplitMix64 rng(91);
        for (int rep = 0; rep < 30; ++rep) {
            const int t = 20 + (int)(rng.next() % 100);
            const int lookback = 1 + (int)(rng.next() % 8);
            const int horizon = 1 + (int)(rng.next() % 8);
            const int stride = 1 + (int)(rng.next() % 4);
            if (lookback + horizon > t) continue;
            const Dataset d = ramp_dataset(1, t);
            const WindowView view =
                make_windows(d, WindowSpec(lookback, horizon, stride), {0, t}, false);
            std::size_t by_hand = 0;
            for (long long start = 0; start + lookback + horizon <= t; start += stride)
                ++by_hand;
            CHECK(view.size() == by_hand);
            // every sample is reachable and starts where the formula says
            for (std::size_t w = 0; w < view.size(); ++w)
                CHECK(view.get(w).position == (long long)w * stride);
        }
    }
    SUBCASE("window larger than the split") {
        const Dataset d = ramp_dataset(1, 10);
        CHECK_THROWS_AS(make_windows(d, WindowSpec(8, 4), {0, 10}, false), ValidationError);
    }
    SUBCASE("deterministic access") {
        const Dataset d = ramp_dataset(2, 30);
        const WindowView view = make_windows(d, WindowSpec(5, 2), {0, 30}, true);
        const WindowPair a = view.get(3);
        const WindowPair b = view.get(3);
        CHECK(a.position == b.position);
        CHECK(a.x.values().size() == b.x.values().size());
        for (std::size_t i = 0; i < a.x.values().size(); ++i)
            CHECK(a.x.values()[i] == b.x.values()[i]);
    }
}

TEST_CASE("denormalization") {
    const Dataset d = ramp_dataset(1, 30);
    const WindowView view = make_windows(d, WindowSpec(6, 3), {0, 30}, false);
    const WindowPair pair = view.get(4);
    SUBCASE("inverse of the window transform") {
        const std::vector<double> x(pair.x.values().begin(), pair.x.values().end());
        const std::vector<double> raw = denormalize(x, pair, 0);
        for (int k = 0; k < 6; ++k)
            CHECK(raw[k] == doctest::Approx(d.series.at(0, (int)pair.position + k)).epsilon(1e-9));
    }
    SUBCASE("zeros map to the mean, units to mean plus std") {
        const std::vector<double> zeros(3, 0.0);
        const std::vector<double> ones(3, 1.0);
        CHECK(denormalize(zeros, pair, 0)[0] == doctest::Approx(pair.norm_mean[0]));
        CHECK(denormalize(ones, pair, 0)[0] ==
              doctest::Approx(pair.norm_mean[0] + pair.norm_std[0]));
    }
    SUBCASE("channel bounds") {
        const std::vector<double> v(3, 0.0);
        CHECK_THROWS_AS(denormalize(v, pair, 2), ValidationError);
    }
}

TEST_CASE("synthetic sine generator") {
    const Dataset d = synthetic_sine(500, 2, 96.0, 0.1, 7, false);
    CHECK(d.series.channels() == 2);
    CHECK(d.series.steps() == 500);
    const Dataset d2 = synthetic_sine(500, 2, 96.0, 0.1, 7, false);
    for (int k = 0; k < 500; ++k) CHECK(d.series.at(0, k) == d2.series.at(0, k));
    // amplitude sanity: values stay within sine range plus noise slack
    for (int k = 0; k < 500; ++k) CHECK(std::fabs(d.series.at(0, k)) < 2.0);
}

TEST_CASE("window debug export") {
    const Dataset d = ramp_dataset(1, 12);
    const WindowView view = make_windows(d, WindowSpec(3, 1), {0, 12}, false);
    std::ostringstream os;
    export_windows_csv(os, view);
    const std::string text = os.str();
    CHECK(text.rfind("window_id,channel,role,step,value\n", 0) == 0);
    // 9 windows x (3 x-rows + 1 y-row) + header
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    CHECK(lines == 1 + view.size() * 4);
    CHECK(text.find(",x,") != std::string::npos);
    CHECK(text.find(",y,") != std::string::npos);
}
