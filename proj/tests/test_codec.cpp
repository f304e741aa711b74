#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvts/codec.hpp"
#include "mvts/rng.hpp"

using namespace mvts;

TEST_CASE("bin ordinals") {
    SUBCASE("saturation high") { CHECK(bin_index(1.7, CodecParams(10, 1.0)) == 10); }
    SUBCASE("saturation low") { CHECK(bin_index(-3.0, CodecParams(10, 1.0)) == 1); }
    SUBCASE("two bins split at zero") {
        CHECK(bin_index(0.5, CodecParams(2, 1.0)) == 2);
        CHECK(bin_index(-0.5, CodecParams(2, 1.0)) == 1);
    }
    SUBCASE("zero lands in the upper middle bin") {
        CHECK(bin_index(0.0, CodecParams(10, 1.0)) == 6);
    }
    SUBCASE("boundary values go to the upper bin") {
        // 0.5 is the (exactly representable) edge between ordinals 3 and 4
        // for h=4, ms=1
        CHECK(bin_index(0.5, CodecParams(4, 1.0)) == 4);
        CHECK(bin_index(0.4999999999, CodecParams(4, 1.0)) == 3);
        CHECK(bin_index(0.0, CodecParams(4, 1.0)) == 3);
    }
    SUBCASE("exactly +-ms") {
        CHECK(bin_index(1.0, CodecParams(10, 1.0)) == 10);
        CHECK(bin_index(-1.0, CodecParams(10, 1.0)) == 1);
    }
    SUBCASE("monotone in the value") {
        SplitMix64 rng(41);
        const CodecParams p(17, 2.3);
        for (int i = 0; i < 2000; ++i) {
            const double a = 6.0 * (rng.next_unit() - 0.5);
            const double b = 6.0 * (rng.next_unit() - 0.5);
            const double lo = std::min(a, b), hi = std::max(a, b);
            CHECK(bin_index(lo, p) <= bin_index(hi, p));
        }
    }
    SUBCASE("params are validated") {
        CHECK_THROWS_AS(CodecParams(1, 1.0), ValidationError);
        CHECK_THROWS_AS(CodecParams(10, 0.0), ValidationError);
        CHECK_THROWS_AS(CodecParams(10, -2.0), ValidationError);
    }
}

TEST_CASE("bin midpoints") {
    SUBCASE("spec'd values") {
        CHECK(bin_midpoint(2, CodecParams(2, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bin_midpoint(6, CodecParams(10, 1.0)) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(bin_midpoint(1, CodecParams(10, 1.0)) == doctest::Approx(-0.9).epsilon(1e-12));
    }
    SUBCASE("outer bins are exactly +-(ms - ms/h)") {
        for (const auto& [h, ms] : {std::pair<int, double>{10, 1.0}, {200, 2.79}, {7, 0.3}}) {
            const CodecParams p(h, ms);
            CHECK(bin_midpoint(h, p) == ms - ms / h);
            CHECK(bin_midpoint(1, p) == -(ms - ms / h));
        }
    }
    SUBCASE("midpoints are symmetric bit-for-bit") {
        const CodecParams p(31, 2.79);
        for (int j = 1; j <= 31; ++j)
            CHECK(bin_midpoint(j, p) == -bin_midpoint(31 + 1 - j, p));
    }
    SUBCASE("ordinal out of range") {
        CHECK_THROWS_AS(bin_midpoint(0, CodecParams(4, 1.0)), ValidationError);
        CHECK_THROWS_AS(bin_midpoint(5, CodecParams(4, 1.0)), ValidationError);
    }
}

TEST_CASE("encode") {
    SUBCASE("constant zero series") {
        NumericSeries s(1, 3);
        const BinaryVisionTensor v = encode(s, CodecParams(10, 1.0));
        for (int k = 0; k < 3; ++k) CHECK(v.column_bin(0, k) == 5);  // ordinal 6
        v.validate();
    }
    SUBCASE("two-bin case") {
        NumericSeries s(1, 4);
        s.at(0, 0) = -5.0;
        s.at(0, 1) = -0.1;
        s.at(0, 2) = 0.1;
        s.at(0, 3) = 5.0;
        const BinaryVisionTensor v = encode(s, CodecParams(2, 1.0));
        CHECK(v.column_bin(0, 0) == 0);
        CHECK(v.column_bin(0, 1) == 0);
        CHECK(v.column_bin(0, 2) == 1);
        CHECK(v.column_bin(0, 3) == 1);
    }
    SUBCASE("huge value saturates at the top bin") {
        NumericSeries s(1, 1);
        s.at(0, 0) = 1e6;
        const BinaryVisionTensor v = encode(s, CodecParams(200, 2.79));
        CHECK(v.column_bin(0, 0) == 199);  // ordinal 200
    }
    SUBCASE("rejects non-finite values") {
        NumericSeries s(1, 2);
        s.at(0, 1) = std::nan("");
        CHECK_THROWS_AS(encode(s, CodecParams(10, 1.0)), ValidationError);
    }
}

TEST_CASE("decode") {
    SUBCASE("rejects one-hot violations") {
        BinaryVisionTensor v(1, 4, 2);
        v.set_column(0, 0, 1);
        // column (0,1) left empty
        CHECK_THROWS_AS(decode(v, CodecParams(4, 1.0)), ValidationError);
        v.set_column(0, 1, 2);
        v.data()[0] = 1;  // second bit in column (0,0)
        CHECK_THROWS_AS(decode(v, CodecParams(4, 1.0)), ValidationError);
    }
    SUBCASE("rejects bin-count mismatch") {
        BinaryVisionTensor v(1, 4, 1);
        v.set_column(0, 0, 1);
        CHECK_THROWS_AS(decode(v, CodecParams(5, 1.0)), ValidationError);
    }
}

TEST_CASE("roundtrip properties") {
    SplitMix64 rng(2024);
    const CodecParams grids[] = {CodecParams(10, 1.0), CodecParams(200, 2.79),
                                 CodecParams(2, 0.5), CodecParams(64, 4.0)};
    for (const CodecParams& p : grids) {
        for (int rep = 0; rep < 1000; ++rep) {
            const double s = 3.0 * rng.next_normal();
            NumericSeries in(1, 1);
            in.at(0, 0) = s;
            const BinaryVisionTensor v = encode(in, p);
            v.validate();  // one-hot law
            const double out = decode(v, p).at(0, 0);
            if (s >= p.ms) {
                CHECK(out == p.ms - p.ms / p.h);
            } else if (s <= -p.ms) {
                CHECK(out == -(p.ms - p.ms / p.h));
            } else {
                CHECK(std::fabs(out - s) <= p.ms / p.h);
            }
            // quantization is a projection: decoding again is a fixed point
            NumericSeries again(1, 1);
            again.at(0, 0) = out;
            CHECK(decode(encode(again, p), p).at(0, 0) == out);
        }
    }
}

TEST_CASE("harden") {
    SUBCASE("unique argmax") {
        SoftVisionTensor s(1, 3, 1);
        s.prob(0, 0, 0) = 0.1;
        s.prob(0, 1, 0) = 0.7;
        s.prob(0, 2, 0) = 0.2;
        CHECK(harden(s).column_bin(0, 0) == 1);
    }
    SUBCASE("ties break to the lowest ordinal") {
        SoftVisionTensor s(1, 2, 1);
        s.prob(0, 0, 0) = 0.5;
        s.prob(0, 1, 0) = 0.5;
        CHECK(harden(s).column_bin(0, 0) == 0);
    }
    SUBCASE("idempotent on hard columns") {
        SplitMix64 rng(7);
        NumericSeries in(2, 5);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 5; ++k) in.at(i, k) = rng.next_normal();
        const BinaryVisionTensor v = encode(in, CodecParams(8, 2.0));
        CHECK(harden(to_soft(v)) == v);
    }
    SUBCASE("rejects invalid distributions") {
        SoftVisionTensor s(1, 2, 1);
        s.prob(0, 0, 0) = 0.9;  // column sums to 0.9
        CHECK_THROWS_AS(harden(s), ValidationError);
    }
}

TEST_CASE("tensor file format") {
    SUBCASE("roundtrip") {
        SplitMix64 rng(11);
        NumericSeries in(3, 17);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 17; ++k) in.at(i, k) = rng.next_normal();
        const BinaryVisionTensor v = encode(in, CodecParams(12, 2.5));
        CHECK(deserialize(serialize(v)) == v);
    }
    SUBCASE("header arithmetic") {
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);  // column (1, 0)
        const auto bytes = serialize(v);
        CHECK(bytes.size() == kTensorFileHeaderSize + 2);
        CHECK(bytes[0] == 'M');
        CHECK(bytes[1] == 'V');
        CHECK(bytes[2] == 'T');
        CHECK(bytes[3] == 'S');
        CHECK(bytes[4] == 1);   // version lo
        CHECK(bytes[5] == 0);
        CHECK(bytes[6] == 0);   // flags
        CHECK(bytes[7] == 0);
        CHECK(bytes[kTensorFileHeaderSize] == 1);
        CHECK(bytes[kTensorFileHeaderSize + 1] == 0);
    }
    SUBCASE("corrupted magic") {
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);
        auto bytes = serialize(v);
        bytes[0] = 'X';
        CHECK_THROWS_AS(deserialize(bytes), ValidationError);
    }
    SUBCASE("truncated payload") {
        BinaryVisionTensor v(1, 2, 3);
        for (int k = 0; k < 3; ++k) v.set_column(0, k, 1);
        auto bytes = serialize(v);
        bytes.pop_back();
        CHECK_THROWS_AS(deserialize(bytes), ValidationError);
    }
    SUBCASE("payload values outside {0,1}") {
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);
        auto bytes = serialize(v);
        bytes[kTensorFileHeaderSize] = 2;
        CHECK_THROWS_AS(deserialize(bytes), ValidationError);
    }
    SUBCASE("one-hot violation in payload") {
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);
        auto bytes = serialize(v);
        bytes[kTensorFileHeaderSize + 1] = 1;  // both bits set
        CHECK_THROWS_AS(deserialize(bytes), ValidationError);
    }
    SUBCASE("nonzero flags are rejected") {
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);
        auto bytes = serialize(v);
        bytes[6] = 1;
        CHECK_THROWS_AS(deserialize(bytes), ValidationError);
    }
}

TEST_CASE("bitmap rendering") {
    SUBCASE("orientation: top bin prints first") {
        BinaryVisionTensor v(1, 2, 2);
        v.set_column(0, 0, 0);  // ordinal 1
        v.set_column(0, 1, 1);  // ordinal 2
        CHECK(render_pbm(v, 0) == "P1\n2 2\n0 1\n1 0\n");
    }
    SUBCASE("saturated-high tensor puts ones in the top row") {
        NumericSeries s(1, 4);
        for (int k = 0; k < 4; ++k) s.at(0, k) = 99.0;
        const BinaryVisionTensor v = encode(s, CodecParams(3, 1.0));
        const std::string pbm = render_pbm(v, 0);
        CHECK(pbm.substr(0, 9) == "P1\n4 3\n1 ");
        CHECK(pbm.find("1 1 1 1\n") == 7);
    }
    SUBCASE("degenerate and out-of-range inputs") {
        CHECK_THROWS_AS(render_pbm(BinaryVisionTensor(1, 4, 0), 0), ValidationError);
        BinaryVisionTensor v(1, 2, 1);
        v.set_column(0, 0, 0);
        CHECK_THROWS_AS(render_pbm(v, 1), ValidationError);
    }
}
