#include <gtest/gtest.h>

#include <cmath>

#include "antibunch/correlate.hpp"
#include "antibunch/rng.hpp"
#include "oracles.hpp"

using namespace antibunch;

namespace {

TimestampStream make_stream(const std::vector<std::vector<std::int64_t>>& channels,
                            std::int64_t duration) {
    TimestampStream s;
    s.meta.duration_ps = duration;
    for (std::size_t ch = 0; ch < channels.size(); ++ch)
        for (std::int64_t t : channels[ch]) s.records.push_back({std::uint8_t(ch), t});
    s.sort_by_time();
    return s;
}

std::vector<std::int64_t> poisson_times(double rate_per_ps, std::int64_t duration,
                                        std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<std::int64_t> out;
    double t = 0;
    for (;;) {
        t += rng.exponential(1.0 / rate_per_ps);
        if (t >= double(duration)) break;
        out.push_back(std::llround(t));
    }
    return out;
}

}  // namespace

TEST(BinIndex, EdgeConvention) {
    // bin b covers [b*w - w/2, b*w + w/2); ties go up
    EXPECT_EQ(bin_index(0, 100), 0);
    EXPECT_EQ(bin_index(49, 100), 0);
    EXPECT_EQ(bin_index(50, 100), 1);  // tie at the upper edge
    EXPECT_EQ(bin_index(-50, 100), 0);
    EXPECT_EQ(bin_index(-51, 100), -1);
    EXPECT_EQ(bin_index(450, 100), 5);
    EXPECT_EQ(bin_index(549, 100), 5);  // 450..549 is the bin centered at 500
}

TEST(Correlate, HandCountableTwoEvents) {
    const auto s = make_stream({{0}, {500}}, 10000);
    CorrelationRequest req{0, 1, 100, 2000, CorrelationMode::all_pairs};
    const auto h = correlate(s, req);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        total += h.raw[i];
        if (h.raw[i] > 0) {
            EXPECT_EQ(h.center_ps(i), 500);
        }
    }
    EXPECT_EQ(total, 1u);

    // start-stop gives the same single count here
    req.mode = CorrelationMode::start_stop;
    const auto h2 = correlate(s, req);
    EXPECT_EQ(h2.raw, h.raw);
}

TEST(Correlate, MatchesQuadraticBruteForce) {
    // criterion: exhaustive pair count on 1e4-event streams
    const std::int64_t duration = 1'000'000;
    const auto a = poisson_times(5e-3, duration, 101);
    const auto b = poisson_times(5e-3, duration, 202);
    ASSERT_GT(a.size() + b.size(), 9000u);
    const auto s = make_stream({a, b}, duration);

    for (auto [start, stop] : {std::pair<int, int>{0, 1}, {0, 0}, {1, 0}}) {
        CorrelationRequest req{std::uint8_t(start), std::uint8_t(stop), 7, 210,
                               CorrelationMode::all_pairs};
        const auto h = correlate(s, req);
        const auto& starts = start == 0 ? a : b;
        const auto& stops = stop == 0 ? a : b;
        const auto ref =
            oracle::brute_force_pairs(starts, stops, 7, h.nbins_half, start == stop);
        ASSERT_EQ(h.raw.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            EXPECT_EQ(h.raw[i], ref[i]) << "bin " << i << " start=" << start;
    }
}

TEST(Correlate, AutocorrelationMirrorsExactly) {
    const std::int64_t duration = 2'000'000;
    const auto a = poisson_times(2e-3, duration, 404);
    const auto s = make_stream({a}, duration);
    const auto h = correlate(s, {0, 0, 11, 330, CorrelationMode::all_pairs});
    for (std::int64_t b = 1; b <= h.nbins_half; ++b)
        EXPECT_EQ(h.raw[std::size_t(h.nbins_half + b)], h.raw[std::size_t(h.nbins_half - b)]);
}

TEST(Correlate, PoissonIsFlatAtOne) {
    const std::int64_t duration = 50'000'000'000;  // 5e10 ps
    const double rate = 1e-5;
    const auto s =
        make_stream({poisson_times(rate, duration, 7), poisson_times(rate, duration, 8)},
                    duration);
    const auto h =
        poisson_normalize(correlate(s, {0, 1, 100, 10000, CorrelationMode::all_pairs}));
    double mean = 0;
    for (double v : h.normalized) mean += v;
    mean /= double(h.size());
    EXPECT_NEAR(mean, 1.0, 0.01);

    // chi2 against exactly flat, Poisson sigma
    double chi2 = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double r = (h.normalized[i] - 1.0) / h.sigma[i];
        chi2 += r * r;
    }
    EXPECT_LT(chi2 / double(h.size()), 1.3);
}

TEST(PoissonNormalize, MethodsFormulaArithmetic) {
    // n_start = n_stop = 1000/s, dt_int = 3600 s, dt_MCA = 1 ns -> 3.6
    CorrelationHistogram h;
    h.bin_width_ps = 1000;
    h.window_ps = 100000;
    h.nbins_half = 100;
    h.raw.assign(201, 4);
    h.start_counts = 3'600'000;
    h.stop_counts = 3'600'000;
    h.integration_ps = std::int64_t(3600) * 1'000'000'000'000;
    EXPECT_NEAR(h.n_start_cps(), 1000.0, 1e-9);
    EXPECT_NEAR(h.n_poisson(), 3.6, 1e-12);

    const auto n = poisson_normalize(h);
    for (double v : n.normalized) EXPECT_NEAR(v, 4.0 / 3.6, 1e-12);

    // raw == N_Poisson in every bin -> normalized == 1
    CorrelationHistogram u = h;
    u.raw.assign(201, 1);
    u.start_counts = 2'500'000;  // 1000/s over 2500 s
    u.stop_counts = 2'500'000;
    u.integration_ps = std::int64_t(2500) * 1'000'000'000'000;
    u.bin_width_ps = 400;  // N_P = 1000*1000*2500*400e-12 = 1
    const auto nu = poisson_normalize(u);
    for (double v : nu.normalized) EXPECT_NEAR(v, 1.0, 1e-12);

    // rate overrides take precedence (detector-counter style)
    CorrelationHistogram o = h;
    o.n_start_override_cps = 500.0;
    EXPECT_NEAR(o.n_poisson(), 1.8, 1e-12);
}

TEST(PoissonNormalize, Errors) {
    CorrelationHistogram h;
    h.bin_width_ps = 100;
    h.nbins_half = 10;
    h.raw.assign(21, 1);
    h.start_counts = 0;  // zero rate
    h.stop_counts = 10;
    h.integration_ps = 1'000'000;
    EXPECT_THROW(poisson_normalize(h), std::runtime_error);

    h.start_counts = 10;
    auto n = poisson_normalize(h);
    EXPECT_THROW(poisson_normalize(n), std::runtime_error);  // double normalization
}

TEST(Correlate, ErrorsNameTheChannel) {
    const auto s = make_stream({{100, 200}, {}}, 1000);
    try {
        correlate(s, {0, 3, 10, 100, CorrelationMode::all_pairs});
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("channel 3"), std::string::npos);
    }

    TimestampStream bad = s;
    std::swap(bad.records.front(), bad.records.back());
    EXPECT_THROW(correlate(bad, {0, 0, 10, 100, CorrelationMode::all_pairs}),
                 std::runtime_error);
}

TEST(Merge, IdentityCommutativityAndSegments) {
    const std::int64_t duration = 20'000'000'000;
    const auto s =
        make_stream({poisson_times(2e-5, duration, 31), poisson_times(3e-5, duration, 32)},
                    duration);
    const CorrelationRequest req{0, 1, 50, 5000, CorrelationMode::all_pairs};
    const auto whole = correlate(s, req);

    // identity element
    const auto ident = merge(whole, empty_like(whole));
    EXPECT_EQ(ident.raw, whole.raw);
    EXPECT_EQ(ident.start_counts, whole.start_counts);
    EXPECT_EQ(ident.integration_ps, whole.integration_ps);

    // split the start axis into 8 segments, correlate each, merge
    const std::int64_t seg = duration / 8;
    CorrelationHistogram acc = correlate(s, req, 0, seg);
    for (int k = 1; k < 8; ++k)
        acc = merge(acc, correlate(s, req, k * seg, (k + 1) * seg));
    EXPECT_EQ(acc.raw, whole.raw);
    EXPECT_EQ(acc.start_counts, whole.start_counts);
    EXPECT_EQ(acc.stop_counts, whole.stop_counts);
    EXPECT_EQ(acc.integration_ps, whole.integration_ps);

    // identical normalized values, bit for bit
    const auto na = poisson_normalize(acc);
    const auto nw = poisson_normalize(whole);
    for (std::size_t i = 0; i < na.size(); ++i) {
        EXPECT_EQ(na.normalized[i], nw.normalized[i]);
        EXPECT_EQ(na.sigma[i], nw.sigma[i]);
    }

    // commutativity, bit-exact
    const auto left = merge(correlate(s, req, 0, seg), correlate(s, req, seg, 2 * seg));
    const auto right = merge(correlate(s, req, seg, 2 * seg), correlate(s, req, 0, seg));
    EXPECT_EQ(left.raw, right.raw);
    EXPECT_EQ(left.start_counts, right.start_counts);
    EXPECT_EQ(left.integration_ps, right.integration_ps);

    // binning mismatch rejected
    auto other = correlate(s, {0, 1, 25, 5000, CorrelationMode::all_pairs});
    EXPECT_THROW(merge(whole, other), std::runtime_error);
}

TEST(Correlate, StartStopConvergesToAllPairsAtLowRate) {
    // rate * tau_max = 0.01
    const double rate = 1e-4;
    const std::int64_t duration = 20'000'000'000;  // 2e6 events/channel
    const auto s =
        make_stream({poisson_times(rate, duration, 55), poisson_times(rate, duration, 56)},
                    duration);
    const CorrelationRequest ap{0, 1, 10, 100, CorrelationMode::all_pairs};
    const CorrelationRequest ss{0, 1, 10, 100, CorrelationMode::start_stop};
    const auto ha = poisson_normalize(correlate(s, ap));
    const auto hs = poisson_normalize(correlate(s, ss));

    // start-stop only populates tau >= 0; compare strictly positive bins
    double mean_diff = 0, max_diff = 0;
    int n = 0;
    for (std::int64_t b = 1; b <= ha.nbins_half; ++b) {
        const std::size_t i = std::size_t(b + ha.nbins_half);
        const double rel = std::abs(hs.normalized[i] / ha.normalized[i] - 1.0);
        mean_diff += rel;
        max_diff = std::max(max_diff, rel);
        ++n;
    }
    mean_diff /= n;
    EXPECT_LT(mean_diff, 0.01);
    EXPECT_LT(max_diff, 0.02);
}

TEST(Correlate, NormalizationScaleCovariance) {
    // doubling the integration time leaves normalized values statistically unchanged
    const double rate = 5e-5;
    const std::int64_t d1 = 10'000'000'000, d2 = 20'000'000'000;
    const auto s1 = make_stream({poisson_times(rate, d1, 71), poisson_times(rate, d1, 72)}, d1);
    const auto s2 = make_stream({poisson_times(rate, d2, 73), poisson_times(rate, d2, 74)}, d2);
    const CorrelationRequest req{0, 1, 100, 5000, CorrelationMode::all_pairs};
    const auto h1 = poisson_normalize(correlate(s1, req));
    const auto h2 = poisson_normalize(correlate(s2, req));
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < h1.size(); ++i) {
        m1 += h1.normalized[i];
        m2 += h2.normalized[i];
    }
    m1 /= double(h1.size());
    m2 /= double(h2.size());
    EXPECT_NEAR(m1, 1.0, 0.02);
    EXPECT_NEAR(m2, 1.0, 0.02);
    EXPECT_NEAR(m1, m2, 0.03);
}

TEST(CorrelationRequest, Validation) {
    EXPECT_THROW((CorrelationRequest{0, 1, 0, 100, CorrelationMode::all_pairs}.validate()),
                 invalid_params);
    EXPECT_THROW((CorrelationRequest{0, 1, 100, 500, CorrelationMode::all_pairs}.validate()),
                 invalid_params);
    EXPECT_NO_THROW((CorrelationRequest{0, 1, 10, 100, CorrelationMode::all_pairs}.validate()));
}
