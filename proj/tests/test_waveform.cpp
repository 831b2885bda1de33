#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stripesim/sensor.hpp"
#include "stripesim/waveform.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace stripesim;

namespace {

ChannelWaveform channel(double f, double duty, double phase = 0.0, double peak = 100.0,
                        double ambient = 0.0) {
    return ChannelWaveform{f, duty, phase, peak, ambient};
}

double quad_integrate(const ChannelWaveform& ch, double a, double t_exposure) {
    double feature = ch.duty_cycle <= 0.0 || ch.duty_cycle >= 1.0
                         ? ch.period_s()
                         : std::min(ch.on_duration_s(), ch.period_s() - ch.on_duration_s());
    return test_util::piecewise_quadrature([&](double t) { return intensity_at(ch, t); }, a,
                                           a + t_exposure, feature);
}

}  // namespace

TEST_CASE("intensity_at follows the two-branch ON/OFF form") {
    ChannelWaveform ch = channel(100.0, 0.5);
    CHECK(intensity_at(ch, 0.001) == 100.0);  // inside the ON half of the 10 ms period
    CHECK(intensity_at(ch, 0.009) == 0.0);    // inside the OFF half
    CHECK(intensity_at(ch, 0.0) == 0.0);      // boundary point is OFF
    CHECK(intensity_at(ch, 0.005) == 100.0);  // t mod t_l == t_on is still ON

    ChannelWaveform always_on = channel(100.0, 1.0, 0.0, 100.0, 20.0);
    for (double t : {0.0, 0.001, 0.005, 0.01, 12.34}) CHECK(intensity_at(always_on, t) == 120.0);
}

TEST_CASE("intensity_at honors ambient light and phase") {
    ChannelWaveform ch = channel(200.0, 0.25, 0.001, 80.0, 5.0);
    CHECK(intensity_at(ch, 0.0015) == 85.0);
    CHECK(intensity_at(ch, 0.004) == 5.0);
    // Shifting by the phase realigns with the unshifted wave.
    ChannelWaveform base = channel(200.0, 0.25, 0.0, 80.0, 5.0);
    for (double t : {0.0003, 0.0011, 0.0042, 0.0049}) {
        CHECK(intensity_at(ch, t + 0.001) == intensity_at(base, t));
    }
}

TEST_CASE("intensity_at is periodic") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        ChannelWaveform ch = channel(test_util::uniform(rng, 50.0, 1200.0),
                                     test_util::uniform(rng, 0.0, 1.0),
                                     test_util::uniform(rng, -0.01, 0.01));
        double t = test_util::uniform(rng, -0.1, 0.1);
        CHECK(intensity_at(ch, t) == intensity_at(ch, t + ch.period_s()));
    }
}

TEST_CASE("integrate: constant-duty extremes are exact") {
    ChannelWaveform on = channel(344.89, 1.0, 0.0, 100.0, 7.0);
    CHECK(integrate(on, 0.123, 0.005) == 107.0 * 0.005);
    ChannelWaveform off = channel(344.89, 0.0, 0.0, 100.0, 7.0);
    CHECK(integrate(off, 0.123, 0.005) == 7.0 * 0.005);
}

TEST_CASE("integrate over whole cycles matches k*(Ip*t_on + Ie*t_l)") {
    ChannelWaveform ch = channel(344.89, 0.3865);
    double t_l = ch.period_s();
    double direct = integrate(ch, 0.0, 3.0 * t_l);
    CHECK(direct == doctest::Approx(0.336194148859).epsilon(1e-9));
    double quad = quad_integrate(ch, 0.0, 3.0 * t_l);
    CHECK(direct == doctest::Approx(quad).epsilon(1e-9));
}

TEST_CASE("integrate matches adaptive quadrature over randomized draws") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        ChannelWaveform ch = channel(test_util::uniform(rng, 100.0, 1000.0),
                                     test_util::uniform(rng, 0.02, 0.98),
                                     test_util::uniform(rng, -0.02, 0.02), 100.0,
                                     test_util::uniform(rng, 0.0, 140.0));
        double t_start = test_util::uniform(rng, -0.05, 0.05);
        double t_exposure = test_util::uniform(rng, 1.0 / 500.0, 1.0 / 100.0);
        double closed = integrate(ch, t_start, t_exposure);
        double quad = quad_integrate(ch, t_start, t_exposure);
        REQUIRE(closed == doctest::Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("integrate is additive over subintervals") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        ChannelWaveform ch = channel(test_util::uniform(rng, 100.0, 1000.0),
                                     test_util::uniform(rng, 0.0, 1.0),
                                     test_util::uniform(rng, -0.01, 0.01), 100.0,
                                     test_util::uniform(rng, 0.0, 50.0));
        double t0 = test_util::uniform(rng, -0.02, 0.02);
        double a = test_util::uniform(rng, 1e-4, 5e-3);
        double b = test_util::uniform(rng, 1e-4, 5e-3);
        double whole = integrate(ch, t0, a + b);
        double split = integrate(ch, t0, a) + integrate(ch, t0 + a, b);
        REQUIRE(whole == doctest::Approx(split).epsilon(1e-12));
    }
}

TEST_CASE("integrate is nondecreasing in the duty cycle") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        double f = test_util::uniform(rng, 100.0, 1000.0);
        double phase = test_util::uniform(rng, -0.01, 0.01);
        double t0 = test_util::uniform(rng, -0.02, 0.02);
        double t_e = test_util::uniform(rng, 1e-3, 8e-3);
        double d1 = test_util::uniform(rng, 0.0, 1.0);
        double d2 = test_util::uniform(rng, 0.0, 1.0);
        if (d1 > d2) std::swap(d1, d2);
        double lo = integrate(channel(f, d1, phase), t0, t_e);
        double hi = integrate(channel(f, d2, phase), t0, t_e);
        REQUIRE(lo <= hi + 1e-12);
    }
}

TEST_CASE("integrate stays within the physical bounds") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        ChannelWaveform ch = channel(test_util::uniform(rng, 100.0, 1000.0),
                                     test_util::uniform(rng, 0.0, 1.0),
                                     test_util::uniform(rng, -0.01, 0.01), 100.0,
                                     test_util::uniform(rng, 0.0, 140.0));
        double t_e = test_util::uniform(rng, 1e-4, 1e-2);
        double v = integrate(ch, test_util::uniform(rng, -0.1, 0.1), t_e);
        REQUIRE(v >= ch.ambient_intensity * t_e - 1e-12);
        REQUIRE(v <= (ch.peak_intensity + ch.ambient_intensity) * t_e + 1e-12);
    }
}

TEST_CASE("predicted stripe widths: vanishing bright width at r == t_on") {
    // t_e = 2.5 periods with duty 0.5 makes the exposure remainder equal t_on.
    SensorConfig sensor;
    sensor.exposure_s = 2.5 / 400.0;
    ChannelWaveform ch = channel(400.0, 0.5);
    StripeWidths w = predicted_stripe_widths(ch, sensor);
    CHECK(w.bright_px == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("predicted stripe widths: published monochromatic parameters") {
    SensorConfig sensor;  // defaults: t_e = 1/200, t_s = 1/75000
    StripeWidths w = predicted_stripe_widths(channel(344.89, 0.3865), sensor);
    CHECK(w.bright_px == doctest::Approx(73.490823161).epsilon(1e-9));
    CHECK(w.dark_px == doctest::Approx(24.1272579663).epsilon(1e-9));
}

TEST_CASE("predicted stripe widths: published color parameters per channel") {
    SensorConfig sensor;
    StripeWidths r = predicted_stripe_widths(channel(445.95, 0.2136), sensor);
    CHECK(r.bright_px == doctest::Approx(2.71611167171).epsilon(1e-9));
    CHECK(r.dark_px == doctest::Approx(93.6175580222).epsilon(1e-9));
    StripeWidths g = predicted_stripe_widths(channel(232.30, 0.2136), sensor);
    CHECK(g.bright_px == doctest::Approx(16.8209212226).epsilon(1e-9));
    CHECK(g.dark_px == doctest::Approx(201.754197159).epsilon(1e-9));
    StripeWidths b = predicted_stripe_widths(channel(219.90, 0.2136), sensor);
    CHECK(b.bright_px == doctest::Approx(38.9154160982).epsilon(1e-9));
    CHECK(b.dark_px == doctest::Approx(234.276944065).epsilon(1e-9));
}

TEST_CASE("perceived color: half-duty channel averages to half peak") {
    LedWaveform w = make_monochromatic(100.0, 0.5);
    Rgb c = perceived_color(w, 1.0);
    CHECK(c.r == doctest::Approx(50.0).epsilon(0.005));
    // Against the quadrature oracle.
    double quad = quad_integrate(w.red, 0.0, 1.0) / 1.0;
    CHECK(c.r == doctest::Approx(quad).epsilon(1e-9));
}

TEST_CASE("perceived color: equal channel parameters give a neutral average") {
    LedWaveform w = make_color(445.95, 232.30, 219.90, 0.2136, 0.2257, 0.7353);
    Rgb c = perceived_color(w, 600.0 * w.max_period_s());
    CHECK(c.r == doctest::Approx(c.g).epsilon(0.005));
    CHECK(c.g == doctest::Approx(c.b).epsilon(0.005));
}

TEST_CASE("perceived color: duty cycle 1 is exactly the peak") {
    LedWaveform w = make_monochromatic(250.0, 1.0, 100.0, 11.0);
    Rgb c = perceived_color(w, 1.0);
    CHECK(c.r == 111.0);
    CHECK(c.g == 111.0);
    CHECK(c.b == 111.0);
}

TEST_CASE("perceived color rejects too-short windows") {
    LedWaveform w = make_monochromatic(100.0, 0.5);
    CHECK_THROWS_AS(perceived_color(w, 0.5), std::invalid_argument);
    CHECK_NOTHROW(perceived_color(w, 1.0));
}

TEST_CASE("perceived color is flicker-invariant at fixed duty cycle") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        double duty = test_util::uniform(rng, 0.1, 0.9);
        double f1 = test_util::uniform(rng, 100.0, 1000.0);
        double f2 = test_util::uniform(rng, 100.0, 1000.0);
        LedWaveform a = make_color(f1, test_util::uniform(rng, 100.0, 1000.0),
                                   test_util::uniform(rng, 100.0, 1000.0), duty,
                                   test_util::uniform(rng, 0.0, 0.999),
                                   test_util::uniform(rng, 0.0, 0.999));
        LedWaveform b = make_color(f2, test_util::uniform(rng, 100.0, 1000.0),
                                   test_util::uniform(rng, 100.0, 1000.0), duty,
                                   test_util::uniform(rng, 0.0, 0.999),
                                   test_util::uniform(rng, 0.0, 0.999));
        double window = 500.0 * std::max(a.max_period_s(), b.max_period_s());
        Rgb ca = perceived_color(a, window);
        Rgb cb = perceived_color(b, window);
        REQUIRE(std::abs(ca.r - cb.r) / cb.r < 0.005);
        REQUIRE(std::abs(ca.g - cb.g) / cb.g < 0.005);
        REQUIRE(std::abs(ca.b - cb.b) / cb.b < 0.005);
    }
}

TEST_CASE("waveform constructors enforce the parameter model") {
    CHECK_THROWS_AS(make_monochromatic(-5.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_monochromatic(100.0, 1.5), std::invalid_argument);
    LedWaveform color = make_color(445.95, 232.3, 219.9, 0.2136, 0.2257, 0.7353);
    CHECK(color.red.phase_s == 0.0);
    CHECK(color.green.phase_s == doctest::Approx(0.2257 / 445.95));
    LedWaveform broken = color;
    broken.green.duty_cycle = 0.9;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("ambient ratio scales each channel's ambient from its peak") {
    LedWaveform w = with_ambient_ratio(make_monochromatic(344.89, 0.3865, 80.0), 0.5);
    CHECK(w.red.ambient_intensity == 40.0);
    CHECK(w.blue.ambient_intensity == 40.0);
}
