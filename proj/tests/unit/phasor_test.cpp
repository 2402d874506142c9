#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "scopf/errors.hpp"
#include "scopf/phasor.hpp"

using namespace scopf::phasor;
using std::numbers::pi;

TEST(Phasor, AdmittanceOfEachElement) {
    const Complex yr = admittance(Resistor{2.5}, 1.0);
    EXPECT_DOUBLE_EQ(yr.real(), 0.4);
    EXPECT_DOUBLE_EQ(yr.imag(), 0.0);

    const Complex yl = admittance(Inductor{1.3333}, 1.0);
    EXPECT_EQ(yl.real(), 0.0);
    EXPECT_NEAR(yl.imag(), -0.75, 5e-5);  // four significant digits

    const Complex yc = admittance(Capacitor{0.75}, 1.0);
    EXPECT_EQ(yc.real(), 0.0);
    EXPECT_DOUBLE_EQ(yc.imag(), 0.75);
}

TEST(Phasor, NonpositiveParametersAreRejected) {
    EXPECT_THROW(admittance(Resistor{0.0}, 1.0), scopf::InvalidElement);
    EXPECT_THROW(admittance(Inductor{-1.0}, 1.0), scopf::InvalidElement);
    EXPECT_THROW(admittance(Capacitor{0.0}, 1.0), scopf::InvalidElement);
    EXPECT_THROW(admittance(Resistor{1.0}, 0.0), scopf::InvalidElement);
}

TEST(Phasor, ComplexPowerExamples) {
    const Complex s = complex_power(Phasor{1.0, 0.0}.to_complex(), Phasor{0.4, 0.0}.to_complex());
    EXPECT_NEAR(s.real(), 0.4, 1e-15);
    EXPECT_NEAR(s.imag(), 0.0, 1e-15);

    // inductor current lags by pi/2 and absorbs reactive power
    const Complex si = complex_power(Phasor{1.0, 0.0}.to_complex(), Phasor{0.75, -pi / 2}.to_complex());
    EXPECT_NEAR(si.real(), 0.0, 1e-15);
    EXPECT_NEAR(si.imag(), 0.75, 1e-15);

    EXPECT_EQ(complex_power(0.0, Complex(3.0, -7.0)), Complex(0.0, 0.0));
}

TEST(Phasor, InstantaneousComponents) {
    auto c = instantaneous_power_components(1.0, 0.4, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(c.active, 0.4);
    EXPECT_DOUBLE_EQ(c.reactive, 0.0);

    c = instantaneous_power_components(1.0, 1.0, 0.0, pi / 2);
    EXPECT_NEAR(c.active, 0.0, 1e-15);
    EXPECT_NEAR(c.reactive, -1.0, 1e-15);

    c = instantaneous_power_components(1.0, 0.85, 0.2, -0.3);
    const Complex s = complex_power(std::polar(1.0, 0.2), std::polar(0.85, -0.3));
    EXPECT_NEAR(c.active, s.real(), 1e-15);
    EXPECT_NEAR(c.reactive, s.imag(), 1e-15);
}

TEST(Phasor, InstantaneousPowerAveragesToActivePower) {
    const double V = 1.3, I = 0.7, a = 0.4, b = -0.9, w = 2.0;
    const int n = 4000;
    double avg = 0.0;
    for (int k = 0; k < n; ++k) avg += instantaneous_power(V, I, a, b, w, 2 * pi / w * k / n);
    avg /= n;
    EXPECT_NEAR(avg, instantaneous_power_components(V, I, a, b).active, 1e-12);
}

TEST(Phasor, TransformRoundTrip) {
    const Phasor p = transform(2.0, 0.3);
    EXPECT_DOUBLE_EQ(p.magnitude, 2.0);
    EXPECT_NEAR(inverse_transform(p, 1.0, 0.0), std::sqrt(2.0) * 2.0 * std::cos(0.3), 1e-14);
    EXPECT_NEAR(Phasor::from_complex(p.to_complex()).phase, 0.3, 1e-15);
}

TEST(Phasor, AngleNormalization) {
    EXPECT_DOUBLE_EQ(normalize_angle(pi), pi);
    EXPECT_DOUBLE_EQ(normalize_angle(-pi), pi);
    EXPECT_NEAR(normalize_angle(3 * pi / 2), -pi / 2, 1e-15);
    EXPECT_NEAR(normalize_angle(-5.0), -5.0 + 2 * pi, 1e-15);
}

TEST(Phasor, PowerProperties) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.1, 5.0);
    for (int t = 0; t < 200; ++t) {
        const Complex v(u(rng), u(rng)), i(u(rng), u(rng));
        EXPECT_NEAR(std::abs(complex_power(v, i)), std::abs(v) * std::abs(i), 1e-12);
        EXPECT_NEAR(std::abs(complex_power(v, i) - std::conj(complex_power(i, v))), 0.0, 1e-12);

        // balance of currents carries over to powers
        const Complex i1(u(rng), u(rng)), i2(u(rng), u(rng));
        EXPECT_NEAR(std::abs(complex_power(v, i1 + i2) - complex_power(v, i1) - complex_power(v, i2)), 0.0, 1e-12);

        // parallel composition: currents add, so admittances add
        const double w = pos(rng);
        const Complex y = admittance(Resistor{pos(rng)}, w) + admittance(Inductor{pos(rng)}, w) +
                          admittance(Capacitor{pos(rng)}, w);
        const Complex V(u(rng), u(rng));
        EXPECT_NEAR(std::abs(y * V - (y.real() * V + Complex(0, y.imag()) * V)), 0.0, 1e-12);
    }
}
