#include "scopf/phasor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "scopf/errors.hpp"

namespace scopf::phasor {

double normalize_angle(double radians) {
    double wrapped = std::remainder(radians, 2.0 * std::numbers::pi);
    if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
    return wrapped;
}

Phasor Phasor::from_complex(Complex z) {
    const double mag = std::abs(z);
    return {mag, mag == 0.0 ? 0.0 : normalize_angle(std::arg(z))};
}

Phasor transform(double amplitude_rms, double phase) {
    if (amplitude_rms < 0.0) return {-amplitude_rms, normalize_angle(phase + std::numbers::pi)};
    return {amplitude_rms, normalize_angle(phase)};
}

double inverse_transform(const Phasor& p, double omega, double t) {
    return std::sqrt(2.0) * p.magnitude * std::cos(omega * t + p.phase);
}

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw InvalidElement(std::string(what) + " must be positive and finite, got " + std::to_string(value));
}

}  // namespace

Complex admittance(const ElementKind& kind, double omega) {
    require_positive(omega, "angular frequency");
    return std::visit(
        [omega](const auto& e) -> Complex {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Resistor>) {
                require_positive(e.ohms, "resistance");
                return {1.0 / e.ohms, 0.0};
            } else if constexpr (std::is_same_v<T, Inductor>) {
                require_positive(e.henries, "inductance");
                return {0.0, -1.0 / (omega * e.henries)};
            } else {
                require_positive(e.farads, "capacitance");
                return {0.0, omega * e.farads};
            }
        },
        kind);
}

Complex complex_power(Complex v, Complex i) { return v * std::conj(i); }

PowerComponents instantaneous_power_components(double v_rms, double i_rms, double alpha, double beta) {
    const double vi = v_rms * i_rms;
    return {vi * std::cos(alpha - beta), vi * std::sin(alpha - beta)};
}

double instantaneous_power(double v_rms, double i_rms, double alpha, double beta, double omega, double t) {
    // time shifted so the voltage waveform has zero phase
    const double tau = t + alpha / omega;
    const auto [p, q] = instantaneous_power_components(v_rms, i_rms, alpha, beta);
    return p * (1.0 + std::cos(2.0 * omega * tau)) + q * std::cos(2.0 * omega * tau + std::numbers::pi / 2.0);
}

}  // namespace scopf::phasor
