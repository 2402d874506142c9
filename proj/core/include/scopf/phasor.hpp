#pragma once

// Steady-state AC circuit quantities. All magnitudes are RMS values: the
// sqrt(2) amplitude factor of a waveform sqrt(2)*A*cos(wt + phi) is stripped
// by the phasor transform and never stored.

#include <complex>
#include <variant>

namespace scopf::phasor {

using Complex = std::complex<double>;

/// RMS magnitude and phase in (-pi, pi].
struct Phasor {
    double magnitude = 0.0;
    double phase = 0.0;

    Complex to_complex() const { return std::polar(magnitude, phase); }
    static Phasor from_complex(Complex z);
};

/// Wrap an angle into (-pi, pi].
double normalize_angle(double radians);

/// Phasor of the waveform sqrt(2)*amplitude_rms*cos(omega*t + phase).
Phasor transform(double amplitude_rms, double phase);

/// Instantaneous value of the waveform represented by `p` at time t.
double inverse_transform(const Phasor& p, double omega, double t);

struct Resistor {
    double ohms;
};
struct Inductor {
    double henries;
};
struct Capacitor {
    double farads;
};
using ElementKind = std::variant<Resistor, Inductor, Capacitor>;

/// Complex admittance Y = G + iB in siemens. Throws InvalidElement for a
/// nonpositive element parameter or omega.
Complex admittance(const ElementKind& kind, double omega);

/// s = v * conj(i); real part is active power, imaginary part reactive power.
Complex complex_power(Complex v, Complex i);

struct PowerComponents {
    double active;
    double reactive;
};

/// Active and reactive parts of instantaneous power for v = sqrt(2)V cos(wt+alpha)
/// and i = sqrt(2)I cos(wt+beta).
PowerComponents instantaneous_power_components(double v_rms, double i_rms, double alpha, double beta);

/// Instantaneous power p(t) = v(t) i(t) for the same waveforms.
double instantaneous_power(double v_rms, double i_rms, double alpha, double beta, double omega, double t);

}  // namespace scopf::phasor
