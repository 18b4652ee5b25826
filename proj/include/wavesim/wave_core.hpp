#pragma once

#include <complex>

namespace wavesim {

using complex = std::complex<double>;

// Incident/reflected power-wave pair at a port, in sqrt(W).
struct wave_pair {
    complex a{0.0, 0.0};
    complex b{0.0, 0.0};
};

// Port voltage/current phasors. Current counts positive flowing into the
// component's port.
struct port_vi {
    complex v{0.0, 0.0};
    complex i{0.0, 0.0};
};

// Throws validation_error unless r is finite and strictly positive.
// Reference resistances are purely real in this model.
void check_reference(double r);

// a = (V + r I) / (2 sqrt(r)),  b = (V - r I) / (2 sqrt(r))
wave_pair vi_to_waves(const port_vi& pe, double r);

// V = sqrt(r) (a + b),  I = (a - b) / sqrt(r)
port_vi waves_to_vi(const wave_pair& w, double r);

// Thevenin equivalent source voltage that launches wave b into a matched
// reference: E = 2 sqrt(r) b, so that V = r I + E.
complex thevenin_source(complex b, double r);

// Power-wave reflection coefficient of impedance z_load against reference r.
complex reflection_coefficient(complex z_load, double r);

// Net power flowing into the port: |a|^2 - |b|^2, in watts.
double port_power(const wave_pair& w);

} // namespace wavesim
