#include "wavesim/wave_core.hpp"

#include <cmath>

#include "wavesim/errors.hpp"

namespace wavesim {

namespace {

bool finite(complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace

void check_reference(double r) {
    if (!std::isfinite(r) || r <= 0.0)
        throw validation_error("reference resistance must be finite and > 0, got " +
                               std::to_string(r));
}

wave_pair vi_to_waves(const port_vi& pe, double r) {
    check_reference(r);
    if (!finite(pe.v) || !finite(pe.i))
        throw validation_error("port voltage/current must be finite");
    const double s = 2.0 * std::sqrt(r);
    return {(pe.v + r * pe.i) / s, (pe.v - r * pe.i) / s};
}

port_vi waves_to_vi(const wave_pair& w, double r) {
    check_reference(r);
    if (!finite(w.a) || !finite(w.b))
        throw validation_error("wave amplitudes must be finite");
    const double sr = std::sqrt(r);
    return {sr * (w.a + w.b), (w.a - w.b) / sr};
}

complex thevenin_source(complex b, double r) {
    check_reference(r);
    if (!finite(b))
        throw validation_error("wave amplitude must be finite");
    return 2.0 * std::sqrt(r) * b;
}

complex reflection_coefficient(complex z_load, double r) {
    check_reference(r);
    if (z_load + r == 0.0)
        throw validation_error("reflection coefficient undefined for z_load = -r");
    return (z_load - r) / (z_load + r);
}

double port_power(const wave_pair& w) {
    return std::norm(w.a) - std::norm(w.b);
}

} // namespace wavesim
