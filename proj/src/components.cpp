#include "wavesim/components.hpp"

#include <cmath>
#include <numbers>

#include "wavesim/errors.hpp"

namespace wavesim {

void laser_model::check() const {
    if (!(power >= 0.0))
        throw validation_error("laser power must be >= 0");
    if (!(wavelength0 > 0.0))
        throw validation_error("laser wavelength must be > 0");
    if (!isolator)
        throw validation_error(
            "unsupported configuration: a laser without an isolator is not modeled");
}

complex laser_emission(const laser_model& m) {
    m.check();
    return std::sqrt(m.power) * std::exp(complex(0.0, m.phase));
}

void pd_model::check() const {
    if (!(responsivity >= 0.0))
        throw validation_error("photodetector responsivity must be >= 0");
    if (!(bandwidth_hz >= 0.0))
        throw validation_error("photodetector bandwidth must be >= 0");
}

double pd_read(const pd_model& m, complex a) {
    return m.responsivity * std::norm(a);
}

void thermal_ps_model::check() const {
    if (!(p_pi > 0.0))
        throw validation_error("thermal shifter p_pi must be > 0");
    if (!(r_heater > 0.0))
        throw validation_error("thermal shifter heater resistance must be > 0");
    if (!(crosstalk_chi >= 0.0 && crosstalk_chi < 1.0))
        throw validation_error("thermal crosstalk chi must lie in [0, 1)");
    if (!(insertion_loss_db >= 0.0))
        throw validation_error("insertion loss must be >= 0 dB");
}

double thermal_phase(const thermal_ps_model& m, double v_self, double v_neighbor) {
    double p_self = v_self * v_self / m.r_heater;
    double p_neighbor = v_neighbor * v_neighbor / m.r_heater;
    return std::numbers::pi * (p_self + m.crosstalk_chi * p_neighbor) / m.p_pi;
}

void pn_ps_model::check() const {
    if (!(v_pi > 0.0))
        throw validation_error("depletion shifter v_pi must be > 0");
    if (!(length >= 0.0))
        throw validation_error("depletion shifter length must be >= 0");
    if (!(insertion_loss_db >= 0.0))
        throw validation_error("insertion loss must be >= 0 dB");
}

double depletion_phase(const pn_ps_model& m, double v) {
    return std::numbers::pi * v / m.v_pi;
}

smatrix phase_shifter_smatrix(double phase, double insertion_loss_db) {
    double g = std::pow(10.0, -insertion_loss_db / 20.0);
    complex s21 = g * std::exp(complex(0.0, -phase));
    smatrix s(2);
    s(1, 0) = s(0, 1) = s21;
    return s;
}

void term_model::check() const {
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
        throw validation_error("terminator |reflectivity| must lie in [0, 1]");
}

smatrix terminator_smatrix(const term_model& m) {
    smatrix s(1);
    s(0, 0) = m.reflectivity * std::exp(complex(0.0, m.phase));
    return s;
}

smatrix monitor_smatrix() {
    smatrix s(2);
    s(1, 0) = s(0, 1) = 1.0;
    return s;
}

monitor_reading monitor_read(complex a_fwd, complex a_bwd) {
    monitor_reading r;
    r.p_fwd = std::norm(a_fwd);
    r.p_bwd = std::norm(a_bwd);
    r.phase_fwd = a_fwd == complex(0.0, 0.0) ? 0.0 : std::arg(a_fwd);
    r.phase_bwd = a_bwd == complex(0.0, 0.0) ? 0.0 : std::arg(a_bwd);
    return r;
}

} // namespace wavesim
