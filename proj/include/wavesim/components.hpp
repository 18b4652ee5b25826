#pragma once

#include <string>

#include "wavesim/sparam.hpp"

namespace wavesim {

// Continuous-wave source. The isolator makes the optical port absorbing;
// running without one is not modeled.
struct laser_model {
    double power = 1e-3;
    double wavelength0 = 1.55e-6;
    double phase = 0.0;
    bool isolator = true;

    void check() const;
};

// Wave launched by the laser, sqrt(W).
complex laser_emission(const laser_model& m);

struct pd_model {
    double responsivity = 1.0;
    double bandwidth_hz = 0.0; // 0 disables the single-pole output filter

    void check() const;
};

// Instantaneous photocurrent from the incident wave.
double pd_read(const pd_model& m, complex a);

struct thermal_ps_model {
    double p_pi = 0.05;
    double r_heater = 100.0;
    double insertion_loss_db = 0.0;
    double crosstalk_chi = 0.0;
    std::string neighbor; // heater whose dissipation leaks in, scaled by chi

    void check() const;
};

// phi = pi (P_self + chi P_neighbor) / P_pi, P = V^2 / R
double thermal_phase(const thermal_ps_model& m, double v_self, double v_neighbor);

struct pn_ps_model {
    double v_pi = 4.8;
    double length = 800e-6;
    double insertion_loss_db = 0.0;

    void check() const;
};

// phi = pi v / v_pi
double depletion_phase(const pn_ps_model& m, double v);

// Phase-only 2-port: s21 = s12 = g e^{-i phi}, no reflections.
smatrix phase_shifter_smatrix(double phase, double insertion_loss_db);

struct term_model {
    double reflectivity = 0.0; // field magnitude
    double phase = 0.0;        // field angle, radians

    void check() const;
};

smatrix terminator_smatrix(const term_model& m);

struct monitor_model {};

// Exact [[0,1],[1,0]]: inserting a monitor never perturbs a solution.
smatrix monitor_smatrix();

struct monitor_reading {
    double p_fwd = 0.0;
    double p_bwd = 0.0;
    double phase_fwd = 0.0;
    double phase_bwd = 0.0;
};

// a_fwd: wave arriving at the monitor from its first-declared side,
// a_bwd: from the second. Phases report 0 for zero amplitude.
monitor_reading monitor_read(complex a_fwd, complex a_bwd);

} // namespace wavesim
