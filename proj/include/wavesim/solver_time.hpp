#pragma once

#include <string>
#include <vector>

#include "wavesim/circuit.hpp"

namespace wavesim {

// Whole timesteps representing a group delay; 0 only when tau is 0. Appends a
// warning when rounding misstates the delay by more than 1%.
long quantize_delay(double tau, double dt, std::vector<std::string>* warnings,
                    const std::string& what);

struct transient_result {
    std::vector<double> time;
    std::vector<std::string> drive_names;          // "<instance>.v"
    std::vector<std::vector<double>> drives;       // [drive][row]
    std::vector<std::string> monitor_names;
    std::vector<std::vector<double>> mon_fwd;      // [monitor][row], W
    std::vector<std::vector<double>> mon_bwd;
    std::vector<std::string> pd_names;
    std::vector<std::vector<double>> pd_currents;  // [pd][row], A
    std::vector<std::string> warnings;
};

// Baseband envelope propagation at the carrier wavelength. Waveguides with
// nonzero length become pure group delays; everything else scatters within
// the step. Rows cover t = 0, dt, ..., round(tstop/dt)*dt inclusive.
transient_result run_transient(const circuit& c, double tstop, double dt, double carrier);
transient_result run_transient(const circuit& c, double tstop, double dt);

std::string transient_csv(const transient_result& r);

} // namespace wavesim
