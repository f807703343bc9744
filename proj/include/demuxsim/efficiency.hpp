#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace demuxsim {

// Saturation model of the excited emitter line:
//   I(P) = i0 * eta_f * (1 - exp(-P / p_sat))
struct SaturationParams {
    double i0 = 0.0;     // maximum count rate, counts/s
    double p_sat = 0.0;  // saturation excitation power, nW
    double eta_f = 1.0;  // bandpass filter efficiency, 1.0 with the filter removed
    void validate() const;
};

// Multiplicative efficiency chain from emitter to detector. All entries are
// probabilities in [0, 1].
struct StageEfficiencies {
    double p_e = 0.37;       // preparation: fraction emitted on the selected exciton line
    double eta_b = 0.40;     // bright-state efficiency
    double beta = 0.80;      // waveguide coupling
    double eta_oc = 0.60;    // grating outcoupler
    double t_optics = 0.69;  // collection optics transmittance
    double eta_f = 0.58;     // spectral filter
    double eta_fiber = 0.92; // fiber to the demultiplexer
    double eta_det = 0.88;   // detector efficiency
    void validate() const;
};

// Emitter dynamics knobs for the event simulator.
struct EmitterPhysics {
    double gamma_bright = 1.3;   // bright-state decay rate, 1/ns
    double gamma_dark = 0.2;     // dark-state decay rate, 1/ns
    double p_multi = 0.0;        // probability that an emission carries 2 photons
    double p_blink_off = 0.0;    // stationary occupancy of the blinking off state
    double tau_blink_us = 200.0; // blinking correlation time, us
    void validate() const;
};

struct PowerSeriesPoint {
    double power_nw = 0.0;
    double counts_per_s = 0.0;
    bool filtered = false;
};

double saturation_intensity(double power_nw, const SaturationParams& params);

struct SaturationFit {
    SaturationParams params;
    std::vector<double> residuals;  // data minus model, counts/s, per input point
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;  // false: iteration cap hit, params hold the best iterate
};

// Joint damped least-squares fit of the saturation curve. Filtered and
// unfiltered points share (i0, p_sat); eta_f scales the filtered branch only.
// Throws std::invalid_argument on degenerate input (fewer than 4 points,
// a single distinct power, or all-zero counts).
SaturationFit fit_saturation(const std::vector<PowerSeriesPoint>& series);

double quantum_dot_efficiency(double p_e, double eta_b);

// eta_S = eta_QD * beta * eta_OC * T * eta_F. Fiber and detector terms are
// excluded; they belong to the demultiplexer side of the chain.
double source_efficiency(const StageEfficiencies& stages);

struct RateLadderRung {
    std::string label;
    double rate_hz = 0.0;
};

// Cumulative photon rate down the chain:
//   emitted-on-line, in-waveguide, in-fiber, after-filter, detected.
std::vector<RateLadderRung> rate_ladder(double f_rep_hz, const StageEfficiencies& stages);

// CSV with header `power_nW,counts_per_s,filtered`, filtered in {0,1}.
std::vector<PowerSeriesPoint> read_power_series_csv(std::istream& in);

}  // namespace demuxsim
