#pragma once

#include <cstdint>
#include <vector>

namespace demuxsim {

enum class RecoveryKind { step, exponential };

// Detector recovery factor T(dt) after a click, dt in ns. Nondecreasing,
// in [0, 1], and 1 once the detector has fully recovered.
struct RecoveryKernel {
    RecoveryKind kind = RecoveryKind::step;
    double dead_time_ns = 0.0;
    double tau_recover_ns = 0.0;  // exponential recovery constant

    double operator()(double dt_ns) const;
};

// Switching topology and demultiplexer-side efficiencies.
struct DemuxConfig {
    int m_modes = 4;      // spatial modes M
    int n_pulses = 20;    // pulses per mode N
    double f_rep_hz = 76.152e6;
    double eta_sw = 0.97;
    std::vector<double> eta_m = {0.86, 0.86, 0.86, 0.86};  // per-channel transmittance
    double eta_fiber = 0.92;
    double eta_det = 0.88;
    double dead_time_ns = 25.0;
    RecoveryKind recovery = RecoveryKind::step;
    double tau_recover_ns = 0.0;

    void validate() const;
    RecoveryKernel kernel() const;
    double pulse_period_ps() const { return 1e12 / f_rep_hz; }
    double cycle_period_ps() const {
        return pulse_period_ps() * static_cast<double>(m_modes) * n_pulses;
    }
};

// Pulse-to-channel map for one switching cycle of M*N pulses.
struct SwitchSchedule {
    double f_eom_hz = 0.0;
    int m_modes = 0;
    int n_pulses = 0;

    // 1-based spatial mode and temporal slot of pulse j (0-based, any cycle)
    int mode_of(uint64_t pulse) const {
        return static_cast<int>((pulse / n_pulses) % m_modes) + 1;
    }
    int slot_of(uint64_t pulse) const {
        return static_cast<int>(pulse % n_pulses) + 1;
    }
};

SwitchSchedule switching_schedule(const DemuxConfig& config);

// Per-slot click probabilities rho_m^n, m in 1..M, n in 0..N, with the
// boundary convention rho_m^0 = 1.
struct RhoTable {
    int m_modes = 0;
    int n_pulses = 0;
    std::vector<double> values;  // row-major, (m-1)*(n_pulses+1) + n

    double at(int m, int n) const { return values[(m - 1) * (n_pulses + 1) + n]; }
    double& at(int m, int n) { return values[(m - 1) * (n_pulses + 1) + n]; }
};

// Recursive per-slot click probability with the dead-time kernel:
//   rho_m^n = eta_tot,m * sum_{k=0}^{n-1} [prod_{e=k+1}^{n-1} (1 - rho_m^e)] rho_m^k T_m^{n,k}
// where eta_tot,m = eta_s * eta_fiber * eta_m[m] * eta_sw * eta_det,
// T_m^{n,0} = 1, and T_m^{n,k} for k >= 1 is the recovery kernel evaluated at
// (n - k) pulse periods.
RhoTable click_probability_table(const DemuxConfig& config, double eta_s);

// M-fold coincidence detection rate:
//   F_MF = (f_rep / (M*N)) * sum_{n=1}^{N} prod_{m=1}^{M} rho_m^n
double mfold_rate(const RhoTable& table, const DemuxConfig& config);

// F_in = f_rep * eta_s
double input_rate(double f_rep_hz, double eta_s);

// Passive (beam-splitter) baseline: same config with eta_sw = 1/M.
DemuxConfig passive_variant(const DemuxConfig& config);

struct SweepPoint {
    double eta_s = 0.0;
    double f_in_hz = 0.0;
    double f_mf_hz = 0.0;
};

std::vector<SweepPoint> brightness_sweep(const DemuxConfig& config,
                                         const std::vector<double>& eta_s_values);

}  // namespace demuxsim
