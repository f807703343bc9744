#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "demuxsim/demux.hpp"
#include "demuxsim/efficiency.hpp"

namespace demuxsim {

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(const std::string& what, std::string key_arg)
        : std::runtime_error(what), key(std::move(key_arg)) {}
};

// Everything a run needs, read from a flat `key = value` file. `#` starts a
// comment. Required keys: m_modes, n_pulses, f_rep_hz, eta_sw, eta_m,
// eta_fiber, eta_det, dead_time_ns (plus tau_recover_ns when recovery_kind is
// exponential). eta_m takes a comma list of length m_modes or a single value
// applied to every channel. The remaining keys default to the values below.
struct KitConfig {
    DemuxConfig demux;
    StageEfficiencies stages;
    EmitterPhysics physics;

    // Nominal end-to-end source efficiency used by the analytic model. Kept
    // separate from the stage product: the stage table and the measured
    // efficiency need not agree exactly.
    double eta_s = 0.023;

    uint64_t seed = 1;
    uint64_t n_pulses_total = 100000000;
    double guard_window_ns = 0.0;
    double jitter_sigma_ps = 100.0;
    uint32_t tick_ps = 81;
};

KitConfig parse_config(std::istream& in);
KitConfig load_config(const std::string& path);

}  // namespace demuxsim
