#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "demuxsim/demux.hpp"
#include "demuxsim/efficiency.hpp"
#include "demuxsim/rng.hpp"

namespace demuxsim {

// One source emission: the photon bundle created by one excitation pulse.
// Times are picoseconds from run start; time >= pulse_index / f_rep.
struct EmissionEvent {
    double time_ps = 0.0;
    uint8_t photons = 1;  // 1 or 2
    uint64_t pulse_index = 0;
};

struct DetectorModel {
    double eta_det = 0.88;
    double dead_time_ns = 25.0;
    double jitter_sigma_ps = 100.0;
    uint32_t tick_ps = 81;  // time-tagger resolution

    void validate() const;
};

struct TimeTag {
    uint64_t ticks = 0;
    uint8_t channel = 0;
};

// Pulsed emitter with ground / bright / dark / blinking-off states. Each
// excitation attempt lands on the selected line with probability p_e and in
// the bright state with probability eta_b; shelved (dark) attempts yield no
// photon on the filtered line, so the per-pulse yield is exactly p_e*eta_b.
// Blinking is a two-state telegraph with stationary off occupancy p_blink_off
// and correlation time tau_blink, sampled by exponential dwell times.
class EmitterStateMachine {
public:
    EmitterStateMachine(const EmitterPhysics& physics, RandomStream& rng, double start_ps);

    // True when the pulse at t_ps produces a bright-state emission.
    bool excite(double t_ps, RandomStream& rng);

private:
    double p_line_;       // p_e * eta_b
    double rate_on_off_;  // 1/ps
    double rate_off_on_;  // 1/ps
    bool blinks_;
    bool off_ = false;
    double next_flip_ps_ = 0.0;
};

// Emission events for pulses [first_pulse, first_pulse + count). The blinking
// telegraph restarts from its stationary distribution at the range boundary,
// so ranges spaced well beyond tau_blink are statistically independent.
std::vector<EmissionEvent> simulate_emission_range(const EmitterPhysics& physics,
                                                   const StageEfficiencies& stages,
                                                   double f_rep_hz, uint64_t first_pulse,
                                                   uint64_t count, uint64_t seed,
                                                   uint64_t substream_chunk);

// Full run over n_pulses_total pulses. Internally chunked (fixed policy), so
// output is a pure function of the arguments.
std::vector<EmissionEvent> simulate_emission(const EmitterPhysics& physics,
                                             const StageEfficiencies& stages, double f_rep_hz,
                                             uint64_t n_pulses_total, uint64_t seed);

// Bernoulli thinning of each photon with survival probability eta. Two-photon
// events may thin to one or zero photons; empty events are dropped.
std::vector<EmissionEvent> apply_loss(const std::vector<EmissionEvent>& events, double eta,
                                      uint64_t seed);

// Active switch: assigns each event's pulse to its spatial mode, drops events
// whose pulse lies within guard_window_ns of a switch transition, applies
// eta_sw * eta_m thinning per photon, and delays channel m by (M - m) * N
// pulse periods so matched temporal slots align across channels.
std::vector<std::vector<EmissionEvent>> route_demux(const std::vector<EmissionEvent>& events,
                                                    const DemuxConfig& config,
                                                    double guard_window_ns, uint64_t seed);

// Detection state carried across chunked calls (per channel).
struct DetectorState {
    double last_accept_ps = 0.0;
    uint64_t last_tick = 0;
    bool any = false;
};

// Detection: eta_det thinning, timestamp jitter, non-paralyzable dead time
// applied to the jittered timestamps, floor quantization to ticks. Input must
// be time-sorted; output ticks are strictly increasing.
std::vector<TimeTag> detect_with_state(const std::vector<EmissionEvent>& events,
                                       const DetectorModel& det, uint64_t seed, uint8_t channel,
                                       DetectorState& state);

std::vector<TimeTag> detect(const std::vector<EmissionEvent>& events, const DetectorModel& det,
                            uint64_t seed, uint8_t channel = 0);

// 50:50 beam splitter: each photon independently routed to arm a or b.
std::pair<std::vector<EmissionEvent>, std::vector<EmissionEvent>> hbt_split(
    const std::vector<EmissionEvent>& events, uint64_t seed);

}  // namespace demuxsim
