#include "demuxsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace demuxsim {

namespace {

// fixed chunking policy for simulate_emission; ~110 ms of pulse train at
// 76 MHz, far beyond the default blinking correlation time
constexpr uint64_t kSimChunkPulses = 1ull << 23;

}  // namespace

void DetectorModel::validate() const {
    if (!(eta_det >= 0.0 && eta_det <= 1.0))
        throw std::invalid_argument("eta_det must be in [0, 1]");
    if (!(dead_time_ns >= 0.0)) throw std::invalid_argument("dead_time_ns must be >= 0");
    if (!(jitter_sigma_ps >= 0.0)) throw std::invalid_argument("jitter_sigma_ps must be >= 0");
    if (tick_ps < 1) throw std::invalid_argument("tick_ps must be >= 1");
}

EmitterStateMachine::EmitterStateMachine(const EmitterPhysics& physics, RandomStream& rng,
                                         double start_ps) {
    p_line_ = physics.p_e_times_eta_b;
    blinks_ = physics.p_blink_off > 0.0;
    if (blinks_) {
        const double tau_ps = physics.tau_blink_us * 1e6;
        rate_on_off_ = physics.p_blink_off / tau_ps;
        rate_off_on_ = (1.0 - physics.p_blink_off) / tau_ps;
        // stationary start
        off_ = rng.bernoulli(physics.p_blink_off);
        next_flip_ps_ = start_ps + rng.exponential(off_ ? rate_off_on_ : rate_on_off_);
    } else {
        rate_on_off_ = rate_off_on_ = 0.0;
    }
}

bool EmitterStateMachine::excite(double t_ps, RandomStream& rng) {
    if (blinks_) {
        while (t_ps >= next_flip_ps_) {
            off_ = !off_;
            next_flip_ps_ += rng.exponential(off_ ? rate_off_on_ : rate_on_off_);
        }
        if (off_) return false;
    }
    return rng.bernoulli(p_line_);
}

std::vector<EmissionEvent> simulate_emission_range(const EmitterPhysics& physics,
                                                   const StageEfficiencies& stages,
                                                   double f_rep_hz, uint64_t first_pulse,
                                                   uint64_t count, uint64_t seed,
                                                   uint64_t substream_chunk) {
    physics.validate();
    stages.validate();
    if (!(f_rep_hz > 0.0)) throw std::invalid_argument("f_rep_hz must be > 0");

    const double period_ps = 1e12 / f_rep_hz;
    const double gamma_bright_per_ps = physics.gamma_bright * 1e-3;
    const double p_line = quantum_dot_efficiency(stages.p_e, stages.eta_b);
    const double p_multi = physics.p_multi;

    RandomStream rng(substream_seed(seed, stream_tag::emission, substream_chunk));

    EmitterPhysicsView view{physics, p_line};
    EmitterStateMachine emitter(view, rng, static_cast<double>(first_pulse) * period_ps);

    std::vector<EmissionEvent> events;
    events.reserve(static_cast<size_t>(static_cast<double>(count) * p_line * 1.05) + 16);

    for (uint64_t i = 0; i < count; ++i) {
        const uint64_t pulse = first_pulse + i;
        const double t_pulse = static_cast<double>(pulse) * period_ps;
        if (!emitter.excite(t_pulse, rng)) continue;
        const double delay = rng.exponential(gamma_bright_per_ps);
        const uint8_t photons = (p_multi > 0.0 && rng.bernoulli(p_multi)) ? 2 : 1;
        events.push_back({t_pulse + delay, photons, pulse});
    }
    return events;
}

std::vector<EmissionEvent> simulate_emission(const EmitterPhysics& physics,
                                             const StageEfficiencies& stages, double f_rep_hz,
                                             uint64_t n_pulses_total, uint64_t seed) {
    if (n_pulses_total < 1) throw std::invalid_argument("n_pulses_total must be >= 1");
    std::vector<EmissionEvent> events;
    uint64_t chunk = 0;
    for (uint64_t first = 0; first < n_pulses_total; first += kSimChunkPulses, ++chunk) {
        uint64_t count = std::min(kSimChunkPulses, n_pulses_total - first);
        auto part = simulate_emission_range(physics, stages, f_rep_hz, first, count, seed, chunk);
        events.insert(events.end(), part.begin(), part.end());
    }
    return events;
}

std::vector<EmissionEvent> apply_loss(const std::vector<EmissionEvent>& events, double eta,
                                      uint64_t seed) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in [0, 1]");
    if (eta == 1.0) return events;
    if (eta == 0.0) return {};

    RandomStream rng(seed);
    std::vector<EmissionEvent> out;
    out.reserve(static_cast<size_t>(static_cast<double>(events.size()) * eta * 1.05) + 16);
    for (const EmissionEvent& ev : events) {
        uint8_t surviving = 0;
        for (int p = 0; p < ev.photons; ++p)
            if (rng.bernoulli(eta)) ++surviving;
        if (surviving > 0) out.push_back({ev.time_ps, surviving, ev.pulse_index});
    }
    return out;
}

std::vector<std::vector<EmissionEvent>> route_demux(const std::vector<EmissionEvent>& events,
                                                    const DemuxConfig& config,
                                                    double guard_window_ns, uint64_t seed) {
    config.validate();
    if (!(guard_window_ns >= 0.0)) throw std::invalid_argument("guard_window must be >= 0");

    const uint64_t n = static_cast<uint64_t>(config.n_pulses);
    const uint64_t m = static_cast<uint64_t>(config.m_modes);
    const double period_ps = config.pulse_period_ps();
    const double dwell_ps = period_ps * static_cast<double>(n);
    const double guard_ps = guard_window_ns * 1e3;

    RandomStream rng(seed);
    std::vector<std::vector<EmissionEvent>> channels(m);

    for (const EmissionEvent& ev : events) {
        const uint64_t slot = ev.pulse_index % n;  // 0-based position in the dwell
        if (guard_ps > 0.0) {
            const double to_start = static_cast<double>(slot) * period_ps;
            const double to_end = dwell_ps - to_start;
            if (to_start < guard_ps || to_end < guard_ps) continue;  // switch in transition
        }
        const uint64_t mode = (ev.pulse_index / n) % m;  // 0-based
        const double p_keep = config.eta_sw * config.eta_m[mode];
        uint8_t surviving = 0;
        for (int p = 0; p < ev.photons; ++p)
            if (rng.bernoulli(p_keep)) ++surviving;
        if (surviving == 0) continue;
        // delay fiber aligns matched temporal slots across channels
        const double delay_ps = static_cast<double>(m - 1 - mode) * dwell_ps;
        channels[mode].push_back({ev.time_ps + delay_ps, surviving, ev.pulse_index});
    }
    return channels;
}

std::vector<TimeTag> detect_with_state(const std::vector<EmissionEvent>& events,
                                       const DetectorModel& det, uint64_t seed, uint8_t channel,
                                       DetectorState& state) {
    det.validate();
    const double dead_ps = det.dead_time_ns * 1e3;
    const double tick_ps = static_cast<double>(det.tick_ps);
    const bool thin = det.eta_det < 1.0;
    const bool jittered = det.jitter_sigma_ps > 0.0;

    RandomStream rng(seed);
    std::vector<TimeTag> tags;
    tags.reserve(static_cast<size_t>(static_cast<double>(events.size()) * det.eta_det) + 16);

    for (const EmissionEvent& ev : events) {
        for (int p = 0; p < ev.photons; ++p) {
            if (thin && !rng.bernoulli(det.eta_det)) continue;
            double t = ev.time_ps;
            if (jittered) t += rng.normal(det.jitter_sigma_ps);
            if (t < 0.0) t = 0.0;
            if (state.any && t - state.last_accept_ps < dead_ps) continue;  // detector dead
            const uint64_t tick = static_cast<uint64_t>(t / tick_ps);
            if (state.any && tick <= state.last_tick) continue;  // below tagger resolution
            tags.push_back({tick, channel});
            state.last_accept_ps = t;
            state.last_tick = tick;
            state.any = true;
        }
    }
    return tags;
}

std::vector<TimeTag> detect(const std::vector<EmissionEvent>& events, const DetectorModel& det,
                            uint64_t seed, uint8_t channel) {
    DetectorState state;
    return detect_with_state(events, det, seed, channel, state);
}

std::pair<std::vector<EmissionEvent>, std::vector<EmissionEvent>> hbt_split(
    const std::vector<EmissionEvent>& events, uint64_t seed) {
    RandomStream rng(seed);
    std::vector<EmissionEvent> arm_a, arm_b;
    arm_a.reserve(events.size() / 2 + 16);
    arm_b.reserve(events.size() / 2 + 16);
    for (const EmissionEvent& ev : events) {
        uint8_t to_a = 0;
        for (int p = 0; p < ev.photons; ++p)
            if (rng.bernoulli(0.5)) ++to_a;
        const uint8_t to_b = ev.photons - to_a;
        if (to_a > 0) arm_a.push_back({ev.time_ps, to_a, ev.pulse_index});
        if (to_b > 0) arm_b.push_back({ev.time_ps, to_b, ev.pulse_index});
    }
    return {std::move(arm_a), std::move(arm_b)};
}

}  // namespace demuxsim
