#include "demuxsim/demux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace demuxsim {

double RecoveryKernel::operator()(double dt_ns) const {
    if (dt_ns <= 0.0) return 0.0;
    switch (kind) {
        case RecoveryKind::step:
            return dt_ns >= dead_time_ns ? 1.0 : 0.0;
        case RecoveryKind::exponential: {
            if (dt_ns <= dead_time_ns) return 0.0;
            if (!(tau_recover_ns > 0.0)) return 1.0;
            return std::clamp(1.0 - std::exp(-(dt_ns - dead_time_ns) / tau_recover_ns), 0.0, 1.0);
        }
    }
    return 1.0;
}

void DemuxConfig::validate() const {
    if (m_modes < 1) throw std::invalid_argument("m_modes must be >= 1");
    if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
    if (!(f_rep_hz > 0.0)) throw std::invalid_argument("f_rep_hz must be > 0");
    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    };
    prob(eta_sw, "eta_sw");
    prob(eta_fiber, "eta_fiber");
    prob(eta_det, "eta_det");
    if (eta_m.size() != static_cast<size_t>(m_modes))
        throw std::invalid_argument("eta_m must have exactly m_modes entries");
    for (double v : eta_m) prob(v, "eta_m");
    if (!(dead_time_ns >= 0.0)) throw std::invalid_argument("dead_time_ns must be >= 0");
    if (recovery == RecoveryKind::exponential && !(tau_recover_ns > 0.0))
        throw std::invalid_argument("tau_recover_ns must be > 0 for exponential recovery");
}

RecoveryKernel DemuxConfig::kernel() const {
    return RecoveryKernel{recovery, dead_time_ns, tau_recover_ns};
}

SwitchSchedule switching_schedule(const DemuxConfig& config) {
    config.validate();
    SwitchSchedule s;
    s.m_modes = config.m_modes;
    s.n_pulses = config.n_pulses;
    s.f_eom_hz = config.f_rep_hz / (static_cast<double>(config.n_pulses) * config.m_modes);
    return s;
}

RhoTable click_probability_table(const DemuxConfig& config, double eta_s) {
    config.validate();
    if (!(eta_s >= 0.0 && eta_s <= 1.0))
        throw std::invalid_argument("eta_s must be in [0, 1]");

    const int m_modes = config.m_modes;
    const int n_slots = config.n_pulses;
    const double period_ns = 1e9 / config.f_rep_hz;
    const RecoveryKernel kernel = config.kernel();

    RhoTable table;
    table.m_modes = m_modes;
    table.n_pulses = n_slots;
    table.values.assign(static_cast<size_t>(m_modes) * (n_slots + 1), 0.0);

    for (int m = 1; m <= m_modes; ++m) {
        const double eta_tot =
            eta_s * config.eta_fiber * config.eta_m[m - 1] * config.eta_sw * config.eta_det;
        table.at(m, 0) = 1.0;  // boundary convention
        for (int n = 1; n <= n_slots; ++n) {
            // k runs from n-1 down to 0, carrying prod_{e=k+1}^{n-1} (1 - rho^e)
            double survive = 1.0;
            double sum = 0.0;
            for (int k = n - 1; k >= 0; --k) {
                double t = k == 0 ? 1.0 : kernel((n - k) * period_ns);
                sum += survive * table.at(m, k) * t;
                if (k > 0) survive *= 1.0 - table.at(m, k);
            }
            table.at(m, n) = eta_tot * sum;
        }
    }
    return table;
}

double mfold_rate(const RhoTable& table, const DemuxConfig& config) {
    config.validate();
    if (table.m_modes != config.m_modes || table.n_pulses != config.n_pulses)
        throw std::invalid_argument("rho table does not match the config");
    double sum = 0.0;
    for (int n = 1; n <= config.n_pulses; ++n) {
        double prod = 1.0;
        for (int m = 1; m <= config.m_modes; ++m) prod *= table.at(m, n);
        sum += prod;
    }
    return config.f_rep_hz / (static_cast<double>(config.m_modes) * config.n_pulses) * sum;
}

double input_rate(double f_rep_hz, double eta_s) {
    if (!(f_rep_hz > 0.0)) throw std::invalid_argument("f_rep_hz must be > 0");
    if (!(eta_s >= 0.0 && eta_s <= 1.0))
        throw std::invalid_argument("eta_s must be in [0, 1]");
    return f_rep_hz * eta_s;
}

DemuxConfig passive_variant(const DemuxConfig& config) {
    config.validate();
    DemuxConfig passive = config;
    passive.eta_sw = 1.0 / config.m_modes;
    return passive;
}

std::vector<SweepPoint> brightness_sweep(const DemuxConfig& config,
                                         const std::vector<double>& eta_s_values) {
    if (eta_s_values.empty()) throw std::invalid_argument("eta_s grid is empty");
    std::vector<SweepPoint> out;
    out.reserve(eta_s_values.size());
    for (double eta_s : eta_s_values) {
        RhoTable table = click_probability_table(config, eta_s);
        out.push_back({eta_s, input_rate(config.f_rep_hz, eta_s), mfold_rate(table, config)});
    }
    return out;
}

}  // namespace demuxsim
