#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "demuxsim/demux.hpp"
#include "demuxsim/sim.hpp"

namespace demuxsim {

struct InsufficientSpanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NormalizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binned correlation counts. Bins are centered on tau = 0: bin i holds delays
// around (i - half_bins) * bin_width, covering (center - w/2, center + w/2].
struct G2Histogram {
    double bin_width_ps = 0.0;
    double tau_max_ps = 0.0;  // span is +-tau_max
    uint32_t tick_ps = 1;
    std::vector<int64_t> counts;     // 2 * half_bins + 1 entries
    std::vector<double> normalized;  // filled by normalize_g2
    double normalization = 0.0;      // reference level, counts per bin
    bool is_normalized = false;
    bool empty_input = false;  // all-zero histogram from an empty tag list

    int64_t half_bins() const { return (static_cast<int64_t>(counts.size()) - 1) / 2; }
    double tau_of_bin(size_t i) const {
        return (static_cast<int64_t>(i) - half_bins()) * bin_width_ps;
    }
};

// Cross-correlation histogram of pair delays t_b - t_a over [-tau_max, tau_max],
// single merge pass with a sliding window (no all-pairs scan). Tag lists must
// be tick-sorted. Empty input yields a valid all-zero histogram, flagged.
G2Histogram g2_histogram(const std::vector<TimeTag>& tags_a, const std::vector<TimeTag>& tags_b,
                         uint32_t tick_ps, double bin_width_ps, double tau_max_ps);

// Divides by the mean count over the 10-bin window ending at reference_tau.
// Throws NormalizationError when that reference level is zero.
G2Histogram normalize_g2(const G2Histogram& hist, double reference_tau_ps);

// Pulsed g2(0): integrated central-peak counts over the mean of the nearest
// 10 side peaks, each integrated over one full pulse period; side peaks at
// |tau| < 2 periods are excluded from the reference. Requires at least 4 side
// peaks in span (InsufficientSpanError otherwise).
double g2_zero(const G2Histogram& hist, double f_rep_hz);

// Short-lag excess of a normalized pulse-period-binned histogram:
// mean(normalized bins with |tau| < 100 us) - 1.
double bunching_amplitude(const G2Histogram& hist, double f_rep_hz);

struct CoincidenceResult {
    int m_fold = 0;
    double window_ps = 0.0;
    uint64_t count = 0;
    double duration_s = 0.0;
    double rate_hz = 0.0;
};

// Streaming M-fold slot-coincidence counter. A coincidence is one matched
// temporal slot with at least one tag within +-window of the slot center in
// every channel. Slot centers follow the switching schedule after delay
// compensation: slot (cycle c, slot s) sits at (c*M*N + (M-1)*N + s - 1) pulse
// periods. Feed tags in time order (per channel); chunk boundaries are
// handled by the completion horizon.
class CoincidenceCounter {
public:
    CoincidenceCounter(const DemuxConfig& config, uint32_t tick_ps, double window_ps);

    // Adds one chunk of per-channel tags. All tags at or before horizon_ps
    // must have been delivered once this call returns; slots ending before
    // the horizon are finalized.
    void feed(const std::vector<std::vector<TimeTag>>& channels, double horizon_ps);

    CoincidenceResult result() const;

private:
    void flush(double horizon_ps);

    DemuxConfig config_;
    uint32_t tick_ps_;
    double window_ps_;
    double period_ps_;
    double cycle_ps_;
    double align_offset_ps_;  // (M-1)*N pulse periods
    uint32_t full_mask_;
    std::unordered_map<uint64_t, std::vector<uint32_t>> open_cycles_;  // cycle -> slot masks
    uint64_t count_ = 0;
    uint64_t max_cycle_seen_ = 0;
    bool any_tag_ = false;
};

// One-shot M-fold coincidence count over complete channel tag lists. Throws
// std::invalid_argument when the channel count does not match the config.
CoincidenceResult mfold_coincidences(const std::vector<std::vector<TimeTag>>& channels,
                                     const DemuxConfig& config, uint32_t tick_ps,
                                     double window_ps);

}  // namespace demuxsim
