#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "demuxsim/analysis.hpp"
#include "demuxsim/config.hpp"
#include "demuxsim/sim.hpp"

namespace demuxsim {

// Chunked end-to-end drivers. Chunks cover whole switching cycles so slot
// bookkeeping never straddles a boundary; detector dead-time state is carried
// across chunks per channel. Each stage draws from its own (tag, chunk)
// substream, so results are a pure function of the config and seed and do not
// depend on how many chunks the run is split into beyond the fixed policy.

// Per-chunk sink for the demultiplexed pipeline: per-channel tags (sorted,
// strictly increasing) plus the horizon up to which the chunk is complete.
using DemuxChunkSink =
    std::function<void(const std::vector<std::vector<TimeTag>>& channels, double horizon_ps)>;

// source -> loss chain -> switch routing -> per-channel detection
void run_demux_pipeline(const KitConfig& config, uint64_t n_pulses, uint64_t seed,
                        DemuxChunkSink sink);

// Convenience wrapper: full run with streaming M-fold coincidence counting
// and per-channel singles counts.
struct DemuxRunStats {
    CoincidenceResult coincidences;
    std::vector<uint64_t> singles;  // per channel
    double duration_s = 0.0;
};

DemuxRunStats run_demux_coincidence(const KitConfig& config, uint64_t n_pulses, uint64_t seed,
                                    double window_ps);

// source -> loss chain (*extra_loss) -> 50:50 split -> two detectors.
// Returns the two arms' tag streams (channels 0 and 1).
std::pair<std::vector<TimeTag>, std::vector<TimeTag>> run_hbt_pipeline(const KitConfig& config,
                                                                       uint64_t n_pulses,
                                                                       uint64_t seed,
                                                                       double extra_loss = 1.0);

}  // namespace demuxsim
