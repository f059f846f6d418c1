#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "senc/geometry.hpp"

namespace senc {

// Incremental string encoder. Counts are post-quadrature-decode; an increasing
// count means the string got longer.
struct EncoderSpec {
    double counts_per_mm = 60.0;
    double range_mm = 200.0;
    std::int64_t index_spacing_counts = 4000;
    // Absolute reading at the first index pulse, recorded per unit before install.
    double first_index_length_mm = 0.0;

    double full_range_counts() const { return counts_per_mm * range_mm; }
    double index_spacing_mm() const { return static_cast<double>(index_spacing_counts) / counts_per_mm; }
    // Absolute reading of index pulse k (k = 0, 1, 2).
    double index_length_mm(int k) const { return first_index_length_mm + k * index_spacing_mm(); }

    // Throws ConfigError when a field is out of its domain or the three index
    // pulses do not fit in the measurement range.
    void validate() const;
};

double counts_to_mm(const EncoderSpec& spec, std::int64_t counts);

class EncoderChannel {
public:
    EncoderChannel() = default;
    explicit EncoderChannel(EncoderSpec spec) : spec_(spec) {}

    const EncoderSpec& spec() const { return spec_; }
    std::int64_t raw_count() const { return raw_count_; }
    bool index_latched() const { return index_latched_; }
    std::int64_t index_count() const { return index_count_; }

    // Absolute reading corresponding to raw_count == 0; throws NotHomed.
    double home_offset() const;

    // Advances the count; the first index pulse latches the count reached after
    // this delta. Later pulses leave the latch alone.
    [[nodiscard]] EncoderChannel fed(std::int64_t delta, bool index_seen) const;

    // Throws NotHomed if no index pulse has been latched.
    double absolute_length() const;

    // Power-cycle: zero count, clear the latch.
    [[nodiscard]] EncoderChannel reset() const { return EncoderChannel(spec_); }

private:
    EncoderSpec spec_;
    std::int64_t raw_count_ = 0;
    bool index_latched_ = false;
    std::int64_t index_count_ = 0;
};

inline EncoderChannel feed_counts(const EncoderChannel& ch, std::int64_t delta, bool index_seen) {
    return ch.fed(delta, index_seen);
}

inline double absolute_length(const EncoderChannel& ch) { return ch.absolute_length(); }

struct CountEvent {
    std::int64_t delta = 0;
    bool index = false;
};

using ChannelTrace = std::vector<CountEvent>;
using EncoderBank = std::array<EncoderChannel, kLegCount>;

// Replays each channel's retraction trace. Throws HomingIncomplete naming the
// channels whose trace contained no index pulse.
EncoderBank home_all(const EncoderBank& channels, const std::array<ChannelTrace, kLegCount>& retract_traces);

}  // namespace senc
