#include "senc/encoder.hpp"

#include <cmath>

namespace senc {

void EncoderSpec::validate() const {
    if (!(counts_per_mm > 0.0)) throw ConfigError("encoder: counts_per_mm must be > 0");
    if (!(range_mm > 0.0)) throw ConfigError("encoder: range_mm must be > 0");
    if (index_spacing_counts <= 0) throw ConfigError("encoder: index_spacing_counts must be > 0");
    const double spacing = static_cast<double>(index_spacing_counts);
    if (3.0 * spacing > full_range_counts() + spacing)
        throw ConfigError("encoder: three index pulses do not fit in the measurement range");
    if (!std::isfinite(first_index_length_mm) || first_index_length_mm < 0.0 ||
        index_length_mm(2) > range_mm)
        throw ConfigError("encoder: first_index_length_mm places index pulses outside the range");
}

double counts_to_mm(const EncoderSpec& spec, std::int64_t counts) {
    return static_cast<double>(counts) / spec.counts_per_mm;
}

double EncoderChannel::home_offset() const {
    if (!index_latched_) throw NotHomed("encoder channel has not seen an index pulse");
    return spec_.first_index_length_mm - counts_to_mm(spec_, index_count_);
}

EncoderChannel EncoderChannel::fed(std::int64_t delta, bool index_seen) const {
    EncoderChannel next = *this;
    next.raw_count_ += delta;
    if (index_seen && !next.index_latched_) {
        next.index_latched_ = true;
        next.index_count_ = next.raw_count_;
    }
    return next;
}

double EncoderChannel::absolute_length() const {
    if (!index_latched_) throw NotHomed("encoder channel has not seen an index pulse");
    return spec_.first_index_length_mm + counts_to_mm(spec_, raw_count_ - index_count_);
}

EncoderBank home_all(const EncoderBank& channels, const std::array<ChannelTrace, kLegCount>& retract_traces) {
    EncoderBank out = channels;
    std::vector<int> missing;
    for (std::size_t c = 0; c < out.size(); ++c) {
        for (const CountEvent& ev : retract_traces[c]) out[c] = out[c].fed(ev.delta, ev.index);
        if (!out[c].index_latched()) missing.push_back(static_cast<int>(c));
    }
    if (!missing.empty()) throw HomingIncomplete(std::move(missing));
    return out;
}

}  // namespace senc
