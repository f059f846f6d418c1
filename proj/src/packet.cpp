#include "senc/packet.hpp"

#include <bit>
#include <cstring>

namespace senc {

namespace {

class Writer {
public:
    explicit Writer(std::uint8_t* out) : p_(out) {}

    void bytes(const char* s, std::size_t n) {
        std::memcpy(p_, s, n);
        p_ += n;
    }
    template <typename T>
    void le(T v) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            *p_++ = static_cast<std::uint8_t>(u & 0xffu);
            u = static_cast<U>(u >> 8);
        }
    }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

private:
    std::uint8_t* p_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    bool magic(const char* s) {
        const bool ok = std::memcmp(in_.data() + pos_, s, 4) == 0;
        pos_ += 4;
        return ok;
    }
    template <typename T>
    T le() {
        using U = std::make_unsigned_t<T>;
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) u = static_cast<U>(u | (static_cast<U>(in_[pos_ + i]) << (8 * i)));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void check_size(std::span<const std::uint8_t> bytes, std::size_t want, const char* what) {
    if (bytes.size() != want)
        throw PacketError(std::string(what) + ": expected " + std::to_string(want) + " bytes, got " +
                          std::to_string(bytes.size()));
}

}  // namespace

std::array<std::uint8_t, CountPacket::kSize> encode(const CountPacket& p) {
    std::array<std::uint8_t, CountPacket::kSize> out{};
    Writer w(out.data());
    w.bytes("SENC", 4);
    w.le(CountPacket::kVersion);
    w.le(p.flags);
    w.le(p.sequence);
    w.le(p.timestamp_us);
    for (std::int32_t c : p.counts) w.le(c);
    return out;
}

std::array<std::uint8_t, PosePacket::kSize> encode(const PosePacket& p) {
    std::array<std::uint8_t, PosePacket::kSize> out{};
    Writer w(out.data());
    w.bytes("SPOS", 4);
    w.le(PosePacket::kVersion);
    w.le(p.sequence);
    w.le(static_cast<std::uint8_t>(p.converged ? 1 : 0));
    w.le(static_cast<std::uint8_t>(p.homed ? 1 : 0));
    w.le(p.iterations);
    for (int i = 0; i < 6; ++i) w.f64(p.pose[i]);
    w.f64(p.residual_mm);
    return out;
}

CountPacket decode_count_packet(std::span<const std::uint8_t> bytes) {
    check_size(bytes, CountPacket::kSize, "count packet");
    Reader r(bytes);
    if (!r.magic("SENC")) throw PacketError("count packet: bad magic");
    if (r.le<std::uint8_t>() != CountPacket::kVersion) throw PacketError("count packet: unsupported version");
    CountPacket p;
    p.flags = r.le<std::uint8_t>();
    if (p.flags & 0xc0u) throw PacketError("count packet: reserved flag bits set");
    p.sequence = r.le<std::uint32_t>();
    p.timestamp_us = r.le<std::uint64_t>();
    for (auto& c : p.counts) c = r.le<std::int32_t>();
    return p;
}

PosePacket decode_pose_packet(std::span<const std::uint8_t> bytes) {
    check_size(bytes, PosePacket::kSize, "pose packet");
    Reader r(bytes);
    if (!r.magic("SPOS")) throw PacketError("pose packet: bad magic");
    if (r.le<std::uint8_t>() != PosePacket::kVersion) throw PacketError("pose packet: unsupported version");
    PosePacket p;
    p.sequence = r.le<std::uint32_t>();
    const auto converged = r.le<std::uint8_t>();
    const auto homed = r.le<std::uint8_t>();
    if (converged > 1 || homed > 1) throw PacketError("pose packet: status flags must be 0 or 1");
    p.converged = converged == 1;
    p.homed = homed == 1;
    p.iterations = r.le<std::uint32_t>();
    for (int i = 0; i < 6; ++i) p.pose[i] = r.f64();
    p.residual_mm = r.f64();
    return p;
}

}  // namespace senc
