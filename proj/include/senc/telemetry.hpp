#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "senc/config.hpp"
#include "senc/encoder.hpp"
#include "senc/kinematics.hpp"
#include "senc/packet.hpp"
#include "senc/registration.hpp"
#include "senc/simulator.hpp"

namespace senc {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    // "host:port"; throws ConfigError.
    static Endpoint parse(const std::string& text);
    std::string str() const { return host + ":" + std::to_string(port); }
};

// IPv4 UDP socket.
class UdpSocket {
public:
    UdpSocket();
    ~UdpSocket();
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    // Throws BindFailure.
    void bind(const Endpoint& ep);
    Endpoint local_endpoint() const;
    void send_to(const Endpoint& ep, std::span<const std::uint8_t> bytes);
    // Waits up to `timeout`; returns the datagram size, or nullopt on timeout.
    std::optional<std::size_t> receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout);
    void set_receive_buffer(int bytes);

private:
    int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Daemon

// Turns a count stream into paced packets. Past the end of the stream the last
// sample is repeated. Index flags of samples that were skipped (drop
// injection) carry over to the next packet that is sent.
class PacketSource {
public:
    explicit PacketSource(const CountStream& stream) : stream_(&stream) {}

    // Packet for the next sequence number.
    CountPacket next();
    // Advance without emitting; its index flags stay pending.
    void skip();
    std::uint32_t sequence() const { return sequence_; }

private:
    std::uint8_t take_flags();
    const CountStream* stream_;
    std::uint32_t sequence_ = 0;
    std::uint8_t pending_flags_ = 0;
};

struct ServeOptions {
    Endpoint destination;
    std::optional<Endpoint> bind;
    double rate_hz = 1000.0;
    // Packets to generate; nullopt runs until the stop token fires.
    std::optional<std::uint64_t> packet_count;
    // Sequence numbers generated but deliberately not sent.
    std::vector<std::uint32_t> drop_sequences;

    void validate() const;
};

struct ServeReport {
    std::uint64_t generated = 0;
    std::uint64_t sent = 0;
    std::uint64_t dropped = 0;
    double elapsed_s = 0.0;
};

// Paced sender. Throws ConfigError for bad options and BindFailure.
ServeReport serve(const CountStream& stream, const ServeOptions& options, std::stop_token stop = {});

// ---------------------------------------------------------------------------
// Client

struct PipelineStats {
    std::uint64_t processed = 0;
    std::uint64_t gaps = 0;          // sequence numbers never seen
    std::uint64_t out_of_order = 0;  // duplicates and late packets, dropped
    std::uint64_t not_homed = 0;     // status-only packets emitted
    std::uint64_t solve_failures = 0;
};

// Single-threaded packet-to-pose stage: homing, offset correction, FK seeded
// with the previous pose (nominal after a failure), optional robot-frame output.
class PosePipeline {
public:
    PosePipeline(RigConfig rig, double offset_mm, std::optional<FrameChain> chain = std::nullopt,
                 SolverConfig solver = {});

    // nullopt for packets dropped by sequence bookkeeping.
    std::optional<PosePacket> process(const CountPacket& packet);

    bool homed() const;
    const PipelineStats& stats() const { return stats_; }
    const EncoderBank& channels() const { return channels_; }

    static void write_log_header(std::ostream& os);
    static void write_log_row(std::ostream& os, const CountPacket& in, const PosePacket& out);

private:
    RigConfig rig_;
    double offset_mm_;
    std::optional<FrameChain> chain_;
    SolverConfig solver_;
    EncoderBank channels_;
    std::array<std::int32_t, kLegCount> last_counts_{};
    std::optional<std::uint32_t> last_sequence_;
    Pose seed_;
    PipelineStats stats_;
};

template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    // false when full or closed.
    bool try_push(T item) {
        std::lock_guard lock(mutex_);
        if (closed_ || items_.size() >= capacity_) return false;
        items_.push_back(std::move(item));
        high_water_ = std::max(high_water_, items_.size());
        ready_.notify_one();
        return true;
    }

    // Blocks; nullopt once closed and drained.
    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        ready_.notify_all();
    }

    std::size_t high_water() const {
        std::lock_guard lock(mutex_);
        return high_water_;
    }

private:
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<T> items_;
    std::size_t capacity_;
    std::size_t high_water_ = 0;
    bool closed_ = false;
};

struct ClientOptions {
    Endpoint listen;
    RigConfig rig;
    double offset_mm = 3.0;
    std::optional<FrameChain> chain;
    SolverConfig solver;
    std::optional<Endpoint> publish;
    std::size_t queue_capacity = 4096;
    // Stop once no packet arrived for this long (after the first one).
    std::chrono::milliseconds idle_timeout{1000};
    // Give up if nothing arrives at all within this window.
    std::chrono::milliseconds startup_timeout{10000};
    std::optional<std::uint64_t> max_packets;
};

struct ClientReport {
    PipelineStats pipeline;
    std::uint64_t received = 0;
    std::uint64_t malformed = 0;
    std::uint64_t queue_overflow = 0;
    std::size_t max_queue_depth = 0;
    double max_latency_us = 0.0;
    double mean_latency_us = 0.0;
};

// Receive thread feeding a solve thread through a bounded queue. The socket is
// bound in the constructor so a sender may start right after.
class PoseClient {
public:
    explicit PoseClient(ClientOptions options);

    Endpoint local_endpoint() const { return socket_.local_endpoint(); }

    // Runs until idle/startup timeout, max_packets, or stop. Writes one log row
    // per emitted pose when `log` is given.
    ClientReport run(std::stop_token stop = {}, std::ostream* log = nullptr,
                     const std::function<void(const PosePacket&)>& on_pose = {});

private:
    ClientOptions options_;
    UdpSocket socket_;
    UdpSocket publisher_;
};

}  // namespace senc
