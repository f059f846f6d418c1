#include "senc/telemetry.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "senc/calibration.hpp"
#include "senc/csv.hpp"

namespace senc {

namespace {

sockaddr_in to_sockaddr(const Endpoint& ep) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
        throw ConfigError("cannot resolve host '" + ep.host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    freeaddrinfo(res);
    return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ConfigError("endpoint must look like host:port, got '" + text + "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    if (port.find_first_not_of("0123456789") != std::string::npos || port.size() > 5)
        throw ConfigError("bad port in '" + text + "'");
    const long p = std::stol(port);
    if (p > 65535) throw ConfigError("bad port in '" + text + "'");
    ep.port = static_cast<std::uint16_t>(p);
    return ep;
}

UdpSocket::UdpSocket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw BindFailure(std::string("socket: ") + std::strerror(errno));
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

void UdpSocket::bind(const Endpoint& ep) {
    const sockaddr_in addr = to_sockaddr(ep);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        throw BindFailure("cannot bind " + ep.str() + ": " + std::strerror(errno));
}

Endpoint UdpSocket::local_endpoint() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw BindFailure(std::string("getsockname: ") + std::strerror(errno));
    char buf[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
    return {buf, ntohs(addr.sin_port)};
}

void UdpSocket::send_to(const Endpoint& ep, std::span<const std::uint8_t> bytes) {
    const sockaddr_in addr = to_sockaddr(ep);
    // Datagram loss is accounted for by sequence numbers; send errors are not fatal.
    (void)::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
}

std::optional<std::size_t> UdpSocket::receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (ready <= 0) return std::nullopt;
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), MSG_TRUNC);
    if (n < 0) return std::nullopt;
    return static_cast<std::size_t>(n);
}

void UdpSocket::set_receive_buffer(int bytes) {
    (void)::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
}

// ---------------------------------------------------------------------------

std::uint8_t PacketSource::take_flags() {
    const auto& samples = stream_->samples;
    std::uint8_t flags = pending_flags_;
    if (sequence_ < samples.size()) flags = static_cast<std::uint8_t>(flags | samples[sequence_].index_flags);
    pending_flags_ = 0;
    return flags;
}

CountPacket PacketSource::next() {
    const auto& samples = stream_->samples;
    if (samples.empty()) throw ConfigError("empty count stream");
    const CountSample& s = samples[std::min<std::size_t>(sequence_, samples.size() - 1)];
    CountPacket p;
    p.flags = take_flags();
    p.sequence = sequence_;
    p.timestamp_us = sequence_ < samples.size()
                         ? s.time_us
                         : s.time_us + (sequence_ - (samples.size() - 1)) *
                                           (samples.size() > 1 ? samples[1].time_us - samples[0].time_us : 1000);
    p.counts = s.counts;
    ++sequence_;
    return p;
}

void PacketSource::skip() {
    pending_flags_ = take_flags();
    ++sequence_;
}

void ServeOptions::validate() const {
    if (!(rate_hz >= 1.0 && rate_hz <= 2000.0)) throw ConfigError("serve: rate must be within 1-2000 Hz");
    if (destination.port == 0) throw ConfigError("serve: destination port required");
}

ServeReport serve(const CountStream& stream, const ServeOptions& options, std::stop_token stop) {
    options.validate();
    if (stream.samples.empty()) throw ConfigError("serve: empty count stream");

    UdpSocket sock;
    if (options.bind) sock.bind(*options.bind);

    const std::unordered_set<std::uint32_t> drops(options.drop_sequences.begin(), options.drop_sequences.end());
    PacketSource source(stream);
    ServeReport report;

    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration<double>(1.0 / options.rate_hz);
    const auto start = clock::now();
    while (!stop.stop_requested()) {
        if (options.packet_count && report.generated >= *options.packet_count) break;
        const auto due = start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(report.generated));
        std::this_thread::sleep_until(due);
        if (drops.contains(source.sequence())) {
            source.skip();
            ++report.dropped;
        } else {
            const auto bytes = encode(source.next());
            sock.send_to(options.destination, bytes);
            ++report.sent;
        }
        ++report.generated;
    }
    report.elapsed_s = std::chrono::duration<double>(clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------

PosePipeline::PosePipeline(RigConfig rig, double offset_mm, std::optional<FrameChain> chain, SolverConfig solver)
    : rig_(std::move(rig)), offset_mm_(offset_mm), chain_(std::move(chain)), solver_(solver) {
    if (!rig_.has_encoders) throw ConfigError("client: rig config lacks encoder homing references");
    solver_.validate();
    for (std::size_t c = 0; c < kLegCount; ++c) channels_[c] = EncoderChannel(rig_.encoders[c]);
}

bool PosePipeline::homed() const {
    return std::all_of(channels_.begin(), channels_.end(), [](const EncoderChannel& c) { return c.index_latched(); });
}

std::optional<PosePacket> PosePipeline::process(const CountPacket& packet) {
    if (last_sequence_) {
        if (packet.sequence <= *last_sequence_) {
            ++stats_.out_of_order;
            return std::nullopt;
        }
        stats_.gaps += packet.sequence - *last_sequence_ - 1;
    }
    last_sequence_ = packet.sequence;

    for (std::size_t c = 0; c < kLegCount; ++c) {
        const std::int64_t delta = static_cast<std::int64_t>(packet.counts[c]) - last_counts_[c];
        channels_[c] = channels_[c].fed(delta, packet.index_seen(static_cast<int>(c)));
    }
    last_counts_ = packet.counts;
    ++stats_.processed;

    PosePacket out;
    out.sequence = packet.sequence;
    if (!homed()) {
        ++stats_.not_homed;
        return out;
    }
    out.homed = true;

    LegLengths lengths;
    for (int c = 0; c < kLegCount; ++c) lengths[c] = channels_[static_cast<std::size_t>(c)].absolute_length();
    try {
        const SolveResult r = forward_kinematics(rig_.geometry, apply_offset(lengths, offset_mm_), seed_, solver_);
        out.converged = r.converged;
        out.iterations = static_cast<std::uint32_t>(r.iterations);
        out.residual_mm = r.residual;
        out.pose = chain_ ? encoder_pose_in_robot_frame(*chain_, pose_to_matrix(r.pose)) : r.pose;
        // a solution outside the workspace (e.g. mid-retraction) would pull
        // the next solve toward the mirrored assembly
        seed_ = r.converged && rig_.geometry.workspace.contains(r.pose) ? r.pose : Pose::identity();
    } catch (const Error&) {
        out.converged = false;
        out.pose = Pose::identity();
        seed_ = Pose::identity();
    }
    if (!out.converged) ++stats_.solve_failures;
    return out;
}

void PosePipeline::write_log_header(std::ostream& os) {
    os << "sequence,timestamp_us,homed,converged,iterations,residual_mm,x,y,z,roll,pitch,yaw\n";
}

void PosePipeline::write_log_row(std::ostream& os, const CountPacket& in, const PosePacket& out) {
    os << out.sequence << ',' << in.timestamp_us << ',' << (out.homed ? 1 : 0) << ',' << (out.converged ? 1 : 0) << ','
       << out.iterations << ',' << csv::fmt(out.residual_mm, 9);
    for (int i = 0; i < 6; ++i) os << ',' << csv::fmt(out.pose[i]);
    os << '\n';
}

PoseClient::PoseClient(ClientOptions options) : options_(std::move(options)) {
    // Validate before binding so a bad config leaves nothing bound.
    PosePipeline probe(options_.rig, options_.offset_mm, options_.chain, options_.solver);
    socket_.set_receive_buffer(8 << 20);
    socket_.bind(options_.listen);
}

ClientReport PoseClient::run(std::stop_token stop, std::ostream* log,
                             const std::function<void(const PosePacket&)>& on_pose) {
    using clock = std::chrono::steady_clock;
    struct Item {
        CountPacket packet;
        clock::time_point arrived;
    };

    BoundedQueue<Item> queue(options_.queue_capacity);
    ClientReport report;
    PosePipeline pipeline(options_.rig, options_.offset_mm, options_.chain, options_.solver);
    if (log) PosePipeline::write_log_header(*log);

    std::jthread solver([&] {
        double latency_sum = 0.0;
        std::uint64_t n = 0;
        while (auto item = queue.pop()) {
            const auto out = pipeline.process(item->packet);
            if (!out) continue;
            if (log) PosePipeline::write_log_row(*log, item->packet, *out);
            if (options_.publish) publisher_.send_to(*options_.publish, encode(*out));
            if (on_pose) on_pose(*out);
            const double lat = std::chrono::duration<double, std::micro>(clock::now() - item->arrived).count();
            report.max_latency_us = std::max(report.max_latency_us, lat);
            latency_sum += lat;
            ++n;
        }
        report.mean_latency_us = n ? latency_sum / static_cast<double>(n) : 0.0;
    });

    std::array<std::uint8_t, 512> buf{};
    auto last_arrival = clock::now();
    const auto started = last_arrival;
    while (!stop.stop_requested()) {
        if (options_.max_packets && report.received >= *options_.max_packets) break;
        const auto got = socket_.receive(buf, std::chrono::milliseconds(20));
        const auto now = clock::now();
        if (!got) {
            if (report.received == 0 ? now - started > options_.startup_timeout
                                     : now - last_arrival > options_.idle_timeout)
                break;
            continue;
        }
        last_arrival = now;
        try {
            const CountPacket p = decode_count_packet(std::span<const std::uint8_t>(buf.data(), std::min(*got, buf.size())));
            ++report.received;
            if (!queue.try_push({p, now})) ++report.queue_overflow;
        } catch (const PacketError&) {
            ++report.malformed;
        }
    }
    queue.close();
    solver.join();
    report.max_queue_depth = queue.high_water();
    report.pipeline = pipeline.stats();
    return report;
}

}  // namespace senc
