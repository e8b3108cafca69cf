#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "shipnet/kernels.hpp"
#include "shipnet/switch.hpp"
#include "shipnet/udp.hpp"

namespace shipnet {

struct EchoConfig {
    Micros period{10'000};
    std::size_t payload_size = 64;  // at least kEchoHeaderSize
    std::size_t count = 10'000;
    std::optional<Endpoint> bind;   // sender socket; ephemeral when unset
    Endpoint server;
    Micros timeout{1'000'000};
    // When set, datagrams carry the real-time proxy routing prefix.
    std::optional<std::uint8_t> switch_destination;
};

void validate(const EchoConfig& config);

// Payload: 8-byte sequence, 8-byte send timestamp (little endian), zero padding.
inline constexpr std::size_t kEchoHeaderSize = 16;
Bytes make_echo_payload(std::uint64_t sequence, SimTime send_time, std::size_t payload_size);
struct EchoStamp {
    std::uint64_t sequence;
    SimTime send_time;
};
std::optional<EchoStamp> parse_echo_payload(std::span<const std::uint8_t> payload);

struct ResponseTimeSample {
    std::uint64_t sequence = 0;
    SimTime send_time{0};
    std::optional<SimTime> receive_time;  // nullopt = LOST

    bool lost() const { return !receive_time.has_value(); }
    Micros response_time() const { return *receive_time - send_time; }
};

struct HistogramBin {
    double lower_us = 0.0;
    std::uint64_t count = 0;
};

struct LatencyStats {
    std::size_t n = 0;
    std::size_t lost = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) standard deviation
    double min = 0.0;
    double p50 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    std::vector<HistogramBin> histogram;      // linear bins of bin_width_us
    std::vector<HistogramBin> log_histogram;  // [0,1) then 10^(k/3) edges
};

class AllLost : public Error {
public:
    using Error::Error;
};

// Throws AllLost when no sample has a response time.
LatencyStats summarize(std::span<const ResponseTimeSample> samples, double bin_width_us = 10.0,
                       Exec exec = Exec::Parallel);

// Lower edges of the logarithmic bins covering [0, max_us].
std::vector<double> log_bin_edges(double max_us);

struct EchoRunResult {
    std::vector<ResponseTimeSample> samples;
    std::size_t late_echoes = 0;    // echoes that arrived after their timeout
    std::size_t mismatched = 0;     // echoes whose payload differed from what was sent
    double max_send_lateness_us = 0.0;
};

// Echoes every datagram back to its source verbatim until `stop` is set.
// Throws BindFailure.
void run_echo_server(const Endpoint& endpoint, const std::atomic<bool>& stop);
void run_echo_server(UdpSocket socket, const std::atomic<bool>& stop);

// Periodic sender with absolute scheduling: send k targets start + k*period.
EchoRunResult run_sender(const EchoConfig& config);

// The same benchmark on a virtual clock through a VirtualSwitch: the sender
// sits on `sender_id`, the echo server on `server_id`, zero service time.
EchoRunResult run_event_echo(const EchoConfig& config, const SwitchConfig& network, std::uint8_t sender_id,
                             std::uint8_t server_id);

inline constexpr const char* kSamplesHeader = "seq,send_us,recv_us,rtt_us,lost";
void write_samples_csv(std::ostream& out, std::span<const ResponseTimeSample> samples);
std::vector<ResponseTimeSample> read_samples_csv(std::istream& in);
void write_stats_csv(std::ostream& out, const LatencyStats& stats);

}  // namespace shipnet
