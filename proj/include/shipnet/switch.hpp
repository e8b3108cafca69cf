#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shipnet/link.hpp"

namespace shipnet {

inline constexpr std::uint8_t kBroadcast = 255;

struct NodeAddress {
    std::uint8_t id = 0;
    std::string label;
};

struct PortConfig {
    NodeAddress address;
    LinkSpec ingress;
    LinkSpec egress;
};

struct SwitchConfig {
    std::vector<PortConfig> ports;
    std::uint32_t mtu = 1500;

    // node id -> port index; total over configured ports.
    std::map<std::uint8_t, std::size_t> address_table() const;
};

// Throws ValidationError on duplicate or reserved addresses and bad links.
void validate(const SwitchConfig& config);

struct Frame {
    std::uint8_t source = 0;
    std::uint8_t destination = kBroadcast;
    Bytes payload;

    std::uint32_t size_bytes() const { return static_cast<std::uint32_t>(payload.size()); }
};

// Counted in frame copies attributed to the ingress port, so that
// received == forwarded + dropped_loss + dropped_unknown + queued per port.
struct PortCounters {
    std::uint64_t received = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t dropped_loss = 0;
    std::uint64_t dropped_unknown = 0;
    std::uint64_t late = 0;
    std::uint64_t queued = 0;
};

struct ScheduledCopy {
    std::size_t egress_port = 0;
    std::optional<SimTime> deliver_time;  // nullopt = dropped on either leg
};

struct ForwardResult {
    enum class Status { Ok, UnknownDestination, Oversize };
    Status status = Status::Ok;
    std::vector<ScheduledCopy> copies;
};

struct Delivery {
    SimTime deliver_time{0};
    SimTime ingress_time{0};
    std::size_t egress_port = 0;
    std::size_t ingress_port = 0;
    Frame frame;
};

// Static-address multi-port switch. Each copy crosses the ingress leg of the
// source port and the egress leg of the destination port; all latency comes
// from those LinkSpecs (no base forwarding cost).
class VirtualSwitch {
public:
    explicit VirtualSwitch(SwitchConfig config);

    const SwitchConfig& config() const { return config_; }
    std::size_t port_count() const { return ports_.size(); }
    std::optional<std::size_t> port_of(std::uint8_t id) const;

    // Pre: frame.source is configured (std::invalid_argument otherwise).
    ForwardResult forward(const Frame& frame, SimTime now);

    // Every copy due at or before `now`, ordered by (deliver_time, admission).
    std::vector<Delivery> pop_ready(SimTime now);
    std::optional<SimTime> next_delivery_time() const;

    // A datagram that carried no usable frame (e.g. missing routing header).
    void count_unroutable(std::size_t ingress_port) {
        auto& c = ports_.at(ingress_port).counters;
        ++c.received;
        ++c.dropped_unknown;
    }
    void record_late(std::size_t ingress_port) { ++ports_.at(ingress_port).counters.late; }
    std::vector<PortCounters> counters() const;

private:
    struct PortState {
        LinkState ingress;
        LinkState egress;
        DelayQueue egress_queue;
        PortCounters counters;
    };

    void schedule_copy(std::size_t in_port, std::size_t out_port, const Frame& frame, SimTime now,
                       ForwardResult& result);

    SwitchConfig config_;
    std::map<std::uint8_t, std::size_t> table_;
    std::vector<PortState> ports_;
    std::uint64_t sequence_ = 0;
};

struct ScheduledFrame {
    SimTime at{0};
    Frame frame;
};

struct EventRunResult {
    std::vector<Delivery> log;
    std::vector<PortCounters> counters;
};

// Deterministic virtual-clock run over a time-ordered injection schedule.
EventRunResult run_event_mode(const SwitchConfig& config, const std::vector<ScheduledFrame>& schedule);

// Delivery-log line: deliver_us,port,source,destination,size,payload_fnv
std::string format_delivery(const Delivery& d, const SwitchConfig& config);
inline constexpr const char* kDeliveryLogHeader = "deliver_us,port,source,destination,size,payload_fnv";

// port,received,forwarded,dropped_loss,dropped_unknown,late
void write_counters_csv(std::ostream& out, const SwitchConfig& config, const std::vector<PortCounters>& counters);

}  // namespace shipnet
