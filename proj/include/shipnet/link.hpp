#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "shipnet/common.hpp"
#include "shipnet/rng.hpp"

namespace shipnet {

// Statistical impairments of one directed link.
struct LinkSpec {
    Micros one_way_delay{0};
    Micros jitter_half_width{0};  // uniform +/- around the delay
    double loss_probability = 0.0;
    std::uint64_t bandwidth_bits_per_s = 0;  // 0 = unlimited
    std::uint64_t rng_seed = 0;

    bool ideal() const {
        return one_way_delay.count() == 0 && jitter_half_width.count() == 0 && loss_probability == 0.0 &&
               bandwidth_bits_per_s == 0;
    }
};

// Throws ValidationError naming the violated bound.
void validate(const LinkSpec& spec);

struct InFlightPacket {
    Bytes payload;
    std::uint32_t size_bytes = 0;
    SimTime ingress_time{0};
    SimTime deliver_time{0};
    std::uint64_t sequence = 0;
    std::uint64_t tag = 0;  // opaque to the link; the switch stores routing here
};

// Packets ordered by (deliver_time, sequence).
class DelayQueue {
public:
    void push(InFlightPacket packet);

    // Removes and returns every packet with deliver_time <= now, in order.
    std::vector<InFlightPacket> pop_ready(SimTime now);

    std::optional<SimTime> next_deliver_time() const;
    std::size_t size() const { return heap_.size(); }
    bool empty() const { return heap_.empty(); }

private:
    struct Later {
        bool operator()(const InFlightPacket& a, const InFlightPacket& b) const {
            if (a.deliver_time != b.deliver_time) return a.deliver_time > b.deliver_time;
            return a.sequence > b.sequence;
        }
    };
    std::priority_queue<InFlightPacket, std::vector<InFlightPacket>, Later> heap_;
};

// size * 8 / bandwidth, rounded up to whole microseconds; 0 when unlimited.
Micros compute_serialization_delay(std::uint32_t size_bytes, std::uint64_t bandwidth_bits_per_s);

// Mutable side of one directed link: its random stream, the time its
// transmitter becomes free, and the admission counter.
struct LinkState {
    explicit LinkState(std::uint64_t seed = 0) : rng(seed) {}
    RandomStream rng;
    SimTime busy_until{0};
    std::uint64_t next_sequence = 0;
};

// Draws the fate of one packet entering `spec` at `now`: nullopt when lost,
// otherwise its arrival time at the far end. Frames are serialized one after
// another, so the transmission starts at max(now, busy_until). Consumes one
// draw for the loss decision and, only when admitted with jitter, one for the
// jitter.
std::optional<SimTime> traverse_leg(const LinkSpec& spec, std::uint32_t size_bytes, SimTime now, LinkState& state);

struct LinkCounters {
    std::uint64_t admitted = 0;
    std::uint64_t dropped = 0;
    std::uint64_t delivered = 0;
};

// One directed impaired link: spec, its random stream, its queue and counters.
class ImpairedLink {
public:
    explicit ImpairedLink(LinkSpec spec);

    const LinkSpec& spec() const { return spec_; }

    // Returns the scheduled delivery time, or nullopt when the packet was lost.
    std::optional<SimTime> admit(Bytes payload, SimTime now, std::uint64_t tag = 0);
    std::vector<InFlightPacket> pop_ready(SimTime now);

    std::optional<SimTime> next_deliver_time() const { return queue_.next_deliver_time(); }
    const DelayQueue& queue() const { return queue_; }
    const LinkCounters& counters() const { return counters_; }

private:
    LinkSpec spec_;
    LinkState state_;
    DelayQueue queue_;
    LinkCounters counters_;
};

// Free-function form: applies `spec` with `state` and inserts into `queue`.
// The sequence counter in `state` advances only on admission.
std::optional<SimTime> admit(Bytes payload, const LinkSpec& spec, DelayQueue& queue, SimTime now, LinkState& state,
                             std::uint64_t tag = 0);

}  // namespace shipnet
