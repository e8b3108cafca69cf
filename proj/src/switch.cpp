#include "shipnet/switch.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <stdexcept>

namespace shipnet {

namespace {

std::uint64_t make_tag(std::size_t in_port, const Frame& f) {
    return (std::uint64_t{in_port} << 16) | (std::uint64_t{f.source} << 8) | f.destination;
}

}  // namespace

std::map<std::uint8_t, std::size_t> SwitchConfig::address_table() const {
    std::map<std::uint8_t, std::size_t> table;
    for (std::size_t i = 0; i < ports.size(); ++i) table.emplace(ports[i].address.id, i);
    return table;
}

void validate(const SwitchConfig& config) {
    std::set<std::uint8_t> seen;
    for (const auto& p : config.ports) {
        if (p.address.id == kBroadcast)
            throw ValidationError("node id 255 is reserved for broadcast");
        if (!seen.insert(p.address.id).second)
            throw ValidationError("duplicate node address " + std::to_string(p.address.id));
        validate(p.ingress);
        validate(p.egress);
    }
    if (config.mtu == 0) throw ValidationError("mtu must be positive");
}

VirtualSwitch::VirtualSwitch(SwitchConfig config) : config_(std::move(config)) {
    validate(config_);
    table_ = config_.address_table();
    ports_.reserve(config_.ports.size());
    for (const auto& p : config_.ports)
        ports_.push_back(PortState{LinkState(p.ingress.rng_seed), LinkState(p.egress.rng_seed), {}, {}});
}

std::optional<std::size_t> VirtualSwitch::port_of(std::uint8_t id) const {
    auto it = table_.find(id);
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

void VirtualSwitch::schedule_copy(std::size_t in_port, std::size_t out_port, const Frame& frame, SimTime now,
                                  ForwardResult& result) {
    auto& in = ports_[in_port];
    auto& out = ports_[out_port];
    ++in.counters.received;
    const std::uint32_t size = std::max<std::uint32_t>(frame.size_bytes(), 1);

    ScheduledCopy copy{out_port, std::nullopt};
    const auto at_switch = traverse_leg(config_.ports[in_port].ingress, size, now, in.ingress);
    if (at_switch) {
        const auto arrival = traverse_leg(config_.ports[out_port].egress, size, *at_switch, out.egress);
        if (arrival) {
            InFlightPacket p;
            p.payload = frame.payload;
            p.size_bytes = frame.size_bytes();
            p.ingress_time = now;
            p.deliver_time = *arrival;
            p.sequence = sequence_++;
            p.tag = make_tag(in_port, frame);
            copy.deliver_time = p.deliver_time;
            out.egress_queue.push(std::move(p));
            ++in.counters.queued;
        }
    }
    if (!copy.deliver_time) ++in.counters.dropped_loss;
    result.copies.push_back(copy);
}

ForwardResult VirtualSwitch::forward(const Frame& frame, SimTime now) {
    auto src = port_of(frame.source);
    if (!src) throw std::invalid_argument("frame source " + std::to_string(frame.source) + " is not configured");
    ForwardResult result;
    if (frame.size_bytes() > config_.mtu) {
        ++ports_[*src].counters.received;
        ++ports_[*src].counters.dropped_unknown;
        result.status = ForwardResult::Status::Oversize;
        return result;
    }
    if (frame.destination == kBroadcast) {
        for (std::size_t p = 0; p < ports_.size(); ++p)
            if (p != *src) schedule_copy(*src, p, frame, now, result);
        return result;
    }
    auto dst = port_of(frame.destination);
    if (!dst) {
        ++ports_[*src].counters.received;
        ++ports_[*src].counters.dropped_unknown;
        result.status = ForwardResult::Status::UnknownDestination;
        return result;
    }
    schedule_copy(*src, *dst, frame, now, result);
    return result;
}

std::vector<Delivery> VirtualSwitch::pop_ready(SimTime now) {
    std::vector<std::pair<std::uint64_t, Delivery>> ready;
    for (std::size_t port = 0; port < ports_.size(); ++port) {
        for (auto& p : ports_[port].egress_queue.pop_ready(now)) {
            Delivery d;
            d.deliver_time = p.deliver_time;
            d.ingress_time = p.ingress_time;
            d.egress_port = port;
            d.ingress_port = static_cast<std::size_t>(p.tag >> 16);
            d.frame.source = static_cast<std::uint8_t>((p.tag >> 8) & 0xff);
            d.frame.destination = static_cast<std::uint8_t>(p.tag & 0xff);
            d.frame.payload = std::move(p.payload);
            auto& c = ports_[d.ingress_port].counters;
            --c.queued;
            ++c.forwarded;
            ready.emplace_back(p.sequence, std::move(d));
        }
    }
    std::sort(ready.begin(), ready.end(), [](const auto& a, const auto& b) {
        if (a.second.deliver_time != b.second.deliver_time) return a.second.deliver_time < b.second.deliver_time;
        return a.first < b.first;
    });
    std::vector<Delivery> out;
    out.reserve(ready.size());
    for (auto& [seq, d] : ready) out.push_back(std::move(d));
    return out;
}

std::optional<SimTime> VirtualSwitch::next_delivery_time() const {
    std::optional<SimTime> best;
    for (const auto& p : ports_) {
        auto t = p.egress_queue.next_deliver_time();
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

std::vector<PortCounters> VirtualSwitch::counters() const {
    std::vector<PortCounters> out;
    out.reserve(ports_.size());
    for (const auto& p : ports_) out.push_back(p.counters);
    return out;
}

EventRunResult run_event_mode(const SwitchConfig& config, const std::vector<ScheduledFrame>& schedule) {
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i].at < schedule[i - 1].at) throw std::invalid_argument("traffic schedule is not time-ordered");

    VirtualSwitch sw(config);
    EventRunResult result;
    std::size_t next = 0;
    while (next < schedule.size() || sw.next_delivery_time()) {
        const auto due = sw.next_delivery_time();
        // Deliveries at time t precede injections at the same t.
        if (due && (next == schedule.size() || *due <= schedule[next].at)) {
            for (auto& d : sw.pop_ready(*due)) result.log.push_back(std::move(d));
        } else {
            const SimTime t = schedule[next].at;
            while (next < schedule.size() && schedule[next].at == t) sw.forward(schedule[next++].frame, t);
        }
    }
    result.counters = sw.counters();
    return result;
}

std::string format_delivery(const Delivery& d, const SwitchConfig& config) {
    const auto h = fnv1a(d.frame.payload.data(), d.frame.payload.size());
    return std::to_string(d.deliver_time.count()) + "," + std::to_string(config.ports[d.egress_port].address.id) +
           "," + std::to_string(d.frame.source) + "," + std::to_string(d.frame.destination) + "," +
           std::to_string(d.frame.payload.size()) + "," + hex64(h);
}

void write_counters_csv(std::ostream& out, const SwitchConfig& config, const std::vector<PortCounters>& counters) {
    out << "port,received,forwarded,dropped_loss,dropped_unknown,late\n";
    for (std::size_t i = 0; i < counters.size(); ++i) {
        const auto& c = counters[i];
        out << int{config.ports[i].address.id} << ',' << c.received << ',' << c.forwarded << ',' << c.dropped_loss
            << ',' << c.dropped_unknown << ',' << c.late << '\n';
    }
}

}  // namespace shipnet
