#include "shipnet/link.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

namespace shipnet {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void validate(const LinkSpec& spec) {
    if (!(spec.loss_probability >= 0.0 && spec.loss_probability <= 1.0))
        throw ValidationError("loss_probability = " + std::to_string(spec.loss_probability) +
                              " violates 0 <= loss_probability <= 1");
    if (spec.one_way_delay.count() < 0)
        throw ValidationError("one_way_delay must be non-negative");
    if (spec.jitter_half_width.count() < 0)
        throw ValidationError("jitter_half_width must be non-negative");
    if (spec.jitter_half_width > spec.one_way_delay)
        throw ValidationError("jitter_half_width = " + std::to_string(spec.jitter_half_width.count()) +
                              " us violates jitter_half_width <= one_way_delay (" +
                              std::to_string(spec.one_way_delay.count()) + " us)");
}

void DelayQueue::push(InFlightPacket packet) { heap_.push(std::move(packet)); }

std::vector<InFlightPacket> DelayQueue::pop_ready(SimTime now) {
    std::vector<InFlightPacket> out;
    while (!heap_.empty() && heap_.top().deliver_time <= now) {
        // top() is const; the element is discarded right after, so moving is safe.
        out.push_back(std::move(const_cast<InFlightPacket&>(heap_.top())));
        heap_.pop();
    }
    return out;
}

std::optional<SimTime> DelayQueue::next_deliver_time() const {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().deliver_time;
}

Micros compute_serialization_delay(std::uint32_t size_bytes, std::uint64_t bandwidth_bits_per_s) {
    if (bandwidth_bits_per_s == 0) return Micros{0};
    const std::uint64_t bit_us = std::uint64_t{size_bytes} * 8u * 1'000'000u;
    return Micros{static_cast<std::int64_t>((bit_us + bandwidth_bits_per_s - 1) / bandwidth_bits_per_s)};
}

std::optional<SimTime> traverse_leg(const LinkSpec& spec, std::uint32_t size_bytes, SimTime now, LinkState& state) {
    if (state.rng.next_unit() < spec.loss_probability) return std::nullopt;
    const SimTime sent = std::max(now, state.busy_until) + compute_serialization_delay(size_bytes, spec.bandwidth_bits_per_s);
    state.busy_until = sent;
    SimTime arrival = sent + spec.one_way_delay;
    const auto j = spec.jitter_half_width.count();
    if (j > 0) arrival += Micros{state.rng.next_int(-j, j)};
    return arrival;
}

std::optional<SimTime> admit(Bytes payload, const LinkSpec& spec, DelayQueue& queue, SimTime now, LinkState& state,
                             std::uint64_t tag) {
    const auto size = static_cast<std::uint32_t>(payload.size());
    const auto at = traverse_leg(spec, size == 0 ? 1 : size, now, state);
    if (!at) return std::nullopt;
    InFlightPacket p;
    p.size_bytes = size;
    p.payload = std::move(payload);
    p.ingress_time = now;
    p.deliver_time = *at;
    p.sequence = state.next_sequence++;
    p.tag = tag;
    queue.push(std::move(p));
    return at;
}

ImpairedLink::ImpairedLink(LinkSpec spec) : spec_(spec), state_(spec.rng_seed) { validate(spec_); }

std::optional<SimTime> ImpairedLink::admit(Bytes payload, SimTime now, std::uint64_t tag) {
    auto at = shipnet::admit(std::move(payload), spec_, queue_, now, state_, tag);
    if (at)
        ++counters_.admitted;
    else
        ++counters_.dropped;
    return at;
}

std::vector<InFlightPacket> ImpairedLink::pop_ready(SimTime now) {
    auto out = queue_.pop_ready(now);
    counters_.delivered += out.size();
    return out;
}

}  // namespace shipnet
