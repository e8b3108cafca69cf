#include "shipnet/realtime_proxy.hpp"

#include <array>
#include <ostream>

namespace shipnet {

Bytes wrap_for_proxy(std::uint8_t destination, std::span<const std::uint8_t> payload) {
    Bytes out;
    out.reserve(payload.size() + 1);
    out.push_back(destination);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

RealtimeProxy::RealtimeProxy(SwitchConfig config, const std::map<std::uint8_t, ProxyBinding>& bindings)
    : sw_(std::move(config)) {
    for (const auto& pc : sw_.config().ports) {
        auto it = bindings.find(pc.address.id);
        if (it == bindings.end())
            throw ConfigError("no endpoint binding for node " + std::to_string(pc.address.id));
        ports_.push_back(Port{pc.address.id, UdpSocket::bound(it->second.listen), it->second.peer});
    }
}

RealtimeProxy::~RealtimeProxy() { stop(); }

SimTime RealtimeProxy::now() const {
    return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - epoch_);
}

void RealtimeProxy::start() {
    if (running_.exchange(true)) return;
    epoch_ = std::chrono::steady_clock::now();
    for (std::size_t p = 0; p < ports_.size(); ++p) threads_.emplace_back([this, p] { receive_loop(p); });
    threads_.emplace_back([this] { deliver_loop(); });
}

void RealtimeProxy::stop() {
    if (!running_.exchange(false)) return;
    wake_.notify_all();
    for (auto& t : threads_) t.join();
    threads_.clear();
}

Endpoint RealtimeProxy::listen_endpoint(std::uint8_t id) const {
    for (const auto& p : ports_)
        if (p.id == id) return p.socket.local_endpoint();
    throw ConfigError("unknown node " + std::to_string(id));
}

std::vector<PortCounters> RealtimeProxy::counters() const {
    std::lock_guard lock(mutex_);
    return sw_.counters();
}

void RealtimeProxy::receive_loop(std::size_t port) {
    std::array<std::uint8_t, 65536> buf{};
    Endpoint from;
    while (running_.load()) {
        auto n = ports_[port].socket.recv_from(buf, from, Micros{50'000});
        if (!n) continue;
        const SimTime t = now();
        Frame frame;
        frame.source = ports_[port].id;
        std::lock_guard lock(mutex_);
        if (!ports_[port].peer) ports_[port].peer = from;
        if (*n == 0) {
            sw_.count_unroutable(port);
            continue;
        }
        frame.destination = buf[0];
        frame.payload.assign(buf.begin() + 1, buf.begin() + static_cast<std::ptrdiff_t>(*n));
        sw_.forward(frame, t);
        wake_.notify_one();
    }
}

void RealtimeProxy::deliver_loop() {
    std::unique_lock lock(mutex_);
    while (running_.load()) {
        const auto next = sw_.next_delivery_time();
        if (!next) {
            wake_.wait_for(lock, std::chrono::milliseconds(50));
            continue;
        }
        const auto deadline = epoch_ + *next;
        if (std::chrono::steady_clock::now() < deadline) {
            wake_.wait_until(lock, deadline);
            continue;
        }
        auto ready = sw_.pop_ready(now());
        std::vector<std::optional<Endpoint>> peers;
        peers.reserve(ready.size());
        for (const auto& d : ready) peers.push_back(ports_[d.egress_port].peer);
        lock.unlock();
        std::vector<std::size_t> late;
        for (std::size_t i = 0; i < ready.size(); ++i) {
            const auto& d = ready[i];
            if (peers[i]) {
                const Bytes wire = wrap_for_proxy(d.frame.source, d.frame.payload);
                ports_[d.egress_port].socket.send_to(wire, *peers[i]);
            }
            if (now() - d.deliver_time > kLateQuantum) late.push_back(d.ingress_port);
        }
        lock.lock();
        for (auto p : late) sw_.record_late(p);
    }
}

void run_realtime_proxy(const SwitchConfig& config, const std::map<std::uint8_t, ProxyBinding>& bindings,
                        const std::atomic<bool>& stop, std::atomic<bool>& dump, std::ostream& counters_out) {
    RealtimeProxy proxy(config, bindings);
    proxy.start();
    while (!stop.load()) {
        if (dump.exchange(false)) {
            write_counters_csv(counters_out, proxy.config(), proxy.counters());
            counters_out.flush();
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    proxy.stop();
    write_counters_csv(counters_out, proxy.config(), proxy.counters());
    counters_out.flush();
}

}  // namespace shipnet
