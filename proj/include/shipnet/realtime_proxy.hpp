#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "shipnet/switch.hpp"
#include "shipnet/udp.hpp"

namespace shipnet {

// Where one switch port lives on the host: the proxy listens on `listen`;
// frames for the port go to `peer` (learned from the last sender if unset).
struct ProxyBinding {
    Endpoint listen;
    std::optional<Endpoint> peer;
};

// Datagrams into a proxy port carry a 1-byte destination id prefix
// (kBroadcast for all); datagrams leaving the proxy carry a 1-byte source id.
Bytes wrap_for_proxy(std::uint8_t destination, std::span<const std::uint8_t> payload);

// Wall-clock datagram relay with VirtualSwitch semantics. One receive thread
// per port plus one delivery scheduler; the switch state is shared under a
// mutex that is never held across a socket call.
class RealtimeProxy {
public:
    // Binds every listen endpoint; throws BindFailure.
    RealtimeProxy(SwitchConfig config, const std::map<std::uint8_t, ProxyBinding>& bindings);
    ~RealtimeProxy();

    RealtimeProxy(const RealtimeProxy&) = delete;
    RealtimeProxy& operator=(const RealtimeProxy&) = delete;

    void start();
    void stop();

    Endpoint listen_endpoint(std::uint8_t id) const;
    std::vector<PortCounters> counters() const;
    const SwitchConfig& config() const { return sw_.config(); }

    // Deliveries later than this past their scheduled time count as late.
    static constexpr Micros kLateQuantum{1000};

private:
    struct Port {
        std::uint8_t id = 0;
        UdpSocket socket;
        std::optional<Endpoint> peer;
    };

    SimTime now() const;
    void receive_loop(std::size_t port);
    void deliver_loop();

    VirtualSwitch sw_;
    std::vector<Port> ports_;
    mutable std::mutex mutex_;
    std::condition_variable wake_;
    std::atomic<bool> running_{false};
    std::chrono::steady_clock::time_point epoch_;
    std::vector<std::thread> threads_;
};

// Runs a proxy until `stop` becomes true. Whenever `dump` is set the current
// counters are written to `counters_out` and the flag is cleared; a final dump
// happens on shutdown.
void run_realtime_proxy(const SwitchConfig& config, const std::map<std::uint8_t, ProxyBinding>& bindings,
                        const std::atomic<bool>& stop, std::atomic<bool>& dump, std::ostream& counters_out);

}  // namespace shipnet
