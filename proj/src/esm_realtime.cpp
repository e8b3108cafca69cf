#include "shipnet/esm_realtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "shipnet/realtime_proxy.hpp"
#include "shipnet/rng.hpp"

namespace shipnet {

namespace {

using Clock = std::chrono::steady_clock;

struct NodeResult {
    TimeSeries soc;
    double energy_start = 0, energy_end = 0, power_integral = 0;
    std::optional<Micros> charge_start;
    std::uint64_t received = 0;
    std::string error;
};

}  // namespace

EsmRunResult run_realtime_scenario(const EsmScenarioConfig& c, const RealtimeTransport& tr) {
    check_consistency(c);
    const std::size_t n = c.esm_count;
    const EsmParams& p = c.params;
    for (std::size_t i = 1; i <= n; ++i) {
        const auto id = static_cast<std::uint8_t>(i);
        if (!tr.endpoints.count(id)) throw ConfigError("missing endpoint for ESM " + std::to_string(i));
        if (!tr.direct && !tr.proxy_endpoints.count(id)) throw ConfigError("missing proxy endpoint for port " + std::to_string(i));
    }

    std::unique_ptr<RealtimeProxy> proxy;
    if (!tr.direct) {
        std::map<std::uint8_t, ProxyBinding> bindings;
        for (std::size_t i = 1; i <= n; ++i) {
            const auto id = static_cast<std::uint8_t>(i);
            bindings[id] = ProxyBinding{tr.proxy_endpoints.at(id), tr.endpoints.at(id)};
        }
        proxy = std::make_unique<RealtimeProxy>(seeded_network(c.network, c.seed), bindings);
    }

    std::vector<UdpSocket> sockets;
    for (std::size_t i = 1; i <= n; ++i) sockets.push_back(UdpSocket::bound(tr.endpoints.at(static_cast<std::uint8_t>(i))));

    EsmRunResult r;
    RandomStream phase_rng(derive_seed(c.seed, 0x7068617365ull));
    for (std::size_t i = 0; i < n; ++i) {
        r.labels.push_back("esm" + std::to_string(i + 1));
        r.start_phase.push_back(Micros{phase_rng.next_int(0, p.publish_period.count() - 1)});
    }
    const bool broadcast = c.overlay.kind == OverlayTopology::Kind::Star;

    if (proxy) proxy->start();
    const auto epoch = Clock::now() + std::chrono::milliseconds(20);
    std::vector<NodeResult> nodes(n);

    auto node = [&](std::size_t i) {
        NodeResult& out = nodes[i];
        try {
            const UdpSocket& sock = sockets[i];
            EsmController ctl(i, p, c.overlay.neighbors[i]);
            auto it = c.soc_init_override.find(i);
            EsmState plant = EsmState::at_soc(it == c.soc_init_override.end() ? p.soc_init : it->second, p);
            out.energy_start = plant.energy_j;
            out.soc = TimeSeries{SimTime{0}, c.sample_period, {}};
            double command = 0.0;
            SimTime next_tick = r.start_phase[i];
            SimTime plant_t{0};
            std::vector<std::uint8_t> buf(2048);

            auto elapsed = [&] {
                return std::chrono::duration_cast<Micros>(Clock::now() - epoch);
            };
            auto send = [&](const Bytes& payload) {
                if (tr.direct) {
                    for (auto j : ctl.neighbors()) sock.send_to(payload, tr.endpoints.at(static_cast<std::uint8_t>(j + 1)));
                } else if (broadcast) {
                    sock.send_to(wrap_for_proxy(kBroadcast, payload), tr.proxy_endpoints.at(ctl.node_id()));
                } else {
                    for (auto j : ctl.neighbors())
                        sock.send_to(wrap_for_proxy(static_cast<std::uint8_t>(j + 1), payload),
                                     tr.proxy_endpoints.at(ctl.node_id()));
                }
            };

            while (plant_t <= c.horizon) {
                const SimTime now = elapsed();
                // Catch up plant steps and ticks that are due, in time order.
                while (plant_t <= c.horizon && (plant_t <= now || next_tick <= now)) {
                    if (next_tick <= plant_t) {
                        auto t = ctl.tick(next_tick, plant);
                        command = t.command_w;
                        plant.consensus_estimate = ctl.consensus_estimate();
                        send(encode(t.message));
                        next_tick += p.publish_period;
                        continue;
                    }
                    if (plant_t.count() % c.sample_period.count() == 0) out.soc.values.push_back(plant.soc);
                    if (plant_t == c.horizon) {
                        plant_t += c.dt;
                        break;
                    }
                    const bool pulse_on =
                        c.pulse && plant_t >= c.pulse->start && plant_t < c.pulse->start + c.pulse->duration;
                    const double cmd = pulse_on
                                           ? -std::min(c.pulse->total_power_w / static_cast<double>(n), p.max_discharge_w)
                                           : command;
                    if (!out.charge_start && cmd > 0.0) out.charge_start = plant_t;
                    plant = step_soc(plant, cmd, c.dt, p);
                    out.power_integral += plant.power_w * to_seconds(c.dt);
                    plant_t += c.dt;
                }
                if (plant_t > c.horizon) break;
                const SimTime wake = std::min(plant_t, next_tick);
                const Micros wait = std::max(Micros{0}, wake - elapsed());
                Endpoint from;
                if (auto len = sock.recv_from(buf, from, wait)) {
                    std::span<const std::uint8_t> data(buf.data(), *len);
                    if (!tr.direct) {
                        if (data.empty()) continue;
                        data = data.subspan(1);
                    }
                    if (auto m = decode_control_message(data)) {
                        ++out.received;
                        ctl.on_message(*m);
                    }
                }
            }
            out.energy_end = plant.energy_j;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(node, i);
    for (auto& t : threads) t.join();
    if (proxy) proxy->stop();

    for (auto& nr : nodes)
        if (!nr.error.empty()) throw Error("real-time controller failed: " + nr.error);
    for (auto& nr : nodes) {
        r.soc.push_back(std::move(nr.soc));
        r.energy_start_j.push_back(nr.energy_start);
        r.energy_end_j.push_back(nr.energy_end);
        r.power_integral_j.push_back(nr.power_integral);
        r.charge_start.push_back(nr.charge_start);
        r.deliveries += nr.received;
    }
    r.counters = proxy ? proxy->counters() : std::vector<PortCounters>(n);
    return r;
}

}  // namespace shipnet
