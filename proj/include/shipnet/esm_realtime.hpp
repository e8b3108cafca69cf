#pragma once

#include <map>

#include "shipnet/esm.hpp"
#include "shipnet/udp.hpp"

namespace shipnet {

struct RealtimeTransport {
    bool direct = false;  // true: datagrams go straight to neighbor endpoints
    std::map<std::uint8_t, Endpoint> endpoints;
    std::map<std::uint8_t, Endpoint> proxy_endpoints;
};

// Wall-clock run: each controller owns a thread, a UDP socket and its plant.
// With proxy transport an in-process RealtimeProxy carries the traffic and its
// counters are returned; with direct transport the counters stay zero and
// `deliveries` counts received control messages.
EsmRunResult run_realtime_scenario(const EsmScenarioConfig& config, const RealtimeTransport& transport);

}  // namespace shipnet
