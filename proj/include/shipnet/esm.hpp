#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shipnet/metrics.hpp"
#include "shipnet/switch.hpp"

namespace shipnet {

struct EsmParams {
    double capacity_j = 1e9;
    double max_charge_w = 5e6;
    double max_discharge_w = 10e6;
    double soc_init = 0.50;
    double soc_target = 0.80;
    Micros publish_period{5'000};
    double kp = 0.05;          // 1/s
    double epsilon = 0.15;     // consensus step
    double deadband = 1e-3;
    double consensus_weight = 1.0;
};

// Throws ValidationError. `max_degree` bounds epsilon (0 < eps < 1/degree).
void validate(const EsmParams& p, std::size_t max_degree);

struct EsmState {
    double energy_j = 0.0;
    double power_w = 0.0;  // positive = charging
    double soc = 0.0;
    double consensus_estimate = 0.0;  // shared estimate of the fleet SOC deviation

    static EsmState at_soc(double soc, const EsmParams& p);
};

struct ControlMessage {
    std::uint8_t sender = 0;
    std::uint64_t seq = 0;
    SimTime sim_time{0};
    double consensus_estimate = 0.0;
    double soc = 0.0;
};

inline constexpr std::size_t kControlMessageSize = 33;
Bytes encode(const ControlMessage& m);
std::optional<ControlMessage> decode_control_message(std::span<const std::uint8_t> bytes);

struct OverlayTopology {
    enum class Kind { Star, Ring, Custom };
    Kind kind = Kind::Star;
    std::vector<std::vector<std::size_t>> neighbors;  // by ESM index

    static OverlayTopology star(std::size_t n);
    static OverlayTopology ring(std::size_t n);
    static OverlayTopology custom(std::vector<std::vector<std::size_t>> adjacency);

    std::size_t size() const { return neighbors.size(); }
    std::size_t max_degree() const;
};

// Throws ValidationError unless adjacency is symmetric, loop-free and connected.
void validate(const OverlayTopology& t);

struct PulseEvent {
    Micros start{0};
    Micros duration{0};
    double total_power_w = 0.0;  // shared equally across ESMs
};

// Power-integrator plant with power and energy saturation. Effective power is
// recomputed when an energy bound clips, so energy accounting stays exact.
EsmState step_soc(const EsmState& state, double commanded_w, Micros dt, const EsmParams& p);

// local + eps * sum(neighbor - local).
double consensus_update(double local_estimate, std::span<const double> neighbor_estimates, double epsilon);

// Charging command from the local SOC corrected by the fleet deviation
// estimate; zero inside the deadband.
double compute_charge_setpoint(const EsmState& state, const EsmParams& p);

// Earliest time after which every sample stays within target +/- band.
std::optional<Micros> settling_time(const TimeSeries& series, double target, double band);

// Crossings of the band boundary (entries and exits) up to settling.
std::size_t oscillation_count(const TimeSeries& series, double target, double band);

// One ESM charging controller: keeps the last estimate heard from each
// overlay neighbor and publishes its own every tick.
class EsmController {
public:
    EsmController(std::size_t index, EsmParams params, std::vector<std::size_t> neighbors);

    std::uint8_t node_id() const { return static_cast<std::uint8_t>(index_ + 1); }
    const std::vector<std::size_t>& neighbors() const { return neighbors_; }

    // Messages from non-neighbors and out-of-order sequence numbers are ignored.
    void on_message(const ControlMessage& m);

    struct TickOutput {
        double command_w = 0.0;
        ControlMessage message;
    };
    // Zero command until every neighbor has been heard from at least once.
    TickOutput tick(SimTime now, const EsmState& plant);

    bool warmed_up() const;
    double consensus_estimate() const { return estimate_; }

private:
    struct Heard {
        std::uint64_t seq = 0;
        double estimate = 0.0;
        bool any = false;
    };
    std::size_t index_;
    EsmParams params_;
    std::vector<std::size_t> neighbors_;
    std::map<std::size_t, Heard> heard_;
    std::uint64_t seq_ = 0;
    double estimate_ = 0.0;
};

struct EsmScenarioConfig {
    std::size_t esm_count = 5;
    EsmParams params;
    std::map<std::size_t, double> soc_init_override;  // ESM index -> initial SOC
    OverlayTopology overlay = OverlayTopology::star(5);
    SwitchConfig network;  // ports 1..N, one per ESM controller
    std::optional<PulseEvent> pulse;
    Micros horizon{300'000'000};
    Micros dt{1'000};
    Micros sample_period{100'000};
    std::uint64_t seed = 1;
    bool keep_delivery_log = false;
};

// Copies `config.network` with every port's leg seeds derived from `seed`.
SwitchConfig seeded_network(const SwitchConfig& network, std::uint64_t seed);

struct EsmRunResult {
    std::vector<std::string> labels;  // esm1..esmN
    std::vector<TimeSeries> soc;
    std::vector<double> energy_start_j;
    std::vector<double> energy_end_j;
    std::vector<double> power_integral_j;  // sum of effective P*dt
    std::vector<std::optional<Micros>> charge_start;  // first nonzero command
    std::vector<Micros> start_phase;
    std::vector<PortCounters> counters;
    std::uint64_t delivery_digest = kFnvOffset;
    std::uint64_t deliveries = 0;
    std::vector<std::string> delivery_log;  // only when keep_delivery_log
};

// Event-mode co-simulation of the ESM controllers over a VirtualSwitch.
// Throws ConfigError on inconsistent topology/addresses.
EsmRunResult run_scenario(const EsmScenarioConfig& config);

// Checks the switch has exactly the ports 1..N in order and the overlay size matches.
void check_consistency(const EsmScenarioConfig& config);

}  // namespace shipnet
