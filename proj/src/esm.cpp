#include "shipnet/esm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <queue>
#include <set>

#include "shipnet/rng.hpp"

namespace shipnet {

void validate(const EsmParams& p, std::size_t max_degree) {
    auto fraction = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " = " + std::to_string(v) + " violates 0 <= " + name + " <= 1");
    };
    fraction(p.soc_init, "soc_init");
    fraction(p.soc_target, "soc_target");
    if (!(p.capacity_j > 0)) throw ValidationError("capacity must be > 0");
    if (!(p.max_charge_w > 0) || !(p.max_discharge_w > 0)) throw ValidationError("power limits must be > 0");
    if (p.publish_period.count() <= 0) throw ValidationError("publish_period must be > 0");
    if (!(p.kp > 0)) throw ValidationError("kp must be > 0");
    if (!(p.deadband >= 0)) throw ValidationError("deadband must be >= 0");
    if (!(p.consensus_weight >= 0)) throw ValidationError("consensus_weight must be >= 0");
    const double bound = max_degree == 0 ? 1.0 : 1.0 / static_cast<double>(max_degree);
    if (!(p.epsilon > 0.0 && p.epsilon < bound))
        throw ValidationError("epsilon = " + std::to_string(p.epsilon) + " violates 0 < epsilon < 1/max_degree = " +
                              std::to_string(bound));
}

EsmState EsmState::at_soc(double soc, const EsmParams& p) {
    EsmState s;
    s.energy_j = soc * p.capacity_j;
    s.soc = s.energy_j / p.capacity_j;
    s.consensus_estimate = p.soc_target - s.soc;
    return s;
}

Bytes encode(const ControlMessage& m) {
    Bytes out(kControlMessageSize);
    auto put = [&out](std::size_t at, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
    };
    out[0] = m.sender;
    put(1, m.seq);
    put(9, static_cast<std::uint64_t>(m.sim_time.count()));
    put(17, std::bit_cast<std::uint64_t>(m.consensus_estimate));
    put(25, std::bit_cast<std::uint64_t>(m.soc));
    return out;
}

std::optional<ControlMessage> decode_control_message(std::span<const std::uint8_t> b) {
    if (b.size() != kControlMessageSize) return std::nullopt;
    auto get = [&b](std::size_t at) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[at + i]} << (8 * i);
        return v;
    };
    ControlMessage m;
    m.sender = b[0];
    m.seq = get(1);
    m.sim_time = Micros{static_cast<std::int64_t>(get(9))};
    m.consensus_estimate = std::bit_cast<double>(get(17));
    m.soc = std::bit_cast<double>(get(25));
    if (!std::isfinite(m.consensus_estimate) || !std::isfinite(m.soc)) return std::nullopt;
    return m;
}

OverlayTopology OverlayTopology::star(std::size_t n) {
    OverlayTopology t;
    t.kind = Kind::Star;
    t.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) t.neighbors[i].push_back(j);
    return t;
}

OverlayTopology OverlayTopology::ring(std::size_t n) {
    OverlayTopology t;
    t.kind = Kind::Ring;
    t.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::size_t> nb{(i + 1) % n, (i + n - 1) % n};
        nb.erase(i);
        t.neighbors[i].assign(nb.begin(), nb.end());
    }
    return t;
}

OverlayTopology OverlayTopology::custom(std::vector<std::vector<std::size_t>> adjacency) {
    OverlayTopology t;
    t.kind = Kind::Custom;
    t.neighbors = std::move(adjacency);
    for (auto& nb : t.neighbors) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return t;
}

std::size_t OverlayTopology::max_degree() const {
    std::size_t d = 0;
    for (const auto& nb : neighbors) d = std::max(d, nb.size());
    return d;
}

void validate(const OverlayTopology& t) {
    const auto n = t.size();
    if (n == 0) throw ValidationError("overlay has no nodes");
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : t.neighbors[i]) {
            if (j >= n) throw ValidationError("overlay neighbor index out of range");
            if (j == i) throw ValidationError("overlay node " + std::to_string(i + 1) + " lists itself as neighbor");
            const auto& back = t.neighbors[j];
            if (std::find(back.begin(), back.end(), i) == back.end())
                throw ValidationError("overlay adjacency is not symmetric between " + std::to_string(i + 1) +
                                      " and " + std::to_string(j + 1));
        }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (auto j : t.neighbors[i])
            if (!seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ValidationError("overlay graph is not connected");
}

EsmState step_soc(const EsmState& state, double commanded_w, Micros dt, const EsmParams& p) {
    if (dt.count() <= 0) throw std::invalid_argument("dt must be > 0");
    const double h = to_seconds(dt);
    EsmState next = state;
    double power = std::clamp(commanded_w, -p.max_discharge_w, p.max_charge_w);
    double energy = state.energy_j + power * h;
    if (energy > p.capacity_j || energy < 0.0) {
        energy = std::clamp(energy, 0.0, p.capacity_j);
        power = (energy - state.energy_j) / h;
    }
    next.energy_j = energy;
    next.power_w = power;
    next.soc = energy / p.capacity_j;
    return next;
}

double consensus_update(double local_estimate, std::span<const double> neighbor_estimates, double epsilon) {
    double pull = 0.0;
    for (double v : neighbor_estimates) pull += v - local_estimate;
    return local_estimate + epsilon * pull;
}

double compute_charge_setpoint(const EsmState& state, const EsmParams& p) {
    const double deviation = p.soc_target - state.soc;
    if (std::fabs(deviation) < p.deadband) return 0.0;
    const double corrected_soc = state.soc + p.consensus_weight * (state.consensus_estimate - deviation);
    const double command = p.kp * (p.soc_target - corrected_soc) * p.capacity_j;
    return std::clamp(command, -p.max_discharge_w, p.max_charge_w);
}

std::optional<Micros> settling_time(const TimeSeries& series, double target, double band) {
    if (!(band > 0.0)) throw std::invalid_argument("band must be > 0");
    const auto& v = series.values;
    std::size_t first_settled = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::fabs(v[i] - target) > band) first_settled = i + 1;
    if (v.empty() || first_settled == v.size()) return std::nullopt;
    return series.t0 + series.dt * static_cast<std::int64_t>(first_settled);
}

std::size_t oscillation_count(const TimeSeries& series, double target, double band) {
    if (!(band > 0.0)) throw std::invalid_argument("band must be > 0");
    const auto& v = series.values;
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const bool was_in = std::fabs(v[i - 1] - target) <= band;
        const bool is_in = std::fabs(v[i] - target) <= band;
        if (was_in != is_in) ++crossings;
    }
    return crossings;
}

EsmController::EsmController(std::size_t index, EsmParams params, std::vector<std::size_t> neighbors)
    : index_(index), params_(params), neighbors_(std::move(neighbors)) {
    for (auto j : neighbors_) heard_[j] = Heard{};
}

void EsmController::on_message(const ControlMessage& m) {
    if (m.sender == 0) return;
    auto it = heard_.find(static_cast<std::size_t>(m.sender - 1));
    if (it == heard_.end()) return;
    auto& h = it->second;
    if (h.any && m.seq <= h.seq) return;
    h.any = true;
    h.seq = m.seq;
    h.estimate = m.consensus_estimate;
}

bool EsmController::warmed_up() const {
    return std::all_of(heard_.begin(), heard_.end(), [](const auto& kv) { return kv.second.any; });
}

EsmController::TickOutput EsmController::tick(SimTime now, const EsmState& plant) {
    std::vector<double> held;
    held.reserve(heard_.size());
    for (const auto& [j, h] : heard_)
        if (h.any) held.push_back(h.estimate);
    estimate_ = consensus_update(params_.soc_target - plant.soc, held, params_.epsilon);

    TickOutput out;
    if (warmed_up()) {
        EsmState corrected = plant;
        corrected.consensus_estimate = estimate_;
        out.command_w = compute_charge_setpoint(corrected, params_);
    }
    out.message = ControlMessage{node_id(), ++seq_, now, estimate_, plant.soc};
    return out;
}

SwitchConfig seeded_network(const SwitchConfig& network, std::uint64_t seed) {
    SwitchConfig out = network;
    for (std::size_t i = 0; i < out.ports.size(); ++i) {
        out.ports[i].ingress.rng_seed = derive_seed(seed, 2 * i + 1);
        out.ports[i].egress.rng_seed = derive_seed(seed, 2 * i + 2);
    }
    return out;
}

void check_consistency(const EsmScenarioConfig& c) {
    if (c.esm_count == 0) throw ConfigError("no ESMs configured");
    if (c.overlay.size() != c.esm_count)
        throw ConfigError("overlay has " + std::to_string(c.overlay.size()) + " nodes for " +
                          std::to_string(c.esm_count) + " ESMs");
    if (c.network.ports.size() != c.esm_count)
        throw ConfigError("switch has " + std::to_string(c.network.ports.size()) + " ports for " +
                          std::to_string(c.esm_count) + " ESMs");
    for (std::size_t i = 0; i < c.esm_count; ++i)
        if (c.network.ports[i].address.id != i + 1)
            throw ConfigError("switch port " + std::to_string(i) + " must carry node id " + std::to_string(i + 1));
    for (const auto& [idx, soc] : c.soc_init_override)
        if (idx >= c.esm_count) throw ConfigError("soc_init override for unknown ESM " + std::to_string(idx + 1));
    try {
        validate(c.overlay);
        validate(c.params, c.overlay.max_degree());
        validate(c.network);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (c.dt.count() <= 0 || c.horizon <= c.dt) throw ConfigError("horizon > dt > 0 is required");
    if (c.horizon.count() % c.dt.count() != 0) throw ConfigError("horizon must be a multiple of dt");
    if (c.sample_period.count() <= 0 || c.sample_period.count() % c.dt.count() != 0)
        throw ConfigError("sample_period must be a positive multiple of dt");
}

EsmRunResult run_scenario(const EsmScenarioConfig& c) {
    check_consistency(c);
    const std::size_t n = c.esm_count;
    const EsmParams& p = c.params;
    VirtualSwitch sw(seeded_network(c.network, c.seed));

    EsmRunResult r;
    std::vector<EsmState> plant;
    std::vector<EsmController> controllers;
    std::vector<double> command(n, 0.0);
    std::vector<SimTime> next_tick(n);
    RandomStream phase_rng(derive_seed(c.seed, 0x7068617365ull));
    for (std::size_t i = 0; i < n; ++i) {
        r.labels.push_back("esm" + std::to_string(i + 1));
        auto it = c.soc_init_override.find(i);
        plant.push_back(EsmState::at_soc(it == c.soc_init_override.end() ? p.soc_init : it->second, p));
        controllers.emplace_back(i, p, c.overlay.neighbors[i]);
        r.start_phase.push_back(Micros{phase_rng.next_int(0, p.publish_period.count() - 1)});
        next_tick[i] = r.start_phase.back();
        r.soc.push_back(TimeSeries{SimTime{0}, c.sample_period, {}});
        r.energy_start_j.push_back(plant.back().energy_j);
    }
    r.power_integral_j.assign(n, 0.0);
    r.charge_start.assign(n, std::nullopt);
    const bool broadcast = c.overlay.kind == OverlayTopology::Kind::Star;

    auto deliver = [&](SimTime t) {
        for (auto& d : sw.pop_ready(t)) {
            const std::string line = format_delivery(d, sw.config());
            r.delivery_digest = fnv1a(line + "\n", r.delivery_digest);
            ++r.deliveries;
            if (c.keep_delivery_log) r.delivery_log.push_back(line);
            if (auto m = decode_control_message(d.frame.payload)) controllers[d.egress_port].on_message(*m);
        }
    };

    SimTime plant_next{0};
    while (true) {
        const SimTime tick_next = *std::min_element(next_tick.begin(), next_tick.end());
        const auto due = sw.next_delivery_time();
        SimTime t = std::min(plant_next, tick_next);
        if (due) t = std::min(t, *due);
        if (t > c.horizon) break;

        if (due && *due == t) {
            deliver(t);
            continue;
        }
        if (tick_next == t) {
            for (std::size_t i = 0; i < n; ++i) {
                if (next_tick[i] != t) continue;
                auto out = controllers[i].tick(t, plant[i]);
                command[i] = out.command_w;
                plant[i].consensus_estimate = controllers[i].consensus_estimate();
                Bytes payload = encode(out.message);
                if (broadcast) {
                    sw.forward(Frame{controllers[i].node_id(), kBroadcast, std::move(payload)}, t);
                } else {
                    for (auto j : controllers[i].neighbors())
                        sw.forward(Frame{controllers[i].node_id(), static_cast<std::uint8_t>(j + 1), payload}, t);
                }
                next_tick[i] = t + p.publish_period;
            }
            continue;
        }

        // plant step at t
        if (t.count() % c.sample_period.count() == 0)
            for (std::size_t i = 0; i < n; ++i) r.soc[i].values.push_back(plant[i].soc);
        if (t == c.horizon) break;
        const bool pulse_on = c.pulse && t >= c.pulse->start && t < c.pulse->start + c.pulse->duration;
        for (std::size_t i = 0; i < n; ++i) {
            const double cmd =
                pulse_on ? -std::min(c.pulse->total_power_w / static_cast<double>(n), p.max_discharge_w) : command[i];
            if (!r.charge_start[i] && cmd > 0.0) r.charge_start[i] = t;
            plant[i] = step_soc(plant[i], cmd, c.dt, p);
            r.power_integral_j[i] += plant[i].power_w * to_seconds(c.dt);
        }
        plant_next = t + c.dt;
    }
    for (std::size_t i = 0; i < n; ++i) r.energy_end_j.push_back(plant[i].energy_j);
    r.counters = sw.counters();
    return r;
}

}  // namespace shipnet
