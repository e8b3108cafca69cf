#include "shipnet/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "shipnet/esm_realtime.hpp"
#include "shipnet/kvfile.hpp"
#include "shipnet/series_io.hpp"

namespace shipnet {

namespace {

struct LegOverride {
    std::optional<Micros> delay, jitter;
    std::optional<double> loss;
    std::optional<std::uint64_t> bandwidth;

    LinkSpec apply(LinkSpec base) const {
        if (delay) base.one_way_delay = *delay;
        if (jitter) base.jitter_half_width = *jitter;
        if (loss) base.loss_probability = *loss;
        if (bandwidth) base.bandwidth_bits_per_s = *bandwidth;
        return base;
    }
};

struct Draft {
    Scenario s;
    std::string overlay_kind = "star";
    LegOverride link;  // default egress leg for every port
    std::map<int, LegOverride> ingress, egress;
    std::map<int, std::string> labels;
    std::map<int, std::vector<std::size_t>> custom_neighbors;
    std::map<int, double> soc_init;
    bool pulse = false;
    std::string transport = "proxy";
    std::map<int, Endpoint> endpoints, proxies;
};

using Setter = std::function<void(Draft&, const KvEntry&, int section_index, int key_index)>;

struct KeySpec {
    std::string section;  // may end in ".<N>"
    std::string key;      // may end in ".<N>"
    std::string type;
    std::string default_text;
    std::string doc;
    Setter apply;
};

Micros micros(const KvEntry& e) {
    const auto v = kv_integer(e);
    if (v < 0) throw ValidationError(e.key + " = " + e.value + " must be non-negative (line " + std::to_string(e.line) + ")");
    return Micros{v};
}

std::uint64_t non_negative(const KvEntry& e) {
    const auto v = kv_integer(e);
    if (v < 0) throw ValidationError(e.key + " = " + e.value + " must be non-negative (line " + std::to_string(e.line) + ")");
    return static_cast<std::uint64_t>(v);
}

std::vector<KeySpec> leg_keys(const std::string& section, const std::string& prefix,
                              std::function<LegOverride&(Draft&, int)> leg) {
    return {
        {section, prefix + "one_way_delay_us", "integer us", "0", "Mean one-way delay.",
         [leg](Draft& d, const KvEntry& e, int s, int) { leg(d, s).delay = micros(e); }},
        {section, prefix + "jitter_us", "integer us", "0", "Uniform jitter half-width around the delay (<= delay).",
         [leg](Draft& d, const KvEntry& e, int s, int) { leg(d, s).jitter = micros(e); }},
        {section, prefix + "loss_probability", "number", "0", "Independent per-packet loss probability in [0, 1].",
         [leg](Draft& d, const KvEntry& e, int s, int) { leg(d, s).loss = kv_number(e); }},
        {section, prefix + "bandwidth_bps", "integer bit/s", "0", "Serialization rate; 0 means unlimited.",
         [leg](Draft& d, const KvEntry& e, int s, int) { leg(d, s).bandwidth = non_negative(e); }},
    };
}

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = [] {
        std::vector<KeySpec> k = {
            {"", "name", "text", "(file name)", "Scenario name used in reports.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.name = e.value; }},
            {"", "mode", "event | realtime", "event", "Virtual-clock or wall-clock execution.",
             [](Draft& d, const KvEntry& e, int, int) {
                 if (e.value == "event") d.s.mode = RunMode::Event;
                 else if (e.value == "realtime") d.s.mode = RunMode::Realtime;
                 else throw ParseError("mode must be 'event' or 'realtime'", e.line, e.value_column);
             }},
            {"", "seed", "integer", "1", "Base seed; replicate k uses seed + k.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.seed = static_cast<std::uint64_t>(kv_integer(e)); }},
            {"", "replicates", "integer", "1", "Number of runs (>= 1).",
             [](Draft& d, const KvEntry& e, int, int) {
                 const auto v = kv_integer(e);
                 if (v < 1) throw ValidationError("replicates = " + e.value + " violates replicates >= 1");
                 d.s.replicates = static_cast<std::uint32_t>(v);
             }},
            {"", "horizon_s", "number s", "300", "Simulated duration.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.horizon = Micros{std::llround(kv_number(e) * 1e6)}; }},
            {"", "dt_us", "integer us", "1000", "Plant integration step.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.dt = micros(e); }},
            {"", "sample_period_us", "integer us", "100000", "SOC output sampling period (multiple of dt_us).",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.sample_period = micros(e); }},

            {"esm", "count", "integer", "5", "Number of ESMs (switch ports 1..count).",
             [](Draft& d, const KvEntry& e, int, int) {
                 const auto v = kv_integer(e);
                 if (v < 1 || v > 254) throw ValidationError("esm.count = " + e.value + " violates 1 <= count <= 254");
                 d.s.sim.esm_count = static_cast<std::size_t>(v);
             }},
            {"esm", "capacity_j", "number J", "1e9", "Energy capacity of each ESM.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.capacity_j = kv_number(e); }},
            {"esm", "max_charge_w", "number W", "5e6", "Charging power limit.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.max_charge_w = kv_number(e); }},
            {"esm", "max_discharge_w", "number W", "10e6", "Discharging power limit.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.max_discharge_w = kv_number(e); }},
            {"esm", "soc_init", "fraction", "0.5", "Initial state of charge of every ESM.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.soc_init = kv_number(e); }},
            {"esm", "soc_init.<N>", "fraction", "-", "Initial state of charge of ESM N only.",
             [](Draft& d, const KvEntry& e, int, int n) { d.soc_init[n] = kv_number(e); }},
            {"esm", "soc_target", "fraction", "0.8", "Charging set-point.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.soc_target = kv_number(e); }},
            {"esm", "publish_period_us", "integer us", "5000", "Controller tick and publication period.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.publish_period = micros(e); }},
            {"esm", "kp", "number 1/s", "0.05", "Proportional charging gain.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.kp = kv_number(e); }},
            {"esm", "epsilon", "number", "0.15", "Consensus step (0 < epsilon < 1/max degree).",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.epsilon = kv_number(e); }},
            {"esm", "deadband", "fraction", "0.001", "No command while |target - soc| < deadband.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.deadband = kv_number(e); }},
            {"esm", "consensus_weight", "number", "1", "Weight of the fleet-deviation correction in the setpoint.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.params.consensus_weight = kv_number(e); }},

            {"overlay", "kind", "star | ring | custom", "star", "Controller communication overlay.",
             [](Draft& d, const KvEntry& e, int, int) {
                 if (e.value != "star" && e.value != "ring" && e.value != "custom")
                     throw ParseError("overlay.kind must be star, ring or custom", e.line, e.value_column);
                 d.overlay_kind = e.value;
             }},
            {"overlay", "neighbors.<N>", "list of ids", "-", "Neighbors of ESM N (custom overlay), space separated.",
             [](Draft& d, const KvEntry& e, int, int n) {
                 std::stringstream ss(e.value);
                 std::string tok;
                 auto& out = d.custom_neighbors[n];
                 while (ss >> tok) {
                     KvEntry t = e;
                     t.value = tok;
                     const auto v = kv_integer(t);
                     if (v < 1) throw ValidationError("neighbor id " + tok + " must be >= 1");
                     out.push_back(static_cast<std::size_t>(v - 1));
                 }
             }},

            {"pulse", "start_s", "number s", "0", "Pulse-load start (section presence enables the pulse).",
             [](Draft& d, const KvEntry& e, int, int) {
                 d.s.sim.pulse.emplace().start = Micros{std::llround(kv_number(e) * 1e6)};
             }},
            {"pulse", "duration_s", "number s", "-", "Pulse-load duration (> 0).",
             [](Draft& d, const KvEntry& e, int, int) {
                 if (!d.s.sim.pulse) d.s.sim.pulse.emplace();
                 d.s.sim.pulse->duration = Micros{std::llround(kv_number(e) * 1e6)};
             }},
            {"pulse", "power_w", "number W", "-", "Total pulse power, shared equally across ESMs.",
             [](Draft& d, const KvEntry& e, int, int) {
                 if (!d.s.sim.pulse) d.s.sim.pulse.emplace();
                 d.s.sim.pulse->total_power_w = kv_number(e);
             }},

            {"switch", "mtu", "integer bytes", "1500", "Largest frame the switch forwards.",
             [](Draft& d, const KvEntry& e, int, int) { d.s.sim.network.mtu = static_cast<std::uint32_t>(non_negative(e)); }},

            {"port.<N>", "label", "text", "esm<N>", "Human label of switch port N.",
             [](Draft& d, const KvEntry& e, int n, int) { d.labels[n] = e.value; }},

            {"realtime", "transport", "proxy | direct", "proxy",
             "proxy: run the built-in real-time switch; direct: send straight to peer endpoints (external switch).",
             [](Draft& d, const KvEntry& e, int, int) {
                 if (e.value != "proxy" && e.value != "direct")
                     throw ParseError("transport must be 'proxy' or 'direct'", e.line, e.value_column);
                 d.transport = e.value;
             }},
            {"realtime", "endpoint.<N>", "host:port", "-", "UDP endpoint of controller N.",
             [](Draft& d, const KvEntry& e, int, int n) { d.endpoints[n] = Endpoint::parse(e.value); }},
            {"realtime", "proxy.<N>", "host:port", "-", "Proxy listen endpoint for port N (transport = proxy).",
             [](Draft& d, const KvEntry& e, int, int n) { d.proxies[n] = Endpoint::parse(e.value); }},
        };
        for (auto& spec : leg_keys("link", "", [](Draft& d, int) -> LegOverride& { return d.link; })) k.push_back(spec);
        for (auto& spec : leg_keys("port.<N>", "ingress.", [](Draft& d, int n) -> LegOverride& { return d.ingress[n]; }))
            k.push_back(spec);
        for (auto& spec : leg_keys("port.<N>", "egress.", [](Draft& d, int n) -> LegOverride& { return d.egress[n]; }))
            k.push_back(spec);
        return k;
    }();
    return keys;
}

// Matches "port.3" against "port.<N>" (index 3) or an exact name (index -1).
bool match_name(const std::string& pattern, const std::string& name, int& index) {
    static const std::string suffix = ".<N>";
    if (pattern.size() > suffix.size() && pattern.compare(pattern.size() - suffix.size(), suffix.size(), suffix) == 0) {
        auto [base, idx] = split_indexed(name);
        if (idx < 0 || base != pattern.substr(0, pattern.size() - suffix.size())) return false;
        index = idx;
        return true;
    }
    index = -1;
    return pattern == name;
}

void wrap_validation(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        throw ValidationError(e.what());
    }
}

Scenario build(Draft& d) {
    Scenario& s = d.s;
    auto& sim = s.sim;
    const std::size_t n = sim.esm_count;
    auto check_index = [n](int idx, const std::string& what) {
        if (idx < 1 || static_cast<std::size_t>(idx) > n)
            throw ValidationError(what + " refers to ESM/port " + std::to_string(idx) + " but esm.count = " +
                                  std::to_string(n));
    };
    for (const auto& [i, v] : d.ingress) check_index(i, "[port." + std::to_string(i) + "]");
    for (const auto& [i, v] : d.egress) check_index(i, "[port." + std::to_string(i) + "]");
    for (const auto& [i, v] : d.labels) check_index(i, "[port." + std::to_string(i) + "]");
    for (const auto& [i, v] : d.soc_init) check_index(i, "esm.soc_init." + std::to_string(i));
    for (const auto& [i, v] : d.custom_neighbors) check_index(i, "overlay.neighbors." + std::to_string(i));
    for (const auto& [i, v] : d.endpoints) check_index(i, "realtime.endpoint." + std::to_string(i));
    for (const auto& [i, v] : d.proxies) check_index(i, "realtime.proxy." + std::to_string(i));

    for (const auto& [i, v] : d.soc_init) sim.soc_init_override[static_cast<std::size_t>(i - 1)] = v;

    const std::uint32_t mtu = sim.network.mtu;
    sim.network = SwitchConfig{};
    sim.network.mtu = mtu;
    const LinkSpec base_egress = d.link.apply(LinkSpec{});
    for (std::size_t i = 1; i <= n; ++i) {
        const int key = static_cast<int>(i);
        PortConfig pc;
        pc.address.id = static_cast<std::uint8_t>(i);
        pc.address.label = d.labels.count(key) ? d.labels[key] : "esm" + std::to_string(i);
        pc.ingress = d.ingress.count(key) ? d.ingress[key].apply(LinkSpec{}) : LinkSpec{};
        pc.egress = d.egress.count(key) ? d.egress[key].apply(base_egress) : base_egress;
        sim.network.ports.push_back(pc);
    }

    if (d.overlay_kind == "star") {
        sim.overlay = OverlayTopology::star(n);
    } else if (d.overlay_kind == "ring") {
        sim.overlay = OverlayTopology::ring(n);
    } else {
        std::vector<std::vector<std::size_t>> adj(n);
        for (const auto& [i, nb] : d.custom_neighbors) adj[static_cast<std::size_t>(i - 1)] = nb;
        sim.overlay = OverlayTopology::custom(std::move(adj));
    }
    if (d.overlay_kind != "custom" && !d.custom_neighbors.empty())
        throw ValidationError("overlay.neighbors.<N> is only valid with overlay.kind = custom");

    if (sim.pulse) {
        if (sim.pulse->start.count() < 0) throw ValidationError("pulse.start_s violates start_time >= 0");
        if (sim.pulse->duration.count() <= 0) throw ValidationError("pulse.duration_s violates duration > 0");
    }

    s.transport = d.transport == "direct" ? Transport::Direct : Transport::Proxy;
    for (const auto& [i, ep] : d.endpoints) s.endpoints[static_cast<std::uint8_t>(i)] = ep;
    for (const auto& [i, ep] : d.proxies) s.proxy_endpoints[static_cast<std::uint8_t>(i)] = ep;
    if (s.mode == RunMode::Realtime) {
        for (std::size_t i = 1; i <= n; ++i) {
            if (!s.endpoints.count(static_cast<std::uint8_t>(i)))
                throw ValidationError("realtime mode needs realtime.endpoint." + std::to_string(i));
            if (s.transport == Transport::Proxy && !s.proxy_endpoints.count(static_cast<std::uint8_t>(i)))
                throw ValidationError("transport = proxy needs realtime.proxy." + std::to_string(i));
        }
    }

    for (const auto& p : sim.network.ports) {
        validate(p.ingress);
        validate(p.egress);
    }
    wrap_validation([&] { check_consistency(sim); });
    return s;
}

void apply_document(Draft& d, const KvDocument& doc, const std::set<std::string>& allowed_sections) {
    for (const auto& sec : doc.sections) {
        bool ok = false;
        for (const auto& spec : schema()) {
            int idx;
            if (!allowed_sections.count(spec.section)) continue;
            if (match_name(spec.section, sec.name, idx)) ok = true;
        }
        if (!ok) throw ParseError("unknown section [" + sec.name + "]", sec.line, 1);
    }
    for (const auto& e : doc.entries) {
        const KeySpec* found = nullptr;
        int sec_idx = -1, key_idx = -1;
        for (const auto& spec : schema()) {
            if (!allowed_sections.count(spec.section)) continue;
            if (match_name(spec.section, e.section, sec_idx) && match_name(spec.key, e.key, key_idx)) {
                found = &spec;
                break;
            }
        }
        if (!found) {
            const std::string where = e.section.empty() ? "top level" : "[" + e.section + "]";
            throw ParseError("unknown key '" + e.key + "' in " + where, e.line, 1);
        }
        found->apply(d, e, sec_idx, key_idx);
    }
}

std::set<std::string> scenario_sections() {
    return {"", "esm", "overlay", "pulse", "switch", "link", "port.<N>", "realtime"};
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::stringstream reread(text);
    const KvDocument doc = parse_kv(reread);

    Draft d;
    d.s.name = origin;
    apply_document(d, doc, scenario_sections());
    Scenario s = build(d);
    s.source_hash = fnv1a(text);
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario '" + path.string() + "'");
    return parse_scenario(in, path.stem().string());
}

std::string scenario_reference() {
    std::ostringstream out;
    out << "# Scenario file reference\n\n"
           "Generated by `shipnet scenario-reference`; do not edit by hand.\n\n"
           "Files are line oriented. Each line is blank, a comment (first non-blank character `#` or `;`),\n"
           "a section header `[name]`, or `key = value`. A ` #` after a value starts a trailing comment.\n"
           "Keys before the first header are top-level. Unknown sections and keys are errors, as are\n"
           "duplicate keys. `<N>` stands for a 1-based ESM / switch port number.\n\n"
           "Impairments in `[link]` apply to the egress leg of every port; `[port.<N>]` overrides\n"
           "one port's ingress or egress leg. A frame from port A to port B crosses A's ingress leg and\n"
           "B's egress leg; a loss on either leg drops it.\n";
    std::vector<std::string> order;
    for (const auto& k : schema())
        if (std::find(order.begin(), order.end(), k.section) == order.end()) order.push_back(k.section);
    auto cell = [](std::string text) {
        for (std::size_t at = text.find('|'); at != std::string::npos; at = text.find('|', at + 2)) text.replace(at, 1, "\\|");
        return text;
    };
    for (const auto& section : order) {
        out << "\n## " << (section.empty() ? "top level" : "[" + section + "]") << "\n\n";
        out << "| key | type | default | meaning |\n|---|---|---|---|\n";
        for (const auto& k : schema())
            if (k.section == section)
                out << "| `" << k.key << "` | " << cell(k.type) << " | " << k.default_text << " | " << k.doc << " |\n";
    }
    return out.str();
}

SwitchFile parse_switch_file(std::istream& in) {
    const KvDocument doc = parse_kv(in);
    SwitchFile out;
    std::uint64_t seed = 1;
    std::map<int, PortConfig> ports;
    std::map<int, ProxyBinding> bindings;
    std::map<int, bool> have_listen;

    for (const auto& sec : doc.sections) {
        auto [base, idx] = split_indexed(sec.name);
        if (!(base == "port" && idx >= 0) && sec.name != "switch")
            throw ParseError("unknown section [" + sec.name + "]", sec.line, 1);
    }
    for (const auto& e : doc.entries) {
        auto [base, idx] = split_indexed(e.section);
        if (e.section.empty() || e.section == "switch") {
            if (e.key == "seed") seed = static_cast<std::uint64_t>(kv_integer(e));
            else if (e.key == "mtu") out.config.mtu = static_cast<std::uint32_t>(non_negative(e));
            else throw ParseError("unknown key '" + e.key + "'", e.line, 1);
            continue;
        }
        if (idx < 1 || idx > 254) throw ValidationError("[" + e.section + "]: port id must be 1..254");
        auto& pc = ports[idx];
        pc.address.id = static_cast<std::uint8_t>(idx);
        if (e.key == "label") {
            pc.address.label = e.value;
            continue;
        }
        if (e.key == "listen") {
            bindings[idx].listen = Endpoint::parse(e.value);
            have_listen[idx] = true;
            continue;
        }
        if (e.key == "peer") {
            bindings[idx].peer = Endpoint::parse(e.value);
            continue;
        }
        const bool ingress = e.key.rfind("ingress.", 0) == 0;
        const bool egress = e.key.rfind("egress.", 0) == 0;
        if (!ingress && !egress) throw ParseError("unknown key '" + e.key + "'", e.line, 1);
        LinkSpec& leg = ingress ? pc.ingress : pc.egress;
        const std::string field = e.key.substr(ingress ? 8 : 7);
        if (field == "one_way_delay_us") leg.one_way_delay = micros(e);
        else if (field == "jitter_us") leg.jitter_half_width = micros(e);
        else if (field == "loss_probability") leg.loss_probability = kv_number(e);
        else if (field == "bandwidth_bps") leg.bandwidth_bits_per_s = non_negative(e);
        else throw ParseError("unknown key '" + e.key + "'", e.line, 1);
    }
    for (auto& [idx, pc] : ports) {
        if (!have_listen[idx]) throw ValidationError("[port." + std::to_string(idx) + "] needs a listen endpoint");
        if (pc.address.label.empty()) pc.address.label = "port" + std::to_string(idx);
        out.config.ports.push_back(pc);
        out.bindings[static_cast<std::uint8_t>(idx)] = bindings[idx];
    }
    if (out.config.ports.empty()) throw ValidationError("switch file defines no ports");
    out.config = seeded_network(out.config, seed);
    validate(out.config);
    return out;
}

SwitchFile parse_switch_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open switch file '" + path.string() + "'");
    return parse_switch_file(in);
}

std::vector<EsmRunResult> run_replicates(const Scenario& scenario, std::uint64_t seed, Exec exec,
                                         bool keep_delivery_log) {
    const auto count = static_cast<std::int64_t>(scenario.replicates);
    std::vector<EsmRunResult> runs(scenario.replicates);
    std::vector<std::string> errors(scenario.replicates);
    auto one = [&](std::int64_t k) {
        try {
            EsmScenarioConfig cfg = scenario.sim;
            cfg.seed = seed + static_cast<std::uint64_t>(k);
            cfg.keep_delivery_log = keep_delivery_log;
            runs[static_cast<std::size_t>(k)] = run_scenario(cfg);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(k)] = e.what();
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t k = 0; k < count; ++k) one(k);
    } else {
        for (std::int64_t k = 0; k < count; ++k) one(k);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw ConfigError(e);
    return runs;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir) {
    std::map<std::string, std::string> m;
    std::ifstream in(dir / "manifest.txt");
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return m;
}

}  // namespace

RunSummary run(const Scenario& input, const std::filesystem::path& out_dir, const RunOptions& options) {
    Scenario scenario = input;
    if (options.mode) scenario.mode = *options.mode;
    const std::uint64_t seed = options.seed.value_or(scenario.sim.seed);

    RunSummary summary;
    for (std::uint32_t k = 0; k < scenario.replicates; ++k) summary.seeds.push_back(seed + k);
    if (scenario.mode == RunMode::Event) {
        summary.runs = run_replicates(scenario, seed, options.exec, options.delivery_log);
    } else {
        for (std::uint32_t k = 0; k < scenario.replicates; ++k) {
            EsmScenarioConfig cfg = scenario.sim;
            cfg.seed = seed + k;
            RealtimeTransport rt{scenario.transport == Transport::Direct, scenario.endpoints, scenario.proxy_endpoints};
            summary.runs.push_back(run_realtime_scenario(cfg, rt));
        }
    }

    std::filesystem::create_directories(out_dir);
    std::vector<RunBundle> bundles;
    for (std::size_t k = 0; k < summary.runs.size(); ++k) {
        const auto& r = summary.runs[k];
        const std::string id = std::to_string(k + 1);
        write_file(out_dir / ("soc_run" + id + ".csv"), [&](std::ostream& o) { write_series_csv(o, r.labels, r.soc); });
        write_file(out_dir / ("counters_run" + id + ".csv"),
                   [&](std::ostream& o) { write_counters_csv(o, scenario.sim.network, r.counters); });
        if (options.delivery_log && scenario.mode == RunMode::Event)
            write_file(out_dir / ("deliveries_run" + id + ".csv"), [&](std::ostream& o) {
                o << kDeliveryLogHeader << '\n';
                for (const auto& line : r.delivery_log) o << line << '\n';
            });
        bundles.push_back(RunBundle{scenario.name, "run" + id, r.labels, r.soc});
    }
    if (bundles.size() > 1) summary.report = compare_runs(bundles, 0);
    write_file(out_dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, summary.report); });
    write_file(out_dir / "report.txt", [&](std::ostream& o) { write_report_table(o, summary.report); });
    write_file(out_dir / "manifest.txt", [&](std::ostream& o) {
        o << "tool = shipnet\n";
        o << "tool_version = " << kToolVersion << '\n';
        o << "scenario = " << scenario.name << '\n';
        o << "scenario_hash = " << hex64(scenario.source_hash) << '\n';
        o << "mode = " << (scenario.mode == RunMode::Event ? "event" : "realtime") << '\n';
        o << "base_seed = " << seed << '\n';
        o << "replicates = " << scenario.replicates << '\n';
        for (std::size_t k = 0; k < summary.runs.size(); ++k) {
            o << "run" << k + 1 << ".seed = " << summary.seeds[k] << '\n';
            o << "run" << k + 1 << ".deliveries = " << summary.runs[k].deliveries << '\n';
            o << "run" << k + 1 << ".delivery_digest = " << hex64(summary.runs[k].delivery_digest) << '\n';
        }
    });
    return summary;
}

RunBundle load_run(const std::filesystem::path& dir, int run_index) {
    const auto path = dir / ("soc_run" + std::to_string(run_index) + ".csv");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    auto table = read_series_csv(in);
    auto manifest = read_manifest(dir);
    const std::string scenario = manifest.count("scenario") ? manifest["scenario"] : dir.filename().string();
    return RunBundle{scenario, "run" + std::to_string(run_index), std::move(table.labels), std::move(table.series)};
}

ComparisonReport compare_outputs(const std::filesystem::path& ref_dir, const std::vector<std::filesystem::path>& against) {
    std::vector<RunBundle> bundles{load_run(ref_dir)};
    for (const auto& d : against) bundles.push_back(load_run(d));
    for (std::size_t i = 1; i < bundles.size(); ++i)
        if (bundles[i].labels != bundles[0].labels)
            throw LabelMismatch("ESM labels in '" + against[i - 1].string() + "' differ from '" + ref_dir.string() + "'");
    return compare_runs(bundles, 0);
}

}  // namespace shipnet
