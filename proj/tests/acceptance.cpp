// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "oracle/brute.hpp"
#include "shipnet/echo.hpp"
#include "shipnet/esm.hpp"
#include "shipnet/realtime_proxy.hpp"
#include "shipnet/scenario.hpp"
#include "shipnet/series_io.hpp"

using namespace shipnet;
using namespace std::chrono_literals;

namespace {

const std::filesystem::path kSource{SHIPNET_SOURCE_DIR};

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::map<int, bool> g_results;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g_results[id] = o.pass;
    std::printf("[%s] criterion %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Scenario shipped(const std::string& name) { return parse_scenario(kSource / "scenarios" / name); }

EsmRunResult run_seed(const Scenario& s, std::uint64_t seed, bool log = false) {
    EsmScenarioConfig c = s.sim;
    c.seed = seed;
    c.keep_delivery_log = log;
    return run_scenario(c);
}

std::string soc_csv(const EsmRunResult& r) {
    std::ostringstream out;
    write_series_csv(out, r.labels, r.soc);
    return out.str();
}

Outcome metric_oracles() {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> d(0.05, 1.0);
    double worst = 0.0;
    bool exact = true;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> a(10'000), b(10'000);
        for (auto& x : a) x = d(g);
        for (auto& x : b) x = d(g);
        const TimeSeries ta{SimTime{0}, 1000us, a}, tb{SimTime{0}, 1000us, b};
        const double m = mape(ta, tb), p = avg_pd(ta, tb);
        worst = std::max(worst, std::fabs(m - (double)oracle::mape(a, b)) / std::fabs(m));
        worst = std::max(worst, std::fabs(p - (double)oracle::avg_pd(a, b)) / std::fabs(p));
        exact = exact && mape(ta, ta) == 0.0 && avg_pd(ta, tb) == -avg_pd(tb, ta);
    }
    return {worst <= 1e-12 && exact, fmt("worst relative error %.3g", worst) + (exact ? "" : ", identity/antisymmetry violated")};
}

Outcome hand_cases() {
    const double m = mape(TimeSeries{SimTime{0}, 1us, {100, 100}}, TimeSeries{SimTime{0}, 1us, {99, 101}});
    const double p = avg_pd(TimeSeries{SimTime{0}, 1us, {110}}, TimeSeries{SimTime{0}, 1us, {90}});
    return {m == 1.0 && p == 20.0, fmt("mape %.17g %%, pd %.17g %%", m, p)};
}

Outcome soc_physics() {
    const auto s = shipped("baseline_virtual");
    const auto r = run_seed(s, s.sim.seed);
    const auto& p = s.sim.params;
    std::size_t first = 0;
    for (std::size_t i = 1; i < r.charge_start.size(); ++i)
        if (r.charge_start[i] && (!r.charge_start[first] || *r.charge_start[i] < *r.charge_start[first])) first = i;
    bool ok = r.charge_start[first].has_value();
    double reach_s = -1, worst_energy = 0;
    const auto& v = r.soc[first].values;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] >= p.soc_target - p.deadband) {
            reach_s = to_seconds(r.soc[first].time_at(k));
            break;
        }
    for (std::size_t i = 0; i < r.soc.size(); ++i) {
        ok = ok && std::fabs(r.soc[i].values.back() - p.soc_target) <= p.deadband;
        worst_energy = std::max(worst_energy, std::fabs(r.energy_end_j[i] - r.energy_start_j[i] - r.power_integral_j[i]));
    }
    const double one_dt = p.max_charge_w * to_seconds(s.sim.dt);
    ok = ok && reach_s >= 60.0 && worst_energy <= one_dt;
    return {ok, fmt("first ESM reaches 80%% at %.1f s; energy residual %.3g J (bound %.3g J)", reach_s, worst_energy, one_dt)};
}

Outcome replicate_variation() {
    const auto s = shipped("baseline_virtual");
    const auto r1 = run_seed(s, 1), r2 = run_seed(s, 2), again = run_seed(s, 1);
    double worst = 0, same = 0;
    for (std::size_t i = 0; i < r1.soc.size(); ++i) {
        worst = std::max(worst, mape(r1.soc[i], r2.soc[i]));
        same = std::max(same, mape(r1.soc[i], again.soc[i]));
    }
    return {worst < 0.5 && same == 0.0, fmt("max replicate MAPE %.4g %%; same-seed MAPE %.3g %%", worst, same)};
}

Outcome impairment_ordering() {
    const auto base = shipped("baseline_virtual");
    const auto b1 = run_seed(base, 1), b2 = run_seed(base, 2);
    const auto d10 = run_seed(shipped("delay_10ms"), 1);
    const auto d100 = run_seed(shipped("delay_100ms"), 1);
    const auto drop = run_seed(shipped("drop_10pct"), 1);
    const double target = base.sim.params.soc_target, band = base.sim.params.deadband;
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < b1.soc.size(); ++i) {
        const double rep = mape(b1.soc[i], b2.soc[i]);
        const double eff = mape(b1.soc[i], d10.soc[i]);
        const auto s0 = settling_time(b1.soc[i], target, band);
        const auto s10 = settling_time(d10.soc[i], target, band);
        const auto s100 = settling_time(d100.soc[i], target, band);
        const auto ob = oscillation_count(b1.soc[i], target, band);
        const auto od = oscillation_count(drop.soc[i], target, band);
        const bool row = eff > rep && s0 && s10 && s100 && *s0 <= *s10 && *s10 <= *s100 && od >= ob;
        ok = ok && row;
        d << "\n    esm" << i + 1 << ": mape10 " << fmt("%.3g", eff) << " > replicate " << fmt("%.3g", rep)
          << "; settling " << (s0 ? fmt("%.1f", to_seconds(*s0)) : "none") << " <= "
          << (s10 ? fmt("%.1f", to_seconds(*s10)) : "none") << " <= " << (s100 ? fmt("%.1f", to_seconds(*s100)) : "none")
          << " s; oscillations drop " << od << " >= baseline " << ob << (row ? "" : "  <-- violated");
    }
    return {ok, d.str()};
}

Outcome loss_statistics() {
    SwitchConfig c;
    for (std::uint8_t id : {1, 2}) {
        PortConfig p;
        p.address = {id, "n"};
        p.egress.loss_probability = 0.1;
        p.egress.rng_seed = derive_seed(2024, id);
        c.ports.push_back(p);
    }
    std::vector<ScheduledFrame> sched;
    const std::size_t n = 100'000;
    sched.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sched.push_back({SimTime{static_cast<std::int64_t>(i) * 10}, Frame{1, 2, {1, 2, 3, 4}}});
    const auto r = run_event_mode(c, sched);
    const double frac = 1.0 - static_cast<double>(r.log.size()) / n;
    const double bound = 4 * std::sqrt(0.1 * 0.9 / n);
    return {std::fabs(frac - 0.1) <= bound, fmt("observed loss %.5f, |diff| bound %.5f", frac, bound)};
}

SwitchConfig echo_ports(Micros one_way) {
    SwitchConfig c;
    for (std::uint8_t id : {1, 2}) {
        PortConfig p;
        p.address = {id, id == 1 ? "sender" : "server"};
        p.egress.one_way_delay = one_way;
        c.ports.push_back(p);
    }
    return c;
}

Outcome echo_event() {
    EchoConfig cfg;
    cfg.count = 10'000;
    cfg.server = Endpoint::loopback(1);
    const auto a = run_event_echo(cfg, echo_ports(5000us), 1, 2);
    const Micros delta = 2750us;
    const auto b = run_event_echo(cfg, echo_ports(5000us + delta), 1, 2);
    bool ok = true;
    for (std::size_t i = 0; i < cfg.count; ++i) {
        ok = ok && !a.samples[i].lost() && !b.samples[i].lost() && a.samples[i].response_time() == 10'000us &&
             b.samples[i].response_time() - a.samples[i].response_time() == 2 * delta;
    }
    return {ok, "10000 samples at exactly 10000 us; +2750 us per leg shifts each by exactly 5500 us"};
}

double realtime_mean_rtt(Micros one_way) {
    auto server_sock = UdpSocket::bound(Endpoint::loopback(0));
    const auto server_ep = server_sock.local_endpoint();
    std::atomic<bool> stop{false};
    std::thread server([&] { run_echo_server(std::move(server_sock), stop); });
    Endpoint sender_ep;
    {
        auto probe = UdpSocket::bound(Endpoint::loopback(0));
        sender_ep = probe.local_endpoint();
    }
    RealtimeProxy proxy(echo_ports(one_way), {{1, {Endpoint::loopback(0), sender_ep}}, {2, {Endpoint::loopback(0), server_ep}}});
    proxy.start();
    EchoConfig cfg;
    cfg.server = proxy.listen_endpoint(1);
    cfg.bind = sender_ep;
    cfg.switch_destination = 2;
    cfg.count = 1000;
    cfg.period = 10'000us;
    cfg.timeout = 200'000us;
    const auto r = run_sender(cfg);
    proxy.stop();
    stop = true;
    server.join();
    return summarize(r.samples).mean;
}

Outcome echo_realtime() {
    const double ideal = realtime_mean_rtt(0us);
    const double delayed = realtime_mean_rtt(10'000us);
    const double diff_ms = (delayed - ideal) / 1000.0;
    return {std::fabs(diff_ms - 20.0) <= 2.0,
            fmt("mean RTT ideal %.1f us, delayed %.1f us, difference %.3f ms", ideal, delayed, diff_ms)};
}

Outcome determinism() {
    bool ok = true;
    std::ostringstream d;
    for (const char* name : {"baseline_virtual", "delay_10ms", "delay_100ms", "drop_10pct", "hardware_switch"}) {
        auto s = shipped(name);
        s.mode = RunMode::Event;
        const auto a = run_seed(s, s.sim.seed, true), b = run_seed(s, s.sim.seed, true);
        const bool same = soc_csv(a) == soc_csv(b) && a.delivery_log == b.delivery_log && a.delivery_digest == b.delivery_digest;
        ok = ok && same;
        d << ' ' << name << (same ? "=same" : "=DIFFERENT");
    }
    return {ok, d.str()};
}

}  // namespace

int main() {
    criterion(1, "metric oracles (100 series, n=10^4)", metric_oracles);
    criterion(2, "hand cases mape=1%, pd=20%", hand_cases);
    criterion(3, "SOC physics on the ideal network", soc_physics);
    criterion(4, "replicate-run variation below 0.5%", replicate_variation);
    criterion(5, "impairment effect ordering", impairment_ordering);
    criterion(6, "10% loss over 100000 event-mode frames", loss_statistics);
    criterion(7, "event-mode echo exact response times", echo_event);
    criterion(8, "real-time loopback echo +20 ms", echo_realtime);
    criterion(9, "hardware figures replaced by criteria 4, 5 and 8", [] {
        const bool ok = g_results[4] && g_results[5] && g_results[8];
        return Outcome{ok, "absolute lab latencies and table percentages are not reproducible on a desk host; "
                           "covered by the replacement criteria"};
    });
    criterion(10, "determinism of SOC CSVs and delivery logs", determinism);

    int failed = 0;
    for (const auto& [id, pass] : g_results) failed += !pass;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(g_results.size()) - failed, g_results.size());
    return failed == 0 ? 0 : 1;
}
