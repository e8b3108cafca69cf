#include <doctest.h>

#include <cmath>

#include "oracle/brute.hpp"
#include "shipnet/esm.hpp"

using namespace shipnet;
using namespace std::chrono_literals;

namespace {
EsmScenarioConfig five(std::uint64_t seed = 1, Micros horizon = 300'000'000us) {
    EsmScenarioConfig c;
    c.seed = seed;
    c.horizon = horizon;
    for (std::size_t i = 1; i <= 5; ++i) c.network.ports.push_back(PortConfig{{static_cast<std::uint8_t>(i), "esm" + std::to_string(i)}, {}, {}});
    return c;
}
}  // namespace

TEST_CASE("step_soc integrates and saturates") {
    EsmParams p;
    auto s = EsmState::at_soc(0.5, p);
    for (int i = 0; i < 60'000; ++i) s = step_soc(s, 5e6, 1000us, p);
    CHECK(s.soc == doctest::Approx(0.8).epsilon(1e-12));

    auto idle = EsmState::at_soc(0.3, p);
    auto same = step_soc(idle, 0.0, 1000us, p);
    CHECK(same.energy_j == idle.energy_j);
    CHECK(same.soc == idle.soc);

    auto full = EsmState::at_soc(1.0, p);
    auto f2 = step_soc(full, 5e6, 1000us, p);
    CHECK(f2.soc == 1.0);
    CHECK(f2.power_w == 0.0);

    auto near = EsmState::at_soc(1.0 - 1e-6, p);  // 1000 J headroom, 5000 J requested
    auto n2 = step_soc(near, 5e6, 1000us, p);
    CHECK(n2.energy_j == p.capacity_j);
    CHECK(n2.power_w * 1e-3 == doctest::Approx(n2.energy_j - near.energy_j));

    auto over = step_soc(EsmState::at_soc(0.5, p), -50e6, 1000us, p);
    CHECK(over.power_w == -p.max_discharge_w);
    CHECK_THROWS(step_soc(idle, 1.0, 0us, p));
}

TEST_CASE("consensus update") {
    std::vector<double> same{0.4, 0.4};
    CHECK(consensus_update(0.4, same, 0.15) == 0.4);
    std::vector<double> one{0.4};
    CHECK(consensus_update(0.2, one, 0.5) == doctest::Approx(0.3));
    CHECK(consensus_update(0.2, {}, 0.5) == 0.2);

    std::vector<double> x{0.1, 0.9, 0.3, 0.5, 0.7};
    const double mean = 0.5;
    auto y = oracle::consensus_rounds(x, 0.15, 200);
    std::vector<double> lib = x;
    double prev_spread = 1e9;
    for (int r = 0; r < 200; ++r) {
        std::vector<double> next(5);
        for (std::size_t i = 0; i < 5; ++i) {
            std::vector<double> nb;
            for (std::size_t j = 0; j < 5; ++j)
                if (j != i) nb.push_back(lib[j]);
            next[i] = consensus_update(lib[i], nb, 0.15);
        }
        lib = next;
        const double spread = *std::max_element(lib.begin(), lib.end()) - *std::min_element(lib.begin(), lib.end());
        CHECK(spread <= prev_spread);
        prev_spread = spread;
    }
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::fabs(lib[i] - mean) < 1e-6);
        CHECK(lib[i] == doctest::Approx(y[i]).epsilon(1e-12));
    }
}

TEST_CASE("charge setpoint") {
    EsmParams p;
    auto at_target = EsmState::at_soc(0.8, p);
    at_target.consensus_estimate = 0.0;
    CHECK(compute_charge_setpoint(at_target, p) == 0.0);

    EsmParams strong = p;
    strong.kp = 10.0;
    auto low = EsmState::at_soc(0.5, strong);
    CHECK(compute_charge_setpoint(low, strong) == 5e6);

    auto close = EsmState::at_soc(0.799, p);  // estimate equals local deviation: no correction
    CHECK(compute_charge_setpoint(close, p) == doctest::Approx(50e3).epsilon(1e-6));

    auto corrected = EsmState::at_soc(0.7, p);
    corrected.consensus_estimate = 0.15;  // fleet lags more than this unit: charge less
    CHECK(compute_charge_setpoint(corrected, p) == doctest::Approx(0.05 * 0.05 * 1e9).epsilon(1e-9));
}

TEST_CASE("parameter validation") {
    EsmParams p;
    CHECK_NOTHROW(validate(p, 4));
    p.epsilon = 0.3;
    CHECK_THROWS_WITH_AS(validate(p, 4), doctest::Contains("1/max_degree"), ValidationError);
    EsmParams q;
    q.soc_init = 1.2;
    CHECK_THROWS_AS(validate(q, 4), ValidationError);
}

TEST_CASE("settling time and oscillation count") {
    const double target = 0.8, band = 0.01;
    TimeSeries flat{SimTime{0}, 100'000us, std::vector<double>(50, 0.8)};
    CHECK(settling_time(flat, target, band) == Micros{0});
    CHECK(oscillation_count(flat, target, band) == 0);

    TimeSeries enter{SimTime{0}, 100'000us, {}};
    for (int i = 0; i < 1000; ++i) enter.values.push_back(i < 420 ? 0.5 + i * 1e-4 : 0.8);
    CHECK(settling_time(enter, target, band) == 42'000'000us);
    CHECK(oscillation_count(enter, target, band) == 1);

    TimeSeries outside{SimTime{0}, 100'000us, std::vector<double>(10, 0.5)};
    CHECK_FALSE(settling_time(outside, target, band).has_value());
    CHECK(oscillation_count(outside, target, band) == 0);

    // In and out of the band until 60 s, then settled.
    TimeSeries wobble{SimTime{0}, 100'000us, {}};
    for (int i = 0; i < 1200; ++i) {
        const double t = i * 0.1;
        wobble.values.push_back(t < 60.0 ? target + 0.03 * std::sin(t) : target + 0.001);
    }
    const auto from = oracle::settled_from(wobble.values, target, band);
    CHECK(settling_time(wobble, target, band) == Micros{from * 100'000});
    CHECK(*settling_time(wobble, target, band) <= 60'000'000us);

    // Damped sinusoid entering from below: 3 exits -> 7 crossings.
    TimeSeries damped{SimTime{0}, 10'000us, {}};
    for (int i = 0; i < 10'000; ++i) {
        const double t = i * 0.01;
        damped.values.push_back(target - 0.05 * std::exp(-0.15 * t) * std::cos(t));
    }
    const auto brute = oracle::crossings(damped.values, target, band);
    CHECK(oscillation_count(damped, target, band) == brute);
    CHECK(brute == 7);
}

TEST_CASE("control message codec") {
    ControlMessage m{3, 77, SimTime{123456}, -0.0123, 0.5};
    auto b = encode(m);
    CHECK(b.size() == kControlMessageSize);
    auto back = decode_control_message(b);
    REQUIRE(back);
    CHECK(back->sender == 3);
    CHECK(back->seq == 77);
    CHECK(back->sim_time == SimTime{123456});
    CHECK(back->consensus_estimate == -0.0123);
    CHECK(back->soc == 0.5);
    b.pop_back();
    CHECK_FALSE(decode_control_message(b).has_value());
    ControlMessage bad = m;
    bad.soc = std::nan("");
    CHECK_FALSE(decode_control_message(encode(bad)).has_value());
}

TEST_CASE("overlay topologies") {
    auto s = OverlayTopology::star(5);
    CHECK(s.max_degree() == 4);
    CHECK_NOTHROW(validate(s));
    auto r = OverlayTopology::ring(5);
    CHECK(r.neighbors[0] == std::vector<std::size_t>{1, 4});
    CHECK_NOTHROW(validate(r));
    CHECK_THROWS_AS(validate(OverlayTopology::custom({{1}, {}})), ValidationError);
    CHECK_THROWS_AS(validate(OverlayTopology::custom({{1}, {0}, {}})), ValidationError);
}

TEST_CASE("controller ignores strangers and stale messages and waits for every neighbor") {
    EsmParams p;
    EsmController c(0, p, {1, 2});
    auto plant = EsmState::at_soc(0.5, p);
    CHECK(c.tick(SimTime{0}, plant).command_w == 0.0);
    c.on_message(ControlMessage{2, 5, SimTime{0}, 0.3, 0.5});
    c.on_message(ControlMessage{9, 1, SimTime{0}, 0.3, 0.5});
    CHECK_FALSE(c.warmed_up());
    c.on_message(ControlMessage{3, 1, SimTime{0}, 0.3, 0.5});
    CHECK(c.warmed_up());
    c.on_message(ControlMessage{2, 4, SimTime{0}, 100.0, 0.5});  // stale, ignored
    auto out = c.tick(SimTime{5000}, plant);
    CHECK(out.command_w == 5e6);
    CHECK(c.consensus_estimate() == doctest::Approx(0.3));
    CHECK(out.message.seq == 2);
    CHECK(out.message.sender == 1);
}

TEST_CASE("ideal network run: physics, energy accounting, determinism") {
    const auto c = five();
    const auto r = run_scenario(c);
    REQUIRE(r.soc.size() == 5);
    const double dt_s = to_seconds(c.dt);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& v = r.soc[i].values;
        CHECK(v.size() == 3001);
        CHECK(std::fabs(v.back() - 0.8) <= c.params.deadband);
        for (double x : v) CHECK((x >= 0.0 && x <= 1.0));
        CHECK(std::fabs(r.energy_end_j[i] - r.energy_start_j[i] - r.power_integral_j[i]) <= c.params.max_charge_w * dt_s);
        // 0.3 GJ at no more than 5 MW takes at least 60 s.
        const auto reach = std::find_if(v.begin(), v.end(), [](double x) { return x >= 0.8 - 1e-9; });
        if (reach != v.end()) CHECK(std::distance(v.begin(), reach) * 0.1 >= 60.0);
    }
    const auto again = run_scenario(c);
    CHECK(again.delivery_digest == r.delivery_digest);
    for (std::size_t i = 0; i < 5; ++i) CHECK(again.soc[i].values == r.soc[i].values);
}

TEST_CASE("100 ms delay settles later than the ideal network") {
    auto ideal = five(1, 200'000'000us);
    auto slow = ideal;
    for (auto& p : slow.network.ports) p.egress.one_way_delay = 100'000us;
    const auto a = run_scenario(ideal);
    const auto b = run_scenario(slow);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto ta = settling_time(a.soc[i], 0.8, ideal.params.deadband);
        const auto tb = settling_time(b.soc[i], 0.8, ideal.params.deadband);
        REQUIRE(ta);
        REQUIRE(tb);
        CHECK(*tb > *ta);
    }
}

TEST_CASE("pulse drains every ESM equally and within bounds") {
    auto c = five(3, 120'000'000us);
    c.pulse = PulseEvent{10'000'000us, 5'000'000us, 30e6};
    const auto r = run_scenario(c);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& v = r.soc[i].values;
        CHECK(v[150] < v[100]);  // 15 s vs 10 s
        for (double x : v) CHECK((x >= 0.0 && x <= 1.0));
    }
}

TEST_CASE("inconsistent scenarios are rejected") {
    auto c = five();
    c.network.ports.pop_back();
    CHECK_THROWS_AS(run_scenario(c), ConfigError);
    auto d = five();
    d.network.ports[2].address.id = 9;
    CHECK_THROWS_AS(run_scenario(d), ConfigError);
    auto e = five();
    e.horizon = 500us;
    CHECK_THROWS_AS(run_scenario(e), ConfigError);
}
