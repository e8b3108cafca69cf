#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "shipnet/echo.hpp"

using namespace shipnet;
using namespace std::chrono_literals;

namespace {
SwitchConfig two_ports(Micros delay, double loss = 0.0) {
    SwitchConfig c;
    for (std::uint8_t id : {1, 2}) {
        PortConfig p;
        p.address = {id, id == 1 ? "sender" : "server"};
        p.egress.one_way_delay = delay;
        p.egress.loss_probability = loss;
        p.egress.rng_seed = 40 + id;
        c.ports.push_back(p);
    }
    return c;
}

std::vector<ResponseTimeSample> samples_of(std::initializer_list<std::int64_t> rtts) {
    std::vector<ResponseTimeSample> out;
    std::uint64_t k = 0;
    for (auto r : rtts) out.push_back({k++, SimTime{0}, SimTime{r}});
    return out;
}
}  // namespace

TEST_CASE("payload stamp round trip and padding") {
    auto b = make_echo_payload(0x0102030405060708ull, SimTime{999}, 64);
    CHECK(b.size() == 64);
    CHECK(b[0] == 0x08);
    auto s = parse_echo_payload(b);
    REQUIRE(s);
    CHECK(s->sequence == 0x0102030405060708ull);
    CHECK(s->send_time == SimTime{999});
    CHECK_FALSE(parse_echo_payload(Bytes(5)).has_value());
}

TEST_CASE("config validation") {
    EchoConfig c;
    c.server = Endpoint::loopback(9);
    CHECK_NOTHROW(validate(c));
    c.period = 0us;
    CHECK_THROWS(validate(c));
    c.period = 10us;
    c.count = 0;
    CHECK_THROWS(validate(c));
    c.count = 1;
    c.payload_size = 8;
    CHECK_THROWS(validate(c));
}

TEST_CASE("summarize") {
    auto st = summarize(samples_of({100, 200, 300}));
    CHECK(st.mean == 200.0);
    CHECK(st.min == 100.0);
    CHECK(st.max == 300.0);
    CHECK(st.p50 == 200.0);
    CHECK(st.stddev == doctest::Approx(100.0));

    auto flat = summarize(samples_of({124, 124, 124, 124}));
    CHECK(flat.mean == 124.0);
    CHECK(flat.stddev == 0.0);

    std::mt19937_64 g(1);
    std::uniform_int_distribution<std::int64_t> d(100, 200);
    std::vector<ResponseTimeSample> u;
    long double direct = 0;
    for (std::uint64_t i = 0; i < 10'000; ++i) {
        const auto r = d(g);
        direct += r;
        u.push_back({i, SimTime{0}, SimTime{r}});
    }
    u.push_back({10'000, SimTime{0}, std::nullopt});
    auto us = summarize(u);
    CHECK(std::fabs(us.mean - 150.0) < 1.0);
    CHECK(us.mean == doctest::Approx(static_cast<double>(direct / 10'000)));
    CHECK(us.lost == 1);
    CHECK(us.n == 10'001);
    CHECK((us.min <= us.p50 && us.p50 <= us.p99 && us.p99 <= us.max));
    std::uint64_t lin = 0, lg = 0;
    for (const auto& b : us.histogram) lin += b.count;
    for (const auto& b : us.log_histogram) lg += b.count;
    CHECK(lin == 10'000);
    CHECK(lg == 10'000);

    const auto serial = summarize(u, 10.0, Exec::Serial);
    CHECK(serial.histogram.size() == us.histogram.size());
    for (std::size_t i = 0; i < serial.histogram.size(); ++i) CHECK(serial.histogram[i].count == us.histogram[i].count);

    std::vector<ResponseTimeSample> none{{0, SimTime{0}, std::nullopt}};
    CHECK_THROWS_AS(summarize(none), AllLost);

    const auto edges = log_bin_edges(1000.0);
    CHECK(edges.front() == 0.0);
    CHECK(edges[1] == 1.0);
}

TEST_CASE("event mode echo: exact 2x delay and 2-delta shift") {
    EchoConfig c;
    c.count = 500;
    c.server = Endpoint::loopback(1);
    auto r = run_event_echo(c, two_ports(5000us), 1, 2);
    for (const auto& s : r.samples) {
        REQUIRE_FALSE(s.lost());
        CHECK(s.response_time() == 10'000us);
    }
    auto shifted = run_event_echo(c, two_ports(5000us + 1234us), 1, 2);
    for (std::size_t i = 0; i < c.count; ++i)
        CHECK(shifted.samples[i].response_time() - r.samples[i].response_time() == 2468us);
}

TEST_CASE("event mode echo: two lossy legs") {
    EchoConfig c;
    c.count = 10'000;
    c.server = Endpoint::loopback(1);
    auto r = run_event_echo(c, two_ports(1000us, 0.1), 1, 2);
    std::size_t lost = 0;
    for (const auto& s : r.samples) lost += s.lost();
    const double p = 1 - 0.9 * 0.9;
    CHECK(std::fabs(static_cast<double>(lost) / c.count - p) <= 4 * std::sqrt(p * (1 - p) / c.count));
}

TEST_CASE("samples and stats csv") {
    auto s = samples_of({10, 20});
    s.push_back({2, SimTime{5}, std::nullopt});
    std::stringstream buf;
    write_samples_csv(buf, s);
    CHECK(buf.str() == "seq,send_us,recv_us,rtt_us,lost\n0,0,10,10,0\n1,0,20,20,0\n2,5,,,1\n");
    auto back = read_samples_csv(buf);
    REQUIRE(back.size() == 3);
    CHECK(back[1].response_time() == 20us);
    CHECK(back[2].lost());

    std::ostringstream st;
    write_stats_csv(st, summarize(s));
    CHECK(st.str().find("summary,mean_us,15.000") != std::string::npos);
    CHECK(st.str().find("linear,10,1") != std::string::npos);
}

TEST_CASE("loopback echo server and sender") {
    auto server_sock = UdpSocket::bound(Endpoint::loopback(0));
    const auto server_ep = server_sock.local_endpoint();
    std::atomic<bool> stop{false};
    std::thread server([&] { run_echo_server(std::move(server_sock), stop); });

    SUBCASE("verbatim echoes, including empty datagrams") {
        auto client = UdpSocket::bound(Endpoint::loopback(0));
        std::vector<std::uint8_t> buf(2048);
        Endpoint from;
        const Bytes abc{'a', 'b', 'c'};
        client.send_to(abc, server_ep);
        auto n = client.recv_from(buf, from, 1'000'000us);
        REQUIRE(n);
        CHECK(Bytes(buf.begin(), buf.begin() + static_cast<long>(*n)) == abc);
        client.send_to({}, server_ep);
        auto z = client.recv_from(buf, from, 1'000'000us);
        REQUIRE(z);
        CHECK(*z == 0);
    }
    SUBCASE("periodic sender matches every echo") {
        EchoConfig c;
        c.server = server_ep;
        c.count = 1000;
        c.period = 500us;
        c.timeout = 500'000us;
        auto r = run_sender(c);
        REQUIRE(r.samples.size() == 1000);
        std::size_t lost = 0;
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            CHECK(r.samples[i].sequence == i);
            lost += r.samples[i].lost();
            if (!r.samples[i].lost()) CHECK(r.samples[i].response_time() >= 0us);
        }
        CHECK(lost == 0);
        CHECK(r.mismatched == 0);
    }
    stop = true;
    server.join();
}
