#include "shipnet/echo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "shipnet/realtime_proxy.hpp"

namespace shipnet {

void validate(const EchoConfig& c) {
    if (c.period.count() <= 0) throw ValidationError("echo period must be > 0");
    if (c.count < 1) throw ValidationError("echo count must be >= 1");
    if (c.timeout.count() <= 0) throw ValidationError("echo timeout must be > 0");
    if (c.payload_size < kEchoHeaderSize)
        throw ValidationError("payload_size must be at least " + std::to_string(kEchoHeaderSize) + " bytes");
}

namespace {

void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

}  // namespace

Bytes make_echo_payload(std::uint64_t sequence, SimTime send_time, std::size_t payload_size) {
    Bytes out(std::max(payload_size, kEchoHeaderSize), 0);
    put_u64(out.data(), sequence);
    put_u64(out.data() + 8, static_cast<std::uint64_t>(send_time.count()));
    return out;
}

std::optional<EchoStamp> parse_echo_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < kEchoHeaderSize) return std::nullopt;
    return EchoStamp{get_u64(payload.data()), Micros{static_cast<std::int64_t>(get_u64(payload.data() + 8))}};
}

std::vector<double> log_bin_edges(double max_us) {
    std::vector<double> edges{0.0, 1.0};
    for (int k = 1;; ++k) {
        const double e = std::pow(10.0, k / 3.0);
        if (e > max_us) break;
        edges.push_back(e);
    }
    return edges;
}

LatencyStats summarize(std::span<const ResponseTimeSample> samples, double bin_width_us, Exec exec) {
    if (!(bin_width_us > 0.0)) throw std::invalid_argument("bin width must be positive");
    std::vector<double> rtt;
    rtt.reserve(samples.size());
    for (const auto& s : samples)
        if (!s.lost()) rtt.push_back(static_cast<double>(s.response_time().count()));
    if (rtt.empty()) throw AllLost("no echo returned; nothing to summarize");

    LatencyStats st;
    st.n = samples.size();
    st.lost = samples.size() - rtt.size();
    const auto m = rtt.size();
    st.mean = sum_terms(m, [&](std::size_t i) { return rtt[i]; }, exec) / static_cast<double>(m);
    if (m > 1) {
        const double ss = sum_terms(m, [&](std::size_t i) { return (rtt[i] - st.mean) * (rtt[i] - st.mean); }, exec);
        st.stddev = std::sqrt(ss / static_cast<double>(m - 1));
    }

    std::vector<double> sorted = rtt;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
        auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m)));
        return sorted[std::clamp<std::size_t>(k, 1, m) - 1];
    };
    st.min = sorted.front();
    st.max = sorted.back();
    st.p50 = rank(0.50);
    st.p99 = rank(0.99);

    const double lower = std::floor(st.min / bin_width_us) * bin_width_us;
    const auto bins = static_cast<std::size_t>(std::floor((st.max - lower) / bin_width_us)) + 1;
    auto linear_bin = [=](double v) {
        const double k = std::floor((v - lower) / bin_width_us);
        return std::clamp<std::size_t>(k < 0 ? 0 : static_cast<std::size_t>(k), 0, bins - 1);
    };
    const auto lin = count_bins(rtt, bins, linear_bin, exec);
    for (std::size_t b = 0; b < bins; ++b)
        st.histogram.push_back({lower + static_cast<double>(b) * bin_width_us, lin[b]});

    const auto edges = log_bin_edges(st.max);
    auto log_bin = [&edges](double v) {
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges.begin() - 1, 0));
    };
    const auto lg = count_bins(rtt, edges.size(), log_bin, exec);
    for (std::size_t b = 0; b < edges.size(); ++b) st.log_histogram.push_back({edges[b], lg[b]});
    return st;
}

void run_echo_server(UdpSocket socket, const std::atomic<bool>& stop) {
    std::array<std::uint8_t, 65536> buf{};
    Endpoint from;
    while (!stop.load()) {
        auto n = socket.recv_from(buf, from, Micros{50'000});
        if (!n) continue;
        socket.send_to(std::span<const std::uint8_t>(buf.data(), *n), from);
    }
}

void run_echo_server(const Endpoint& endpoint, const std::atomic<bool>& stop) {
    run_echo_server(UdpSocket::bound(endpoint), stop);
}

EchoRunResult run_sender(const EchoConfig& config) {
    validate(config);
    UdpSocket socket = UdpSocket::bound(config.bind ? *config.bind : Endpoint::parse("0.0.0.0:0"));

    EchoRunResult result;
    result.samples.resize(config.count);
    std::vector<bool> sent(config.count, false);
    std::mutex mutex;
    std::atomic<bool> done{false};

    using Clock = std::chrono::steady_clock;
    const auto epoch = Clock::now() + std::chrono::milliseconds(10);
    auto since_epoch = [&] { return std::chrono::duration_cast<Micros>(Clock::now() - epoch); };
    const std::size_t prefix = config.switch_destination ? 1 : 0;

    std::thread receiver([&] {
        std::array<std::uint8_t, 65536> buf{};
        Endpoint from;
        while (!done.load()) {
            auto n = socket.recv_from(buf, from, Micros{20'000});
            if (!n) continue;
            const SimTime t = since_epoch();
            if (*n < prefix) continue;
            std::span<const std::uint8_t> payload(buf.data() + prefix, *n - prefix);
            auto stamp = parse_echo_payload(payload);
            std::lock_guard lock(mutex);
            if (!stamp || stamp->sequence >= config.count || !sent[stamp->sequence]) {
                ++result.mismatched;
                continue;
            }
            auto& s = result.samples[stamp->sequence];
            const Bytes expected = make_echo_payload(s.sequence, s.send_time, config.payload_size);
            if (stamp->send_time != s.send_time || !std::equal(payload.begin(), payload.end(), expected.begin(),
                                                               expected.end())) {
                ++result.mismatched;
                continue;
            }
            if (s.receive_time) continue;  // duplicate
            if (t - s.send_time > config.timeout)
                ++result.late_echoes;
            else
                s.receive_time = t;
        }
    });

    for (std::size_t k = 0; k < config.count; ++k) {
        const auto target = epoch + config.period * static_cast<std::int64_t>(k);
        std::this_thread::sleep_until(target);
        const SimTime t = since_epoch();
        result.max_send_lateness_us =
            std::max(result.max_send_lateness_us,
                     static_cast<double>((t - config.period * static_cast<std::int64_t>(k)).count()));
        const Bytes payload = make_echo_payload(k, t, config.payload_size);
        {
            std::lock_guard lock(mutex);
            result.samples[k].sequence = k;
            result.samples[k].send_time = t;
            sent[k] = true;
        }
        if (config.switch_destination)
            socket.send_to(wrap_for_proxy(*config.switch_destination, payload), config.server);
        else
            socket.send_to(payload, config.server);
    }
    std::this_thread::sleep_until(Clock::now() + config.timeout);
    done.store(true);
    receiver.join();
    return result;
}

EchoRunResult run_event_echo(const EchoConfig& config, const SwitchConfig& network, std::uint8_t sender_id,
                             std::uint8_t server_id) {
    validate(config);
    VirtualSwitch sw(network);
    const auto sender_port = sw.port_of(sender_id);
    const auto server_port = sw.port_of(server_id);
    if (!sender_port || !server_port) throw ConfigError("echo sender/server ids are not switch ports");

    EchoRunResult result;
    result.samples.resize(config.count);
    std::size_t next = 0;
    auto send_time = [&](std::size_t k) { return config.period * static_cast<std::int64_t>(k); };

    while (next < config.count || sw.next_delivery_time()) {
        const auto due = sw.next_delivery_time();
        if (due && (next == config.count || *due <= send_time(next))) {
            for (auto& d : sw.pop_ready(*due)) {
                if (d.egress_port == *server_port) {
                    sw.forward(Frame{server_id, d.frame.source, std::move(d.frame.payload)}, d.deliver_time);
                } else if (d.egress_port == *sender_port) {
                    auto stamp = parse_echo_payload(d.frame.payload);
                    if (!stamp || stamp->sequence >= config.count) {
                        ++result.mismatched;
                        continue;
                    }
                    auto& s = result.samples[stamp->sequence];
                    if (s.receive_time) continue;
                    if (d.deliver_time - s.send_time > config.timeout)
                        ++result.late_echoes;
                    else
                        s.receive_time = d.deliver_time;
                }
            }
        } else {
            const SimTime t = send_time(next);
            result.samples[next].sequence = next;
            result.samples[next].send_time = t;
            sw.forward(Frame{sender_id, server_id, make_echo_payload(next, t, config.payload_size)}, t);
            ++next;
        }
    }
    return result;
}

void write_samples_csv(std::ostream& out, std::span<const ResponseTimeSample> samples) {
    out << kSamplesHeader << '\n';
    for (const auto& s : samples) {
        out << s.sequence << ',' << s.send_time.count() << ',';
        if (s.lost())
            out << ",,1\n";
        else
            out << s.receive_time->count() << ',' << s.response_time().count() << ",0\n";
    }
}

std::vector<ResponseTimeSample> read_samples_csv(std::istream& in) {
    std::vector<ResponseTimeSample> out;
    std::string line;
    if (!std::getline(in, line) || line != kSamplesHeader) throw ConfigError("samples CSV: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() == 4) f.emplace_back();  // trailing empty field
        if (f.size() != 5) throw ConfigError("samples CSV: bad row '" + line + "'");
        ResponseTimeSample s;
        s.sequence = std::stoull(f[0]);
        s.send_time = Micros{std::stoll(f[1])};
        if (f[4] != "1") s.receive_time = Micros{std::stoll(f[2])};
        out.push_back(s);
    }
    return out;
}

void write_stats_csv(std::ostream& out, const LatencyStats& st) {
    out << "section,key,value\n";
    out << "summary,n," << st.n << '\n';
    out << "summary,lost," << st.lost << '\n';
    char buf[64];
    auto num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        out << "summary," << key << ',' << buf << '\n';
    };
    num("mean_us", st.mean);
    num("stddev_us", st.stddev);
    num("min_us", st.min);
    num("p50_us", st.p50);
    num("p99_us", st.p99);
    num("max_us", st.max);
    for (const auto& b : st.histogram) {
        std::snprintf(buf, sizeof buf, "%g", b.lower_us);
        out << "linear," << buf << ',' << b.count << '\n';
    }
    for (const auto& b : st.log_histogram) {
        std::snprintf(buf, sizeof buf, "%.6g", b.lower_us);
        out << "log," << buf << ',' << b.count << '\n';
    }
}

}  // namespace shipnet
