#pragma once

#include <netinet/in.h>

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "shipnet/common.hpp"

namespace shipnet {

// IPv4 UDP endpoint, written "a.b.c.d:port".
struct Endpoint {
    sockaddr_in addr{};

    static Endpoint parse(const std::string& text);  // throws ConfigError
    static Endpoint loopback(std::uint16_t port);
    std::uint16_t port() const;
    std::string to_string() const;
    bool operator==(const Endpoint& o) const;
};

class UdpSocket {
public:
    UdpSocket();
    ~UdpSocket();
    UdpSocket(UdpSocket&& o) noexcept;
    UdpSocket& operator=(UdpSocket&& o) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    // Throws BindFailure.
    static UdpSocket bound(const Endpoint& local);

    Endpoint local_endpoint() const;
    bool send_to(std::span<const std::uint8_t> data, const Endpoint& to) const;
    // Waits at most `timeout`; nullopt on timeout.
    std::optional<std::size_t> recv_from(std::span<std::uint8_t> buffer, Endpoint& from, Micros timeout) const;

private:
    int fd_ = -1;
};

}  // namespace shipnet
