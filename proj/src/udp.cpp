#include "shipnet/udp.hpp"

#include <arpa/inet.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace shipnet {

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ConfigError("endpoint '" + text + "' is not host:port");
    const std::string host = text.substr(0, colon);
    const std::string port_text = text.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (port_text.empty() || *end != '\0' || port < 0 || port > 65535)
        throw ConfigError("endpoint '" + text + "' has an invalid port");
    Endpoint e;
    e.addr.sin_family = AF_INET;
    e.addr.sin_port = htons(static_cast<std::uint16_t>(port));
    const std::string h = (host == "localhost") ? "127.0.0.1" : host;
    if (inet_pton(AF_INET, h.c_str(), &e.addr.sin_addr) != 1)
        throw ConfigError("endpoint '" + text + "' has an invalid IPv4 address");
    return e;
}

Endpoint Endpoint::loopback(std::uint16_t port) {
    Endpoint e;
    e.addr.sin_family = AF_INET;
    e.addr.sin_port = htons(port);
    e.addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return e;
}

std::uint16_t Endpoint::port() const { return ntohs(addr.sin_port); }

std::string Endpoint::to_string() const {
    char buf[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
    return std::string(buf) + ":" + std::to_string(port());
}

bool Endpoint::operator==(const Endpoint& o) const {
    return addr.sin_addr.s_addr == o.addr.sin_addr.s_addr && addr.sin_port == o.addr.sin_port;
}

UdpSocket::UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

UdpSocket UdpSocket::bound(const Endpoint& local) {
    UdpSocket s;
    int buf = 1 << 20;
    ::setsockopt(s.fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
    if (::bind(s.fd_, reinterpret_cast<const sockaddr*>(&local.addr), sizeof local.addr) != 0)
        throw BindFailure("cannot bind " + local.to_string() + ": " + std::strerror(errno));
    return s;
}

Endpoint UdpSocket::local_endpoint() const {
    Endpoint e;
    socklen_t len = sizeof e.addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&e.addr), &len);
    return e;
}

bool UdpSocket::send_to(std::span<const std::uint8_t> data, const Endpoint& to) const {
    const auto n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(&to.addr),
                            sizeof to.addr);
    return n == static_cast<ssize_t>(data.size());
}

std::optional<std::size_t> UdpSocket::recv_from(std::span<std::uint8_t> buffer, Endpoint& from,
                                                Micros timeout) const {
    pollfd pfd{fd_, POLLIN, 0};
    const int ms = static_cast<int>((timeout.count() + 999) / 1000);
    const int r = ::poll(&pfd, 1, ms);
    if (r <= 0) return std::nullopt;
    socklen_t len = sizeof from.addr;
    const auto n = ::recvfrom(fd_, buffer.data(), buffer.size(), 0, reinterpret_cast<sockaddr*>(&from.addr), &len);
    if (n < 0) return std::nullopt;
    return static_cast<std::size_t>(n);
}

}  // namespace shipnet
