#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pprs/transport/channel.hpp"

namespace pprs {

namespace {

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

 protected:
  void write_all(const u8* p, size_t n) override {
    while (n > 0) {
      ssize_t w = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (w < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error(std::string("tcp send: ") + std::strerror(errno));
      }
      p += size_t(w);
      n -= size_t(w);
    }
  }
  void read_all(u8* p, size_t n) override {
    while (n > 0) {
      ssize_t r = ::recv(fd_, p, n, 0);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error(std::string("tcp recv: ") + std::strerror(errno));
      }
      if (r == 0) throw std::runtime_error("tcp peer closed (truncated stream)");
      p += size_t(r);
      n -= size_t(r);
    }
  }

 private:
  int fd_;
};

}  // namespace

std::unique_ptr<Channel> tcp_listen(u16 port) {
  int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  if (srv < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(srv);
    throw std::runtime_error("bind() failed on port " + std::to_string(port));
  }
  if (::listen(srv, 1) < 0) {
    ::close(srv);
    throw std::runtime_error("listen() failed");
  }
  int fd = ::accept(srv, nullptr, nullptr);
  ::close(srv);
  if (fd < 0) throw std::runtime_error("accept() failed");
  return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, u16 port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw std::runtime_error("cannot resolve " + host);
  int fd = -1;
  // retry while the peer's listener comes up, until the timeout elapses
  for (int waited = 0;; waited += 50) {
    fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) break;
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
    if (waited >= timeout_ms) break;
    ::usleep(50 * 1000);
  }
  freeaddrinfo(res);
  if (fd < 0) throw std::runtime_error("connect to " + host + ":" + std::to_string(port) + " timed out");
  return std::make_unique<TcpChannel>(fd);
}

}  // namespace pprs
