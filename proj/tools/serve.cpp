#include "serve.hpp"

#include <arpa/inet.h>
#include <fmt/format.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pnp/error.hpp"
#include "pnp/protocol.hpp"

namespace pnp::cli {

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

[[noreturn]] void sys_fail(const std::string& what) {
  throw ValidationError("port", fmt::format("{}: {}", what, std::strerror(errno)));
}

bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

std::string handle_line(Server& server, std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  // The message's own timestamp stands in for arrival time.
  SimTime at = 0;
  try {
    at = decode_measurement(line).timestamp_ms;
  } catch (const Error&) {
  }
  try {
    Server::Reply reply = server.receive(line, at);
    std::string out = fmt::format("ok {}\n", reply.record_id);
    for (const auto& c : reply.controls) out += encode(c) + "\n";
    return out;
  } catch (const Error& e) {
    return fmt::format("error {}: {}\n", to_string(e.code()), e.what());
  }
}

void serve(const Scenario& scenario, const ServeOptions& options, std::ostream& log,
           const std::function<void(std::uint16_t)>& on_listen) {
  Store store;
  Server server(store, scenario);

  Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (listener.get() < 0) sys_fail("socket");
  const int yes = 1;
  ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(options.port);
  if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    sys_fail(fmt::format("bind 127.0.0.1:{}", options.port));
  }
  if (::listen(listener.get(), 4) != 0) sys_fail("listen");
  socklen_t len = sizeof addr;
  ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  const std::uint16_t port = ntohs(addr.sin_port);
  log << fmt::format("listening on 127.0.0.1:{}\n", port) << std::flush;
  if (on_listen) on_listen(port);

  for (std::uint64_t served = 0;
       options.max_connections == 0 || served < options.max_connections; ++served) {
    Fd conn(::accept(listener.get(), nullptr, nullptr));
    if (conn.get() < 0) {
      if (errno == EINTR) continue;
      sys_fail("accept");
    }
    std::string pending;
    char buf[4096];
    bool open = true;
    while (open) {
      const ssize_t n = ::recv(conn.get(), buf, sizeof buf, 0);
      if (n <= 0) break;
      pending.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while (open && (nl = pending.find('\n')) != std::string::npos) {
        const std::string line = pending.substr(0, nl);
        pending.erase(0, nl + 1);
        open = send_all(conn.get(), handle_line(server, line));
      }
    }
  }
  store.flush();
  log << fmt::format("served: {} records, {} samples, {} rejected\n", store.record_count(),
                     store.sample_count(), store.reject_count());
}

}  // namespace pnp::cli
