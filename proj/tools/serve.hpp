#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

#include "pnp/scenario.hpp"
#include "pnp/server.hpp"

namespace pnp::cli {

struct ServeOptions {
  std::uint16_t port = 7878;        // 0 picks a free port
  std::uint64_t max_connections = 0;  // 0 serves until killed
};

// Replies to one line of input: "ok <record>" followed by any control
// documents the sit rules produced, one per line, or "error <code>: <what>".
std::string handle_line(Server& server, std::string_view line);

// Local TCP front-end for manual testing: one XML measurement per line in,
// replies as above. Connections are served one at a time on 127.0.0.1.
// `on_listen` receives the bound port.
void serve(const Scenario& scenario, const ServeOptions& options, std::ostream& log,
           const std::function<void(std::uint16_t)>& on_listen = {});

}  // namespace pnp::cli
