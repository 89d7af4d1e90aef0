// icc-serve: HTTP JSON service exposing the icc endpoints.
//
// Configuration comes from ICC_* environment variables; command-line flags
// take precedence.

#include "icc/service.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  icc::service::Config cfg;
  cfg.apply_environment();

  CLI::App app{"HTTP service for ICC inference"};
  app.add_option("--host", cfg.host, "Bind address")->capture_default_str();
  app.add_option("--port", cfg.port, "Port (0 picks a free one)")->capture_default_str();
  app.add_option("--workers", cfg.bootstrap_workers, "Threads per bootstrap request")
      ->capture_default_str();
  app.add_option("--max-body", cfg.max_body_bytes, "Request size limit in bytes")
      ->capture_default_str();
  app.add_option("--cors-origin", cfg.cors_origin, "Access-Control-Allow-Origin value")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  icc::service::install_routes(server, cfg);

  int port = cfg.port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.host);
  } else if (!server.bind_to_port(cfg.host, port)) {
    std::cerr << "cannot bind " << cfg.host << ":" << port << "\n";
    return 2;
  }
  if (port < 0) {
    std::cerr << "cannot bind " << cfg.host << "\n";
    return 2;
  }
  std::cout << "listening on http://" << cfg.host << ":" << port << std::endl;
  return server.listen_after_bind() ? 0 : 2;
}
