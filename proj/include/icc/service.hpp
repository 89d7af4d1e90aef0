#ifndef ICC_SERVICE_HPP
#define ICC_SERVICE_HPP

// HTTP front end over api::dispatch. Stateless: each request is evaluated
// independently and identical bodies produce identical responses.

#include "icc/api.hpp"

#include "httplib.h"

#include <cstddef>
#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace icc::service {

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  unsigned bootstrap_workers = 1;
  std::size_t max_body_bytes = 10 * 1024 * 1024;
  std::string cors_origin = "*";

  /// Overrides fields from ICC_HOST, ICC_PORT, ICC_WORKERS, ICC_MAX_BODY and
  /// ICC_CORS_ORIGIN when set.
  void apply_environment() {
    if (const char* v = std::getenv("ICC_HOST")) host = v;
    if (const char* v = std::getenv("ICC_PORT")) port = std::atoi(v);
    if (const char* v = std::getenv("ICC_WORKERS")) bootstrap_workers = static_cast<unsigned>(std::strtoul(v, nullptr, 10));
    if (const char* v = std::getenv("ICC_MAX_BODY")) max_body_bytes = std::strtoull(v, nullptr, 10);
    if (const char* v = std::getenv("ICC_CORS_ORIGIN")) cors_origin = v;
  }
};

/// Registers /health and every api endpoint on `server`.
inline void install_routes(httplib::Server& server, const Config& config) {
  const api::Options options{std::max(1u, config.bootstrap_workers)};

  server.set_payload_max_length(config.max_body_bytes);
  server.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(api::health().dump(), "application/json");
  });

  for (const auto& endpoint : api::endpoints()) {
    server.Post(endpoint, [endpoint, options](const httplib::Request& req, httplib::Response& res) {
      const auto out = api::dispatch_text(endpoint, req.body, options);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    });
  }

  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty())
      return;
    std::string id = "http-error";
    if (res.status == 404)
      id = "unknown-endpoint";
    else if (res.status == 413)
      id = "payload-too-large";
    res.set_content(report::error_body("http", id, "HTTP " + std::to_string(res.status) + " for " +
                                                       req.path)
                        .dump(),
                    "application/json");
  });

  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
          if (ep)
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          msg = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(report::error_body("internal", "internal-error", msg).dump(),
                        "application/json");
      });
}

} // namespace icc::service

#endif // ICC_SERVICE_HPP
