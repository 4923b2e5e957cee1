#pragma once

// HTTP front end over trifocal::service. Every request is computed from its
// own payload; the server holds no per-request state.

#include <filesystem>
#include <string>

// httplib's default accept backlog of 5 refuses bursts of concurrent clients.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include "httplib.h"
#include "trifocal/service.hpp"

namespace trifocal::service {

inline constexpr int kDefaultPort = 7350;

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = kDefaultPort;
    std::filesystem::path scenario_dir;
    /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
    std::string allow_origin = "*";
};

inline void install_routes(httplib::Server& server, const ServerConfig& config) {
    const auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    for (const char* endpoint : {"solve", "contour", "region-metrics", "field"}) {
        const std::string name = endpoint;
        server.Post("/api/" + name, [name, send](const httplib::Request& req, httplib::Response& res) {
            send(res, handle(name, req.body));
        });
    }
    server.Get("/api/scenarios", [dir = config.scenario_dir, send](const httplib::Request&, httplib::Response& res) {
        send(res, {200, json{{"scenarios", list_scenarios(dir)}}});
    });
    server.Get("/healthz", [send](const httplib::Request&, httplib::Response& res) {
        send(res, {200, json{{"status", "ok"}}});
    });
    if (!config.allow_origin.empty()) {
        server.set_post_routing_handler([origin = config.allow_origin](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        });
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }
    server.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404) send(res, {404, error_body("not-found", "no route for " + req.method + " " + req.path)});
    });
}

}  // namespace trifocal::service
