// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

namespace humangan {

namespace {

using nlohmann::json;

json vector_json(const FeatureVector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const AuthError& e) {
        reply(res, 401, {{"error", "unknown_session"}, {"message", e.what()}});
    } catch (const RejectedError& e) {
        reply(res, 409, {{"error", "rejected"}, {"message", e.what()}});
    } catch (const ConflictError& e) {
        reply(res, 409, {{"error", "conflict"}, {"message", e.what()}});
    } catch (const ValidationError& e) {
        reply(res, 400, {{"error", "validation"}, {"message", e.what()}});
    } catch (const json::exception& e) {
        reply(res, 400, {{"error", "bad_request"}, {"message", e.what()}});
    } catch (const std::exception& e) {
        reply(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
}

}  // namespace

ServiceServer::ServiceServer(QueryService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR only: a second server on a live port must fail to bind.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    auto& svc = service_;
    server_->Post("/api/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = json::parse(req.body);
            const std::string sid = svc.create_session(body.at("rater_id").get<std::string>());
            reply(res, 201, {{"session_id", sid}});
        });
    });

    server_->Get(R"(/api/sessions/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto q = svc.next_query(req.matches[1]);
            if (!q) {
                reply(res, 200, {{"drained", true}});
                return;
            }
            reply(res, 200,
                  {{"drained", false},
                   {"query",
                    {{"query_id", q->query_id},
                     {"renderer", svc.renderer()},
                     {"first", vector_json(q->plus_point)},
                     {"second", vector_json(q->minus_point)}}}});
        });
    });

    server_->Post(R"(/api/sessions/([^/]+)/responses)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = json::parse(req.body);
            const json& score = body.at("score");
            if (!score.is_number_integer()) throw ValidationError("score must be an integer in 1..5");
            const double delta = svc.submit_response(req.matches[1], body.at("query_id").get<std::string>(),
                                                     score.get<int>());
            reply(res, 200, {{"accepted", true}, {"delta_d", delta}});
        });
    });

    server_->Get(R"(/api/batches/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            BatchStatus s;
            try {
                s = svc.batch_status(req.matches[1]);
            } catch (const ValidationError& e) {
                reply(res, 404, {{"error", "unknown_batch"}, {"message", e.what()}});
                return;
            }
            reply(res, 200,
                  {{"batch_id", s.batch_id},
                   {"iteration", s.iteration},
                   {"queries", s.queries},
                   {"raters_per_query", s.raters_per_query},
                   {"responses", s.responses},
                   {"complete_queries", s.complete_queries},
                   {"outstanding", s.outstanding},
                   {"complete", s.complete},
                   {"closed", s.closed}});
        });
    });

    server_->Get("/api/status", [&svc](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            const TrainingStatus t = svc.training_status();
            json body{{"state", t.state},
                      {"iteration", t.iteration},
                      {"iterations", t.iterations},
                      {"budget", t.budget},
                      {"answered", t.answered}};
            std::size_t outstanding = 0;
            if (const auto active = svc.active_batch()) {
                const BatchStatus s = svc.batch_status(*active);
                outstanding = s.queries - s.complete_queries;
                body["batch_id"] = *active;
                body["batch_responses"] = s.responses;
            }
            body["queries_outstanding"] = outstanding;
            reply(res, 200, body);
        });
    });
}

ServiceServer::~ServiceServer() { stop(); }

void ServiceServer::start(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ <= 0) throw StartupError("could not bind any port on " + host);
    } else {
        if (!server_->bind_to_port(host, port))
            throw StartupError("cannot listen on " + host + ":" + std::to_string(port) +
                               " (port in use or not permitted)");
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void ServiceServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace humangan
