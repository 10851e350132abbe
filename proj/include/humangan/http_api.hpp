// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// HTTP JSON front end of the query service.
//
//   POST /api/sessions                    {"rater_id"}            -> {"session_id"}
//   GET  /api/sessions/{sid}/next                                 -> {"drained", "query"?}
//   POST /api/sessions/{sid}/responses    {"query_id", "score"}   -> {"accepted", "delta_d"}
//   GET  /api/batches/{batch_id}                                  -> batch status
//   GET  /api/status                                              -> training status
//
// Errors are {"error", "message"} with 400 (validation), 401 (unknown
// session), 404 (unknown batch) or 409 (rejected submission).

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "humangan/errors.hpp"
#include "humangan/query_service.hpp"

namespace httplib {
class Server;
}

namespace humangan {

class StartupError : public Error {
public:
    using Error::Error;
};

class ServiceServer {
public:
    explicit ServiceServer(QueryService& service);
    ~ServiceServer();
    ServiceServer(const ServiceServer&) = delete;
    ServiceServer& operator=(const ServiceServer&) = delete;

    /// Binds and starts serving on a background thread. Port 0 picks a free
    /// port. Throws StartupError if the address cannot be bound.
    void start(const std::string& host, int port);
    void stop();
    int port() const { return port_; }

private:
    QueryService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace humangan
