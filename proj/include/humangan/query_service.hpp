// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// The human-discriminator boundary. Training iterations open batches of
// pairwise queries; raters open sessions, pull queries one at a time and
// answer on the 5-point scale; the trainer blocks until every query has
// enough answers and then takes the per-query mean of the mapped scores.
// Offline crowdsourcing uses CSV export/import instead of sessions; both
// paths store responses keyed by (query_id, rater_id).

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "humangan/nes.hpp"
#include "humangan/trainer.hpp"

namespace humangan {

using Clock = std::chrono::steady_clock;

struct QueryServiceOptions {
    /// Responses are appended to data_dir/responses.log and replayed on
    /// construction. Empty path: in-memory only.
    std::filesystem::path data_dir;
    /// Outstanding assignments older than this return to the pool.
    std::chrono::milliseconds assignment_timeout{std::chrono::minutes(10)};
    std::string renderer = "shape2d";
    std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

struct BatchManifest {
    std::string batch_id;
    std::size_t iteration = 0;
    std::vector<std::string> query_ids;
    std::size_t raters_per_query = 1;
    bool complete = false;
};

struct BatchStatus {
    std::string batch_id;
    std::size_t iteration = 0;
    std::size_t queries = 0;
    std::size_t raters_per_query = 0;
    std::size_t responses = 0;          // counted up to raters_per_query per query
    std::size_t complete_queries = 0;
    std::size_t outstanding = 0;        // live assignments without an answer
    bool complete = false;
    bool closed = false;
};

struct TrainingStatus {
    std::string state = "idle";  // idle, waiting, done, suspended
    std::size_t iteration = 0;
    std::size_t iterations = 0;
    std::size_t budget = 0;        // iterations * n * r
    std::size_t answered = 0;      // queries resolved so far
};

struct SessionInfo {
    std::string session_id;
    std::string rater_id;
    std::set<std::string> assigned;  // answered plus outstanding
    std::set<std::string> answered;
    std::set<std::string> outstanding;
};

struct ImportReport {
    struct RowError {
        std::size_t line = 0;
        std::string message;
    };
    std::size_t applied = 0;
    std::size_t duplicates = 0;  // identical to a stored response, skipped
    std::vector<RowError> errors;
};

class QueryService {
public:
    explicit QueryService(QueryServiceOptions options = {});

    /// Registers a batch. Reopening an unresolved batch of the same iteration
    /// with the same query ids returns the existing manifest; any other
    /// overlap raises ConflictError.
    BatchManifest open_batch(std::size_t iteration, const std::vector<PairQuery>& queries,
                             std::size_t raters_per_query);
    BatchManifest manifest(const std::string& batch_id) const;
    BatchStatus batch_status(const std::string& batch_id) const;
    /// Marks a batch resolved; its queries are no longer assignable.
    void close_batch(const std::string& batch_id);

    std::string create_session(const std::string& rater_id);
    SessionInfo session(const std::string& session_id) const;

    /// Next query for this session, or nullopt once nothing is assignable to it.
    std::optional<PairQuery> next_query(const std::string& session_id);

    /// Stores a 1..5 answer for a query currently assigned to the session.
    /// Returns the mapped delta_d.
    double submit_response(const std::string& session_id, const std::string& query_id, int score);

    /// Per-query mean of mapped scores. Throws IncompleteBatchError listing
    /// queries short of raters_per_query answers.
    std::vector<RatingResponse> aggregate_batch(const std::string& batch_id) const;

    /// Columns: query_id,plus,minus,renderer (vectors as ';'-joined numbers).
    std::string export_batch(const std::string& batch_id) const;

    /// Columns: query_id,rater_id,score. Bad rows are reported, good rows applied.
    ImportReport import_responses(const std::string& csv_text);
    ImportReport import_responses_file(const std::filesystem::path& path);

    /// Blocks until the batch is complete or the timeout elapses.
    bool wait_for_completion(const std::string& batch_id, std::chrono::milliseconds timeout);

    /// Returns assignments older than the timeout to the pool; returns how many.
    std::size_t expire_stale();

    void set_training_status(const TrainingStatus& status);
    TrainingStatus training_status() const;
    /// Id of the most recently opened batch that is not closed, if any.
    std::optional<std::string> active_batch() const;

    const std::string& renderer() const { return options_.renderer; }

    static std::string batch_id_for(std::size_t iteration);

private:
    struct QueryState {
        PairQuery query;
        std::string batch_id;
        std::map<std::string, int> scores;                   // rater_id -> score
        std::map<std::string, Clock::time_point> outstanding;  // session_id -> assigned at
    };
    struct Batch {
        BatchManifest manifest;
        bool closed = false;
    };
    struct Session {
        std::string rater_id;
        std::set<std::string> answered;
        std::set<std::string> outstanding;
    };

    bool query_complete(const QueryState& q, std::size_t required) const;
    bool batch_complete_locked(const Batch& b) const;
    std::size_t expire_stale_locked();
    bool store_score_locked(const std::string& query_id, const std::string& rater_id, int score, bool log);
    void append_log_locked(const std::string& query_id, const std::string& rater_id, int score);
    const Batch& batch_locked(const std::string& batch_id) const;

    QueryServiceOptions options_;
    mutable std::mutex mutex_;
    std::condition_variable changed_;
    std::map<std::string, Batch> batches_;
    std::vector<std::string> batch_order_;
    std::map<std::string, QueryState> queries_;
    std::map<std::string, Session> sessions_;
    std::map<std::string, std::set<std::string>> ever_assigned_;  // rater_id -> query ids
    std::map<std::string, std::map<std::string, int>> pending_;    // replayed log for unknown queries
    TrainingStatus status_;
};

/// Discriminator source backed by live raters through a QueryService.
class HumanDiscriminator final : public DiscriminatorSource {
public:
    HumanDiscriminator(QueryService& service, std::size_t raters_per_query, std::chrono::milliseconds batch_timeout);

    std::optional<std::vector<RatingResponse>> rate(std::size_t iteration, std::span<const PairQuery> queries) override;
    /// Pairwise raters never score absolute posteriors.
    std::optional<double> objective(std::span<const FeatureVector> points) override;

private:
    QueryService& service_;
    std::size_t raters_per_query_;
    std::chrono::milliseconds timeout_;
};

}  // namespace humangan
