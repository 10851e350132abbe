// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/query_service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "humangan/errors.hpp"
#include "humangan/oracle.hpp"
#include "humangan/run_io.hpp"

namespace humangan {

namespace {

std::string random_token() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    std::ostringstream os;
    os << std::hex << rng();
    return os.str();
}

std::string join_vector(const FeatureVector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_double(v[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

std::optional<int> parse_score(const std::string& s) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

QueryService::QueryService(QueryServiceOptions options) : options_(std::move(options)) {
    if (options_.data_dir.empty()) return;
    std::filesystem::create_directories(options_.data_dir);
    std::ifstream log(options_.data_dir / "responses.log");
    std::string line;
    while (std::getline(log, line)) {
        const auto cells = split(line, ',');
        if (cells.size() != 3) continue;
        const auto score = parse_score(cells[2]);
        if (!score || *score < 1 || *score > 5) continue;
        pending_[cells[0]].emplace(cells[1], *score);
    }
}

std::string QueryService::batch_id_for(std::size_t iteration) { return "batch-it" + std::to_string(iteration); }

bool QueryService::query_complete(const QueryState& q, std::size_t required) const {
    return q.scores.size() >= required;
}

bool QueryService::batch_complete_locked(const Batch& b) const {
    for (const auto& id : b.manifest.query_ids)
        if (!query_complete(queries_.at(id), b.manifest.raters_per_query)) return false;
    return true;
}

const QueryService::Batch& QueryService::batch_locked(const std::string& batch_id) const {
    const auto it = batches_.find(batch_id);
    if (it == batches_.end()) throw ValidationError("unknown batch " + batch_id);
    return it->second;
}

BatchManifest QueryService::open_batch(std::size_t iteration, const std::vector<PairQuery>& queries,
                                       std::size_t raters_per_query) {
    if (queries.empty()) throw ValidationError("a batch needs at least one query");
    if (raters_per_query < 1) throw ValidationError("raters_per_query must be >= 1");
    std::vector<std::string> ids;
    std::set<std::string> seen;
    std::vector<std::string> dups;
    for (const auto& q : queries) {
        if (!seen.insert(q.query_id).second) dups.push_back(q.query_id);
        ids.push_back(q.query_id);
    }
    if (!dups.empty()) throw ValidationError("duplicate query ids in batch: " + join_ids(dups));

    std::lock_guard lock(mutex_);
    const std::string batch_id = batch_id_for(iteration);
    if (const auto it = batches_.find(batch_id); it != batches_.end()) {
        if (!it->second.closed && it->second.manifest.query_ids == ids &&
            it->second.manifest.raters_per_query == raters_per_query) {
            it->second.manifest.complete = batch_complete_locked(it->second);
            return it->second.manifest;
        }
        throw ConflictError("iteration " + std::to_string(iteration) + " already has " +
                            (it->second.closed ? "a resolved" : "an unresolved") + " batch with different queries");
    }
    for (const auto& id : ids)
        if (queries_.count(id)) throw ValidationError("query id " + id + " already belongs to another batch");

    for (const auto& q : queries) {
        QueryState state{q, batch_id, {}, {}};
        if (const auto p = pending_.find(q.query_id); p != pending_.end()) {
            state.scores = std::move(p->second);
            pending_.erase(p);
        }
        queries_.emplace(q.query_id, std::move(state));
    }
    Batch batch{{batch_id, iteration, ids, raters_per_query, false}, false};
    batch.manifest.complete = batch_complete_locked(batch);
    const BatchManifest manifest = batch.manifest;
    batches_.emplace(batch_id, std::move(batch));
    batch_order_.push_back(batch_id);
    changed_.notify_all();
    return manifest;
}

BatchManifest QueryService::manifest(const std::string& batch_id) const {
    std::lock_guard lock(mutex_);
    BatchManifest m = batch_locked(batch_id).manifest;
    m.complete = batch_complete_locked(batch_locked(batch_id));
    return m;
}

BatchStatus QueryService::batch_status(const std::string& batch_id) const {
    std::lock_guard lock(mutex_);
    const Batch& b = batch_locked(batch_id);
    BatchStatus s;
    s.batch_id = batch_id;
    s.iteration = b.manifest.iteration;
    s.queries = b.manifest.query_ids.size();
    s.raters_per_query = b.manifest.raters_per_query;
    s.closed = b.closed;
    for (const auto& id : b.manifest.query_ids) {
        const auto& q = queries_.at(id);
        s.responses += std::min(q.scores.size(), b.manifest.raters_per_query);
        s.complete_queries += query_complete(q, b.manifest.raters_per_query);
        s.outstanding += q.outstanding.size();
    }
    s.complete = s.complete_queries == s.queries;
    return s;
}

void QueryService::close_batch(const std::string& batch_id) {
    std::lock_guard lock(mutex_);
    auto it = batches_.find(batch_id);
    if (it == batches_.end()) throw ValidationError("unknown batch " + batch_id);
    it->second.closed = true;
    for (const auto& id : it->second.manifest.query_ids) {
        auto& q = queries_.at(id);
        for (const auto& [sid, when] : q.outstanding) sessions_.at(sid).outstanding.erase(id);
        q.outstanding.clear();
    }
    changed_.notify_all();
}

std::string QueryService::create_session(const std::string& rater_id) {
    if (rater_id.empty()) throw ValidationError("rater_id must not be empty");
    if (rater_id.find_first_of(",\n\r") != std::string::npos)
        throw ValidationError("rater_id must not contain commas or newlines");
    std::lock_guard lock(mutex_);
    std::string id;
    do {
        id = "s-" + random_token();
    } while (sessions_.count(id));
    sessions_.emplace(id, Session{rater_id, {}, {}});
    return id;
}

SessionInfo QueryService::session(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw AuthError("unknown session " + session_id);
    SessionInfo info{session_id, it->second.rater_id, {}, it->second.answered, it->second.outstanding};
    info.assigned = info.answered;
    info.assigned.insert(info.outstanding.begin(), info.outstanding.end());
    return info;
}

std::size_t QueryService::expire_stale_locked() {
    const auto now = options_.clock();
    std::size_t expired = 0;
    for (auto& [id, q] : queries_) {
        for (auto it = q.outstanding.begin(); it != q.outstanding.end();) {
            if (now - it->second >= options_.assignment_timeout) {
                sessions_.at(it->first).outstanding.erase(id);
                it = q.outstanding.erase(it);
                ++expired;
            } else {
                ++it;
            }
        }
    }
    return expired;
}

std::size_t QueryService::expire_stale() {
    std::lock_guard lock(mutex_);
    return expire_stale_locked();
}

std::optional<PairQuery> QueryService::next_query(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) throw AuthError("unknown session " + session_id);
    expire_stale_locked();
    Session& session = sit->second;
    auto& history = ever_assigned_[session.rater_id];
    for (const auto& batch_id : batch_order_) {
        const Batch& b = batches_.at(batch_id);
        if (b.closed) continue;
        for (const auto& qid : b.manifest.query_ids) {
            QueryState& q = queries_.at(qid);
            if (history.count(qid) || q.scores.count(session.rater_id)) continue;
            if (q.scores.size() + q.outstanding.size() >= b.manifest.raters_per_query) continue;
            q.outstanding.emplace(session_id, options_.clock());
            session.outstanding.insert(qid);
            history.insert(qid);
            return q.query;
        }
    }
    return std::nullopt;
}

void QueryService::append_log_locked(const std::string& query_id, const std::string& rater_id, int score) {
    if (options_.data_dir.empty()) return;
    std::ofstream log(options_.data_dir / "responses.log", std::ios::app);
    log << query_id << ',' << rater_id << ',' << score << '\n';
    log.flush();
    if (!log) throw Error("failed appending to response log in " + options_.data_dir.string());
}

bool QueryService::store_score_locked(const std::string& query_id, const std::string& rater_id, int score, bool log) {
    QueryState& q = queries_.at(query_id);
    if (!q.scores.emplace(rater_id, score).second) return false;
    if (log) append_log_locked(query_id, rater_id, score);
    changed_.notify_all();
    return true;
}

double QueryService::submit_response(const std::string& session_id, const std::string& query_id, int score) {
    std::lock_guard lock(mutex_);
    auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) throw AuthError("unknown session " + session_id);
    const double delta = pairwise_score_to_delta(score);
    Session& session = sit->second;
    if (session.answered.count(query_id)) throw RejectedError("query " + query_id + " was already answered");
    if (!session.outstanding.count(query_id))
        throw RejectedError("query " + query_id + " is not assigned to this session");
    QueryState& q = queries_.at(query_id);
    q.outstanding.erase(session_id);
    session.outstanding.erase(query_id);
    if (!store_score_locked(query_id, session.rater_id, score, true))
        throw RejectedError("rater " + session.rater_id + " already answered query " + query_id);
    session.answered.insert(query_id);
    return delta;
}

std::vector<RatingResponse> QueryService::aggregate_batch(const std::string& batch_id) const {
    std::lock_guard lock(mutex_);
    const Batch& b = batch_locked(batch_id);
    std::vector<std::string> missing;
    std::vector<RatingResponse> out;
    out.reserve(b.manifest.query_ids.size());
    for (const auto& id : b.manifest.query_ids) {
        const auto& q = queries_.at(id);
        if (!query_complete(q, b.manifest.raters_per_query)) {
            missing.push_back(id);
            continue;
        }
        // Scores sum in rater-id order, independent of arrival order.
        double sum = 0.0;
        for (const auto& [rater, score] : q.scores) sum += pairwise_score_to_delta(score);
        out.push_back({id, sum / static_cast<double>(q.scores.size())});
    }
    if (!missing.empty())
        throw IncompleteBatchError("batch " + batch_id + " is incomplete; missing responses for " + join_ids(missing),
                                   std::move(missing));
    return out;
}

std::string QueryService::export_batch(const std::string& batch_id) const {
    std::lock_guard lock(mutex_);
    const Batch& b = batch_locked(batch_id);
    std::ostringstream os;
    os << "query_id,plus,minus,renderer\n";
    for (const auto& id : b.manifest.query_ids) {
        const auto& q = queries_.at(id).query;
        os << id << ',' << join_vector(q.plus_point) << ',' << join_vector(q.minus_point) << ',' << options_.renderer
           << '\n';
    }
    return os.str();
}

ImportReport QueryService::import_responses(const std::string& csv_text) {
    ImportReport report;
    std::istringstream in(csv_text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::lock_guard lock(mutex_);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            if (cells != std::vector<std::string>{"query_id", "rater_id", "score"}) {
                report.errors.push_back({line_no, "header must be query_id,rater_id,score"});
                return report;
            }
            continue;
        }
        if (cells.size() != 3) {
            report.errors.push_back({line_no, "expected 3 columns"});
            continue;
        }
        const auto& [qid, rater, score_text] = std::tie(cells[0], cells[1], cells[2]);
        const auto score = parse_score(score_text);
        if (!score || *score < 1 || *score > 5) {
            report.errors.push_back({line_no, "score must be an integer in 1..5, got '" + score_text + "'"});
            continue;
        }
        if (rater.empty()) {
            report.errors.push_back({line_no, "empty rater_id"});
            continue;
        }
        if (!queries_.count(qid)) {
            report.errors.push_back({line_no, "unknown query_id " + qid});
            continue;
        }
        if (!store_score_locked(qid, rater, *score, true)) {
            if (queries_.at(qid).scores.at(rater) == *score) {
                ++report.duplicates;
            } else {
                report.errors.push_back({line_no, "conflicting response from " + rater + " for " + qid});
            }
            continue;
        }
        ++report.applied;
    }
    return report;
}

ImportReport QueryService::import_responses_file(const std::filesystem::path& path) {
    return import_responses(read_text_file(path));
}

bool QueryService::wait_for_completion(const std::string& batch_id, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    const Batch& b = batch_locked(batch_id);
    return changed_.wait_for(lock, timeout, [&] { return batch_complete_locked(b); });
}

void QueryService::set_training_status(const TrainingStatus& status) {
    std::lock_guard lock(mutex_);
    status_ = status;
}

TrainingStatus QueryService::training_status() const {
    std::lock_guard lock(mutex_);
    return status_;
}

std::optional<std::string> QueryService::active_batch() const {
    std::lock_guard lock(mutex_);
    for (auto it = batch_order_.rbegin(); it != batch_order_.rend(); ++it)
        if (!batches_.at(*it).closed) return *it;
    return std::nullopt;
}

HumanDiscriminator::HumanDiscriminator(QueryService& service, std::size_t raters_per_query,
                                       std::chrono::milliseconds batch_timeout)
    : service_(service), raters_per_query_(raters_per_query), timeout_(batch_timeout) {}

std::optional<std::vector<RatingResponse>> HumanDiscriminator::rate(std::size_t iteration,
                                                                    std::span<const PairQuery> queries) {
    const std::vector<PairQuery> batch(queries.begin(), queries.end());
    const BatchManifest m = service_.open_batch(iteration, batch, raters_per_query_);
    auto status = service_.training_status();
    status.state = "waiting";
    status.iteration = iteration;
    service_.set_training_status(status);
    if (!service_.wait_for_completion(m.batch_id, timeout_)) {
        status.state = "suspended";
        service_.set_training_status(status);
        return std::nullopt;
    }
    auto responses = service_.aggregate_batch(m.batch_id);
    service_.close_batch(m.batch_id);
    status.answered += batch.size();
    service_.set_training_status(status);
    return responses;
}

std::optional<double> HumanDiscriminator::objective(std::span<const FeatureVector> /*points*/) { return std::nullopt; }

}  // namespace humangan
