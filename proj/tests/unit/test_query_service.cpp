// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <thread>
#include <tuple>

#include "humangan/errors.hpp"
#include "humangan/http_api.hpp"
#include "humangan/oracle.hpp"
#include "humangan/query_service.hpp"
#include "humangan/run_io.hpp"
#include "support/convert.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a _res macro.
#include <httplib.h>
#include <json.hpp>

using namespace humangan;
using namespace std::chrono_literals;
using nlohmann::json;
namespace fs = std::filesystem;
using support::vec;

namespace {

std::vector<PairQuery> make_queries(std::size_t count, const std::string& prefix = "q") {
    std::vector<PairQuery> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = static_cast<double>(i);
        out.push_back({prefix + std::to_string(i), i, 0, vec({x, -x}), vec({-x, 0.25})});
    }
    return out;
}

// One response: (query_id, rater_id, score).
using Answer = std::tuple<std::string, std::string, int>;

std::vector<Answer> random_answers(const std::vector<PairQuery>& qs, std::size_t raters, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> score(1, 5);
    std::vector<Answer> out;
    for (const auto& q : qs)
        for (std::size_t r = 0; r < raters; ++r) out.emplace_back(q.query_id, "rater" + std::to_string(r), score(rng));
    return out;
}

std::string as_csv(const std::vector<Answer>& answers) {
    std::string csv = "query_id,rater_id,score\n";
    for (const auto& [q, r, s] : answers) csv += q + "," + r + "," + std::to_string(s) + "\n";
    return csv;
}

// Drives the live path: each rater pulls until drained and answers from the table.
void answer_live(QueryService& svc, const std::vector<Answer>& answers, std::size_t raters) {
    std::map<std::pair<std::string, std::string>, int> table;
    for (const auto& [q, r, s] : answers) table[{q, r}] = s;
    for (std::size_t r = 0; r < raters; ++r) {
        const std::string rater = "rater" + std::to_string(r);
        const std::string sid = svc.create_session(rater);
        while (const auto q = svc.next_query(sid)) svc.submit_response(sid, q->query_id, table.at({q->query_id, rater}));
    }
}

void check_conservation(const QueryService& svc, const std::string& sid) {
    const SessionInfo s = svc.session(sid);
    CHECK(s.assigned.size() == s.answered.size() + s.outstanding.size());
    for (const auto& a : s.answered) CHECK(s.assigned.count(a) == 1);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("humangan_qs_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("opening batches", "[service]") {
    QueryService svc;
    const BatchManifest m = svc.open_batch(0, make_queries(500), 1);
    CHECK(m.batch_id == "batch-it0");
    CHECK(m.query_ids.size() == 500);
    CHECK(m.raters_per_query == 1);
    CHECK_FALSE(m.complete);
    CHECK(svc.batch_status(m.batch_id).queries == 500);

    CHECK_THROWS_AS(svc.open_batch(1, make_queries(3, "a"), 0), ValidationError);
    CHECK_THROWS_AS(svc.open_batch(1, {}, 1), ValidationError);
    auto dup = make_queries(3, "d");
    dup.push_back(dup[1]);
    CHECK_THROWS_WITH(svc.open_batch(1, dup, 1), Catch::Matchers::ContainsSubstring("d1"));

    // Same iteration, same ids: the existing manifest comes back.
    CHECK(svc.open_batch(0, make_queries(500), 1).query_ids == m.query_ids);
    CHECK_THROWS_AS(svc.open_batch(0, make_queries(5, "other"), 1), ConflictError);
    CHECK_THROWS_AS(svc.manifest("batch-it9"), ValidationError);
}

TEST_CASE("assignment and submission contract", "[service]") {
    QueryService svc;
    svc.open_batch(0, make_queries(3), 1);
    const std::string sid = svc.create_session("alice");
    const auto a = svc.next_query(sid);
    const auto b = svc.next_query(sid);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->query_id != b->query_id);
    check_conservation(svc, sid);

    CHECK(svc.submit_response(sid, a->query_id, 3) == 0.0);
    CHECK(svc.submit_response(sid, b->query_id, 1) == 1.0);
    CHECK_THROWS_AS(svc.submit_response(sid, a->query_id, 2), RejectedError);
    CHECK_THROWS_AS(svc.submit_response(sid, "q2", 2), RejectedError);
    const auto c = svc.next_query(sid);
    REQUIRE(c);
    CHECK_THROWS_AS(svc.submit_response(sid, c->query_id, 6), ValidationError);
    CHECK_THROWS_AS(svc.submit_response(sid, c->query_id, 0), ValidationError);
    CHECK(svc.submit_response(sid, c->query_id, 5) == -1.0);
    check_conservation(svc, sid);
    CHECK_FALSE(svc.next_query(sid));
    CHECK(svc.batch_status("batch-it0").complete);

    CHECK_THROWS_AS(svc.next_query("nope"), AuthError);
    CHECK_THROWS_AS(svc.submit_response("nope", "q0", 3), AuthError);
    CHECK_THROWS_AS(svc.create_session(""), ValidationError);
}

TEST_CASE("a rater never sees a query twice", "[service]") {
    QueryService svc;
    svc.open_batch(0, make_queries(2), 2);
    const std::string s1 = svc.create_session("bob");
    const std::string s2 = svc.create_session("bob");
    std::set<std::string> seen;
    for (const auto& sid : {s1, s2})
        while (const auto q = svc.next_query(sid)) CHECK(seen.insert(q->query_id).second);
    CHECK(seen.size() == 2);
}

TEST_CASE("aggregation", "[service]") {
    QueryService svc;
    svc.open_batch(0, make_queries(2), 2);
    const std::vector<Answer> answers{{"q0", "r0", 1}, {"q0", "r1", 3}, {"q1", "r0", 5}};
    const ImportReport rep = svc.import_responses(as_csv(answers));
    CHECK(rep.applied == 3);
    try {
        svc.aggregate_batch("batch-it0");
        FAIL("expected IncompleteBatchError");
    } catch (const IncompleteBatchError& e) {
        CHECK(e.missing() == std::vector<std::string>{"q1"});
    }
    svc.import_responses("query_id,rater_id,score\nq1,r1,4\n");
    const auto agg = svc.aggregate_batch("batch-it0");
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].query_id == "q0");
    CHECK(agg[0].delta_d == 0.5);
    CHECK(agg[1].delta_d == -0.75);
}

TEST_CASE("aggregates stay in range and ignore arrival order", "[service][property]") {
    std::mt19937_64 rng(21);
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        const std::size_t raters = 1 + trial % 4;
        const auto qs = make_queries(1 + trial % 7);
        auto answers = random_answers(qs, raters, trial);
        QueryService a, b;
        a.open_batch(0, qs, raters);
        b.open_batch(0, qs, raters);
        a.import_responses(as_csv(answers));
        std::shuffle(answers.begin(), answers.end(), rng);
        b.import_responses(as_csv(answers));
        const auto x = a.aggregate_batch("batch-it0");
        const auto y = b.aggregate_batch("batch-it0");
        REQUIRE(x.size() == y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(x[i].delta_d == y[i].delta_d);
            CHECK(x[i].delta_d >= -1.0);
            CHECK(x[i].delta_d <= 1.0);
        }
    }
}

TEST_CASE("live and import paths agree exactly", "[service][dual]") {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const std::size_t raters = 1 + trial % 3;
        const auto qs = make_queries(20);
        const auto answers = random_answers(qs, raters, 100 + trial);

        QueryService live;
        live.open_batch(3, qs, raters);
        answer_live(live, answers, raters);

        QueryService offline;
        offline.open_batch(3, qs, raters);
        const std::string exported = offline.export_batch("batch-it3");
        CHECK(exported.rfind("query_id,plus,minus,renderer\n", 0) == 0);
        const ImportReport rep = offline.import_responses(as_csv(answers));
        CHECK(rep.applied == answers.size());
        CHECK(rep.errors.empty());

        const auto x = live.aggregate_batch("batch-it3");
        const auto y = offline.aggregate_batch("batch-it3");
        REQUIRE(x.size() == y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(x[i].query_id == y[i].query_id);
            CHECK(x[i].delta_d == y[i].delta_d);
        }
    }
}

TEST_CASE("export format", "[service][io]") {
    QueryServiceOptions opts;
    opts.renderer = "speech";
    QueryService svc(opts);
    std::vector<PairQuery> qs{{"it0-n0-r0", 0, 0, vec({0.5, -1.25}), vec({1e-3, 2})}};
    svc.open_batch(0, qs, 1);
    const std::string csv = svc.export_batch("batch-it0");
    CHECK(csv == "query_id,plus,minus,renderer\nit0-n0-r0,0.5;-1.25,0.001;2,speech\n");
    CHECK(svc.renderer() == "speech");
}

TEST_CASE("import reports bad rows and is idempotent", "[service][import]") {
    QueryService svc;
    const auto qs = make_queries(5);
    svc.open_batch(0, qs, 1);
    auto answers = random_answers(qs, 1, 7);
    std::string csv = as_csv(answers);
    csv += "ghost,rater0,3\n";
    const ImportReport first = svc.import_responses(csv);
    CHECK(first.applied == 5);
    REQUIRE(first.errors.size() == 1);
    CHECK(first.errors[0].line == 7);
    const auto before = svc.aggregate_batch("batch-it0");

    const ImportReport second = svc.import_responses(csv);
    CHECK(second.applied == 0);
    CHECK(second.duplicates == 5);
    CHECK(second.errors.size() == 1);
    const auto after = svc.aggregate_batch("batch-it0");
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].delta_d == after[i].delta_d);

    const auto& [q, r, s] = answers[0];
    const ImportReport conflict = svc.import_responses("query_id,rater_id,score\n" + q + "," + r + "," +
                                                       std::to_string(s == 5 ? 1 : s + 1) + "\n");
    CHECK(conflict.applied == 0);
    CHECK(conflict.errors.size() == 1);

    const ImportReport empty = svc.import_responses("");
    CHECK(empty.applied == 0);
    CHECK(empty.errors.empty());
    CHECK(svc.import_responses("a,b\n").errors.size() == 1);
    CHECK(svc.import_responses("query_id,rater_id,score\nq0,x,9\nq0,y,two\nq0,z\n").errors.size() == 3);
}

TEST_CASE("concurrent pulls give disjoint assignments covering the batch", "[service][concurrency]") {
    for (std::size_t threads : {2u, 8u}) {
        QueryService svc;
        const auto qs = make_queries(400);
        svc.open_batch(0, qs, 1);
        std::vector<std::vector<std::string>> logs(threads);
        std::vector<std::string> sids;
        for (std::size_t t = 0; t < threads; ++t) sids.push_back(svc.create_session("r" + std::to_string(t)));
        {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < threads; ++t)
                pool.emplace_back([&, t] {
                    while (const auto q = svc.next_query(sids[t])) {
                        logs[t].push_back(q->query_id);
                        svc.submit_response(sids[t], q->query_id, 1 + static_cast<int>(t % 5));
                    }
                });
        }
        std::multiset<std::string> all;
        for (const auto& l : logs) all.insert(l.begin(), l.end());
        CHECK(all.size() == qs.size());
        for (const auto& q : qs) CHECK(all.count(q.query_id) == 1);
        for (const auto& sid : sids) check_conservation(svc, sid);
        CHECK(svc.batch_status("batch-it0").complete);
    }
}

TEST_CASE("stale assignments return to the pool", "[service][expiry]") {
    auto now = std::make_shared<Clock::time_point>(Clock::time_point{});
    QueryServiceOptions opts;
    opts.assignment_timeout = 60s;
    opts.clock = [now] { return *now; };
    QueryService svc(opts);
    svc.open_batch(0, make_queries(1), 1);
    const std::string slow = svc.create_session("slow");
    const std::string fast = svc.create_session("fast");
    REQUIRE(svc.next_query(slow));
    CHECK_FALSE(svc.next_query(fast));
    CHECK(svc.batch_status("batch-it0").outstanding == 1);

    *now += 59s;
    CHECK(svc.expire_stale() == 0);
    *now += 1s;
    CHECK(svc.expire_stale() == 1);
    check_conservation(svc, slow);
    CHECK(svc.session(slow).assigned.empty());

    const auto q = svc.next_query(fast);
    REQUIRE(q);
    CHECK_THROWS_AS(svc.submit_response(slow, q->query_id, 3), RejectedError);
    svc.submit_response(fast, q->query_id, 2);
    CHECK(svc.aggregate_batch("batch-it0")[0].delta_d == 0.5);
    // The abandoned rater is not offered the query again.
    CHECK_FALSE(svc.next_query(slow));
}

TEST_CASE("responses survive a restart through the log", "[service][durability]") {
    const fs::path dir = fresh_dir("replay");
    const auto qs = make_queries(6);
    const auto answers = random_answers(qs, 2, 9);
    std::vector<RatingResponse> expected;
    {
        QueryServiceOptions opts;
        opts.data_dir = dir;
        QueryService svc(opts);
        svc.open_batch(1, qs, 2);
        std::vector<Answer> first, second;
        for (const auto& a : answers) (std::get<1>(a) == "rater0" ? first : second).push_back(a);
        answer_live(svc, first, 1);
        svc.import_responses(as_csv(second));
        expected = svc.aggregate_batch("batch-it1");
    }
    QueryServiceOptions opts;
    opts.data_dir = dir;
    QueryService svc(opts);
    const BatchManifest m = svc.open_batch(1, qs, 2);
    CHECK(m.complete);
    const auto got = svc.aggregate_batch("batch-it1");
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].delta_d == expected[i].delta_d);
    CHECK(svc.import_responses(as_csv(answers)).duplicates == answers.size());
}

TEST_CASE("human discriminator suspends on timeout", "[service][trainer]") {
    QueryService svc;
    HumanDiscriminator disc(svc, 1, 20ms);
    const auto qs = make_queries(3);
    CHECK_FALSE(disc.rate(0, qs));
    CHECK(svc.training_status().state == "suspended");
    CHECK_FALSE(disc.objective({}));

    // Answering afterwards lets the same batch resolve.
    svc.import_responses(as_csv(random_answers(qs, 1, 1)));
    const auto resolved = disc.rate(0, qs);
    REQUIRE(resolved);
    CHECK(resolved->size() == 3);
    CHECK(svc.batch_status("batch-it0").closed);
    CHECK_FALSE(svc.active_batch());
}

TEST_CASE("HTTP API", "[service][http]") {
    QueryService svc;
    svc.open_batch(0, make_queries(2), 1);
    ServiceServer server(svc);
    server.start("127.0.0.1", 0);
    REQUIRE(server.port() > 0);
    httplib::Client cli("127.0.0.1", server.port());

    auto res = cli.Post("/api/sessions", R"({"rater_id":"carol"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const std::string sid = json::parse(res->body).at("session_id");

    res = cli.Get("/api/sessions/" + sid + "/next");
    REQUIRE(res);
    json body = json::parse(res->body);
    CHECK(body.at("drained") == false);
    const std::string qid = body.at("query").at("query_id");
    CHECK(body.at("query").at("renderer") == "shape2d");
    CHECK(body.at("query").at("first").size() == 2);

    auto post = [&](const json& j) {
        return cli.Post("/api/sessions/" + sid + "/responses", j.dump(), "application/json");
    };
    res = post({{"query_id", qid}, {"score", 2}});
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body).at("delta_d") == 0.5);
    CHECK(post({{"query_id", qid}, {"score", 2}})->status == 409);
    CHECK(post({{"query_id", qid}, {"score", 7}})->status == 400);
    CHECK(post({{"query_id", "q1"}, {"score", 2.5}})->status == 400);
    CHECK(cli.Post("/api/sessions/" + sid + "/responses", "not json", "application/json")->status == 400);
    CHECK(cli.Get("/api/sessions/unknown/next")->status == 401);
    CHECK(cli.Post("/api/sessions", R"({"rater_id":""})", "application/json")->status == 400);

    res = cli.Get("/api/batches/batch-it0");
    REQUIRE(res);
    body = json::parse(res->body);
    CHECK(body.at("queries") == 2);
    CHECK(body.at("responses") == 1);
    CHECK(body.at("complete") == false);
    CHECK(cli.Get("/api/batches/batch-it7")->status == 404);

    res = cli.Get("/api/status");
    REQUIRE(res);
    body = json::parse(res->body);
    CHECK(body.at("state") == "idle");
    CHECK(body.at("queries_outstanding") == 1);
    CHECK(body.at("batch_id") == "batch-it0");
    server.stop();
}

TEST_CASE("binding a taken port is a startup error", "[service][http]") {
    QueryService svc;
    ServiceServer first(svc);
    first.start("127.0.0.1", 0);
    ServiceServer second(svc);
    CHECK_THROWS_AS(second.start("127.0.0.1", first.port()), StartupError);
}

TEST_CASE("scripted rater drives one training iteration over HTTP", "[service][http][trainer]") {
    QueryService svc;
    HumanDiscriminator disc(svc, 1, 30s);
    ServiceServer server(svc);
    server.start("127.0.0.1", 0);

    TrainConfig cfg;
    cfg.n = 5;
    cfg.nes.r = 2;
    cfg.iterations = 1;
    cfg.prior_seed = 3;
    cfg.nes.seed = 4;
    const GeneratorParams g0 = random_params(GeneratorConfig{2, {4, 4}, 2, 2.0, 0}, 5);
    const PosteriorField field = GaussianBowl{2.0, {}};

    std::atomic<std::size_t> answered = 0;
    std::jthread rater([&, port = server.port()](std::stop_token stop) {
        httplib::Client cli("127.0.0.1", port);
        const std::string sid =
            json::parse(cli.Post("/api/sessions", R"({"rater_id":"bot"})", "application/json")->body)
                .at("session_id");
        while (!stop.stop_requested()) {
            const json next = json::parse(cli.Get("/api/sessions/" + sid + "/next")->body);
            if (next.at("drained")) {
                std::this_thread::sleep_for(2ms);
                continue;
            }
            const json& q = next.at("query");
            const auto first = q.at("first").get<std::vector<double>>();
            const auto second = q.at("second").get<std::vector<double>>();
            const double delta = true_posterior(field, support::to_eigen(first)) -
                                 true_posterior(field, support::to_eigen(second));
            const json ans{{"query_id", q.at("query_id")}, {"score", delta_to_pairwise_score(delta)}};
            if (cli.Post("/api/sessions/" + sid + "/responses", ans.dump(), "application/json")->status == 200)
                ++answered;
        }
    });

    const TrainingRun run = train_humangan(g0, cfg, disc);
    rater.request_stop();
    rater.join();
    server.stop();
    REQUIRE(run.completed_iterations() == 1);
    CHECK(run.snapshots[1].query_count == 10);
    CHECK(answered == 10);
    CHECK(run.snapshots[1].params != run.snapshots[0].params);
    CHECK(svc.batch_status("batch-it0").closed);
}
