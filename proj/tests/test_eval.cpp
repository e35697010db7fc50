// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "support/scripted_transport.hpp"
#include "support/worked_example.hpp"
#include "zebra/dataset.hpp"
#include "zebra/eval.hpp"
#include "zebra/generator.hpp"
#include "zebra/http_client.hpp"
#include "zebra/render.hpp"
#include "zebra/rng.hpp"

using namespace zebra;
using namespace zebra::testsupport;

namespace {

const std::vector<std::vector<std::string>> kSolution = {
    {"police officer", "fantasy", "handball"},
    {"nurse", "romance", "bouldering"},
};

std::string answer_json(const std::vector<std::vector<std::string>>& rows) {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        j["object_" + std::to_string(i + 1)] = rows[i];
    }
    return j.dump(4);
}

/// Independent exhaustive maximum for the permutation metric: recursive
/// row assignment instead of std::next_permutation over the response.
double oracle_best_cell(const ResponseMatrix& response,
                        const std::vector<std::vector<std::string>>& solution) {
    const std::size_t n = solution.size();
    std::vector<bool> used(n, false);
    std::vector<std::size_t> assign(n);
    double best = 0.0;
    const std::function<void(std::size_t)> go = [&](std::size_t row) {
        if (row == n) {
            int matches = 0;
            int total = 0;
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < solution[r].size(); ++c) {
                    ++total;
                    if (text::canonical_cell(response[assign[r]][c]) ==
                        text::canonical_cell(solution[r][c])) {
                        ++matches;
                    }
                }
            }
            best = std::max(best, static_cast<double>(matches) / total);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            used[i] = true;
            assign[row] = i;
            go(row + 1);
            used[i] = false;
        }
    };
    go(0);
    return best;
}

} // namespace

TEST_CASE("parse_response extracts the first balanced object") {
    Size size{2, 3};
    std::vector<CategoryId> cats = {"jobs", "book_genres", "hobbies"};

    SECTION("clean JSON") {
        ParseOutcome out = parse_response(answer_json(kSolution), size, cats);
        REQUIRE(out.ok);
        CHECK(out.matrix == kSolution);
    }
    SECTION("prose and code fences around the object") {
        std::string raw = "Sure! Here is my answer:\n```json\n" + answer_json(kSolution) +
                          "\n```\nLet me know if you need anything else.";
        ParseOutcome out = parse_response(raw, size, cats);
        REQUIRE(out.ok);
        CHECK(out.matrix == kSolution);
    }
    SECTION("an unparseable brace blob before the real object is skipped") {
        std::string raw = "{not actually json} " + answer_json(kSolution);
        ParseOutcome out = parse_response(raw, size, cats);
        REQUIRE(out.ok);
        CHECK(out.matrix == kSolution);
    }
    SECTION("missing object key") {
        nlohmann::json j = nlohmann::json::parse(answer_json(kSolution));
        j.erase("object_2");
        ParseOutcome out = parse_response(j.dump(), size, cats);
        CHECK_FALSE(out.ok);
        CHECK(out.error.find("object_2") != std::string::npos);
    }
    SECTION("wrong arity") {
        nlohmann::json j = nlohmann::json::parse(answer_json(kSolution));
        j["object_1"].erase(2);
        CHECK_FALSE(parse_response(j.dump(), size, cats).ok);
    }
    SECTION("extra keys are tolerated") {
        nlohmann::json j = nlohmann::json::parse(answer_json(kSolution));
        j["explanation"] = "because";
        CHECK(parse_response(j.dump(), size, cats).ok);
    }
    SECTION("no JSON at all") {
        ParseOutcome out = parse_response("I cannot solve this puzzle.", size, cats);
        CHECK_FALSE(out.ok);
        CHECK(out.error.find("no JSON") != std::string::npos);
    }
    SECTION("non-string cells fail") {
        std::string raw = R"({"object_1": [1, 2, 3], "object_2": ["a", "b", "c"]})";
        CHECK_FALSE(parse_response(raw, size, cats).ok);
    }
}

TEST_CASE("score_puzzle") {
    SECTION("exact answer") {
        PuzzleScore s = score_puzzle(kSolution, kSolution);
        CHECK(s.a_puzzle == 1);
        CHECK(s.a_cell == 1.0);
    }
    SECTION("one wrong cell out of six") {
        ResponseMatrix r = kSolution;
        r[0][1] = "romance";
        PuzzleScore s = score_puzzle(r, kSolution);
        CHECK(s.a_puzzle == 0);
        CHECK_THAT(s.a_cell, Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-15));
    }
    SECTION("rows swapped scores zero cells but best-permuted one") {
        ResponseMatrix r = {kSolution[1], kSolution[0]};
        PuzzleScore s = score_puzzle(r, kSolution);
        CHECK(s.a_puzzle == 0);
        CHECK(s.a_cell == 0.0);
        CHECK(best_permuted_cell_accuracy(r, kSolution) == 1.0);
    }
    SECTION("whitespace, case and combining marks are forgiven") {
        ResponseMatrix r = kSolution;
        r[0][0] = "  Police OFFICER ";
        CHECK(score_puzzle(r, kSolution).a_puzzle == 1);
        std::vector<std::vector<std::string>> truth = {{"smörgås"}};
        ResponseMatrix decomposed = {{"SMO\xcc\x88RGA\xcc\x8aS"}};
        CHECK(score_puzzle(decomposed, truth).a_puzzle == 1);
        CHECK(score_puzzle(decomposed, truth, /*strict=*/true).a_puzzle == 0);
    }
    SECTION("shape mismatch throws") {
        ResponseMatrix r = {kSolution[0]};
        CHECK_THROWS_AS(score_puzzle(r, kSolution), EvalError);
    }
}

TEST_CASE("best permuted accuracy equals the exhaustive oracle") {
    Rng rng(314);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g"};
    for (int trial = 0; trial < 500; ++trial) {
        int n = rng.range(2, 4);
        int m = rng.range(1, 4);
        std::vector<std::vector<std::string>> solution;
        ResponseMatrix response;
        for (int r = 0; r < n; ++r) {
            std::vector<std::string> srow;
            std::vector<std::string> rrow;
            for (int c = 0; c < m; ++c) {
                srow.push_back(pool[rng.below(pool.size())]);
                rrow.push_back(pool[rng.below(pool.size())]);
            }
            solution.push_back(srow);
            response.push_back(rrow);
        }
        double got = best_permuted_cell_accuracy(response, solution);
        double want = oracle_best_cell(response, solution);
        CHECK(got == want);
        CHECK(got >= score_puzzle(response, solution).a_cell);
    }
}

TEST_CASE("query_model retry policy") {
    ModelEndpointConfig cfg;
    cfg.base_url = "http://example.invalid/v1";
    cfg.model = "test-model";

    SECTION("rate limits on attempts 1-2, success on 3") {
        ScriptedTransport t({ScriptedTransport::status(429), ScriptedTransport::status(429),
                             ScriptedTransport::ok("hello")});
        QueryResult q = query_model("prompt", cfg, "token", t);
        CHECK(q.ok);
        CHECK(q.text == "hello");
        CHECK(q.attempts == 3);
        REQUIRE(t.sleeps.size() == 2);
        for (auto d : t.sleeps) CHECK(d == std::chrono::milliseconds(5000));
    }
    SECTION("five consecutive server errors exhaust the attempts") {
        ScriptedTransport t({ScriptedTransport::status(500)});
        QueryResult q = query_model("prompt", cfg, "token", t);
        CHECK_FALSE(q.ok);
        CHECK(q.failure == FailureClass::server_error);
        CHECK(q.attempts == 5);
        CHECK(t.sleeps.size() == 4);
        CHECK(t.request_bodies.size() == 5);
    }
    SECTION("timeouts are terminal on the first attempt") {
        ScriptedTransport t({ScriptedTransport::broken(FailureClass::timeout)});
        QueryResult q = query_model("prompt", cfg, "token", t);
        CHECK_FALSE(q.ok);
        CHECK(q.failure == FailureClass::timeout);
        CHECK(q.attempts == 1);
        CHECK(t.sleeps.empty());
    }
    SECTION("connection errors are retried") {
        ScriptedTransport t({ScriptedTransport::broken(FailureClass::connection_error),
                             ScriptedTransport::ok("back")});
        QueryResult q = query_model("prompt", cfg, "token", t);
        CHECK(q.ok);
        CHECK(q.attempts == 2);
        CHECK(t.sleeps.size() == 1);
    }
    SECTION("malformed 2xx bodies are terminal") {
        ScriptedTransport t({ScriptedTransport::status(200, "{\"weird\": true}")});
        QueryResult q = query_model("prompt", cfg, "token", t);
        CHECK_FALSE(q.ok);
        CHECK(q.failure == FailureClass::malformed_response);
        CHECK(q.attempts == 1);
    }
    SECTION("request body carries the knobs") {
        cfg.temperature = 0.0;
        ScriptedTransport t({ScriptedTransport::ok("x")});
        (void)query_model("prompt text", cfg, "token", t);
        nlohmann::json body = nlohmann::json::parse(t.request_bodies.at(0));
        CHECK(body["model"] == "test-model");
        CHECK(body["max_completion_tokens"] == 100000);
        CHECK(body["temperature"] == 0.0);
        CHECK(body["messages"][0]["content"] == "prompt text");
        CHECK_FALSE(body.contains("reasoning_effort"));
    }
}

TEST_CASE("evaluate_record maps failures to wrong solutions") {
    PuzzleInstance p = worked_2x3_puzzle();
    DatasetRecord record = make_record(p, render_prompt(p, en_houses()), en_houses());

    SECTION("terminal request failure") {
        QueryResult q;
        q.ok = false;
        q.failure = FailureClass::server_error;
        q.attempts = 5;
        EvalRecord r = evaluate_record(record, q);
        CHECK(r.status == "request_failed");
        CHECK(r.a_puzzle == 0);
        CHECK(r.a_cell == 0.0);
        CHECK(r.a_best_cell == 0.0);
        CHECK(r.attempts == 5);
    }
    SECTION("unparseable answer") {
        QueryResult q;
        q.ok = true;
        q.text = "no json here";
        q.attempts = 1;
        EvalRecord r = evaluate_record(record, q);
        CHECK(r.status == "parse_error");
        CHECK(r.a_puzzle == 0);
    }
    SECTION("correct answer") {
        QueryResult q;
        q.ok = true;
        q.text = answer_json(record.solution_names);
        q.attempts = 1;
        EvalRecord r = evaluate_record(record, q);
        CHECK(r.status == "ok");
        CHECK(r.a_puzzle == 1);
        CHECK(r.a_cell == 1.0);
        CHECK(r.a_best_cell == 1.0);
    }
}

TEST_CASE("mock sources") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    cfg.n_red_herrings = 2;
    cfg.master_seed = 777;
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 8; ++i) {
        PuzzleInstance p = generate_puzzle(en, cfg, static_cast<std::uint64_t>(i));
        records.push_back(make_record(p, render_prompt(p, en), en));
    }

    SECTION("oracle answers everything correctly") {
        OracleSource oracle;
        std::vector<EvalRecord> results = evaluate_dataset(records, oracle);
        MetricSummary s = aggregate(results);
        CHECK(s.mean_a_puzzle == 1.0);
        CHECK(s.mean_a_cell == 1.0);
        CHECK(s.bernoulli_sample_std == 0.0);
    }
    SECTION("scrambler keeps best-permuted accuracy at one") {
        ScramblerSource scrambler(99);
        std::vector<EvalRecord> results = evaluate_dataset(records, scrambler);
        bool scrambled_at_least_once = false;
        for (const EvalRecord& r : results) {
            CHECK(r.a_best_cell == 1.0);
            CHECK(r.a_best_cell >= r.a_cell);
            if (r.a_cell < 1.0) scrambled_at_least_once = true;
        }
        CHECK(scrambled_at_least_once);
        MetricSummary s = aggregate(results);
        CHECK(s.mean_a_best_cell >= s.mean_a_cell);
    }
    SECTION("resume skips scored ids and jobs do not change results") {
        OracleSource oracle;
        std::set<std::string> skip = {records[0].id, records[3].id};
        std::vector<EvalRecord> rest = evaluate_dataset(records, oracle, 1, skip);
        CHECK(rest.size() == records.size() - 2);
        std::vector<EvalRecord> parallel = evaluate_dataset(records, oracle, 4, skip);
        REQUIRE(parallel.size() == rest.size());
        for (std::size_t i = 0; i < rest.size(); ++i) {
            CHECK(parallel[i].puzzle_id == rest[i].puzzle_id);
            CHECK(parallel[i].a_cell == rest[i].a_cell);
        }
        int sink_calls = 0;
        evaluate_dataset(records, oracle, 2, {}, [&](const EvalRecord&) { ++sink_calls; });
        CHECK(sink_calls == static_cast<int>(records.size()));
    }
}

TEST_CASE("eval records round-trip through JSONL") {
    PuzzleInstance p = worked_2x3_puzzle();
    DatasetRecord record = make_record(p, render_prompt(p, en_houses()), en_houses());
    OracleSource oracle;
    EvalRecord r = evaluate_record(record, oracle.respond(record));

    auto path = std::filesystem::temp_directory_path() / "zebra_results_roundtrip.jsonl";
    std::filesystem::remove(path);
    {
        std::ofstream out(path);
        out << eval_record_to_json(r).dump() << "\n";
    }
    std::vector<EvalRecord> loaded = read_results(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].puzzle_id == r.puzzle_id);
    CHECK(loaded[0].a_cell == r.a_cell);
    CHECK(loaded[0].matrix == r.matrix);
    CHECK(load_scored_ids(path) == std::set<std::string>{r.puzzle_id});
    std::filesystem::remove(path);
}

TEST_CASE("http transport url splitting") {
    auto [origin, prefix] = HttpTransport::split_base_url("https://api.example.com/v1");
    CHECK(origin == "https://api.example.com");
    CHECK(prefix == "/v1");
    auto [origin2, prefix2] = HttpTransport::split_base_url("http://localhost:8080");
    CHECK(origin2 == "http://localhost:8080");
    CHECK(prefix2.empty());
    CHECK_THROWS_AS(HttpTransport::split_base_url("api.example.com"), EvalError);
}

TEST_CASE("http transport against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++hits;
        CHECK(req.get_header_value("Authorization") == "Bearer secret");
        if (n <= 2) {
            res.status = 429;
            res.set_content("{}", "application/json");
            return;
        }
        nlohmann::json body = {
            {"choices",
             {{{"message", {{"role", "assistant"}, {"content", "pong " + req.body}}}}}}};
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::vector<std::chrono::milliseconds> sleeps;
    HttpTransport transport([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    ModelEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "m";
    cfg.timeout_seconds = 10;
    QueryResult q = query_model("ping", cfg, "secret", transport);
    CHECK(q.ok);
    CHECK(q.attempts == 3);
    CHECK(sleeps.size() == 2);
    CHECK(q.text.rfind("pong ", 0) == 0);

    server.stop();
    server_thread.join();
}
