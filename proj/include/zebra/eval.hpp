// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "zebra/core.hpp"
#include "zebra/dataset.hpp"
#include "zebra/error.hpp"
#include "zebra/rng.hpp"
#include "zebra/stats.hpp"
#include "zebra/text.hpp"

namespace zebra {

// ---------------------------------------------------------------------------
// Endpoint configuration and retry policy

struct ModelEndpointConfig {
    std::string base_url; // e.g. https://api.example.com/v1
    std::string model;
    std::string auth_env = "OPENAI_API_KEY"; // env var holding the token
    int max_completion_tokens = 100000;
    std::optional<double> temperature;
    std::optional<std::string> reasoning_effort;
    int timeout_seconds = 120;
    int max_in_flight = 4;
};

enum class FailureClass {
    none,
    server_error,      // HTTP 5xx
    api_error,         // other non-2xx statuses
    connection_error,  // no HTTP response
    rate_limit,        // HTTP 429
    timeout,           // deadline exceeded; never retried
    malformed_response // 2xx body without assistant content
};

inline std::string_view failure_class_name(FailureClass c) {
    switch (c) {
        case FailureClass::none: return "none";
        case FailureClass::server_error: return "server_error";
        case FailureClass::api_error: return "api_error";
        case FailureClass::connection_error: return "connection_error";
        case FailureClass::rate_limit: return "rate_limit";
        case FailureClass::timeout: return "timeout";
        case FailureClass::malformed_response: return "malformed_response";
    }
    return "?";
}

inline std::optional<FailureClass> failure_class_from_name(std::string_view name) {
    for (FailureClass c : {FailureClass::none, FailureClass::server_error,
                           FailureClass::api_error, FailureClass::connection_error,
                           FailureClass::rate_limit, FailureClass::timeout,
                           FailureClass::malformed_response}) {
        if (failure_class_name(c) == name) return c;
    }
    return std::nullopt;
}

/// Transient classes that do not depend on puzzle difficulty are retried;
/// a timeout might be the puzzle's fault, so it is terminal.
inline bool is_retryable(FailureClass c) {
    return c == FailureClass::server_error || c == FailureClass::api_error ||
           c == FailureClass::connection_error || c == FailureClass::rate_limit;
}

inline constexpr std::chrono::seconds kRetryDelay{5};
inline constexpr int kMaxAttempts = 5; // first try plus up to 4 retries

struct TransportResult {
    bool has_response = false;
    int status = 0;
    std::string body;
    FailureClass transport_failure = FailureClass::none; // when !has_response
};

/// HTTP boundary, injectable so tests can script failures and observe the
/// retry schedule without real sockets or sleeps.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult post_chat(const ModelEndpointConfig& cfg, const std::string& token,
                                      const std::string& body) = 0;
    virtual void sleep_for(std::chrono::milliseconds delay) = 0;
};

struct QueryResult {
    bool ok = false;
    std::string text;
    FailureClass failure = FailureClass::none;
    int attempts = 0;
};

namespace detail {

inline FailureClass classify_status(int status) {
    if (status == 429) return FailureClass::rate_limit;
    if (status >= 500) return FailureClass::server_error;
    if (status < 200 || status >= 300) return FailureClass::api_error;
    return FailureClass::none;
}

inline std::string chat_request_body(const ModelEndpointConfig& cfg, const std::string& prompt) {
    nlohmann::ordered_json body;
    body["model"] = cfg.model;
    body["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}});
    body["max_completion_tokens"] = cfg.max_completion_tokens;
    if (cfg.temperature) body["temperature"] = *cfg.temperature;
    if (cfg.reasoning_effort) body["reasoning_effort"] = *cfg.reasoning_effort;
    return body.dump();
}

inline std::optional<std::string> extract_content(const std::string& body) {
    try {
        nlohmann::json j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    return std::nullopt;
}

} // namespace detail

/// Issue one chat completion with the fixed retry policy: on a retryable
/// failure wait 5 seconds and try again, at most 5 attempts in total.
/// Timeouts and malformed bodies fail immediately; the caller records the
/// failure and scores the puzzle as wrong.
inline QueryResult query_model(const std::string& prompt, const ModelEndpointConfig& cfg,
                               const std::string& token, Transport& transport) {
    const std::string body = detail::chat_request_body(cfg, prompt);
    QueryResult result;
    for (;;) {
        ++result.attempts;
        TransportResult t = transport.post_chat(cfg, token, body);
        FailureClass failure;
        if (!t.has_response) {
            failure = t.transport_failure;
        } else {
            failure = detail::classify_status(t.status);
            if (failure == FailureClass::none) {
                std::optional<std::string> content = detail::extract_content(t.body);
                if (!content) {
                    result.failure = FailureClass::malformed_response;
                    return result;
                }
                result.ok = true;
                result.text = std::move(*content);
                return result;
            }
        }
        if (is_retryable(failure) && result.attempts < kMaxAttempts) {
            transport.sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(kRetryDelay));
            continue;
        }
        result.failure = failure;
        return result;
    }
}

// ---------------------------------------------------------------------------
// Response parsing

using ResponseMatrix = std::vector<std::vector<std::string>>;

struct ParseOutcome {
    bool ok = false;
    ResponseMatrix matrix;
    std::string error;
};

namespace detail {

/// Bounds of the first balanced top-level JSON object starting at or
/// after `from`, honoring string literals and escapes. npos when none.
inline std::pair<std::size_t, std::size_t> find_balanced_object(const std::string& s,
                                                                std::size_t from) {
    std::size_t start = s.find('{', from);
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            char c = s[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) return {start, i + 1};
            }
        }
        start = s.find('{', start + 1);
    }
    return {std::string::npos, std::string::npos};
}

} // namespace detail

/// Extract the first balanced JSON object from the raw model output and
/// read it as a response matrix: keys object_1..object_N, each a list of
/// n_attributes strings in the prompt's category order. Extra keys are
/// tolerated; anything else is a parse failure and scores zero.
inline ParseOutcome parse_response(const std::string& raw, Size size,
                                   const std::vector<CategoryId>& categories) {
    if (static_cast<int>(categories.size()) != size.n_attributes) {
        throw EvalError("category list does not match the puzzle size");
    }
    std::size_t from = 0;
    std::optional<nlohmann::json> parsed;
    while (true) {
        auto [begin, end] = detail::find_balanced_object(raw, from);
        if (begin == std::string::npos) break;
        try {
            parsed = nlohmann::json::parse(raw.substr(begin, end - begin));
            break;
        } catch (const nlohmann::json::exception&) {
            from = begin + 1;
        }
    }
    ParseOutcome out;
    if (!parsed || !parsed->is_object()) {
        out.error = "no JSON object found in response";
        return out;
    }
    for (int i = 1; i <= size.n_objects; ++i) {
        const std::string key = "object_" + std::to_string(i);
        if (!parsed->contains(key)) {
            out.error = "missing key '" + key + "'";
            return out;
        }
        const auto& row = (*parsed)[key];
        if (!row.is_array() || static_cast<int>(row.size()) != size.n_attributes) {
            out.error = "key '" + key + "' must list " + std::to_string(size.n_attributes) +
                        " attributes";
            return out;
        }
        std::vector<std::string> cells;
        for (const auto& cell : row) {
            if (!cell.is_string()) {
                out.error = "non-string cell under '" + key + "'";
                return out;
            }
            cells.push_back(cell.get<std::string>());
        }
        out.matrix.push_back(std::move(cells));
    }
    out.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

namespace detail {

inline bool cells_match(const std::string& response, const std::string& truth, bool strict) {
    if (strict) return response == truth;
    return text::canonical_cell(response) == text::canonical_cell(truth);
}

} // namespace detail

struct PuzzleScore {
    int a_puzzle = 0;
    double a_cell = 0.0;
};

/// Fraction of matching cells (a_cell) and the all-or-nothing a_puzzle.
/// Cells match under trim/compose/case-fold canonicalization unless
/// strict comparison is requested.
inline PuzzleScore score_puzzle(const ResponseMatrix& response,
                                const std::vector<std::vector<std::string>>& solution_names,
                                bool strict = false) {
    const std::size_t rows = solution_names.size();
    if (response.size() != rows) throw EvalError("response shape mismatch");
    int matches = 0;
    int total = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (response[r].size() != solution_names[r].size()) {
            throw EvalError("response shape mismatch");
        }
        for (std::size_t c = 0; c < response[r].size(); ++c) {
            ++total;
            if (detail::cells_match(response[r][c], solution_names[r][c], strict)) ++matches;
        }
    }
    PuzzleScore s;
    s.a_cell = static_cast<double>(matches) / static_cast<double>(total);
    s.a_puzzle = (matches == total) ? 1 : 0;
    return s;
}

/// Maximum a_cell over every permutation of the response rows. Catches
/// answers that connect attributes correctly but misnumber the objects.
inline double best_permuted_cell_accuracy(const ResponseMatrix& response,
                                          const std::vector<std::vector<std::string>>& solution_names,
                                          bool strict = false) {
    const std::size_t rows = solution_names.size();
    if (response.size() != rows) throw EvalError("response shape mismatch");
    std::vector<std::size_t> perm(rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = 0.0;
    do {
        int matches = 0;
        int total = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& resp_row = response[perm[r]];
            if (resp_row.size() != solution_names[r].size()) {
                throw EvalError("response shape mismatch");
            }
            for (std::size_t c = 0; c < resp_row.size(); ++c) {
                ++total;
                if (detail::cells_match(resp_row[c], solution_names[r][c], strict)) ++matches;
            }
        }
        best = std::max(best, static_cast<double>(matches) / static_cast<double>(total));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// ---------------------------------------------------------------------------
// Evaluation records

struct EvalRecord {
    std::string puzzle_id;
    std::string status; // "ok", "parse_error", "request_failed"
    FailureClass failure = FailureClass::none;
    int attempts = 0;
    std::string raw_response;
    std::optional<ResponseMatrix> matrix;
    int a_puzzle = 0;
    double a_cell = 0.0;
    double a_best_cell = 0.0;
    std::string error;
};

inline nlohmann::ordered_json eval_record_to_json(const EvalRecord& r) {
    nlohmann::ordered_json j;
    j["puzzle_id"] = r.puzzle_id;
    j["status"] = r.status;
    j["failure"] = std::string(failure_class_name(r.failure));
    j["attempts"] = r.attempts;
    j["a_puzzle"] = r.a_puzzle;
    j["a_cell"] = r.a_cell;
    j["a_best_cell"] = r.a_best_cell;
    if (r.matrix) j["matrix"] = *r.matrix;
    j["raw_response"] = r.raw_response;
    j["error"] = r.error;
    return j;
}

inline EvalRecord eval_record_from_json(const nlohmann::json& j) {
    try {
        EvalRecord r;
        r.puzzle_id = j.at("puzzle_id").get<std::string>();
        r.status = j.at("status").get<std::string>();
        auto failure = failure_class_from_name(j.at("failure").get<std::string>());
        if (!failure) throw EvalError("unknown failure class in results file");
        r.failure = *failure;
        r.attempts = j.at("attempts").get<int>();
        r.a_puzzle = j.at("a_puzzle").get<int>();
        r.a_cell = j.at("a_cell").get<double>();
        r.a_best_cell = j.at("a_best_cell").get<double>();
        if (j.contains("matrix")) r.matrix = j.at("matrix").get<ResponseMatrix>();
        r.raw_response = j.at("raw_response").get<std::string>();
        r.error = j.at("error").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw EvalError(std::string("malformed results record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Response sources

/// Produces a raw model answer for one dataset record: an HTTP endpoint
/// in production, an oracle or scrambler for harness self-tests.
class ResponseSource {
public:
    virtual ~ResponseSource() = default;
    virtual QueryResult respond(const DatasetRecord& record) = 0;
};

class EndpointSource : public ResponseSource {
public:
    EndpointSource(ModelEndpointConfig cfg, std::string token, Transport& transport)
        : cfg_(std::move(cfg)), token_(std::move(token)), transport_(transport) {}

    QueryResult respond(const DatasetRecord& record) override {
        return query_model(record.prompt, cfg_, token_, transport_);
    }

private:
    ModelEndpointConfig cfg_;
    std::string token_;
    Transport& transport_;
};

/// Answers every puzzle perfectly from the stored solution; mean a_puzzle
/// over any dataset must be 1.
class OracleSource : public ResponseSource {
public:
    QueryResult respond(const DatasetRecord& record) override {
        nlohmann::ordered_json answer;
        for (int i = 0; i < record.size.n_objects; ++i) {
            answer["object_" + std::to_string(i + 1)] =
                record.solution_names[static_cast<std::size_t>(i)];
        }
        QueryResult q;
        q.ok = true;
        q.attempts = 1;
        q.text = answer.dump(4);
        return q;
    }
};

/// Emits the correct attribute rows under a seeded random permutation of
/// the object numbers: a_best_cell stays 1 while a_cell usually drops.
class ScramblerSource : public ResponseSource {
public:
    explicit ScramblerSource(std::uint64_t seed) : seed_(seed) {}

    QueryResult respond(const DatasetRecord& record) override {
        Rng rng(Rng::derive_seed(seed_, detail::fnv1a64(record.id)));
        std::vector<int> perm(static_cast<std::size_t>(record.size.n_objects));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        nlohmann::ordered_json answer;
        for (int i = 0; i < record.size.n_objects; ++i) {
            answer["object_" + std::to_string(i + 1)] =
                record.solution_names[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        }
        QueryResult q;
        q.ok = true;
        q.attempts = 1;
        q.text = answer.dump(4);
        return q;
    }

private:
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Harness

/// Score a raw answer (or terminal failure) for one record. A failed
/// request or unparseable answer counts as a wrong solution.
inline EvalRecord evaluate_record(const DatasetRecord& record, const QueryResult& q) {
    EvalRecord r;
    r.puzzle_id = record.id;
    r.attempts = q.attempts;
    if (!q.ok) {
        r.status = "request_failed";
        r.failure = q.failure;
        r.error = std::string(failure_class_name(q.failure));
        return r;
    }
    r.raw_response = q.text;
    ParseOutcome parsed = parse_response(q.text, record.size, record.categories);
    if (!parsed.ok) {
        r.status = "parse_error";
        r.error = parsed.error;
        return r;
    }
    r.matrix = parsed.matrix;
    PuzzleScore score = score_puzzle(parsed.matrix, record.solution_names);
    r.a_puzzle = score.a_puzzle;
    r.a_cell = score.a_cell;
    r.a_best_cell = best_permuted_cell_accuracy(parsed.matrix, record.solution_names);
    r.status = "ok";
    return r;
}

/// Evaluate records with up to `jobs` requests in flight. Already-scored
/// ids are skipped (resume) and each finished record is handed to the
/// sink immediately so a crashed run loses at most the in-flight work.
inline std::vector<EvalRecord> evaluate_dataset(
    const std::vector<DatasetRecord>& records, ResponseSource& source, int jobs = 1,
    const std::set<std::string>& skip_ids = {},
    const std::function<void(const EvalRecord&)>& sink = nullptr) {
    std::vector<const DatasetRecord*> todo;
    for (const auto& r : records) {
        if (skip_ids.count(r.id) == 0) todo.push_back(&r);
    }
    std::vector<EvalRecord> results(todo.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < todo.size(); ++i) {
            results[i] = evaluate_record(*todo[i], source.respond(*todo[i]));
            if (sink) sink(results[i]);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::vector<std::thread> workers;
    const int n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), todo.size());
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= todo.size()) return;
                EvalRecord r = evaluate_record(*todo[i], source.respond(*todo[i]));
                {
                    std::lock_guard<std::mutex> lock(sink_mutex);
                    if (sink) sink(r);
                }
                results[i] = std::move(r);
            }
        });
    }
    for (auto& t : workers) t.join();
    return results;
}

/// Means, spreads and standard errors over a finished run.
inline MetricSummary aggregate(const std::vector<EvalRecord>& records) {
    std::vector<double> a_puzzle;
    std::vector<double> a_cell;
    std::vector<double> a_best;
    for (const auto& r : records) {
        a_puzzle.push_back(static_cast<double>(r.a_puzzle));
        a_cell.push_back(r.a_cell);
        a_best.push_back(r.a_best_cell);
    }
    return summarize(a_puzzle, a_cell, a_best);
}

// ---------------------------------------------------------------------------
// Results files: one JSON record per line

inline std::set<std::string> load_scored_ids(const std::filesystem::path& path) {
    std::set<std::string> ids;
    std::ifstream in(path);
    if (!in) return ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ids.insert(eval_record_from_json(nlohmann::json::parse(line)).puzzle_id);
    }
    return ids;
}

inline std::vector<EvalRecord> read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open results file " + path.string());
    std::vector<EvalRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(eval_record_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

} // namespace zebra
