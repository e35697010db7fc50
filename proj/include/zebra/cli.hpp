// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zebra/analysis.hpp"
#include "zebra/dataset.hpp"
#include "zebra/eval.hpp"
#include "zebra/generator.hpp"
#include "zebra/http_client.hpp"
#include "zebra/render.hpp"
#include "zebra/theme.hpp"
#include "zebra/version.hpp"

namespace zebra::cli {

// Exit codes: distinct classes so scripts can branch on the failure kind.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 2;
inline constexpr int kIoError = 3;
inline constexpr int kEndpointError = 4;

inline Size parse_size_token(const std::string& token) {
    std::size_t x = token.find('x');
    if (x == std::string::npos) x = token.find('X');
    if (x == std::string::npos || x == 0 || x + 1 >= token.size()) {
        throw MalformedClueError("size must look like 4x5 (objects x attributes): " + token);
    }
    Size size;
    try {
        size.n_objects = std::stoi(token.substr(0, x));
        size.n_attributes = std::stoi(token.substr(x + 1));
    } catch (const std::exception&) {
        throw MalformedClueError("size must look like 4x5 (objects x attributes): " + token);
    }
    size.validate();
    return size;
}

// ---------------------------------------------------------------------------
// Shared options

struct ThemeSelection {
    std::string theme_file;
    std::string language = "en";
    std::string theme = "houses";
    std::string themes_dir = "data/themes";

    std::filesystem::path resolve() const {
        if (!theme_file.empty()) return theme_file;
        return std::filesystem::path(themes_dir) / (language + "-" + theme + ".json");
    }
};

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    ThemeSelection theme;
    std::vector<std::string> size_tokens;
    int count = 100;
    int n_red_herrings = 5;
    std::uint64_t seed = 0;
    int train = 0;
    std::string out;
    bool reduce_herrings = false;
    bool overwrite = false;
    int jobs = 1;
};

inline int run_generate(const GenerateArgs& args) {
    ThemeConfig theme = load_theme(args.theme.resolve());
    std::vector<Size> sizes;
    for (const std::string& token : args.size_tokens) sizes.push_back(parse_size_token(token));
    if (sizes.empty()) throw MalformedClueError("at least one --size is required");
    if (args.count < 1) throw MalformedClueError("--count must be positive");
    for (Size size : sizes) {
        std::vector<std::string> findings = validate_for_size(theme, size);
        if (!findings.empty()) {
            std::string message = "theme cannot generate size " + size.to_string() + ":";
            for (const auto& f : findings) message += "\n  - " + f;
            throw ThemeError(message);
        }
    }

    std::vector<PuzzleInstance> puzzles;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        GenerationConfig cfg;
        cfg.size = sizes[s];
        cfg.n_red_herrings = args.n_red_herrings;
        cfg.master_seed = args.seed;
        std::vector<PuzzleInstance> batch =
            generate_batch(theme, cfg, args.count, args.jobs,
                           static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(args.count));
        puzzles.insert(puzzles.end(), batch.begin(), batch.end());
    }

    const auto write_variant = [&](const std::vector<PuzzleInstance>& variant,
                                   const std::filesystem::path& dir, int herrings) {
        std::vector<DatasetRecord> records;
        records.reserve(variant.size());
        for (const PuzzleInstance& p : variant) {
            records.push_back(make_record(p, render_prompt(p, theme), theme));
        }
        write_dataset(records, SplitSpec{args.train}, dir, herrings, args.seed, args.overwrite);
        std::cout << "wrote " << records.size() << " puzzles to " << dir.string() << "\n";
    };

    if (!args.reduce_herrings) {
        write_variant(puzzles, args.out, args.n_red_herrings);
        return kOk;
    }
    write_variant(puzzles, std::filesystem::path(args.out) /
                               ("rh" + std::to_string(args.n_red_herrings)),
                  args.n_red_herrings);
    for (int keep : {1, 0}) {
        if (keep >= args.n_red_herrings) continue;
        std::vector<PuzzleInstance> reduced;
        reduced.reserve(puzzles.size());
        for (const PuzzleInstance& p : puzzles) {
            Rng rng(Rng::derive_seed(p.seed, 0x7265647563ull, static_cast<std::uint64_t>(keep)));
            reduced.push_back(derive_reduced_variant(p, keep, rng));
        }
        write_variant(reduced, std::filesystem::path(args.out) / ("rh" + std::to_string(keep)),
                      keep);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string dataset;
    std::string split = "test";
    std::string out;
    std::string mock; // "", "oracle", "scrambler"
    std::uint64_t mock_seed = 0;
    ModelEndpointConfig endpoint;
    bool resume = false;
    bool overwrite = false;
    int jobs = 4;
};

inline int run_evaluate(const EvaluateArgs& args) {
    Dataset ds = read_dataset(args.dataset);
    std::vector<DatasetRecord> records;
    if (args.split == "train") {
        records = ds.train;
    } else if (args.split == "test") {
        records = ds.test;
    } else if (args.split == "all") {
        records = ds.all();
    } else {
        throw MalformedClueError("--split must be train, test or all");
    }
    if (records.empty()) throw DatasetError("selected split is empty");

    const std::filesystem::path out_path = args.out;
    std::set<std::string> skip;
    if (std::filesystem::exists(out_path)) {
        if (args.resume) {
            skip = load_scored_ids(out_path);
        } else if (!args.overwrite) {
            throw DatasetError("results file exists: " + out_path.string() +
                               " (use --resume or --overwrite)");
        } else {
            std::filesystem::remove(out_path);
        }
    }

    std::unique_ptr<ResponseSource> source;
    std::unique_ptr<Transport> transport;
    if (args.mock == "oracle") {
        source = std::make_unique<OracleSource>();
    } else if (args.mock == "scrambler") {
        source = std::make_unique<ScramblerSource>(args.mock_seed);
    } else if (!args.mock.empty()) {
        throw MalformedClueError("--mock must be oracle or scrambler");
    } else {
        if (args.endpoint.base_url.empty() || args.endpoint.model.empty()) {
            throw EvalError("--endpoint-url and --model are required without --mock");
        }
        const char* token = std::getenv(args.endpoint.auth_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw EvalError("auth token env var '" + args.endpoint.auth_env + "' is not set");
        }
        transport = std::make_unique<HttpTransport>();
        source = std::make_unique<EndpointSource>(args.endpoint, token, *transport);
    }

    std::ofstream out(out_path, std::ios::app);
    if (!out) throw DatasetError("cannot open results file " + out_path.string());
    std::size_t done = 0;
    const auto sink = [&](const EvalRecord& r) {
        out << eval_record_to_json(r).dump() << "\n";
        out.flush();
        ++done;
    };
    evaluate_dataset(records, *source, args.jobs, skip, sink);
    std::cout << "scored " << done << " puzzles (" << skip.size() << " already done) into "
              << out_path.string() << "\n";

    std::vector<EvalRecord> all = read_results(out_path);
    if (all.size() >= 2) {
        MetricSummary s = aggregate(all);
        std::cout << "mean a_puzzle " << s.mean_a_puzzle << " +- " << s.stderr_a_puzzle
                  << ", mean a_cell " << s.mean_a_cell << " +- " << s.stderr_a_cell << " over "
                  << s.n_puzzles << " puzzles\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::string dataset;
    std::string results_a;
    std::string results_b;
    std::string label_a = "run_a";
    std::string label_b = "run_b";
    std::string out;
    bool overwrite = false;
};

namespace detail {

struct SizeKeyLess {
    bool operator()(const Size& a, const Size& b) const {
        return std::tie(a.n_objects, a.n_attributes) < std::tie(b.n_objects, b.n_attributes);
    }
};

inline std::map<Size, std::vector<EvalRecord>, SizeKeyLess> group_results_by_size(
    const std::vector<EvalRecord>& results,
    const std::map<std::string, const DatasetRecord*>& by_id) {
    std::map<Size, std::vector<EvalRecord>, SizeKeyLess> groups;
    for (const EvalRecord& r : results) {
        auto it = by_id.find(r.puzzle_id);
        if (it == by_id.end()) {
            throw DatasetError("results reference unknown puzzle id '" + r.puzzle_id + "'");
        }
        groups[it->second->size].push_back(r);
    }
    return groups;
}

inline std::vector<SizeSummaryRow> summarize_groups(
    const std::map<Size, std::vector<EvalRecord>, SizeKeyLess>& groups) {
    std::vector<SizeSummaryRow> rows;
    for (const auto& [size, records] : groups) {
        if (records.size() < 2) continue;
        rows.push_back({size, aggregate(records)});
    }
    return rows;
}

} // namespace detail

inline int run_analyze(const AnalyzeArgs& args) {
    Dataset ds = read_dataset(args.dataset);
    std::vector<DatasetRecord> all_records = ds.all();
    std::map<std::string, const DatasetRecord*> by_id;
    for (const DatasetRecord& r : all_records) by_id[r.id] = &r;

    std::vector<EvalRecord> results_a = read_results(args.results_a);
    if (results_a.empty()) throw DatasetError("results file is empty: " + args.results_a);

    if (std::filesystem::exists(std::filesystem::path(args.out) / "summary.csv") &&
        !args.overwrite) {
        throw DatasetError("report already exists at " + args.out + " (use --overwrite)");
    }

    AnalysisReport report;
    report.run_label_a = args.label_a;
    report.run_label_b = args.label_b;
    auto groups_a = detail::group_results_by_size(results_a, by_id);
    report.summaries_a = detail::summarize_groups(groups_a);
    if (report.summaries_a.empty()) {
        throw DatasetError("no size group has enough results to aggregate");
    }

    if (!args.results_b.empty()) {
        std::vector<EvalRecord> results_b = read_results(args.results_b);
        auto groups_b = detail::group_results_by_size(results_b, by_id);
        report.summaries_b = detail::summarize_groups(groups_b);
        // Compare only the sizes both runs cover.
        std::vector<std::pair<Size, MetricSummary>> a_rows;
        std::vector<std::pair<Size, MetricSummary>> b_rows;
        for (const SizeSummaryRow& row : report.summaries_a) {
            for (const SizeSummaryRow& other : report.summaries_b) {
                if (other.size == row.size) {
                    a_rows.emplace_back(row.size, row.summary);
                    b_rows.emplace_back(other.size, other.summary);
                }
            }
        }
        if (!a_rows.empty()) report.comparison = compare_runs(a_rows, b_rows);
    }

    // Frequencies come from the dataset itself, grouped by size.
    std::map<Size, std::vector<FrequencyVector>, detail::SizeKeyLess> freq_groups;
    for (const DatasetRecord& r : all_records) {
        freq_groups[r.size].push_back(normalized_frequencies(r));
    }
    for (const auto& [size, freqs] : freq_groups) {
        report.mean_freqs.emplace_back(size, mean_frequencies(freqs));
    }

    // Difficulty fits join each evaluated puzzle's frequencies with its
    // a_cell; failed parses count as zero accuracy.
    for (const auto& [size, eval_records] : groups_a) {
        std::vector<FrequencyVector> freqs;
        std::vector<double> a_cell;
        for (const EvalRecord& r : eval_records) {
            freqs.push_back(normalized_frequencies(*by_id.at(r.puzzle_id)));
            a_cell.push_back(r.a_cell);
        }
        DifficultyFit fit = fit_difficulty(freqs, a_cell);
        for (const std::string& finding : fit.findings) {
            std::cerr << "note: size " << size.to_string() << ": " << finding << "\n";
        }
        report.difficulties.emplace_back(size, std::move(fit));
    }

    emit_report(report, args.out);
    std::cout << "report written to " << args.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// validate-theme

struct ValidateThemeArgs {
    ThemeSelection theme;
    std::vector<std::string> size_tokens;
};

inline int run_validate_theme(const ValidateThemeArgs& args) {
    ThemeConfig theme = load_theme(args.theme.resolve());
    std::cout << "theme " << theme.language << "/" << theme.theme << " is structurally valid ("
              << theme.categories.size() << " categories, max size "
              << theme.max_supported_size().to_string() << ")\n";
    bool ok = true;
    for (const std::string& token : args.size_tokens) {
        Size size = parse_size_token(token);
        std::vector<std::string> findings = validate_for_size(theme, size);
        if (findings.empty()) {
            std::cout << "  size " << size.to_string() << ": ok\n";
        } else {
            ok = false;
            std::cout << "  size " << size.to_string() << ":\n";
            for (const auto& f : findings) std::cout << "    - " << f << "\n";
        }
    }
    return ok ? kOk : kValidationError;
}

// ---------------------------------------------------------------------------
// Entry point

inline void add_theme_options(CLI::App* cmd, ThemeSelection& sel) {
    cmd->add_option("--theme-file", sel.theme_file, "explicit theme bundle path");
    cmd->add_option("--language", sel.language, "bundle language tag");
    cmd->add_option("--theme", sel.theme, "bundle theme tag");
    cmd->add_option("--themes-dir", sel.themes_dir, "directory of bundled themes");
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"zebra puzzle dataset generator and evaluation harness"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "generate puzzle datasets");
    add_theme_options(generate, gen.theme);
    generate->add_option("--size", gen.size_tokens, "puzzle size WxH (repeatable)")->required();
    generate->add_option("--count", gen.count, "puzzles per size");
    generate->add_option("--herrings", gen.n_red_herrings, "red herrings per puzzle");
    generate->add_option("--seed", gen.seed, "master seed");
    generate->add_option("--train", gen.train, "records routed to the train split");
    generate->add_option("--out", gen.out, "output dataset directory")->required();
    generate->add_flag("--reduce-herrings", gen.reduce_herrings,
                       "also derive 1- and 0-herring variants");
    generate->add_flag("--overwrite", gen.overwrite, "replace an existing dataset");
    generate->add_option("--jobs", gen.jobs, "worker threads");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "query a model over a dataset");
    evaluate->add_option("--dataset", ev.dataset, "dataset directory")->required();
    evaluate->add_option("--split", ev.split, "train, test or all");
    evaluate->add_option("--out", ev.out, "results file (JSONL)")->required();
    evaluate->add_option("--mock", ev.mock, "built-in model: oracle or scrambler");
    evaluate->add_option("--mock-seed", ev.mock_seed, "seed for the scrambler mock");
    evaluate->add_option("--endpoint-url", ev.endpoint.base_url, "chat completion base URL");
    evaluate->add_option("--model", ev.endpoint.model, "model name");
    evaluate->add_option("--token-env", ev.endpoint.auth_env,
                         "env var holding the bearer token");
    evaluate->add_option("--max-tokens", ev.endpoint.max_completion_tokens,
                         "max completion tokens");
    double temperature = 0.0;
    CLI::Option* temp_opt =
        evaluate->add_option("--temperature", temperature, "sampling temperature");
    std::string effort;
    CLI::Option* effort_opt =
        evaluate->add_option("--reasoning-effort", effort, "reasoning effort knob");
    evaluate->add_option("--timeout", ev.endpoint.timeout_seconds, "request timeout seconds");
    evaluate->add_option("--jobs", ev.jobs, "max in-flight requests");
    evaluate->add_flag("--resume", ev.resume, "skip already scored puzzles");
    evaluate->add_flag("--overwrite", ev.overwrite, "replace an existing results file");

    AnalyzeArgs an;
    CLI::App* analyze = app.add_subcommand("analyze", "metrics, frequencies and difficulties");
    analyze->add_option("--dataset", an.dataset, "dataset directory")->required();
    analyze->add_option("--results", an.results_a, "results file")->required();
    analyze->add_option("--results-b", an.results_b, "second results file to compare");
    analyze->add_option("--label-a", an.label_a, "label for the first run");
    analyze->add_option("--label-b", an.label_b, "label for the second run");
    analyze->add_option("--out", an.out, "report directory")->required();
    analyze->add_flag("--overwrite", an.overwrite, "replace an existing report");

    ValidateThemeArgs val;
    CLI::App* validate = app.add_subcommand("validate-theme", "check a theme bundle");
    add_theme_options(validate, val.theme);
    validate->add_option("--size", val.size_tokens, "sizes to check (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        if (*generate) return run_generate(gen);
        if (*evaluate) {
            if (temp_opt->count() > 0) ev.endpoint.temperature = temperature;
            if (effort_opt->count() > 0) ev.endpoint.reasoning_effort = effort;
            return run_evaluate(ev);
        }
        if (*analyze) return run_analyze(an);
        if (*validate) return run_validate_theme(val);
    } catch (const EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kEndpointError;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    }
    return kValidationError;
}

} // namespace zebra::cli
