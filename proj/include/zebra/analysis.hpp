// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zebra/core.hpp"
#include "zebra/dataset.hpp"
#include "zebra/error.hpp"
#include "zebra/regression.hpp"
#include "zebra/stats.hpp"

namespace zebra {

// ---------------------------------------------------------------------------
// Item type axis: 14 clue types followed by 8 red herring types

inline constexpr int kItemTypeCount = 22;

inline const std::vector<std::string>& item_type_labels() {
    static const std::vector<std::string> labels = [] {
        std::vector<std::string> out;
        for (ClueType t : kAllClueTypes) out.emplace_back(clue_type_name(t));
        for (RedHerringType t : kAllRedHerringTypes) out.emplace_back(herring_type_name(t));
        return out;
    }();
    return labels;
}

inline int item_type_index(const PuzzleItem& item) {
    if (const Clue* c = std::get_if<Clue>(&item)) {
        return static_cast<int>(c->type);
    }
    return static_cast<int>(kAllClueTypes.size()) +
           static_cast<int>(std::get<RedHerring>(item).type);
}

/// Whether an axis index denotes a red herring type.
inline bool item_type_is_herring(int index) {
    return index >= static_cast<int>(kAllClueTypes.size());
}

/// Per-puzzle type frequencies over clues and herrings jointly,
/// normalized so the entries sum to 1.
struct FrequencyVector {
    std::vector<double> values; // length kItemTypeCount, item_type_labels order

    double herring_share() const {
        double share = 0.0;
        for (int i = 0; i < kItemTypeCount; ++i) {
            if (item_type_is_herring(i)) share += values[static_cast<std::size_t>(i)];
        }
        return share;
    }
};

namespace detail {

inline FrequencyVector normalize_counts(const std::vector<int>& counts, int total) {
    if (total == 0) throw Error("cannot compute frequencies of an empty puzzle");
    FrequencyVector f;
    f.values.resize(kItemTypeCount, 0.0);
    for (int i = 0; i < kItemTypeCount; ++i) {
        f.values[static_cast<std::size_t>(i)] =
            static_cast<double>(counts[static_cast<std::size_t>(i)]) /
            static_cast<double>(total);
    }
    return f;
}

} // namespace detail

inline FrequencyVector normalized_frequencies(const PuzzleInstance& puzzle) {
    std::vector<int> counts(kItemTypeCount, 0);
    for (const PuzzleItem& item : puzzle.items) {
        ++counts[static_cast<std::size_t>(item_type_index(item))];
    }
    return detail::normalize_counts(counts, static_cast<int>(puzzle.items.size()));
}

inline FrequencyVector normalized_frequencies(const DatasetRecord& record) {
    std::vector<int> counts(kItemTypeCount, 0);
    for (const PuzzleItem& item : record.items) {
        ++counts[static_cast<std::size_t>(item_type_index(item))];
    }
    return detail::normalize_counts(counts, static_cast<int>(record.items.size()));
}

inline FrequencyVector mean_frequencies(std::span<const FrequencyVector> group) {
    if (group.empty()) throw Error("cannot average an empty frequency group");
    FrequencyVector out;
    out.values.resize(kItemTypeCount, 0.0);
    for (const FrequencyVector& f : group) {
        for (int i = 0; i < kItemTypeCount; ++i) {
            out.values[static_cast<std::size_t>(i)] += f.values[static_cast<std::size_t>(i)];
        }
    }
    for (double& v : out.values) v /= static_cast<double>(group.size());
    return out;
}

// ---------------------------------------------------------------------------
// Clue type difficulty

struct DifficultyProfile {
    std::vector<std::string> labels;  // types retained in the design
    std::vector<double> difficulties; // same order; absolute values sum to 1
    double residual_norm = 0.0;
    double condition = 0.0;
    int rank = 0;
};

struct DifficultyFit {
    std::optional<DifficultyProfile> profile;
    std::vector<std::string> findings;
};

/// Regress a_cell on the type frequencies (intercept included, excluded
/// from the normalization) and flip the sign so a hard type gets a
/// positive difficulty. Types never occurring in the group are dropped
/// from the design. Constant a_cell makes the fit unidentifiable.
inline DifficultyFit fit_difficulty(const std::vector<FrequencyVector>& freqs,
                                    const std::vector<double>& a_cell) {
    DifficultyFit fit;
    if (freqs.size() != a_cell.size()) {
        throw Error("fit_difficulty: frequency and accuracy counts differ");
    }
    if (freqs.size() < 2) {
        fit.findings.push_back("not enough puzzles to fit difficulties");
        return fit;
    }
    bool constant = true;
    for (double v : a_cell) {
        if (v != a_cell[0]) {
            constant = false;
            break;
        }
    }
    if (constant) {
        fit.findings.push_back("difficulties cannot be estimated for constant a_cell");
        return fit;
    }

    std::vector<int> retained;
    for (int t = 0; t < kItemTypeCount; ++t) {
        for (const FrequencyVector& f : freqs) {
            if (f.values[static_cast<std::size_t>(t)] != 0.0) {
                retained.push_back(t);
                break;
            }
        }
    }
    if (retained.empty()) {
        fit.findings.push_back("no item types occur in this group");
        return fit;
    }

    Eigen::MatrixXd X(static_cast<Eigen::Index>(freqs.size()),
                      static_cast<Eigen::Index>(retained.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(freqs.size()));
    for (std::size_t r = 0; r < freqs.size(); ++r) {
        y(static_cast<Eigen::Index>(r)) = a_cell[r];
        for (std::size_t c = 0; c < retained.size(); ++c) {
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                freqs[r].values[static_cast<std::size_t>(retained[c])];
        }
    }
    OlsResult ols = ols_fit(X, y);
    double denom = 0.0;
    for (Eigen::Index i = 0; i < ols.coefficients.size(); ++i) {
        denom += std::abs(ols.coefficients(i));
    }
    if (denom < 1e-12) {
        fit.findings.push_back("all coefficients vanish; difficulties are not identifiable");
        return fit;
    }
    DifficultyProfile profile;
    profile.residual_norm = ols.residual_norm;
    profile.condition = ols.condition;
    profile.rank = ols.rank;
    for (std::size_t c = 0; c < retained.size(); ++c) {
        profile.labels.push_back(item_type_labels()[static_cast<std::size_t>(retained[c])]);
        profile.difficulties.push_back(-ols.coefficients(static_cast<Eigen::Index>(c)) / denom);
    }
    fit.profile = std::move(profile);
    return fit;
}

// ---------------------------------------------------------------------------
// Report emission: CSV tables plus SVG plots of means with error bars

struct SizeSummaryRow {
    Size size;
    MetricSummary summary;
};

struct AnalysisReport {
    std::string run_label_a = "run_a";
    std::string run_label_b = "run_b";
    std::vector<SizeSummaryRow> summaries_a;
    std::vector<SizeSummaryRow> summaries_b; // empty when only one run
    std::optional<RunComparison> comparison;
    std::vector<std::pair<Size, FrequencyVector>> mean_freqs;
    std::vector<std::pair<Size, DifficultyFit>> difficulties;
};

namespace detail {

/// Round-trip double formatting for the CSV tables.
inline std::string fmt_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> values;
    std::vector<double> errors;
};

/// Minimal chart: categorical x axis, y in [lo, hi], one polyline with
/// error whiskers per series.
inline std::string svg_error_chart(const std::string& title,
                                   const std::vector<std::string>& x_labels,
                                   const std::vector<SvgSeries>& series, double y_lo,
                                   double y_hi) {
    const double width = 720, height = 420;
    const double ml = 60, mr = 20, mt = 40, mb = 60;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;
    const auto x_of = [&](std::size_t i) {
        return ml + plot_w * (static_cast<double>(i) + 0.5) /
                        static_cast<double>(x_labels.size());
    };
    const auto y_of = [&](double v) {
        return mt + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo));
    };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(width) +
           "\" height=\"" + fmt_double(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt_double(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(mt) + "\" x2=\"" +
           fmt_double(ml) + "\" y2=\"" + fmt_double(mt + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(mt + plot_h) + "\" x2=\"" +
           fmt_double(ml + plot_w) + "\" y2=\"" + fmt_double(mt + plot_h) +
           "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        double v = y_lo + (y_hi - y_lo) * tick / 5.0;
        svg += "<text x=\"" + fmt_double(ml - 8) + "\" y=\"" + fmt_double(y_of(v) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">";
        char buffer[16];
        std::snprintf(buffer, sizeof(buffer), "%.2f", v);
        svg += buffer;
        svg += "</text>\n";
    }
    for (std::size_t i = 0; i < x_labels.size(); ++i) {
        svg += "<text x=\"" + fmt_double(x_of(i)) + "\" y=\"" + fmt_double(mt + plot_h + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               x_labels[i] + "</text>\n";
    }
    double legend_y = mt + 4;
    for (const SvgSeries& s : series) {
        std::string points;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            points += fmt_double(x_of(i)) + "," + fmt_double(y_of(s.values[i])) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" points=\"" + points +
               "\"/>\n";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            double x = x_of(i);
            double lo = y_of(s.values[i] - s.errors[i]);
            double hi = y_of(s.values[i] + s.errors[i]);
            svg += "<line x1=\"" + fmt_double(x) + "\" y1=\"" + fmt_double(lo) + "\" x2=\"" +
                   fmt_double(x) + "\" y2=\"" + fmt_double(hi) + "\" stroke=\"" + s.color +
                   "\"/>\n";
            svg += "<circle cx=\"" + fmt_double(x) + "\" cy=\"" +
                   fmt_double(y_of(s.values[i])) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        }
        svg += "<text x=\"" + fmt_double(ml + plot_w - 8) + "\" y=\"" + fmt_double(legend_y) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" +
               s.color + "\">" + s.label + "</text>\n";
        legend_y += 16;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace detail

/// Write the report directory: summary.csv, deltas.csv, frequencies.csv,
/// difficulties.csv, findings.txt and the SVG plots.
inline void emit_report(const AnalysisReport& report, const std::filesystem::path& dir) {
    if (report.summaries_a.empty()) throw Error("cannot emit a report without summaries");
    std::filesystem::create_directories(dir);

    std::string summary =
        "run,size,n_puzzles,mean_a_puzzle,stderr_a_puzzle,bernoulli_sample_std,"
        "mean_a_cell,stderr_a_cell,cell_sample_std,mean_a_best_cell\n";
    const auto append_rows = [&](const std::string& label,
                                 const std::vector<SizeSummaryRow>& rows) {
        for (const SizeSummaryRow& row : rows) {
            const MetricSummary& s = row.summary;
            summary += label + "," + row.size.to_string() + "," +
                       std::to_string(s.n_puzzles) + "," + detail::fmt_double(s.mean_a_puzzle) +
                       "," + detail::fmt_double(s.stderr_a_puzzle) + "," +
                       detail::fmt_double(s.bernoulli_sample_std) + "," +
                       detail::fmt_double(s.mean_a_cell) + "," +
                       detail::fmt_double(s.stderr_a_cell) + "," +
                       detail::fmt_double(s.cell_sample_std) + "," +
                       detail::fmt_double(s.mean_a_best_cell) + "\n";
        }
    };
    append_rows(report.run_label_a, report.summaries_a);
    append_rows(report.run_label_b, report.summaries_b);
    detail::write_text_file(dir / "summary.csv", summary);

    if (report.comparison) {
        std::string deltas = "size,delta_a_puzzle,err_a_puzzle,delta_a_cell,err_a_cell\n";
        for (const SizeDelta& d : report.comparison->per_size) {
            deltas += d.size.to_string() + "," + detail::fmt_double(d.delta_a_puzzle) + "," +
                      detail::fmt_double(d.err_a_puzzle) + "," +
                      detail::fmt_double(d.delta_a_cell) + "," +
                      detail::fmt_double(d.err_a_cell) + "\n";
        }
        deltas += "overall," + detail::fmt_double(report.comparison->overall_delta_a_puzzle) +
                  "," + detail::fmt_double(report.comparison->overall_err_a_puzzle) + "," +
                  detail::fmt_double(report.comparison->overall_delta_a_cell) + "," +
                  detail::fmt_double(report.comparison->overall_err_a_cell) + "\n";
        detail::write_text_file(dir / "deltas.csv", deltas);
    }

    if (!report.mean_freqs.empty()) {
        std::string freq = "size,item_type,kind,mean_normalized_frequency\n";
        for (const auto& [size, vector] : report.mean_freqs) {
            for (int t = 0; t < kItemTypeCount; ++t) {
                freq += size.to_string() + "," + item_type_labels()[static_cast<std::size_t>(t)] +
                        "," + (item_type_is_herring(t) ? "red_herring" : "clue") + "," +
                        detail::fmt_double(vector.values[static_cast<std::size_t>(t)]) + "\n";
            }
        }
        detail::write_text_file(dir / "frequencies.csv", freq);
    }

    std::string difficulties = "size,item_type,difficulty\n";
    std::string findings;
    for (const auto& [size, fit] : report.difficulties) {
        for (const std::string& finding : fit.findings) {
            findings += size.to_string() + ": " + finding + "\n";
        }
        if (!fit.profile) continue;
        for (std::size_t i = 0; i < fit.profile->labels.size(); ++i) {
            difficulties += size.to_string() + "," + fit.profile->labels[i] + "," +
                            detail::fmt_double(fit.profile->difficulties[i]) + "\n";
        }
    }
    if (!report.difficulties.empty()) {
        detail::write_text_file(dir / "difficulties.csv", difficulties);
    }
    if (!findings.empty()) detail::write_text_file(dir / "findings.txt", findings);

    // Accuracy plot: means with standard-error bars per size.
    std::vector<std::string> x_labels;
    detail::SvgSeries puzzle_series{report.run_label_a + " a_puzzle", "#1f77b4", {}, {}};
    detail::SvgSeries cell_series{report.run_label_a + " a_cell", "#d62728", {}, {}};
    for (const SizeSummaryRow& row : report.summaries_a) {
        x_labels.push_back(row.size.to_string());
        puzzle_series.values.push_back(row.summary.mean_a_puzzle);
        puzzle_series.errors.push_back(row.summary.stderr_a_puzzle);
        cell_series.values.push_back(row.summary.mean_a_cell);
        cell_series.errors.push_back(row.summary.stderr_a_cell);
    }
    std::vector<detail::SvgSeries> series = {puzzle_series, cell_series};
    if (!report.summaries_b.empty()) {
        detail::SvgSeries pb{report.run_label_b + " a_puzzle", "#17becf", {}, {}};
        detail::SvgSeries cb{report.run_label_b + " a_cell", "#ff7f0e", {}, {}};
        for (const SizeSummaryRow& row : report.summaries_b) {
            pb.values.push_back(row.summary.mean_a_puzzle);
            pb.errors.push_back(row.summary.stderr_a_puzzle);
            cb.values.push_back(row.summary.mean_a_cell);
            cb.errors.push_back(row.summary.stderr_a_cell);
        }
        series.push_back(pb);
        series.push_back(cb);
    }
    detail::write_text_file(dir / "accuracy_by_size.svg",
                            detail::svg_error_chart("Mean accuracy by size", x_labels, series,
                                                    0.0, 1.05));

    if (report.comparison) {
        std::vector<std::string> delta_labels;
        detail::SvgSeries dp{"delta a_puzzle", "#1f77b4", {}, {}};
        detail::SvgSeries dc{"delta a_cell", "#d62728", {}, {}};
        double lo = 0.0, hi = 0.0;
        for (const SizeDelta& d : report.comparison->per_size) {
            delta_labels.push_back(d.size.to_string());
            dp.values.push_back(d.delta_a_puzzle);
            dp.errors.push_back(d.err_a_puzzle);
            dc.values.push_back(d.delta_a_cell);
            dc.errors.push_back(d.err_a_cell);
            lo = std::min({lo, d.delta_a_puzzle - d.err_a_puzzle, d.delta_a_cell - d.err_a_cell});
            hi = std::max({hi, d.delta_a_puzzle + d.err_a_puzzle, d.delta_a_cell + d.err_a_cell});
        }
        detail::write_text_file(
            dir / "deltas_by_size.svg",
            detail::svg_error_chart("Accuracy difference by size", delta_labels, {dp, dc},
                                    lo - 0.05, hi + 0.05));
    }
}

} // namespace zebra
