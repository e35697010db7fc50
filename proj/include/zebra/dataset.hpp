// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "zebra/core.hpp"
#include "zebra/error.hpp"
#include "zebra/render.hpp"
#include "zebra/theme.hpp"
#include "zebra/version.hpp"

namespace zebra {

inline constexpr int kDatasetSchemaVersion = 1;

namespace detail {

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace detail

/// One serialized puzzle: typed items plus the rendered prompt, enough to
/// re-check uniqueness offline and to score responses.
struct DatasetRecord {
    std::string id;
    std::string language;
    std::string theme;
    Size size;
    std::uint64_t seed = 0;
    std::vector<CategoryId> categories;
    std::vector<std::vector<AttributeId>> solution_ids;
    std::vector<std::vector<std::string>> solution_names; // scoring canonical
    std::vector<PuzzleItem> items;
    std::vector<std::string> item_texts;
    std::vector<int> red_herring_indices;
    std::string prompt;

    std::vector<Clue> real_clues() const {
        std::vector<Clue> out;
        for (const PuzzleItem& item : items) {
            if (const Clue* c = std::get_if<Clue>(&item)) out.push_back(*c);
        }
        return out;
    }

    SolutionMatrix solution_matrix() const {
        return SolutionMatrix{size, categories, solution_ids};
    }
};

struct SplitFileInfo {
    int records = 0;
    std::string fnv1a64;

    bool operator==(const SplitFileInfo&) const = default;
};

struct DatasetManifest {
    int schema_version = kDatasetSchemaVersion;
    std::string generator_version = kVersion;
    std::string language;
    std::string theme;
    std::vector<std::string> sizes;
    int n_red_herrings = 0;
    std::uint64_t master_seed = 0;
    std::map<std::string, SplitFileInfo> files; // "train.jsonl" / "test.jsonl"

    bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> test;

    std::vector<DatasetRecord> all() const {
        std::vector<DatasetRecord> out = train;
        out.insert(out.end(), test.begin(), test.end());
        return out;
    }
};

// ---------------------------------------------------------------------------
// Record construction and JSON mapping

inline DatasetRecord make_record(const PuzzleInstance& puzzle, const RenderedPuzzle& rendered,
                                 const ThemeConfig& theme) {
    DatasetRecord r;
    r.id = puzzle.id;
    r.language = puzzle.language;
    r.theme = puzzle.theme;
    r.size = puzzle.size;
    r.seed = puzzle.seed;
    r.categories = puzzle.solution.categories;
    r.solution_ids = puzzle.solution.cells;
    for (const auto& row : puzzle.solution.cells) {
        std::vector<std::string> names;
        for (const AttributeId& id : row) {
            const ThemeAttribute* attr = theme.attribute(id);
            if (attr == nullptr) {
                throw ReferentialError("attribute '" + id + "' missing from theme");
            }
            names.push_back(attr->name());
        }
        r.solution_names.push_back(std::move(names));
    }
    r.items = puzzle.items;
    r.item_texts = rendered.clue_texts;
    r.red_herring_indices = puzzle.red_herring_indices;
    r.prompt = rendered.prompt_text;
    return r;
}

namespace detail {

inline nlohmann::ordered_json item_to_json(const PuzzleItem& item, const std::string& rendered) {
    nlohmann::ordered_json j;
    if (const Clue* clue = std::get_if<Clue>(&item)) {
        j["kind"] = "clue";
        j["type"] = std::string(clue_type_name(clue->type));
        j["attrs"] = clue->attrs;
        if (clue->position) j["position"] = *clue->position;
        if (clue->n_between) j["n_between"] = *clue->n_between;
    } else {
        const RedHerring& h = std::get<RedHerring>(item);
        j["kind"] = "red_herring";
        j["type"] = std::string(herring_type_name(h.type));
        if (h.solution_attr) j["solution_attr"] = *h.solution_attr;
        j["refs"] = h.distractor_refs;
        if (h.position) j["position"] = *h.position;
    }
    j["text"] = rendered;
    return j;
}

inline PuzzleItem item_from_json(const nlohmann::json& j, std::string& text_out) {
    text_out = j.at("text").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "clue") {
        Clue c;
        auto type = clue_type_from_name(j.at("type").get<std::string>());
        if (!type) throw DatasetError("unknown clue type in record");
        c.type = *type;
        c.attrs = j.at("attrs").get<std::vector<std::string>>();
        if (j.contains("position")) c.position = j.at("position").get<int>();
        if (j.contains("n_between")) c.n_between = j.at("n_between").get<int>();
        return c;
    }
    if (kind == "red_herring") {
        RedHerring h;
        auto type = herring_type_from_name(j.at("type").get<std::string>());
        if (!type) throw DatasetError("unknown red herring type in record");
        h.type = *type;
        if (j.contains("solution_attr")) {
            h.solution_attr = j.at("solution_attr").get<std::string>();
        }
        h.distractor_refs = j.at("refs").get<std::vector<std::string>>();
        if (j.contains("position")) h.position = j.at("position").get<int>();
        return h;
    }
    throw DatasetError("unknown item kind '" + kind + "'");
}

} // namespace detail

inline nlohmann::ordered_json record_to_json(const DatasetRecord& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["language"] = r.language;
    j["theme"] = r.theme;
    j["n_objects"] = r.size.n_objects;
    j["n_attributes"] = r.size.n_attributes;
    j["seed"] = r.seed;
    j["categories"] = r.categories;
    j["solution"] = r.solution_ids;
    j["solution_names"] = r.solution_names;
    j["items"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.items.size(); ++i) {
        j["items"].push_back(detail::item_to_json(r.items[i], r.item_texts[i]));
    }
    j["red_herring_indices"] = r.red_herring_indices;
    j["prompt"] = r.prompt;
    return j;
}

inline DatasetRecord record_from_json(const nlohmann::json& j) {
    try {
        DatasetRecord r;
        r.id = j.at("id").get<std::string>();
        r.language = j.at("language").get<std::string>();
        r.theme = j.at("theme").get<std::string>();
        r.size = {j.at("n_objects").get<int>(), j.at("n_attributes").get<int>()};
        r.seed = j.at("seed").get<std::uint64_t>();
        r.categories = j.at("categories").get<std::vector<std::string>>();
        r.solution_ids = j.at("solution").get<std::vector<std::vector<std::string>>>();
        r.solution_names = j.at("solution_names").get<std::vector<std::vector<std::string>>>();
        for (const auto& item : j.at("items")) {
            std::string text;
            r.items.push_back(detail::item_from_json(item, text));
            r.item_texts.push_back(std::move(text));
        }
        r.red_herring_indices = j.at("red_herring_indices").get<std::vector<int>>();
        r.prompt = j.at("prompt").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("malformed dataset record: ") + e.what());
    }
}

/// Shape and referential checks on a loaded record.
inline void validate_record(const DatasetRecord& r) {
    r.size.validate();
    if (static_cast<int>(r.categories.size()) != r.size.n_attributes ||
        static_cast<int>(r.solution_ids.size()) != r.size.n_objects ||
        static_cast<int>(r.solution_names.size()) != r.size.n_objects) {
        throw DatasetError("record '" + r.id + "' has a solution shape mismatch");
    }
    for (const auto& row : r.solution_ids) {
        if (static_cast<int>(row.size()) != r.size.n_attributes) {
            throw DatasetError("record '" + r.id + "' has a ragged solution row");
        }
    }
    if (r.items.size() != r.item_texts.size()) {
        throw DatasetError("record '" + r.id + "' item/text length mismatch");
    }
    std::set<int> indices(r.red_herring_indices.begin(), r.red_herring_indices.end());
    if (indices.size() != r.red_herring_indices.size()) {
        throw DatasetError("record '" + r.id + "' repeats a red herring index");
    }
    for (std::size_t i = 0; i < r.items.size(); ++i) {
        const bool flagged = indices.count(static_cast<int>(i) + 1) > 0;
        if (flagged != is_red_herring(r.items[i])) {
            throw DatasetError("record '" + r.id + "' red_herring_indices do not match items");
        }
    }
    for (int idx : r.red_herring_indices) {
        if (idx < 1 || idx > static_cast<int>(r.items.size())) {
            throw DatasetError("record '" + r.id + "' red herring index out of bounds");
        }
    }
}

// ---------------------------------------------------------------------------
// Directory layout: <dir>/manifest.json + train.jsonl + test.jsonl

struct SplitSpec {
    int train = 0; // first `train` records by index; the rest go to test
};

inline nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["schema_version"] = m.schema_version;
    j["generator_version"] = m.generator_version;
    j["language"] = m.language;
    j["theme"] = m.theme;
    j["sizes"] = m.sizes;
    j["n_red_herrings"] = m.n_red_herrings;
    j["master_seed"] = m.master_seed;
    j["counts"] = {{"train", m.files.count("train.jsonl") ? m.files.at("train.jsonl").records : 0},
                   {"test", m.files.count("test.jsonl") ? m.files.at("test.jsonl").records : 0}};
    j["files"] = nlohmann::ordered_json::object();
    for (const auto& [name, info] : m.files) {
        j["files"][name] = {{"records", info.records}, {"fnv1a64", info.fnv1a64}};
    }
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    try {
        DatasetManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        m.generator_version = j.at("generator_version").get<std::string>();
        m.language = j.at("language").get<std::string>();
        m.theme = j.at("theme").get<std::string>();
        m.sizes = j.at("sizes").get<std::vector<std::string>>();
        m.n_red_herrings = j.at("n_red_herrings").get<int>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (auto it = j.at("files").begin(); it != j.at("files").end(); ++it) {
            m.files[it.key()] = SplitFileInfo{it.value().at("records").get<int>(),
                                              it.value().at("fnv1a64").get<std::string>()};
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("malformed manifest: ") + e.what());
    }
}

/// Write records split into train/test JSONL plus a manifest whose hashes
/// cover the record files. Identical inputs produce identical bytes.
inline DatasetManifest write_dataset(const std::vector<DatasetRecord>& records,
                                     const SplitSpec& split, const std::filesystem::path& dir,
                                     int n_red_herrings, std::uint64_t master_seed,
                                     bool overwrite = false) {
    if (records.empty()) throw DatasetError("refusing to write an empty dataset");
    if (split.train < 0 || split.train > static_cast<int>(records.size())) {
        throw DatasetError("split sizes do not sum to the record count");
    }
    std::set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) throw DatasetError("duplicate record id '" + r.id + "'");
    }
    if (std::filesystem::exists(dir / "manifest.json") && !overwrite) {
        throw DatasetError("dataset already exists at " + dir.string() +
                           " (pass overwrite to replace it)");
    }
    std::filesystem::create_directories(dir);

    DatasetManifest manifest;
    manifest.language = records.front().language;
    manifest.theme = records.front().theme;
    manifest.n_red_herrings = n_red_herrings;
    manifest.master_seed = master_seed;
    std::set<std::string> seen_sizes;
    for (const auto& r : records) {
        if (seen_sizes.insert(r.size.to_string()).second) {
            manifest.sizes.push_back(r.size.to_string());
        }
    }

    const auto write_split = [&](const std::string& name, std::size_t begin, std::size_t end) {
        std::string payload;
        for (std::size_t i = begin; i < end; ++i) {
            payload += record_to_json(records[i]).dump();
            payload += "\n";
        }
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw DatasetError("cannot write " + (dir / name).string());
        out << payload;
        out.close();
        if (!out) throw DatasetError("failed writing " + (dir / name).string());
        manifest.files[name] = SplitFileInfo{static_cast<int>(end - begin),
                                             detail::hex64(detail::fnv1a64(payload))};
    };
    write_split("train.jsonl", 0, static_cast<std::size_t>(split.train));
    write_split("test.jsonl", static_cast<std::size_t>(split.train), records.size());

    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot write manifest at " + dir.string());
    out << manifest_to_json(manifest).dump(2) << "\n";
    return manifest;
}

/// Load a dataset directory; verifies the manifest hashes and every
/// record's internal consistency.
inline Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw DatasetError("no manifest.json in " + dir.string());
    nlohmann::json mj;
    try {
        mf >> mj;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("cannot parse manifest: ") + e.what());
    }
    Dataset ds;
    ds.manifest = manifest_from_json(mj);
    if (ds.manifest.schema_version != kDatasetSchemaVersion) {
        throw DatasetError("dataset schema_version " +
                           std::to_string(ds.manifest.schema_version) +
                           " is not supported (expected " +
                           std::to_string(kDatasetSchemaVersion) + ")");
    }
    const auto read_split = [&](const std::string& name, std::vector<DatasetRecord>& out) {
        auto it = ds.manifest.files.find(name);
        if (it == ds.manifest.files.end()) return;
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) throw DatasetError("missing split file " + (dir / name).string());
        std::string payload((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        if (detail::hex64(detail::fnv1a64(payload)) != it->second.fnv1a64) {
            throw DatasetError("corruption detected: hash mismatch for " + name);
        }
        std::size_t start = 0;
        while (start < payload.size()) {
            std::size_t eol = payload.find('\n', start);
            if (eol == std::string::npos) eol = payload.size();
            std::string line = payload.substr(start, eol - start);
            start = eol + 1;
            if (line.empty()) continue;
            DatasetRecord r = record_from_json(nlohmann::json::parse(line));
            validate_record(r);
            out.push_back(std::move(r));
        }
        if (static_cast<int>(out.size()) != it->second.records) {
            throw DatasetError("record count mismatch in " + name);
        }
    };
    read_split("train.jsonl", ds.train);
    read_split("test.jsonl", ds.test);
    return ds;
}

} // namespace zebra
