// Copyright 2025 The T2L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t2l/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "t2l/diffindex.hpp"
#include "t2l/error.hpp"

namespace t2l {

namespace {

    // Lowercase, fold '-'/'_' into spaces, drop other punctuation, collapse
    // runs of whitespace. Makes "Heap-buffer-overflow", "heap_buffer_overflow"
    // and "HEAP BUFFER OVERFLOW" compare equal.
    std::string normalize_subtype(std::string_view raw)
    {
        std::string out;
        out.reserve(raw.size());
        bool pending_space = false;
        for (char c : raw) {
            unsigned char uc = static_cast<unsigned char>(c);
            char mapped;
            if (c == '-' || c == '_' || std::isspace(uc))
                mapped = ' ';
            else if (std::isalnum(uc))
                mapped = static_cast<char>(std::tolower(uc));
            else
                continue; // punctuation such as ',' '.' '--'
            if (mapped == ' ') {
                pending_space = !out.empty();
                continue;
            }
            if (pending_space) {
                out += ' ';
                pending_space = false;
            }
            out += mapped;
        }
        return out;
    }

    const std::unordered_map<std::string, CrashFamily>& subtype_table()
    {
        static const std::unordered_map<std::string, CrashFamily> table = [] {
            std::unordered_map<std::string, CrashFamily> t;
            auto add = [&t](const char* name, CrashFamily f) {
                t.emplace(normalize_subtype(name), f);
            };

            add("Heap-buffer-overflow", CrashFamily::kBufferOverflow);
            add("Stack-buffer-overflow", CrashFamily::kBufferOverflow);
            add("Index-out-of-bounds", CrashFamily::kBufferOverflow);
            add("Global-buffer-overflow", CrashFamily::kBufferOverflow);
            add("Container-overflow", CrashFamily::kBufferOverflow);
            add("Stack-buffer-underflow", CrashFamily::kBufferOverflow);
            add("Dynamic-stack-buffer-overflow", CrashFamily::kBufferOverflow);

            add("Use-of-uninitialized-value", CrashFamily::kUninitializedAccess);
            add("UNKNOWN READ", CrashFamily::kUninitializedAccess);
            add("Segv on unknown address", CrashFamily::kUninitializedAccess);
            add("UNKNOWN WRITE", CrashFamily::kUninitializedAccess);
            add("Null-dereference READ", CrashFamily::kUninitializedAccess);
            add("UNKNOWN", CrashFamily::kUninitializedAccess);
            add("Unknown-crash", CrashFamily::kUninitializedAccess);

            add("Heap-use-after-free", CrashFamily::kMemoryLifecycle);
            add("Heap-double-free", CrashFamily::kMemoryLifecycle);
            add("Use-after-poison", CrashFamily::kMemoryLifecycle);
            add("Invalid-free", CrashFamily::kMemoryLifecycle);
            add("Stack-use-after-return", CrashFamily::kMemoryLifecycle);
            add("Stack-use-after-scope", CrashFamily::kMemoryLifecycle);
            add("Bad-free", CrashFamily::kMemoryLifecycle);

            add("Bad-cast", CrashFamily::kTypeSafety);
            add("Negative-size-param", CrashFamily::kTypeSafety);
            add("Memcpy-param-overlap", CrashFamily::kTypeSafety);
            add("Object-size", CrashFamily::kTypeSafety);
            add("Incorrect-function-pointer-type", CrashFamily::kTypeSafety);
            add("Non-positive-vla-bound-value", CrashFamily::kTypeSafety);
            add("Strcpy-param-overlap", CrashFamily::kTypeSafety);
            add("Strncpy-param-overlap", CrashFamily::kTypeSafety);

            add("Check failed", CrashFamily::kSystemRuntime);
            add("Unknown signal", CrashFamily::kSystemRuntime);
            add("Bad parameters to --sanitizer-annotate-contiguous-container",
                CrashFamily::kSystemRuntime);
            add("Nested bug in the same thread, aborting.", CrashFamily::kSystemRuntime);

            // Spellings used by sanitizer banners and benchmark indices that
            // abbreviate a table row.
            add("double-free", CrashFamily::kMemoryLifecycle);
            add("Null-dereference", CrashFamily::kUninitializedAccess);
            add("Null-dereference WRITE", CrashFamily::kUninitializedAccess);
            add("Bad parameters to sanitizer", CrashFamily::kSystemRuntime);

            return t;
        }();
        return table;
    }

} // namespace

std::string to_string(CrashFamily family)
{
    switch (family) {
    case CrashFamily::kBufferOverflow:
        return "BufferOverflow";
    case CrashFamily::kUninitializedAccess:
        return "UninitializedAccess";
    case CrashFamily::kMemoryLifecycle:
        return "MemoryLifecycle";
    case CrashFamily::kTypeSafety:
        return "TypeSafety";
    case CrashFamily::kSystemRuntime:
        return "SystemRuntime";
    }
    return "?";
}

std::string family_column_name(CrashFamily family)
{
    switch (family) {
    case CrashFamily::kBufferOverflow:
        return "Buffer";
    case CrashFamily::kUninitializedAccess:
        return "Initialize";
    case CrashFamily::kMemoryLifecycle:
        return "Memory";
    case CrashFamily::kTypeSafety:
        return "Parameter";
    case CrashFamily::kSystemRuntime:
        return "Runtime";
    }
    return "?";
}

CrashFamily crash_family_from_string(std::string_view name)
{
    for (CrashFamily f : { CrashFamily::kBufferOverflow, CrashFamily::kUninitializedAccess,
             CrashFamily::kMemoryLifecycle, CrashFamily::kTypeSafety, CrashFamily::kSystemRuntime }) {
        if (to_string(f) == name)
            return f;
    }
    throw ValidationError("not a crash family name: \"" + std::string(name) + "\"");
}

std::string to_string(Fuzzer fuzzer)
{
    switch (fuzzer) {
    case Fuzzer::kLibfuzzer:
        return "libfuzzer";
    case Fuzzer::kAfl:
        return "afl";
    case Fuzzer::kHonggfuzz:
        return "honggfuzz";
    }
    return "?";
}

std::string to_string(SanitizerKind sanitizer)
{
    switch (sanitizer) {
    case SanitizerKind::kAsan:
        return "asan";
    case SanitizerKind::kMsan:
        return "msan";
    case SanitizerKind::kUbsan:
        return "ubsan";
    case SanitizerKind::kNone:
        return "none";
    }
    return "?";
}

std::string to_string(Severity severity)
{
    switch (severity) {
    case Severity::kHigh:
        return "high";
    case Severity::kMedium:
        return "medium";
    case Severity::kUnknown:
        return "unknown";
    }
    return "?";
}

CrashFamily classify_crash(std::string_view crash_type)
{
    const auto& table = subtype_table();
    auto it = table.find(normalize_subtype(crash_type));
    if (it == table.end())
        throw UnknownCrashType(std::string(crash_type));
    return it->second;
}

namespace {

    Fuzzer parse_fuzzer(const std::string& s, const std::string& id)
    {
        std::string n = normalize_subtype(s);
        if (n == "libfuzzer")
            return Fuzzer::kLibfuzzer;
        if (n == "afl")
            return Fuzzer::kAfl;
        if (n == "honggfuzz")
            return Fuzzer::kHonggfuzz;
        throw ValidationError("case " + id + ": unknown fuzzer \"" + s + "\"");
    }

    SanitizerKind parse_sanitizer(const std::string& s, const std::string& id)
    {
        std::string n = normalize_subtype(s);
        if (n == "asan")
            return SanitizerKind::kAsan;
        if (n == "msan")
            return SanitizerKind::kMsan;
        if (n == "ubsan")
            return SanitizerKind::kUbsan;
        throw ValidationError("case " + id + ": unknown sanitizer \"" + s + "\"");
    }

    Severity parse_severity(const std::string& s)
    {
        std::string n = normalize_subtype(s);
        if (n == "high")
            return Severity::kHigh;
        if (n == "medium" || n == "med")
            return Severity::kMedium;
        return Severity::kUnknown; // "-" and blank cells
    }

    std::string require_string(const nlohmann::json& obj, const char* key,
        const std::string& context)
    {
        if (!obj.contains(key) || !obj[key].is_string())
            throw ParseError("manifest: " + context + " is missing string field \"" + key + "\"");
        return obj[key].get<std::string>();
    }

} // namespace

std::vector<CaseEntry> load_manifest(const std::filesystem::path& path,
    const ManifestOptions& options)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("manifest: cannot open " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw ParseError("manifest: " + path.string() + " is not valid JSON");

    const nlohmann::json* cases = nullptr;
    if (doc.is_array())
        cases = &doc;
    else if (doc.is_object() && doc.contains("case") && doc["case"].is_array())
        cases = &doc["case"];
    else
        throw ParseError("manifest: expected a top-level \"case\" array");

    const std::filesystem::path base = path.parent_path();
    std::vector<CaseEntry> entries;
    std::set<std::string> seen_ids;

    for (size_t i = 0; i < cases->size(); ++i) {
        const nlohmann::json& c = (*cases)[i];
        if (!c.is_object())
            throw ParseError("manifest: case #" + std::to_string(i) + " is not an object");

        CaseEntry e;
        e.id = require_string(c, "id", "case #" + std::to_string(i));
        if (!seen_ids.insert(e.id).second)
            throw ValidationError("case " + e.id + ": duplicate id");

        e.fuzzer = parse_fuzzer(require_string(c, "fuzzer", e.id), e.id);
        e.sanitizer = parse_sanitizer(require_string(c, "sanitizer", e.id), e.id);
        e.project = require_string(c, "project", e.id);
        e.crash_type = require_string(c, "crash_type", e.id);
        e.severity = parse_severity(c.value("severity", std::string("-")));
        e.vulnerable_ref = c.value("vulnerable_ref", std::string());
        e.patched_ref = c.value("patched_ref", std::string());
        e.ground_truth_diff = base / c.value("ground_truth_diff", std::string());
        e.reproducer = base / c.value("reproducer", std::string());
        e.source_root = base / c.value("source_root", std::string());

        try {
            classify_crash(e.crash_type);
        } catch (const UnknownCrashType&) {
            throw ValidationError("case " + e.id + ": crash_type \"" + e.crash_type
                + "\" maps to no crash family");
        }

        if (options.validate_files) {
            if (!std::filesystem::exists(e.ground_truth_diff))
                throw ValidationError("case " + e.id + ": ground_truth_diff "
                    + e.ground_truth_diff.string() + " does not exist");
            std::ifstream diff_in(e.ground_truth_diff);
            std::stringstream buf;
            buf << diff_in.rdbuf();
            PatchModel patch;
            try {
                patch = parse_unified_diff(buf.str());
            } catch (const ParseError& pe) {
                throw ValidationError("case " + e.id + ": ground_truth_diff does not parse: "
                    + pe.what());
            }
            long hunks = 0;
            for (const auto& f : patch.files)
                hunks += static_cast<long>(f.hunks.size());
            if (hunks == 0)
                throw ValidationError("case " + e.id + ": ground_truth_diff has no hunks");
        }

        entries.push_back(std::move(e));
    }
    return entries;
}

std::map<CrashFamily, FamilyShare> family_distribution(
    const std::vector<std::pair<std::string, long>>& crash_type_counts)
{
    std::map<CrashFamily, FamilyShare> dist;
    long total = 0;
    for (const auto& [subtype, count] : crash_type_counts) {
        if (count < 0)
            throw ValidationError("negative count for subtype \"" + subtype + "\"");
        dist[classify_crash(subtype)].count += count;
        total += count;
    }
    for (auto& [family, share] : dist) {
        double pct = total > 0 ? 100.0 * static_cast<double>(share.count) / static_cast<double>(total) : 0.0;
        share.percent = std::round(pct * 10.0) / 10.0;
    }
    return dist;
}

double score_case_difficulty(const DiffSummary& summary, const DifficultyWeights& w)
{
    auto part = [](double value, double cap) {
        return std::min(static_cast<double>(value), cap) / cap;
    };
    double score = w.files * part(static_cast<double>(summary.files_changed), w.files_cap)
        + w.lines * part(static_cast<double>(summary.lines_changed), w.lines_cap)
        + w.dirs * part(static_cast<double>(summary.top_level_dirs_touched), w.dirs_cap)
        + w.depth * part(static_cast<double>(summary.max_directory_depth), w.depth_cap);
    return std::clamp(score, 0.0, 1.0);
}

std::string distribution_to_json(const std::map<CrashFamily, FamilyShare>& dist)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [family, share] : dist) {
        out[to_string(family)] = { { "count", share.count }, { "percent", share.percent } };
    }
    return out.dump(2);
}

} // namespace t2l
