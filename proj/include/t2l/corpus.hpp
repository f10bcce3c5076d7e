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

#ifndef T2L_CORPUS_HPP_
#define T2L_CORPUS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace t2l {

// The five crash families every sanitizer subtype maps into.
enum class CrashFamily {
    kBufferOverflow,
    kUninitializedAccess,
    kMemoryLifecycle,
    kTypeSafety,
    kSystemRuntime,
};

enum class Fuzzer { kLibfuzzer, kAfl, kHonggfuzz };
enum class SanitizerKind { kAsan, kMsan, kUbsan, kNone };
enum class Severity { kHigh, kMedium, kUnknown };

std::string to_string(CrashFamily family);
std::string to_string(Fuzzer fuzzer);
std::string to_string(SanitizerKind sanitizer);
std::string to_string(Severity severity);

// Short column headings used by benchmark tables
// (Buffer / Initialize / Memory / Parameter / Runtime).
std::string family_column_name(CrashFamily family);

CrashFamily crash_family_from_string(std::string_view name);

// One benchmark case: a reproducible crash plus the patch that fixes it.
// Paths are stored as given in the manifest; load_manifest() resolves the
// file-valued ones relative to the manifest's directory.
struct CaseEntry {
    std::string id;
    Fuzzer fuzzer = Fuzzer::kLibfuzzer;
    SanitizerKind sanitizer = SanitizerKind::kAsan;
    std::string project;
    std::string crash_type;
    Severity severity = Severity::kUnknown;
    std::string vulnerable_ref;
    std::string patched_ref;
    std::filesystem::path ground_truth_diff;
    std::filesystem::path reproducer;
    std::filesystem::path source_root;
};

// Structural shape of a ground-truth patch, the input to difficulty scoring.
struct DiffSummary {
    long files_changed = 0;
    long hunks = 0;
    long lines_changed = 0;
    long max_directory_depth = 0;
    long top_level_dirs_touched = 0;
};

struct DifficultyWeights {
    double files = 0.35;
    double lines = 0.25;
    double dirs = 0.20;
    double depth = 0.20;
    double files_cap = 5;
    double lines_cap = 200;
    double dirs_cap = 3;
    double depth_cap = 6;
};

struct FamilyShare {
    long count = 0;
    double percent = 0.0; // rounded to 0.1
};

struct ManifestOptions {
    // When set, every ground_truth_diff must exist and parse as a unified
    // diff with at least one hunk. Turn off to load list-only manifests
    // (e.g. the bundled benchmark index) for profiling.
    bool validate_files = true;
};

// Maps a sanitizer subtype string onto its crash family. Matching is
// case-insensitive and treats '-', '_' and ' ' as equivalent. Throws
// UnknownCrashType for strings outside the taxonomy.
CrashFamily classify_crash(std::string_view crash_type);

// Loads a manifest (JSON document with a top-level "case" array, or a bare
// array) and validates every entry. Throws ParseError on malformed input and
// ValidationError naming the offending entry id on invariant violations.
std::vector<CaseEntry> load_manifest(const std::filesystem::path& path,
    const ManifestOptions& options = {});

// Partitions subtype counts by family. Percents are rounded to 0.1 and the
// input counts are preserved exactly. Unknown subtypes propagate as
// UnknownCrashType.
std::map<CrashFamily, FamilyShare> family_distribution(
    const std::vector<std::pair<std::string, long>>& crash_type_counts);

// Difficulty in [0,1] from diff structure alone; monotone non-decreasing in
// every DiffSummary field.
double score_case_difficulty(const DiffSummary& summary,
    const DifficultyWeights& weights = {});

// JSON text of the {family: {count, percent}} distribution report.
std::string distribution_to_json(const std::map<CrashFamily, FamilyShare>& dist);

} // namespace t2l

#endif // T2L_CORPUS_HPP_
