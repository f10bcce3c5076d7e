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

#ifndef T2L_DIFFINDEX_HPP_
#define T2L_DIFFINDEX_HPP_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2l/chunker.hpp"
#include "t2l/corpus.hpp"

namespace t2l {

// Every line number in this module is an OLD-file coordinate. The only
// OLD-space footprint of an insertion is its anchor line (0 when inserting at
// the head of a file).

enum class DiffLineTag { kContext, kDel, kAdd };

struct DiffLine {
    DiffLineTag tag;
    std::string text; // without the leading marker character
};

struct HunkDiff {
    long old_start = 0;
    long old_len = 0;
    long new_start = 0;
    long new_len = 0;
    std::vector<DiffLine> lines;
};

struct FileDiff {
    std::string old_path; // "a/"-prefix stripped; "/dev/null" kept verbatim
    std::string new_path;
    std::vector<HunkDiff> hunks;

    // Path all OLD coordinates are filed under: old_path, unless the file is
    // an addition, in which case the new_path names it.
    const std::string& index_path() const;
};

struct PatchModel {
    std::vector<FileDiff> files;
};

inline constexpr unsigned kRoleDeleted = 1u << 0;
inline constexpr unsigned kRoleInsertAnchor = 1u << 1;

struct LineMark {
    unsigned roles = 0;
    bool matched = false;
};

struct FileIndex {
    std::vector<long> anchors_old;    // deleted OLD lines, sorted
    std::vector<long> insert_points;  // OLD lines preceding pure insertions, sorted
    std::map<long, LineMark> per_line;
};

struct DiffIndex {
    std::map<std::string, FileIndex> files;

    bool empty() const { return files.empty(); }
};

// gt_lines = anchors_old ∪ insert_points; gt_intervals are the maximal
// consecutive runs of gt_lines, disjoint and sorted.
struct GroundTruth {
    struct FileTruth {
        std::vector<long> gt_lines;
        std::vector<std::pair<long, long>> gt_intervals; // inclusive
    };
    std::map<std::string, FileTruth> files;

    long total_lines() const;
    long total_intervals() const;
};

// Parses standard unified diff text ("--- a/x", "+++ b/x", "@@ -s,l +s,l @@"
// headers, ' '/'-'/'+' body lines). Hunk bodies are checked against their
// declared lengths; ParseError carries the 1-based line number of the first
// malformed header or hunk.
PatchModel parse_unified_diff(std::string_view text);

// Builds the OLD-coordinate line index: deletions become anchors_old, and a
// maximal run of added lines with no adjacent deletion contributes one
// insert_point at the OLD line right before the run.
DiffIndex build_diff_index(const PatchModel& patch);

// Flattened (file, old_line) ground-truth list, sorted by (file, line).
std::vector<std::pair<std::string, long>> extract_modified_lines(const PatchModel& patch);

GroundTruth ground_truth_from(const DiffIndex& index);

struct MarkDiffResult {
    ChunkSet chunks;
    std::vector<std::string> unmatched_files;               // index files with no chunks
    std::vector<std::pair<std::string, long>> uncovered_lines; // gt lines inside no chunk
};

// Marks chunks touched by the index: diff=true and diff_hit_lines = gt lines
// falling inside the chunk span. Index files with no chunked counterpart are
// reported, not fatal. Idempotent.
MarkDiffResult mark_diff(ChunkSet chunks, const DiffIndex& index);

// Structural profile of a patch (files/hunks/lines changed, directory shape).
DiffSummary summarize_patch(const PatchModel& patch);

// {file: {anchors_old: [...], insert_points: [...], per_line: {"n": {roles,
// matched}}}} with those exact field names.
std::string diff_index_to_json(const DiffIndex& index);

} // namespace t2l

#endif // T2L_DIFFINDEX_HPP_
