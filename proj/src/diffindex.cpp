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

#include "t2l/diffindex.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "t2l/error.hpp"

namespace t2l {

namespace {

    constexpr const char* kDevNull = "/dev/null";

    std::vector<std::string_view> split_lines(std::string_view text)
    {
        std::vector<std::string_view> lines;
        size_t pos = 0;
        while (pos < text.size()) {
            size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) {
                lines.push_back(text.substr(pos));
                break;
            }
            std::string_view line = text.substr(pos, nl - pos);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            lines.push_back(line);
            pos = nl + 1;
        }
        return lines;
    }

    // "a/x/y.c\t2024-01-01 ..." -> "x/y.c"; "/dev/null" stays as is.
    std::string parse_header_path(std::string_view rest)
    {
        size_t tab = rest.find('\t');
        if (tab != std::string_view::npos)
            rest = rest.substr(0, tab);
        while (!rest.empty() && rest.back() == ' ')
            rest.remove_suffix(1);
        if (rest == kDevNull)
            return std::string(rest);
        if (rest.size() >= 2 && (rest.substr(0, 2) == "a/" || rest.substr(0, 2) == "b/"))
            rest = rest.substr(2);
        return std::string(rest);
    }

    [[noreturn]] void malformed(size_t line_no, const std::string& what)
    {
        throw ParseError("diff line " + std::to_string(line_no) + ": " + what);
    }

    // "@@ -5,3 +5,2 @@ context" -> ranges. A missing length means 1.
    bool parse_hunk_header(std::string_view line, HunkDiff& out)
    {
        if (line.substr(0, 4) != "@@ -")
            return false;
        const char* p = line.data() + 4;
        const char* end = line.data() + line.size();
        auto read_num = [&](long& value) -> bool {
            if (p == end || !std::isdigit(static_cast<unsigned char>(*p)))
                return false;
            value = 0;
            while (p != end && std::isdigit(static_cast<unsigned char>(*p)))
                value = value * 10 + (*p++ - '0');
            return true;
        };
        if (!read_num(out.old_start))
            return false;
        out.old_len = 1;
        if (p != end && *p == ',') {
            ++p;
            if (!read_num(out.old_len))
                return false;
        }
        if (p == end || *p != ' ')
            return false;
        ++p;
        if (p == end || *p != '+')
            return false;
        ++p;
        if (!read_num(out.new_start))
            return false;
        out.new_len = 1;
        if (p != end && *p == ',') {
            ++p;
            if (!read_num(out.new_len))
                return false;
        }
        if (end - p < 3 || std::string_view(p, 3) != " @@")
            return false;
        return true;
    }

} // namespace

const std::string& FileDiff::index_path() const
{
    if (old_path == kDevNull)
        return new_path;
    return old_path;
}

PatchModel parse_unified_diff(std::string_view text)
{
    PatchModel patch;
    auto lines = split_lines(text);

    FileDiff* current_file = nullptr;
    size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];

        if (line.substr(0, 4) == "--- ") {
            if (i + 1 >= lines.size() || lines[i + 1].substr(0, 4) != "+++ ")
                malformed(i + 1, "\"---\" header without matching \"+++\"");
            FileDiff fd;
            fd.old_path = parse_header_path(line.substr(4));
            fd.new_path = parse_header_path(lines[i + 1].substr(4));
            patch.files.push_back(std::move(fd));
            current_file = &patch.files.back();
            i += 2;
            continue;
        }

        if (line.substr(0, 2) == "@@") {
            HunkDiff hunk;
            if (!parse_hunk_header(line, hunk))
                malformed(i + 1, "malformed hunk header");
            if (current_file == nullptr)
                malformed(i + 1, "hunk before any file header");
            if (!current_file->hunks.empty()
                && hunk.old_start <= current_file->hunks.back().old_start)
                malformed(i + 1, "hunk old_start values must be strictly increasing");

            size_t body_start = ++i;
            long seen_old = 0, seen_new = 0;
            while (i < lines.size() && (seen_old < hunk.old_len || seen_new < hunk.new_len)) {
                std::string_view body = lines[i];
                if (body.substr(0, 1) == "\\") { // "\ No newline at end of file"
                    ++i;
                    continue;
                }
                char tag = body.empty() ? ' ' : body[0];
                std::string payload = body.empty() ? std::string() : std::string(body.substr(1));
                if (tag == ' ') {
                    hunk.lines.push_back({ DiffLineTag::kContext, std::move(payload) });
                    ++seen_old;
                    ++seen_new;
                } else if (tag == '-') {
                    hunk.lines.push_back({ DiffLineTag::kDel, std::move(payload) });
                    ++seen_old;
                } else if (tag == '+') {
                    hunk.lines.push_back({ DiffLineTag::kAdd, std::move(payload) });
                    ++seen_new;
                } else {
                    malformed(i + 1, "unexpected line inside hunk body");
                }
                if (seen_old > hunk.old_len || seen_new > hunk.new_len)
                    malformed(body_start, "hunk body contradicts @@ counts");
                ++i;
            }
            if (seen_old != hunk.old_len || seen_new != hunk.new_len)
                malformed(body_start, "hunk body shorter than @@ counts");
            current_file->hunks.push_back(std::move(hunk));
            continue;
        }

        // "diff --git", "index ...", "new file mode ..." and other
        // decorations between files.
        ++i;
    }

    return patch;
}

DiffIndex build_diff_index(const PatchModel& patch)
{
    DiffIndex index;
    for (const auto& fd : patch.files) {
        FileIndex& fi = index.files[fd.index_path()];
        const bool is_addition = fd.old_path == kDevNull;

        for (const auto& hunk : fd.hunks) {
            // next_old = the OLD line the next context/del line would consume.
            long next_old = hunk.old_len == 0 || is_addition ? hunk.old_start + 1
                                                             : hunk.old_start;
            size_t n = hunk.lines.size();
            for (size_t j = 0; j < n; ++j) {
                switch (hunk.lines[j].tag) {
                case DiffLineTag::kContext:
                    ++next_old;
                    break;
                case DiffLineTag::kDel:
                    fi.anchors_old.push_back(next_old);
                    fi.per_line[next_old].roles |= kRoleDeleted;
                    ++next_old;
                    break;
                case DiffLineTag::kAdd: {
                    size_t run_end = j;
                    while (run_end + 1 < n && hunk.lines[run_end + 1].tag == DiffLineTag::kAdd)
                        ++run_end;
                    bool del_before = j > 0 && hunk.lines[j - 1].tag == DiffLineTag::kDel;
                    bool del_after = run_end + 1 < n && hunk.lines[run_end + 1].tag == DiffLineTag::kDel;
                    if (!del_before && !del_after) {
                        long anchor = next_old - 1; // 0 when inserting at file head
                        fi.insert_points.push_back(anchor);
                        fi.per_line[anchor].roles |= kRoleInsertAnchor;
                    }
                    j = run_end;
                    break;
                }
                }
            }
        }

        auto dedupe = [](std::vector<long>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        dedupe(fi.anchors_old);
        dedupe(fi.insert_points);
    }
    return index;
}

std::vector<std::pair<std::string, long>> extract_modified_lines(const PatchModel& patch)
{
    DiffIndex index = build_diff_index(patch);
    std::vector<std::pair<std::string, long>> out;
    for (const auto& [file, fi] : index.files) {
        std::set<long> lines(fi.anchors_old.begin(), fi.anchors_old.end());
        lines.insert(fi.insert_points.begin(), fi.insert_points.end());
        for (long line : lines)
            out.emplace_back(file, line);
    }
    std::sort(out.begin(), out.end());
    return out;
}

GroundTruth ground_truth_from(const DiffIndex& index)
{
    GroundTruth gt;
    for (const auto& [file, fi] : index.files) {
        std::set<long> merged(fi.anchors_old.begin(), fi.anchors_old.end());
        merged.insert(fi.insert_points.begin(), fi.insert_points.end());
        if (merged.empty())
            continue;
        GroundTruth::FileTruth ft;
        ft.gt_lines.assign(merged.begin(), merged.end());
        long run_start = ft.gt_lines.front();
        long prev = run_start;
        for (size_t k = 1; k < ft.gt_lines.size(); ++k) {
            long line = ft.gt_lines[k];
            if (line != prev + 1) {
                ft.gt_intervals.emplace_back(run_start, prev);
                run_start = line;
            }
            prev = line;
        }
        ft.gt_intervals.emplace_back(run_start, prev);
        gt.files[file] = std::move(ft);
    }
    return gt;
}

long GroundTruth::total_lines() const
{
    long n = 0;
    for (const auto& [file, ft] : files)
        n += static_cast<long>(ft.gt_lines.size());
    return n;
}

long GroundTruth::total_intervals() const
{
    long n = 0;
    for (const auto& [file, ft] : files)
        n += static_cast<long>(ft.gt_intervals.size());
    return n;
}

MarkDiffResult mark_diff(ChunkSet chunks, const DiffIndex& index)
{
    MarkDiffResult result;
    GroundTruth gt = ground_truth_from(index);

    std::set<std::string> chunked_files;
    for (const auto& chunk : chunks.chunks)
        chunked_files.insert(chunk.file_path);

    std::set<std::pair<std::string, long>> covered;
    for (auto& chunk : chunks.chunks) {
        auto it = gt.files.find(chunk.file_path);
        if (it == gt.files.end())
            continue;
        std::vector<long> hits;
        for (long line : it->second.gt_lines) {
            if (chunk.contains(line)) {
                hits.push_back(line);
                covered.emplace(chunk.file_path, line);
            }
        }
        if (!hits.empty()) {
            chunk.diff = true;
            chunk.diff_hit_lines = std::move(hits);
        }
    }

    for (const auto& [file, ft] : gt.files) {
        if (!chunked_files.count(file)) {
            result.unmatched_files.push_back(file);
            continue;
        }
        for (long line : ft.gt_lines)
            if (!covered.count({ file, line }))
                result.uncovered_lines.emplace_back(file, line);
    }
    std::sort(result.uncovered_lines.begin(), result.uncovered_lines.end());

    result.chunks = std::move(chunks);
    return result;
}

DiffSummary summarize_patch(const PatchModel& patch)
{
    DiffSummary s;
    std::set<std::string> top_dirs;
    for (const auto& fd : patch.files) {
        ++s.files_changed;
        s.hunks += static_cast<long>(fd.hunks.size());
        for (const auto& hunk : fd.hunks)
            for (const auto& line : hunk.lines)
                if (line.tag != DiffLineTag::kContext)
                    ++s.lines_changed;

        const std::string& path = fd.index_path();
        long depth = static_cast<long>(std::count(path.begin(), path.end(), '/'));
        s.max_directory_depth = std::max(s.max_directory_depth, depth);
        size_t slash = path.find('/');
        top_dirs.insert(slash == std::string::npos ? std::string(".")
                                                   : path.substr(0, slash));
    }
    s.top_level_dirs_touched = static_cast<long>(top_dirs.size());
    return s;
}

std::string diff_index_to_json(const DiffIndex& index)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [file, fi] : index.files) {
        nlohmann::ordered_json entry;
        entry["anchors_old"] = fi.anchors_old;
        entry["insert_points"] = fi.insert_points;
        nlohmann::ordered_json per_line = nlohmann::ordered_json::object();
        for (const auto& [line, mark] : fi.per_line) {
            nlohmann::ordered_json roles = nlohmann::ordered_json::array();
            if (mark.roles & kRoleDeleted)
                roles.push_back("deleted");
            if (mark.roles & kRoleInsertAnchor)
                roles.push_back("insert_anchor");
            per_line[std::to_string(line)] = { { "roles", roles }, { "matched", mark.matched } };
        }
        entry["per_line"] = std::move(per_line);
        out[file] = std::move(entry);
    }
    return out.dump(2);
}

} // namespace t2l
