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

#include "t2l/verifier.hpp"

#include <algorithm>

#include <json.hpp>

namespace t2l {

std::string to_string(AnchorKind kind)
{
    switch (kind) {
    case AnchorKind::kSymbolSnippet:
        return "symbol_snippet";
    case AnchorKind::kSymbolOnly:
        return "symbol_only";
    case AnchorKind::kFallbackOriginal:
        return "fallback_original";
    }
    return "?";
}

std::string rationale_snippet(const std::string& rationale)
{
    size_t pos = 0;
    while (pos < rationale.size()) {
        size_t open = rationale.find('`', pos);
        if (open == std::string::npos)
            return {};
        size_t close = rationale.find('`', open + 1);
        if (close == std::string::npos)
            return {};
        std::string quoted = rationale.substr(open + 1, close - open - 1);
        size_t b = quoted.find_first_not_of(" \t");
        size_t e = quoted.find_last_not_of(" \t");
        if (b != std::string::npos)
            return quoted.substr(b, e - b + 1);
        pos = close + 1;
    }
    return {};
}

namespace {

    // Chunk whose symbol matches; same-file chunks win, then lowest
    // start_line. Bare names match qualified definitions ("parse" matches
    // "Decoder::parse").
    const Chunk* find_symbol_chunk(const ChunkSet& chunks, const std::string& symbol,
        const std::string& file)
    {
        auto matches = [&symbol](const Chunk& c) {
            if (c.chunk_kind == ChunkKind::kTopLevel)
                return false;
            if (c.symbol == symbol)
                return true;
            size_t tail = c.symbol.size() > symbol.size() + 2
                ? c.symbol.size() - symbol.size() - 2
                : std::string::npos;
            return tail != std::string::npos && c.symbol.compare(tail, 2, "::") == 0
                && c.symbol.compare(tail + 2, symbol.size(), symbol) == 0;
        };
        const Chunk* best = nullptr;
        for (const Chunk& c : chunks.chunks) {
            if (!matches(c))
                continue;
            if (best == nullptr) {
                best = &c;
                continue;
            }
            bool c_in_file = c.file_path == file;
            bool best_in_file = best->file_path == file;
            if (c_in_file != best_in_file) {
                if (c_in_file)
                    best = &c;
                continue;
            }
            if (c.start_line != best->start_line ? c.start_line < best->start_line
                                                 : c.file_path < best->file_path)
                best = &c;
        }
        return best;
    }

    // 1-based line within the chunk whose text contains the snippet, or 0.
    long find_snippet_line(const Chunk& chunk, const std::string& snippet)
    {
        if (snippet.empty())
            return 0;
        long line_no = chunk.start_line;
        size_t pos = 0;
        const std::string& src = chunk.source;
        while (pos <= src.size()) {
            size_t nl = src.find('\n', pos);
            std::string_view line = nl == std::string::npos
                ? std::string_view(src).substr(pos)
                : std::string_view(src).substr(pos, nl - pos);
            if (line.find(snippet) != std::string_view::npos)
                return line_no;
            if (nl == std::string::npos)
                break;
            pos = nl + 1;
            ++line_no;
        }
        return 0;
    }

    VerifiedCandidate verify_one(const Candidate& cand, const ChunkSet& chunks)
    {
        VerifiedCandidate v;
        static_cast<Candidate&>(v) = cand;
        v.original_interval = { cand.start_line, cand.end_line };

        const Chunk* chunk = cand.symbol
            ? find_symbol_chunk(chunks, *cand.symbol, cand.file)
            : nullptr;
        if (chunk == nullptr) {
            v.anchored_by = AnchorKind::kFallbackOriginal;
            v.verified = false;
            return v;
        }

        const std::string snippet = rationale_snippet(cand.rationale);
        long snippet_line = snippet.empty() ? 0 : find_snippet_line(*chunk, snippet);

        if (snippet_line > 0) {
            bool consistent = snippet_line >= cand.start_line && snippet_line <= cand.end_line
                && cand.start_line >= chunk->start_line && cand.end_line <= chunk->end_line;
            if (!consistent) {
                // Anchor the interval at the line actually containing the
                // quoted code, preserving its length (truncated only when the
                // claimed span is longer than the whole chunk).
                long span = std::min(cand.end_line - cand.start_line + 1, chunk->line_count());
                long start = snippet_line;
                long end = start + span - 1;
                if (end > chunk->end_line) {
                    end = chunk->end_line;
                    start = end - span + 1;
                }
                v.start_line = start;
                v.end_line = end;
            }
            v.anchored_by = AnchorKind::kSymbolSnippet;
            v.verified = true;
            return v;
        }

        v.start_line = std::clamp(cand.start_line, chunk->start_line, chunk->end_line);
        v.end_line = std::clamp(cand.end_line, v.start_line, chunk->end_line);
        v.anchored_by = AnchorKind::kSymbolOnly;
        v.verified = true;
        return v;
    }

} // namespace

std::vector<VerifiedCandidate> verify_candidates(const std::vector<Candidate>& candidates,
    const ChunkSet& chunks, const std::filesystem::path& root)
{
    (void)root; // chunk sources already carry the snapshot text
    std::vector<VerifiedCandidate> out;
    out.reserve(candidates.size());
    for (const Candidate& cand : candidates)
        out.push_back(verify_one(cand, chunks));
    return out;
}

std::vector<VerifiedCandidate> verify_candidates(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& chunks, const std::filesystem::path& root)
{
    std::vector<Candidate> plain(candidates.begin(), candidates.end());
    return verify_candidates(plain, chunks, root);
}

std::string verified_to_json(const std::vector<VerifiedCandidate>& candidates)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const VerifiedCandidate& c : candidates) {
        nlohmann::ordered_json j;
        j["file"] = c.file;
        if (c.symbol)
            j["symbol"] = *c.symbol;
        else
            j["symbol"] = nullptr;
        j["start_line"] = c.start_line;
        j["end_line"] = c.end_line;
        j["confidence"] = c.confidence;
        j["rationale"] = c.rationale;
        j["votes"] = c.votes;
        j["source"] = to_string(c.source);
        j["verified"] = c.verified;
        j["anchored_by"] = to_string(c.anchored_by);
        j["original_interval"] = { c.original_interval.first, c.original_interval.second };
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

} // namespace t2l
