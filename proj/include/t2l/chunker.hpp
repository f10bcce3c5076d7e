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

#ifndef T2L_CHUNKER_HPP_
#define T2L_CHUNKER_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace t2l {

enum class ChunkKind { kFunction, kMethod, kTopLevel };

std::string to_string(ChunkKind kind);

// A function-aligned slice of one source file. Line numbers are 1-based and
// inclusive; `source` is the exact text of those lines after newline
// normalization to LF.
struct Chunk {
    int index = 0;
    std::string file_path; // relative to the chunked root, '/'-separated
    ChunkKind chunk_kind = ChunkKind::kFunction;
    std::string symbol;
    long start_line = 1;
    long end_line = 1;
    std::string source;
    std::string ast_type;
    std::vector<std::string> imports;
    bool diff = false;
    std::vector<long> diff_hit_lines;

    long line_count() const { return end_line - start_line + 1; }
    bool contains(long line) const { return line >= start_line && line <= end_line; }
};

// All chunks of a tree, ordered by (file_path, start_line) with dense indices.
struct ChunkSet {
    std::vector<Chunk> chunks;

    // Returns the function/method chunk containing (file, line), else the
    // containing top_level chunk, else nullptr.
    const Chunk* lookup(const std::string& file, long line) const;

    // Chunks of one file in span order.
    std::vector<const Chunk*> file_chunks(const std::string& file) const;

    bool empty() const { return chunks.empty(); }
    size_t size() const { return chunks.size(); }
};

struct NumberedSnapshot {
    std::string file_path;
    std::vector<std::pair<long, std::string>> lines; // (1-based number, text)
};

struct ChunkOptions {
    std::set<std::string> extensions = { ".c", ".cc", ".cpp", ".cxx", ".h", ".hpp" };
    std::set<std::string> deny_dirs = { "third_party", "build", ".git" };
    // Residue regions longer than this many lines become top_level chunks.
    long top_level_threshold = 30;
};

// Walks `root` and partitions every matching file into function/method chunks
// with exact definition spans. Files the structural scanner cannot handle fall
// back to a line-oriented brace counter; chunking never fails on malformed
// source. Throws IoError if root is missing or unreadable.
ChunkSet chunk_source_tree(const std::filesystem::path& root,
    const ChunkOptions& options = {});

// Convenience overload matching chunk_source_tree(root, options) with only
// the extension set overridden.
ChunkSet chunk_source_tree(const std::filesystem::path& root,
    const std::set<std::string>& extensions);

// Reads root/file and numbers its lines 1..N. Line terminators are normalized
// to LF; everything else is preserved byte-exactly.
NumberedSnapshot numbered_snapshot(const std::filesystem::path& root,
    const std::string& rel_file);

// Same normalization as numbered_snapshot, applied to text already in memory.
std::vector<std::string> split_normalized_lines(std::string_view text);

// ChunkSet <-> JSON array with the exact wire field names
// (index, file_path, chunk_kind, symbol, start_line, end_line, source,
// ast_type, imports, diff, diff_hit_lines).
std::string chunkset_to_json(const ChunkSet& chunks);
ChunkSet chunkset_from_json(std::string_view text);

} // namespace t2l

#endif // T2L_CHUNKER_HPP_
