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

#ifndef T2L_VERIFIER_HPP_
#define T2L_VERIFIER_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "t2l/chunker.hpp"
#include "t2l/llm.hpp"

namespace t2l {

enum class AnchorKind { kSymbolSnippet, kSymbolOnly, kFallbackOriginal };

std::string to_string(AnchorKind kind);

struct VerifiedCandidate : Candidate {
    AnchorKind anchored_by = AnchorKind::kFallbackOriginal;
    std::pair<long, long> original_interval { 0, 0 };
};

// Grounds candidates against the actual source. Per candidate: (1) symbol
// matches a chunk and the first backtick-quoted rationale line occurs in that
// chunk -> interval re-anchored to the quoted line (length preserved);
// (2) symbol matches a chunk -> interval clamped into the chunk span;
// (3) otherwise the original lines stand. Candidates are never dropped or
// reordered, and verifying twice is a no-op.
std::vector<VerifiedCandidate> verify_candidates(const std::vector<Candidate>& candidates,
    const ChunkSet& chunks, const std::filesystem::path& root);

std::vector<VerifiedCandidate> verify_candidates(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& chunks, const std::filesystem::path& root);

// Wire schema plus verified/anchored_by/original_interval fields
// (verified_locations.json).
std::string verified_to_json(const std::vector<VerifiedCandidate>& candidates);

// First non-empty backtick-quoted span in a rationale, trimmed; empty when
// the rationale quotes nothing.
std::string rationale_snippet(const std::string& rationale);

} // namespace t2l

#endif // T2L_VERIFIER_HPP_
