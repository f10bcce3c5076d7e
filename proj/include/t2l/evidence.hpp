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

#ifndef T2L_EVIDENCE_HPP_
#define T2L_EVIDENCE_HPP_

#include <string>
#include <vector>

#include "t2l/ata.hpp"
#include "t2l/chunker.hpp"
#include "t2l/llm.hpp"

namespace t2l {

// Which trace a frame came from.
enum class EvidenceSource { kMain, kAlloc, kFree };

std::string to_string(EvidenceSource source);

struct EvidenceRef {
    EvidenceSource source = EvidenceSource::kMain;
    int frame_index = 0; // Frame.index within its trace
};

struct EvidenceEdge {
    EvidenceRef frame;
    int chunk_index = 0;
    double weight = 0.0; // in (0,1], strictly decreasing down each trace
};

// Runtime observations tied to static structure: one edge per in-project
// frame that lands in a chunk, the rest recorded as unattached.
struct EvidenceGraph {
    std::vector<EvidenceEdge> edges;
    std::vector<EvidenceRef> unattached_frames;
};

// Correlates report frames with chunks. Sanitizer-runtime frames are dropped
// before indexing; remaining main-trace frames weigh 1/(1+position) and
// alloc/free frames half that.
EvidenceGraph correlate_evidence(const CrashReport& report, const ChunkSet& chunks);

// One candidate per chunk with evidence, interval = chunk span, confidence =
// its weight sum normalized by the best chunk's sum. Sorted by confidence
// desc then (file_path, start_line); truncated to top_n. Throws EmptyEvidence
// when the graph has no edges.
std::vector<Candidate> seed_candidates(const EvidenceGraph& graph, const ChunkSet& chunks,
    int top_n);

} // namespace t2l

#endif // T2L_EVIDENCE_HPP_
