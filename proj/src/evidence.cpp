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

#include "t2l/evidence.hpp"

#include <algorithm>
#include <map>

#include "t2l/error.hpp"

namespace t2l {

std::string to_string(EvidenceSource source)
{
    switch (source) {
    case EvidenceSource::kMain:
        return "main";
    case EvidenceSource::kAlloc:
        return "alloc";
    case EvidenceSource::kFree:
        return "free";
    }
    return "?";
}

namespace {

    void correlate_trace(const std::vector<Frame>& frames, EvidenceSource source,
        double base_weight, const ChunkSet& chunks, EvidenceGraph& graph)
    {
        int position = 0; // index after dropping sanitizer-runtime frames
        for (const Frame& frame : frames) {
            if (is_sanitizer_runtime_frame(frame))
                continue;
            int pos = position++;
            if (!frame.in_project)
                continue;
            EvidenceRef ref { source, frame.index };
            if (!frame.file || !frame.line) {
                graph.unattached_frames.push_back(ref);
                continue;
            }
            const Chunk* chunk = chunks.lookup(*frame.file, *frame.line);
            if (chunk == nullptr) {
                graph.unattached_frames.push_back(ref);
                continue;
            }
            graph.edges.push_back({ ref, chunk->index, base_weight / (1.0 + pos) });
        }
    }

} // namespace

EvidenceGraph correlate_evidence(const CrashReport& report, const ChunkSet& chunks)
{
    EvidenceGraph graph;
    correlate_trace(report.frames, EvidenceSource::kMain, 1.0, chunks, graph);
    correlate_trace(report.alloc_frames, EvidenceSource::kAlloc, 0.5, chunks, graph);
    correlate_trace(report.free_frames, EvidenceSource::kFree, 0.5, chunks, graph);
    return graph;
}

std::vector<Candidate> seed_candidates(const EvidenceGraph& graph, const ChunkSet& chunks,
    int top_n)
{
    if (graph.edges.empty())
        throw EmptyEvidence("evidence graph has no edges");

    std::map<int, double> weight_by_chunk;
    std::map<int, int> frames_by_chunk;
    for (const EvidenceEdge& edge : graph.edges) {
        weight_by_chunk[edge.chunk_index] += edge.weight;
        frames_by_chunk[edge.chunk_index] += 1;
    }
    double max_sum = 0.0;
    for (const auto& [chunk_index, sum] : weight_by_chunk)
        max_sum = std::max(max_sum, sum);

    std::vector<Candidate> seeds;
    for (const auto& [chunk_index, sum] : weight_by_chunk) {
        const Chunk& chunk = chunks.chunks.at(static_cast<size_t>(chunk_index));
        Candidate c;
        c.file = chunk.file_path;
        c.symbol = chunk.symbol;
        c.start_line = chunk.start_line;
        c.end_line = chunk.end_line;
        c.confidence = max_sum > 0.0 ? sum / max_sum : 0.0;
        c.rationale = "runtime evidence: " + std::to_string(frames_by_chunk[chunk_index])
            + " trace frame(s) land in " + chunk.symbol;
        c.votes = 1;
        c.verified = false;
        c.source = CandidateSource::kAtaSeed;
        seeds.push_back(std::move(c));
    }

    std::sort(seeds.begin(), seeds.end(), [](const Candidate& a, const Candidate& b) {
        if (a.confidence != b.confidence)
            return a.confidence > b.confidence;
        if (a.file != b.file)
            return a.file < b.file;
        return a.start_line < b.start_line;
    });
    if (static_cast<int>(seeds.size()) > top_n)
        seeds.resize(static_cast<size_t>(top_n));
    return seeds;
}

} // namespace t2l
