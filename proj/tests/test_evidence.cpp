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

#include <doctest.h>

#include <map>

#include "support/fakes.hpp"
#include "t2l/error.hpp"
#include "t2l/evidence.hpp"

using namespace t2l;

namespace {

ChunkSet make_chunks()
{
    ChunkSet set;
    auto add = [&set](const char* file, const char* symbol, long start, long end) {
        Chunk c;
        c.index = static_cast<int>(set.chunks.size());
        c.file_path = file;
        c.chunk_kind = ChunkKind::kFunction;
        c.symbol = symbol;
        c.start_line = start;
        c.end_line = end;
        set.chunks.push_back(c);
    };
    add("f.c", "alpha", 30, 60);
    add("f.c", "beta", 70, 90);
    add("g.c", "gamma", 1, 25);
    return set;
}

Frame project_frame(int index, const char* function, const char* file, long line)
{
    Frame f;
    f.index = index;
    f.function = function;
    f.file = file;
    f.line = line;
    f.in_project = true;
    return f;
}

} // namespace

TEST_CASE("correlate_evidence: frame in a chunk gets weight 1/(1+position)")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    report.frames.push_back(project_frame(0, "alpha", "f.c", 42));

    EvidenceGraph graph = correlate_evidence(report, chunks);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].chunk_index == 0);
    CHECK(graph.edges[0].weight == doctest::Approx(1.0));
    CHECK(graph.unattached_frames.empty());
}

TEST_CASE("correlate_evidence: frame outside all chunks is unattached")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    report.frames.push_back(project_frame(0, "phantom", "h.c", 5));

    EvidenceGraph graph = correlate_evidence(report, chunks);
    CHECK(graph.edges.empty());
    REQUIRE(graph.unattached_frames.size() == 1);
    CHECK(graph.unattached_frames[0].frame_index == 0);
}

TEST_CASE("correlate_evidence: sanitizer frames are excluded before indexing")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    Frame interceptor = project_frame(0, "__interceptor_free", "rt.c", 1);
    interceptor.in_project = false;
    report.frames.push_back(interceptor);
    report.frames.push_back(project_frame(1, "alpha", "f.c", 40));
    report.frames.push_back(project_frame(2, "beta", "f.c", 80));

    EvidenceGraph graph = correlate_evidence(report, chunks);
    REQUIRE(graph.edges.size() == 2);
    // alpha sits at filtered position 0, so its weight is 1.0 not 0.5
    CHECK(graph.edges[0].weight == doctest::Approx(1.0));
    CHECK(graph.edges[1].weight == doctest::Approx(0.5));
}

TEST_CASE("correlate_evidence: alloc and free traces weigh half")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    report.frames.push_back(project_frame(0, "alpha", "f.c", 35));
    report.alloc_frames.push_back(project_frame(0, "beta", "f.c", 75));
    report.free_frames.push_back(project_frame(0, "gamma", "g.c", 10));

    EvidenceGraph graph = correlate_evidence(report, chunks);
    REQUIRE(graph.edges.size() == 3);
    std::map<int, double> weight;
    for (const auto& e : graph.edges)
        weight[e.chunk_index] = e.weight;
    CHECK(weight[0] == doctest::Approx(1.0));
    CHECK(weight[1] == doctest::Approx(0.5));
    CHECK(weight[2] == doctest::Approx(0.5));
}

TEST_CASE("correlate_evidence: weights strictly decrease down each trace")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    report.frames.push_back(project_frame(0, "alpha", "f.c", 31));
    report.frames.push_back(project_frame(1, "alpha", "f.c", 45));
    report.frames.push_back(project_frame(2, "beta", "f.c", 71));
    report.frames.push_back(project_frame(3, "gamma", "g.c", 2));

    EvidenceGraph graph = correlate_evidence(report, chunks);
    REQUIRE(graph.edges.size() == 4);
    for (size_t i = 1; i < graph.edges.size(); ++i)
        CHECK(graph.edges[i].weight < graph.edges[i - 1].weight);
}

TEST_CASE("correlate_evidence matches a brute-force scan on a parsed fixture")
{
    ChunkSet chunks = make_chunks();
    CrashReport report;
    report.frames.push_back(project_frame(0, "alpha", "f.c", 42));
    report.frames.push_back(project_frame(1, "nowhere", "f.c", 95)); // between chunks
    report.frames.push_back(project_frame(2, "beta", "f.c", 88));
    report.frames.push_back(project_frame(3, "gamma", "g.c", 24));
    Frame libc;
    libc.index = 4;
    libc.function = "__libc_start_main";
    libc.in_project = false;
    report.frames.push_back(libc);

    EvidenceGraph graph = correlate_evidence(report, chunks);

    // brute force: for each in-project frame, scan all chunks
    long expected_edges = 0, expected_unattached = 0;
    for (const Frame& f : report.frames) {
        if (!f.in_project)
            continue;
        bool found = false;
        for (const Chunk& c : chunks.chunks)
            if (f.file && c.file_path == *f.file && f.line && c.contains(*f.line))
                found = true;
        if (found)
            ++expected_edges;
        else
            ++expected_unattached;
    }
    CHECK(static_cast<long>(graph.edges.size()) == expected_edges);
    CHECK(static_cast<long>(graph.unattached_frames.size()) == expected_unattached);

    // every in-project frame lands in exactly one of edges/unattached
    CHECK(expected_edges + expected_unattached == 4);
}

TEST_CASE("seed_candidates ranks chunks by normalized weight sums")
{
    ChunkSet chunks = make_chunks();
    EvidenceGraph graph;
    graph.edges.push_back({ { EvidenceSource::kMain, 0 }, 0, 1.0 });
    graph.edges.push_back({ { EvidenceSource::kMain, 1 }, 0, 0.5 });
    graph.edges.push_back({ { EvidenceSource::kAlloc, 0 }, 1, 0.5 });

    auto seeds = seed_candidates(graph, chunks, 10);
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].file == "f.c");
    CHECK(seeds[0].start_line == 30);
    CHECK(seeds[0].end_line == 60);
    CHECK(seeds[0].confidence == doctest::Approx(1.0));
    CHECK(seeds[0].source == CandidateSource::kAtaSeed);
    CHECK(*seeds[0].symbol == "alpha");
    CHECK(seeds[1].confidence == doctest::Approx(0.5 / 1.5));
}

TEST_CASE("seed_candidates: single edge gives confidence 1.0")
{
    ChunkSet chunks = make_chunks();
    EvidenceGraph graph;
    graph.edges.push_back({ { EvidenceSource::kMain, 0 }, 2, 1.0 });
    auto seeds = seed_candidates(graph, chunks, 5);
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0].confidence == doctest::Approx(1.0));
}

TEST_CASE("seed_candidates truncates to top_n and breaks ties by location")
{
    ChunkSet chunks = make_chunks();
    EvidenceGraph graph;
    graph.edges.push_back({ { EvidenceSource::kMain, 0 }, 0, 0.5 });
    graph.edges.push_back({ { EvidenceSource::kMain, 1 }, 1, 0.5 });
    graph.edges.push_back({ { EvidenceSource::kMain, 2 }, 2, 0.5 });

    auto seeds = seed_candidates(graph, chunks, 2);
    REQUIRE(seeds.size() == 2);
    // equal confidence: (file_path, start_line) order
    CHECK(seeds[0].file == "f.c");
    CHECK(seeds[0].start_line == 30);
    CHECK(seeds[1].file == "f.c");
    CHECK(seeds[1].start_line == 70);
}

TEST_CASE("seed_candidates on an empty graph raises EmptyEvidence")
{
    ChunkSet chunks = make_chunks();
    CHECK_THROWS_AS(seed_candidates(EvidenceGraph {}, chunks, 3), EmptyEvidence);
}
