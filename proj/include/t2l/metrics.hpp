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

#ifndef T2L_METRICS_HPP_
#define T2L_METRICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "t2l/corpus.hpp"
#include "t2l/diffindex.hpp"
#include "t2l/verifier.hpp"

namespace t2l {

struct MetricCounts {
    long diff_chunks = 0;
    long hit_chunks = 0;
    long gt_lines = 0;
    long covered_lines = 0;
    long gt_intervals = 0;
    long exact_intervals = 0;
};

struct CaseMetrics {
    double detection = 0.0;    // hit_chunks / diff_chunks
    double localization = 0.0; // covered_lines / gt_lines
    double strict = 0.0;       // exact_intervals / gt_intervals
    bool solved = false;       // localization >= tau
    MetricCounts counts;
};

struct ScoreResult {
    double score = 0.0;
    MetricCounts counts;
};

// Fraction of diff-marked chunks overlapped (>= 1 line, same file) by some
// candidate. Throws NoGroundTruth when the set carries no diff chunks.
ScoreResult detection_rate(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& marked);

// Fraction of ground-truth OLD lines lying inside some same-file candidate
// interval. Throws NoGroundTruth on an empty ground truth.
ScoreResult localization_rate(const std::vector<VerifiedCandidate>& candidates,
    const GroundTruth& gt);

// Fraction of ground-truth intervals matched exactly by a candidate's
// (file, start, end). Containment does not count.
ScoreResult strict_localization(const std::vector<VerifiedCandidate>& candidates,
    const GroundTruth& gt);

// All three scores plus the solved decision, and the index with matched
// flags raised (monotone: never cleared) for every covered line.
std::pair<CaseMetrics, DiffIndex> compare_case(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& marked, const GroundTruth& gt, DiffIndex index, double tau);

struct FamilyStats {
    double detection = 0.0;
    double localization = 0.0;
    double strict = 0.0;
    long cases = 0;
};

struct BenchmarkReport {
    struct Row {
        std::string case_id;
        std::string project;
        CrashFamily family = CrashFamily::kBufferOverflow;
        CaseMetrics metrics;
        std::string outcome;
    };

    std::vector<Row> rows;
    std::map<CrashFamily, FamilyStats> per_family;
    FamilyStats overall;
    // this − baseline, present when aggregated against a baseline
    std::optional<std::map<CrashFamily, FamilyStats>> family_deltas;
    std::optional<FamilyStats> overall_delta;
};

struct CaseOutcomeRow {
    CaseEntry entry;
    CaseMetrics metrics;
    std::string outcome; // RunOutcome variant name, "" when unknown
};

// Arithmetic means per family and overall; deltas against the baseline when
// given.
BenchmarkReport aggregate_report(const std::vector<CaseOutcomeRow>& results,
    const BenchmarkReport* baseline = nullptr);

// Aligned text table with the family columns Buffer/Initialize/Memory/
// Parameter/Runtime (Det/Loc pairs), percentages to 0.1.
std::string render_report_table(const BenchmarkReport& report);

std::string report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(std::string_view text);

std::string metrics_to_json(const CaseMetrics& metrics);
CaseMetrics metrics_from_json(std::string_view text);

} // namespace t2l

#endif // T2L_METRICS_HPP_
