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

#include "t2l/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "t2l/error.hpp"

namespace t2l {

ScoreResult detection_rate(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& marked)
{
    ScoreResult r;
    for (const Chunk& chunk : marked.chunks) {
        if (!chunk.diff)
            continue;
        ++r.counts.diff_chunks;
        bool hit = false;
        for (const VerifiedCandidate& c : candidates) {
            if (c.file != chunk.file_path)
                continue;
            if (c.start_line <= chunk.end_line && c.end_line >= chunk.start_line) {
                hit = true;
                break;
            }
        }
        if (hit)
            ++r.counts.hit_chunks;
    }
    if (r.counts.diff_chunks == 0)
        throw NoGroundTruth("chunk set carries no diff-marked chunks");
    r.score = static_cast<double>(r.counts.hit_chunks) / static_cast<double>(r.counts.diff_chunks);
    return r;
}

ScoreResult localization_rate(const std::vector<VerifiedCandidate>& candidates,
    const GroundTruth& gt)
{
    ScoreResult r;
    for (const auto& [file, truth] : gt.files) {
        for (long line : truth.gt_lines) {
            ++r.counts.gt_lines;
            for (const VerifiedCandidate& c : candidates) {
                if (c.file == file && line >= c.start_line && line <= c.end_line) {
                    ++r.counts.covered_lines;
                    break;
                }
            }
        }
    }
    if (r.counts.gt_lines == 0)
        throw NoGroundTruth("ground truth has no lines");
    r.score = static_cast<double>(r.counts.covered_lines) / static_cast<double>(r.counts.gt_lines);
    return r;
}

ScoreResult strict_localization(const std::vector<VerifiedCandidate>& candidates,
    const GroundTruth& gt)
{
    ScoreResult r;
    for (const auto& [file, truth] : gt.files) {
        for (const auto& [start, end] : truth.gt_intervals) {
            ++r.counts.gt_intervals;
            for (const VerifiedCandidate& c : candidates) {
                if (c.file == file && c.start_line == start && c.end_line == end) {
                    ++r.counts.exact_intervals;
                    break;
                }
            }
        }
    }
    if (r.counts.gt_intervals == 0)
        throw NoGroundTruth("ground truth has no intervals");
    r.score = static_cast<double>(r.counts.exact_intervals)
        / static_cast<double>(r.counts.gt_intervals);
    return r;
}

std::pair<CaseMetrics, DiffIndex> compare_case(const std::vector<VerifiedCandidate>& candidates,
    const ChunkSet& marked, const GroundTruth& gt, DiffIndex index, double tau)
{
    CaseMetrics m;
    ScoreResult det = detection_rate(candidates, marked);
    ScoreResult loc = localization_rate(candidates, gt);
    ScoreResult strict = strict_localization(candidates, gt);

    m.detection = det.score;
    m.localization = loc.score;
    m.strict = strict.score;
    m.counts.diff_chunks = det.counts.diff_chunks;
    m.counts.hit_chunks = det.counts.hit_chunks;
    m.counts.gt_lines = loc.counts.gt_lines;
    m.counts.covered_lines = loc.counts.covered_lines;
    m.counts.gt_intervals = strict.counts.gt_intervals;
    m.counts.exact_intervals = strict.counts.exact_intervals;
    m.solved = m.localization >= tau;

    // raise matched flags for covered lines; never clear one
    for (auto& [file, fi] : index.files) {
        for (auto& [line, mark] : fi.per_line) {
            if (mark.matched)
                continue;
            for (const VerifiedCandidate& c : candidates) {
                if (c.file == file && line >= c.start_line && line <= c.end_line) {
                    mark.matched = true;
                    break;
                }
            }
        }
    }
    return { m, std::move(index) };
}

namespace {

    void accumulate(FamilyStats& stats, const CaseMetrics& m)
    {
        stats.detection += m.detection;
        stats.localization += m.localization;
        stats.strict += m.strict;
        stats.cases += 1;
    }

    void finalize(FamilyStats& stats)
    {
        if (stats.cases == 0)
            return;
        stats.detection /= static_cast<double>(stats.cases);
        stats.localization /= static_cast<double>(stats.cases);
        stats.strict /= static_cast<double>(stats.cases);
    }

    FamilyStats delta_of(const FamilyStats& a, const FamilyStats& b)
    {
        FamilyStats d;
        d.detection = a.detection - b.detection;
        d.localization = a.localization - b.localization;
        d.strict = a.strict - b.strict;
        d.cases = a.cases;
        return d;
    }

    double round1(double pct) { return std::round(pct * 10.0) / 10.0; }

} // namespace

BenchmarkReport aggregate_report(const std::vector<CaseOutcomeRow>& results,
    const BenchmarkReport* baseline)
{
    BenchmarkReport report;
    for (const CaseOutcomeRow& row : results) {
        BenchmarkReport::Row r;
        r.case_id = row.entry.id;
        r.project = row.entry.project;
        r.family = classify_crash(row.entry.crash_type);
        r.metrics = row.metrics;
        r.outcome = row.outcome;
        report.rows.push_back(std::move(r));
    }

    for (const auto& row : report.rows) {
        accumulate(report.per_family[row.family], row.metrics);
        accumulate(report.overall, row.metrics);
    }
    for (auto& [family, stats] : report.per_family)
        finalize(stats);
    finalize(report.overall);

    if (baseline != nullptr) {
        std::map<CrashFamily, FamilyStats> deltas;
        for (const auto& [family, stats] : report.per_family) {
            FamilyStats base;
            auto it = baseline->per_family.find(family);
            if (it != baseline->per_family.end())
                base = it->second;
            deltas[family] = delta_of(stats, base);
        }
        report.family_deltas = std::move(deltas);
        report.overall_delta = delta_of(report.overall, baseline->overall);
    }
    return report;
}

std::string render_report_table(const BenchmarkReport& report)
{
    static const CrashFamily kOrder[] = { CrashFamily::kBufferOverflow,
        CrashFamily::kUninitializedAccess, CrashFamily::kMemoryLifecycle,
        CrashFamily::kTypeSafety, CrashFamily::kSystemRuntime };

    std::ostringstream out;
    out << std::left << std::setw(12) << "" << std::right;
    out << std::setw(7) << "Det" << std::setw(7) << "Loc";
    for (CrashFamily f : kOrder) {
        std::string name = family_column_name(f);
        out << std::setw(16) << (name + " Det") << std::setw(16) << (name + " Loc");
    }
    out << "\n";

    auto pct = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(1) << round1(v * 100.0);
        return s.str();
    };

    out << std::left << std::setw(12) << "mean" << std::right;
    out << std::setw(7) << pct(report.overall.detection) << std::setw(7)
        << pct(report.overall.localization);
    for (CrashFamily f : kOrder) {
        auto it = report.per_family.find(f);
        if (it == report.per_family.end()) {
            out << std::setw(16) << "-" << std::setw(16) << "-";
        } else {
            out << std::setw(16) << pct(it->second.detection) << std::setw(16)
                << pct(it->second.localization);
        }
    }
    out << "\n";

    if (report.family_deltas) {
        out << std::left << std::setw(12) << "delta" << std::right;
        out << std::setw(7) << pct(report.overall_delta->detection) << std::setw(7)
            << pct(report.overall_delta->localization);
        for (CrashFamily f : kOrder) {
            auto it = report.family_deltas->find(f);
            if (it == report.family_deltas->end()) {
                out << std::setw(16) << "-" << std::setw(16) << "-";
            } else {
                out << std::setw(16) << pct(it->second.detection) << std::setw(16)
                    << pct(it->second.localization);
            }
        }
        out << "\n";
    }

    out << "\n" << std::left << std::setw(12) << "case" << std::right << std::setw(12)
        << "family" << std::setw(7) << "Det" << std::setw(7) << "Loc" << std::setw(8)
        << "Strict" << std::setw(8) << "solved" << "  outcome\n";
    for (const auto& row : report.rows) {
        out << std::left << std::setw(12) << row.case_id << std::right << std::setw(12)
            << family_column_name(row.family) << std::setw(7) << pct(row.metrics.detection)
            << std::setw(7) << pct(row.metrics.localization) << std::setw(8)
            << pct(row.metrics.strict) << std::setw(8) << (row.metrics.solved ? "yes" : "no")
            << "  " << row.outcome << "\n";
    }
    return out.str();
}

namespace {

    nlohmann::ordered_json stats_to_json(const FamilyStats& s)
    {
        return { { "detection", s.detection }, { "localization", s.localization },
            { "strict", s.strict }, { "cases", s.cases } };
    }

    FamilyStats stats_from_json(const nlohmann::json& j)
    {
        FamilyStats s;
        s.detection = j.value("detection", 0.0);
        s.localization = j.value("localization", 0.0);
        s.strict = j.value("strict", 0.0);
        s.cases = j.value("cases", 0L);
        return s;
    }

    nlohmann::ordered_json counts_to_json(const MetricCounts& c)
    {
        return { { "diff_chunks", c.diff_chunks }, { "hit_chunks", c.hit_chunks },
            { "gt_lines", c.gt_lines }, { "covered_lines", c.covered_lines },
            { "gt_intervals", c.gt_intervals }, { "exact_intervals", c.exact_intervals } };
    }

    MetricCounts counts_from_json(const nlohmann::json& j)
    {
        MetricCounts c;
        c.diff_chunks = j.value("diff_chunks", 0L);
        c.hit_chunks = j.value("hit_chunks", 0L);
        c.gt_lines = j.value("gt_lines", 0L);
        c.covered_lines = j.value("covered_lines", 0L);
        c.gt_intervals = j.value("gt_intervals", 0L);
        c.exact_intervals = j.value("exact_intervals", 0L);
        return c;
    }

    nlohmann::ordered_json case_metrics_to_json(const CaseMetrics& m)
    {
        nlohmann::ordered_json j;
        j["detection"] = m.detection;
        j["localization"] = m.localization;
        j["strict"] = m.strict;
        j["solved"] = m.solved;
        j["counts"] = counts_to_json(m.counts);
        return j;
    }

    CaseMetrics case_metrics_from_json(const nlohmann::json& j)
    {
        CaseMetrics m;
        m.detection = j.value("detection", 0.0);
        m.localization = j.value("localization", 0.0);
        m.strict = j.value("strict", 0.0);
        m.solved = j.value("solved", false);
        if (j.contains("counts"))
            m.counts = counts_from_json(j["counts"]);
        return m;
    }

} // namespace

std::string report_to_json(const BenchmarkReport& report)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["case_id"] = row.case_id;
        r["project"] = row.project;
        r["family"] = to_string(row.family);
        r["metrics"] = case_metrics_to_json(row.metrics);
        r["outcome"] = row.outcome;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);

    nlohmann::ordered_json fam = nlohmann::ordered_json::object();
    for (const auto& [family, stats] : report.per_family)
        fam[to_string(family)] = stats_to_json(stats);
    j["per_family"] = std::move(fam);
    j["overall"] = stats_to_json(report.overall);

    if (report.family_deltas) {
        nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
        for (const auto& [family, stats] : *report.family_deltas)
            deltas[to_string(family)] = stats_to_json(stats);
        j["family_deltas"] = std::move(deltas);
        j["overall_delta"] = stats_to_json(*report.overall_delta);
    }
    return j.dump(2);
}

BenchmarkReport report_from_json(std::string_view text)
{
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError("benchmark report: invalid JSON");
    BenchmarkReport report;
    for (const auto& r : j.value("rows", nlohmann::json::array())) {
        BenchmarkReport::Row row;
        row.case_id = r.value("case_id", std::string());
        row.project = r.value("project", std::string());
        row.family = crash_family_from_string(r.value("family", std::string("BufferOverflow")));
        row.metrics = case_metrics_from_json(r.value("metrics", nlohmann::json::object()));
        row.outcome = r.value("outcome", std::string());
        report.rows.push_back(std::move(row));
    }
    if (j.contains("per_family"))
        for (const auto& [name, stats] : j["per_family"].items())
            report.per_family[crash_family_from_string(name)] = stats_from_json(stats);
    if (j.contains("overall"))
        report.overall = stats_from_json(j["overall"]);
    return report;
}

std::string metrics_to_json(const CaseMetrics& metrics)
{
    return case_metrics_to_json(metrics).dump(2);
}

CaseMetrics metrics_from_json(std::string_view text)
{
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError("case metrics: invalid JSON");
    return case_metrics_from_json(j);
}

} // namespace t2l
