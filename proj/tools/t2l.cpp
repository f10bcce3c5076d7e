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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "t2l/backend.hpp"
#include "t2l/chunker.hpp"
#include "t2l/corpus.hpp"
#include "t2l/diffindex.hpp"
#include "t2l/error.hpp"
#include "t2l/metrics.hpp"
#include "t2l/orchestrator.hpp"
#include "t2l/providers.hpp"
#include "t2l/runconfig.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonRunFlags {
    std::string manifest;
    std::string config_file;
    std::string out_dir = "runs";
    std::string replay_exec;
    std::string replay_llm;
    std::string record_llm;
    std::string backend_kind = "local";
    std::string container;
    bool no_ata = false;
    bool no_refine = false;
    bool no_diverge = false;
    bool baseline = false;
};

void add_config_flags(CLI::App* cmd, t2l::RunConfig& cfg, CommonRunFlags& flags)
{
    cmd->add_option("--manifest", flags.manifest, "case manifest file")->required();
    cmd->add_option("--config", flags.config_file, "key = value config file");
    cmd->add_option("--out", flags.out_dir, "artifact directory (default: runs)");
    cmd->add_option("--model", cfg.model, "model name");
    cmd->add_option("--temperature", cfg.temperature, "sampling temperature");
    cmd->add_option("--seed", cfg.seed, "base RNG seed");
    cmd->add_option("--k", cfg.k_divergence, "divergence samples per round");
    cmd->add_option("--rounds", cfg.max_rounds, "maximum refinement rounds");
    cmd->add_option("--tau", cfg.tau_solved, "solved threshold on localization");
    cmd->add_option("--budget", cfg.budget_usd, "budget ceiling in USD");
    cmd->add_option("--reasoning-effort", [&cfg](const std::vector<std::string>& v) {
        cfg.reasoning_effort = v.at(0);
        return true;
    }, "reasoning effort knob (low/medium/high)");
    cmd->add_flag("--no-ata", flags.no_ata, "disable the trace analyzer (ablation)");
    cmd->add_flag("--no-refine", flags.no_refine, "single analysis round only");
    cmd->add_flag("--no-diverge", flags.no_diverge, "single sample per round");
    cmd->add_option("--replay-exec", flags.replay_exec, "directory of recorded sanitizer/gdb logs");
    cmd->add_option("--replay-llm", flags.replay_llm, "directory of recorded LLM responses");
    cmd->add_option("--record-llm", flags.record_llm, "record live LLM responses into directory");
    cmd->add_option("--backend", flags.backend_kind, "execution backend: local|container")
        ->check(CLI::IsMember({ "local", "container" }));
    cmd->add_option("--container", flags.container, "container name/id for --backend container");
}

// flags > config file > defaults; env is read by the provider/backend layers
void finalize_config(t2l::RunConfig& cfg, const CommonRunFlags& flags, const CLI::App* cmd)
{
    if (!flags.config_file.empty()) {
        t2l::RunConfig from_file; // defaults
        t2l::apply_config(from_file, t2l::load_config_file(flags.config_file));
        // command-line wins where given
        if (cmd->count("--model") == 0)
            cfg.model = from_file.model;
        if (cmd->count("--temperature") == 0)
            cfg.temperature = from_file.temperature;
        if (cmd->count("--seed") == 0)
            cfg.seed = from_file.seed;
        if (cmd->count("--k") == 0)
            cfg.k_divergence = from_file.k_divergence;
        if (cmd->count("--rounds") == 0)
            cfg.max_rounds = from_file.max_rounds;
        if (cmd->count("--tau") == 0)
            cfg.tau_solved = from_file.tau_solved;
        if (cmd->count("--budget") == 0)
            cfg.budget_usd = from_file.budget_usd;
        if (cmd->count("--reasoning-effort") == 0)
            cfg.reasoning_effort = from_file.reasoning_effort;
        if (cmd->count("--no-ata") == 0)
            cfg.ata_enabled = from_file.ata_enabled;
        if (cmd->count("--no-refine") == 0)
            cfg.refinement_enabled = from_file.refinement_enabled;
        if (cmd->count("--no-diverge") == 0)
            cfg.divergence_enabled = from_file.divergence_enabled;
    }
    if (flags.no_ata)
        cfg.ata_enabled = false;
    if (flags.no_refine)
        cfg.refinement_enabled = false;
    if (flags.no_diverge)
        cfg.divergence_enabled = false;
}

std::unique_ptr<t2l::LlmProvider> make_provider(const CommonRunFlags& flags)
{
    if (!flags.replay_llm.empty())
        return std::make_unique<t2l::ReplayProvider>(flags.replay_llm);
    return std::make_unique<t2l::HttpProvider>();
}

std::unique_ptr<t2l::ExecutionBackend> make_backend(const CommonRunFlags& flags,
    const t2l::CaseEntry& entry)
{
    if (!flags.replay_exec.empty())
        return std::make_unique<t2l::ReplayExecBackend>(flags.replay_exec, entry.source_root);
    if (flags.backend_kind == "container")
        return std::make_unique<t2l::ContainerBackend>(std::string(), flags.container);
    return std::make_unique<t2l::LocalProcessBackend>(entry.source_root);
}

void write_case_json(const fs::path& dir, const t2l::CaseEntry& entry)
{
    fs::create_directories(dir);
    nlohmann::ordered_json j;
    j["id"] = entry.id;
    j["project"] = entry.project;
    j["crash_type"] = entry.crash_type;
    j["family"] = t2l::to_string(t2l::classify_crash(entry.crash_type));
    std::ofstream out(dir / "case.json", std::ios::binary);
    out << j.dump(2);
}

t2l::RunResult run_one(const t2l::CaseEntry& entry, t2l::RunConfig cfg,
    const CommonRunFlags& flags)
{
    cfg.artifacts_dir = fs::path(flags.out_dir) / entry.id;
    write_case_json(cfg.artifacts_dir, entry);

    std::unique_ptr<t2l::LlmProvider> provider = make_provider(flags);
    std::unique_ptr<t2l::RecordingProvider> recorder;
    t2l::LlmProvider* active = provider.get();
    if (!flags.record_llm.empty()) {
        recorder = std::make_unique<t2l::RecordingProvider>(*provider, flags.record_llm);
        active = recorder.get();
    }

    if (flags.baseline)
        return t2l::baseline_run(entry, cfg, *active);
    std::unique_ptr<t2l::ExecutionBackend> backend = make_backend(flags, entry);
    return t2l::run_case(entry, cfg, *backend, *active);
}

std::string read_file_or_die(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw t2l::IoError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_run(const t2l::RunConfig& base_cfg, const CommonRunFlags& flags, const std::string& case_id)
{
    std::vector<t2l::CaseEntry> cases = t2l::load_manifest(flags.manifest);
    const t2l::CaseEntry* entry = nullptr;
    for (const auto& c : cases)
        if (c.id == case_id)
            entry = &c;
    if (entry == nullptr) {
        std::cerr << "t2l run: no case with id \"" << case_id << "\" in " << flags.manifest
                  << "\n";
        return 2;
    }

    t2l::RunResult result = run_one(*entry, base_cfg, flags);
    std::cout << "case " << entry->id << ": outcome=" << t2l::to_string(result.outcome.variant)
              << " detection=" << result.metrics.detection
              << " localization=" << result.metrics.localization
              << " strict=" << result.metrics.strict
              << " solved=" << (result.metrics.solved ? "yes" : "no") << "\n";
    for (const auto& s : result.summaries)
        std::cout << "  round " << s.round << ": new=" << s.new_candidates
                  << " verified=" << s.verified_count << " best_conf=" << s.best_confidence
                  << " spent=" << s.budget_spent << " -> " << s.decision << "\n";
    if (!result.outcome.detail.empty())
        std::cout << "  detail: " << result.outcome.detail << "\n";
    return result.outcome.variant == t2l::RunOutcomeKind::kSuccess ? 0 : 1;
}

int cmd_bench(const t2l::RunConfig& base_cfg, const CommonRunFlags& flags, int jobs,
    const std::string& baseline_path)
{
    std::vector<t2l::CaseEntry> cases = t2l::load_manifest(flags.manifest);
    std::vector<t2l::CaseOutcomeRow> rows(cases.size());

    std::mutex io_mu;
    std::atomic<size_t> next { 0 };
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= cases.size())
                return;
            t2l::RunResult result = run_one(cases[i], base_cfg, flags);
            rows[i] = { cases[i], result.metrics, t2l::to_string(result.outcome.variant) };
            std::lock_guard<std::mutex> lock(io_mu);
            std::cout << "case " << cases[i].id << ": "
                      << t2l::to_string(result.outcome.variant)
                      << " det=" << result.metrics.detection
                      << " loc=" << result.metrics.localization << "\n";
        }
    };

    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    t2l::BenchmarkReport baseline;
    bool have_baseline = false;
    if (!baseline_path.empty()) {
        baseline = t2l::report_from_json(read_file_or_die(baseline_path));
        have_baseline = true;
    }
    t2l::BenchmarkReport report = t2l::aggregate_report(rows,
        have_baseline ? &baseline : nullptr);

    fs::create_directories(flags.out_dir);
    std::ofstream out(fs::path(flags.out_dir) / "report.json", std::ios::binary);
    out << t2l::report_to_json(report);
    std::cout << "\n" << t2l::render_report_table(report);
    return 0;
}

int cmd_report(const std::string& runs_dir, const std::string& baseline_path,
    const std::string& out_path)
{
    std::vector<t2l::CaseOutcomeRow> rows;
    std::vector<fs::path> case_dirs;
    for (const auto& entry : fs::directory_iterator(runs_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "case.json"))
            case_dirs.push_back(entry.path());
    std::sort(case_dirs.begin(), case_dirs.end());

    for (const fs::path& dir : case_dirs) {
        nlohmann::json case_info
            = nlohmann::json::parse(read_file_or_die((dir / "case.json").string()));
        t2l::CaseOutcomeRow row;
        row.entry.id = case_info.value("id", std::string());
        row.entry.project = case_info.value("project", std::string());
        row.entry.crash_type = case_info.value("crash_type", std::string());
        if (fs::exists(dir / "metrics.json"))
            row.metrics = t2l::metrics_from_json(read_file_or_die((dir / "metrics.json").string()));
        if (fs::exists(dir / "outcome.json")) {
            nlohmann::json outcome
                = nlohmann::json::parse(read_file_or_die((dir / "outcome.json").string()));
            row.outcome = outcome.value("variant", std::string());
        }
        rows.push_back(std::move(row));
    }

    t2l::BenchmarkReport baseline;
    bool have_baseline = false;
    if (!baseline_path.empty()) {
        baseline = t2l::report_from_json(read_file_or_die(baseline_path));
        have_baseline = true;
    }
    t2l::BenchmarkReport report = t2l::aggregate_report(rows,
        have_baseline ? &baseline : nullptr);
    std::string json = t2l::report_to_json(report);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << json;
    }
    std::cout << t2l::render_report_table(report);
    return 0;
}

int cmd_profile(const std::string& taxonomy_path, bool as_json)
{
    nlohmann::json doc = nlohmann::json::parse(read_file_or_die(taxonomy_path), nullptr, false);
    if (doc.is_discarded())
        throw t2l::ParseError("taxonomy file is not valid JSON");
    std::vector<std::pair<std::string, long>> counts;
    if (doc.is_object()) {
        for (const auto& [subtype, count] : doc.items())
            counts.emplace_back(subtype, count.get<long>());
    } else if (doc.is_array()) {
        for (const auto& row : doc)
            counts.emplace_back(row.at(0).get<std::string>(), row.at(1).get<long>());
    } else {
        throw t2l::ParseError("taxonomy file: expected {subtype: count} or [[subtype, count]]");
    }

    auto dist = t2l::family_distribution(counts);
    if (as_json) {
        std::cout << t2l::distribution_to_json(dist) << "\n";
        return 0;
    }
    long total = 0;
    for (const auto& [family, share] : dist)
        total += share.count;
    std::printf("%-22s %8s %8s\n", "family", "count", "percent");
    for (const auto& [family, share] : dist)
        std::printf("%-22s %8ld %7.1f%%\n", t2l::to_string(family).c_str(), share.count,
            share.percent);
    std::printf("%-22s %8ld %7.1f%%\n", "total", total, 100.0);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "t2l: trace-to-line vulnerability localization toolkit" };
    app.require_subcommand(1);

    t2l::RunConfig run_cfg, bench_cfg;
    CommonRunFlags run_flags, bench_flags;
    std::string case_id;
    int jobs = 1;
    std::string bench_baseline;

    CLI::App* run = app.add_subcommand("run", "run one benchmark case end to end");
    run->add_option("--case", case_id, "case id from the manifest")->required();
    add_config_flags(run, run_cfg, run_flags);
    run->add_flag("--baseline", run_flags.baseline, "one evidence-free guess, no pipeline");

    CLI::App* bench = app.add_subcommand("bench", "run every manifest case and aggregate");
    add_config_flags(bench, bench_cfg, bench_flags);
    bench->add_option("--jobs", jobs, "parallel cases (default 1 for stable logs)");
    bench->add_option("--baseline", bench_baseline, "baseline report.json for deltas");

    std::string runs_dir, report_baseline, report_out;
    CLI::App* report = app.add_subcommand("report", "re-aggregate a finished runs directory");
    report->add_option("--runs", runs_dir, "runs directory from bench")->required();
    report->add_option("--baseline", report_baseline, "baseline report.json for deltas");
    report->add_option("--out", report_out, "write report JSON here");

    std::string chunk_root, chunk_out;
    CLI::App* chunk = app.add_subcommand("chunk", "chunk a source tree and emit JSON");
    chunk->add_option("--root", chunk_root, "source root")->required();
    chunk->add_option("--out", chunk_out, "output file (default stdout)");

    std::string patch_path, diffindex_out;
    CLI::App* diffindex = app.add_subcommand("diff-index", "index a unified diff and emit JSON");
    diffindex->add_option("--patch", patch_path, "unified diff file")->required();
    diffindex->add_option("--out", diffindex_out, "output file (default stdout)");

    std::string taxonomy_path;
    bool profile_json = false;
    CLI::App* profile = app.add_subcommand("profile", "crash-family distribution from subtype counts");
    profile->add_option("--taxonomy", taxonomy_path, "JSON subtype counts")->required();
    profile->add_flag("--json", profile_json, "emit the JSON report instead of a table");

    t2l::RunConfig record_cfg;
    CommonRunFlags record_flags;
    std::string record_case_id;
    CLI::App* replay_record = app.add_subcommand("replay-record",
        "run a case against the live provider, recording responses for replay");
    replay_record->add_option("--case", record_case_id, "case id from the manifest")->required();
    add_config_flags(replay_record, record_cfg, record_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            finalize_config(run_cfg, run_flags, run);
            return cmd_run(run_cfg, run_flags, case_id);
        }
        if (bench->parsed()) {
            finalize_config(bench_cfg, bench_flags, bench);
            return cmd_bench(bench_cfg, bench_flags, jobs, bench_baseline);
        }
        if (report->parsed())
            return cmd_report(runs_dir, report_baseline, report_out);
        if (chunk->parsed()) {
            std::string json = t2l::chunkset_to_json(t2l::chunk_source_tree(chunk_root));
            if (chunk_out.empty()) {
                std::cout << json << "\n";
            } else {
                std::ofstream out(chunk_out, std::ios::binary);
                out << json;
            }
            return 0;
        }
        if (diffindex->parsed()) {
            auto patch = t2l::parse_unified_diff(read_file_or_die(patch_path));
            std::string json = t2l::diff_index_to_json(t2l::build_diff_index(patch));
            if (diffindex_out.empty()) {
                std::cout << json << "\n";
            } else {
                std::ofstream out(diffindex_out, std::ios::binary);
                out << json;
            }
            return 0;
        }
        if (profile->parsed())
            return cmd_profile(taxonomy_path, profile_json);
        if (replay_record->parsed()) {
            finalize_config(record_cfg, record_flags, replay_record);
            if (record_flags.record_llm.empty()) {
                std::cerr << "t2l replay-record: --record-llm <dir> is required\n";
                return 2;
            }
            return cmd_run(record_cfg, record_flags, record_case_id);
        }
    } catch (const t2l::ValidationError& e) {
        std::cerr << "t2l: " << e.what() << "\n";
        return 2;
    } catch (const t2l::Error& e) {
        std::cerr << "t2l: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
