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

#include "t2l/llm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "t2l/error.hpp"

namespace t2l {

std::string to_string(PromptMode mode)
{
    switch (mode) {
    case PromptMode::kInitial:
        return "initial";
    case PromptMode::kRefine:
        return "refine";
    case PromptMode::kBaseline:
        return "baseline";
    }
    return "?";
}

std::string to_string(CandidateSource source)
{
    return source == CandidateSource::kAtaSeed ? "ata_seed" : "llm";
}

namespace {

    constexpr const char* kSystemText
        = "You are a vulnerability localization assistant for C/C++ repositories. "
          "You study crash evidence and source code, then point at the exact lines "
          "that cause the defect.";

    constexpr const char* kSchemaInstruction
        = "Respond with a JSON array only. Each element must be an object with the "
          "fields: \"file\" (repository-relative path), \"symbol\" (enclosing "
          "function name or null), \"start_line\" (integer), \"end_line\" (integer >= "
          "start_line), \"confidence\" (number between 0 and 1), \"rationale\" "
          "(short justification, quote the offending line in backticks when you "
          "can). Order the array from most to least likely.";

    std::string render_slice(const SourceSlice& slice)
    {
        std::ostringstream out;
        out << "FILE " << slice.file_path << "\n";
        for (const auto& [number, text] : slice.lines)
            out << number << " | " << text << "\n";
        return out.str();
    }

} // namespace

Prompt build_prompt(const CrashReport* report, const std::vector<StaticFinding>& findings,
    PromptMode mode, const std::vector<SourceSlice>& slices,
    const std::vector<std::string>& file_listing)
{
    if (mode == PromptMode::kInitial && report == nullptr)
        throw ContractViolation("initial prompt requires a crash report");
    if (mode == PromptMode::kRefine && slices.empty())
        throw ContractViolation("refine prompt requires at least one source slice");
    if (mode == PromptMode::kBaseline && report != nullptr)
        throw ContractViolation("baseline prompt must not carry runtime evidence");

    Prompt prompt;
    prompt.mode = mode;
    prompt.system = kSystemText;

    std::ostringstream user;
    switch (mode) {
    case PromptMode::kInitial:
        user << "A fuzzer crashed this project. Use the sanitizer evidence below to "
                "locate the vulnerable lines.\n\n";
        break;
    case PromptMode::kRefine:
        user << "Reread the numbered source slices below. Confirm, correct or extend "
                "your previous hypotheses; report any missed patterns (bounds checks, "
                "uninitialized state, lifetime bugs) with exact line numbers.\n\n";
        break;
    case PromptMode::kBaseline:
        user << "Inspect this project listing and guess where a memory-safety "
                "vulnerability is most likely to hide. No runtime evidence is "
                "available.\n\n";
        break;
    }
    user << kSchemaInstruction;
    prompt.user = user.str();

    if (report != nullptr)
        prompt.attachments.push_back({ "crash-log", report->raw });
    if (!findings.empty()) {
        std::ostringstream text;
        for (const StaticFinding& f : findings)
            text << f.file << ":" << f.line << ": " << f.message << "\n";
        prompt.attachments.push_back({ "static-findings", text.str() });
    }
    for (const SourceSlice& slice : slices)
        prompt.attachments.push_back({ "source-slice", render_slice(slice) });
    if (!file_listing.empty()) {
        std::ostringstream text;
        for (const std::string& f : file_listing)
            text << f << "\n";
        prompt.attachments.push_back({ "file-listing", text.str() });
    }
    return prompt;
}

std::string render_prompt(const Prompt& prompt)
{
    std::ostringstream out;
    out << prompt.user;
    for (const Attachment& a : prompt.attachments) {
        out << "\n\n--- " << a.label << " ---\n" << a.text;
        if (!a.text.empty() && a.text.back() != '\n')
            out << "\n";
    }
    return out.str();
}

std::string prompt_digest(const Prompt& prompt, const SamplingParams& params)
{
    std::ostringstream canon;
    canon << "model=" << params.model << "\n"
          << "temperature=" << params.temperature << "\n"
          << "top_p=" << params.top_p << "\n"
          << "seed=" << params.seed << "\n"
          << "effort=" << params.reasoning_effort.value_or("-") << "\n"
          << "mode=" << to_string(prompt.mode) << "\n"
          << "system:" << prompt.system << "\n"
          << "user:" << render_prompt(prompt);

    // FNV-1a, 64 bit
    const std::string s = canon.str();
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

namespace {

    // The first balanced top-level '[...]' span that decodes as an array of
    // objects wins; code fences and prose around it are ignored.
    std::optional<nlohmann::json> first_decodable_array(std::string_view raw)
    {
        for (size_t start = 0; start < raw.size(); ++start) {
            if (raw[start] != '[')
                continue;
            int depth = 0;
            bool in_string = false;
            bool escaped = false;
            for (size_t i = start; i < raw.size(); ++i) {
                char c = raw[i];
                if (in_string) {
                    if (escaped)
                        escaped = false;
                    else if (c == '\\')
                        escaped = true;
                    else if (c == '"')
                        in_string = false;
                    continue;
                }
                if (c == '"') {
                    in_string = true;
                } else if (c == '[' || c == '{') {
                    ++depth;
                } else if (c == ']' || c == '}') {
                    --depth;
                    if (depth == 0) {
                        auto candidate = raw.substr(start, i - start + 1);
                        nlohmann::json parsed = nlohmann::json::parse(candidate, nullptr, false);
                        if (!parsed.is_discarded() && parsed.is_array()) {
                            bool all_objects = true;
                            for (const auto& el : parsed)
                                if (!el.is_object())
                                    all_objects = false;
                            if (all_objects)
                                return parsed;
                        }
                        break; // try the next '['
                    }
                }
            }
        }
        return std::nullopt;
    }

    std::optional<Candidate> decode_record(const nlohmann::json& rec, std::vector<std::string>* notes)
    {
        auto note = [notes](const std::string& msg) {
            if (notes)
                notes->push_back(msg);
        };
        if (!rec.contains("file") || !rec["file"].is_string()) {
            note("dropped record without \"file\"");
            return std::nullopt;
        }
        if (!rec.contains("start_line") || !rec["start_line"].is_number_integer()
            || !rec.contains("end_line") || !rec["end_line"].is_number_integer()) {
            note("dropped record without integer line interval");
            return std::nullopt;
        }
        Candidate c;
        c.file = rec["file"].get<std::string>();
        c.start_line = rec["start_line"].get<long>();
        c.end_line = rec["end_line"].get<long>();
        if (c.start_line < 1 || c.end_line < c.start_line) {
            note("dropped record with ill-ordered interval in " + c.file);
            return std::nullopt;
        }
        if (rec.contains("symbol") && rec["symbol"].is_string())
            c.symbol = rec["symbol"].get<std::string>();
        if (rec.contains("confidence") && rec["confidence"].is_number())
            c.confidence = std::clamp(rec["confidence"].get<double>(), 0.0, 1.0);
        else
            c.confidence = 0.5;
        if (rec.contains("rationale") && rec["rationale"].is_string())
            c.rationale = rec["rationale"].get<std::string>();
        if (rec.contains("votes") && rec["votes"].is_number_integer())
            c.votes = std::max(1, rec["votes"].get<int>());
        c.source = CandidateSource::kLlm;
        return c;
    }

} // namespace

std::vector<Candidate> extract_candidates(std::string_view raw,
    const std::vector<Candidate>* merge_with, std::vector<std::string>* notes)
{
    std::optional<nlohmann::json> array = first_decodable_array(raw);
    if (!array)
        throw ExtractionFailed("no decodable candidate array in response");

    std::vector<Candidate> decoded;
    for (const auto& rec : *array)
        if (auto c = decode_record(rec, notes))
            decoded.push_back(std::move(*c));

    if (merge_with != nullptr)
        return merge_candidates(std::move(decoded), *merge_with);
    return decoded;
}

namespace {

    long overlap_lines(const Candidate& a, const Candidate& b)
    {
        long lo = std::max(a.start_line, b.start_line);
        long hi = std::min(a.end_line, b.end_line);
        return std::max(0L, hi - lo + 1);
    }

    bool should_group(const Candidate& a, const Candidate& b)
    {
        if (a.file != b.file)
            return false;
        long shorter = std::min(a.length(), b.length());
        return 2 * overlap_lines(a, b) >= shorter;
    }

    bool merged_rank_less(const Candidate& a, const Candidate& b)
    {
        if (a.votes != b.votes)
            return a.votes > b.votes;
        if (a.confidence != b.confidence)
            return a.confidence > b.confidence;
        if (a.file != b.file)
            return a.file < b.file;
        return a.start_line < b.start_line;
    }

    // Canonical order that makes grouping independent of input order.
    bool canonical_less(const Candidate& a, const Candidate& b)
    {
        if (a.file != b.file)
            return a.file < b.file;
        if (a.start_line != b.start_line)
            return a.start_line < b.start_line;
        if (a.end_line != b.end_line)
            return a.end_line < b.end_line;
        if (a.confidence != b.confidence)
            return a.confidence > b.confidence;
        return a.votes > b.votes;
    }

    std::vector<Candidate> group_once(std::vector<Candidate> pool, bool& changed)
    {
        std::sort(pool.begin(), pool.end(), canonical_less);
        size_t n = pool.size();
        std::vector<size_t> parent(n);
        std::iota(parent.begin(), parent.end(), size_t { 0 });
        std::function<size_t(size_t)> find = [&](size_t x) {
            while (parent[x] != x) {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            return x;
        };
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (should_group(pool[i], pool[j]))
                    parent[find(i)] = find(j);

        std::map<size_t, std::vector<size_t>> groups;
        for (size_t i = 0; i < n; ++i)
            groups[find(i)].push_back(i);

        std::vector<Candidate> merged;
        for (const auto& [rep, members] : groups) {
            const Candidate* best = &pool[members.front()];
            Candidate out = *best;
            long start = out.start_line, end = out.end_line;
            int votes = 0;
            for (size_t m : members) {
                const Candidate& c = pool[m];
                start = std::min(start, c.start_line);
                end = std::max(end, c.end_line);
                votes += c.votes;
                bool better = c.confidence > best->confidence
                    || (c.confidence == best->confidence && canonical_less(c, *best));
                if (better) {
                    best = &c;
                }
            }
            out = *best;
            out.start_line = start;
            out.end_line = end;
            out.votes = votes;
            merged.push_back(std::move(out));
            if (members.size() > 1)
                changed = true;
        }
        return merged;
    }

} // namespace

std::vector<Candidate> merge_candidates(std::vector<Candidate> a, std::vector<Candidate> b)
{
    std::vector<Candidate> pool = std::move(a);
    pool.insert(pool.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));

    // Iterate grouping to a fixed point so that merged spans that newly
    // overlap collapse too; this keeps the operation idempotent.
    for (int pass = 0; pass < 16; ++pass) {
        bool changed = false;
        pool = group_once(std::move(pool), changed);
        if (!changed)
            break;
    }

    std::sort(pool.begin(), pool.end(), merged_rank_less);
    return pool;
}

std::vector<Candidate> diverge(LlmProvider& provider, const Prompt& prompt, int k,
    const SamplingParams& params, const DivergeHooks& hooks,
    std::vector<std::string>* raw_responses)
{
    if (k < 1)
        throw ContractViolation("diverge requires k >= 1");

    std::vector<Candidate> merged;
    bool any_decoded = false;
    for (int i = 0; i < k; ++i) {
        if (hooks.before_sample && !hooks.before_sample())
            break;
        SamplingParams sample_params = params;
        sample_params.seed = params.seed + i;
        Completion completion = provider.complete(prompt, sample_params);
        if (hooks.after_sample)
            hooks.after_sample(completion);
        if (raw_responses)
            raw_responses->push_back(completion.text);
        try {
            std::vector<Candidate> decoded = extract_candidates(completion.text);
            merged = merge_candidates(std::move(merged), std::move(decoded));
            any_decoded = true;
        } catch (const ExtractionFailed&) {
            // tolerated per sample
        }
    }
    if (!any_decoded)
        throw AllSamplesFailed("no divergence sample produced a decodable candidate array");
    return merged;
}

bool BudgetLedger::charge(const std::string& model, const Usage& usage)
{
    std::lock_guard<std::mutex> lock(mu_);
    auto it = price_table_.find(model);
    if (it == price_table_.end())
        throw UnknownModelPrice("no price entry for model \"" + model + "\"");
    spent_usd_ += static_cast<double>(usage.prompt_tokens) / 1000.0 * it->second.usd_per_1k_prompt
        + static_cast<double>(usage.completion_tokens) / 1000.0 * it->second.usd_per_1k_completion;
    calls_ += 1;
    return spent_usd_ > limit_usd_;
}

bool BudgetLedger::exceeded() const
{
    std::lock_guard<std::mutex> lock(mu_);
    return spent_usd_ > limit_usd_;
}

double BudgetLedger::spent_usd() const
{
    std::lock_guard<std::mutex> lock(mu_);
    return spent_usd_;
}

long BudgetLedger::calls() const
{
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

std::string candidates_to_json(const std::vector<Candidate>& candidates)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Candidate& c : candidates) {
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
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

} // namespace t2l
