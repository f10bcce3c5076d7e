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

#include "t2l/runconfig.hpp"

#include <fstream>

#include "t2l/error.hpp"

namespace t2l {

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path.string());

    std::map<std::string, std::string> settings;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string trimmed = trim(line);
        if (trimmed.empty())
            continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        settings[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
    }
    return settings;
}

namespace {

    bool parse_bool(const std::string& value, const std::string& key)
    {
        if (value == "true" || value == "1" || value == "yes" || value == "on")
            return true;
        if (value == "false" || value == "0" || value == "no" || value == "off")
            return false;
        throw ValidationError("config: " + key + " is not a boolean: \"" + value + "\"");
    }

} // namespace

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& settings)
{
    for (const auto& [key, value] : settings) {
        try {
            if (key == "model")
                cfg.model = value;
            else if (key == "temperature")
                cfg.temperature = std::stod(value);
            else if (key == "seed")
                cfg.seed = std::stol(value);
            else if (key == "reasoning_effort")
                cfg.reasoning_effort = value;
            else if (key == "k_divergence")
                cfg.k_divergence = std::stoi(value);
            else if (key == "max_rounds")
                cfg.max_rounds = std::stoi(value);
            else if (key == "tau_solved")
                cfg.tau_solved = std::stod(value);
            else if (key == "budget_usd")
                cfg.budget_usd = std::stod(value);
            else if (key == "ata_enabled")
                cfg.ata_enabled = parse_bool(value, key);
            else if (key == "refinement_enabled")
                cfg.refinement_enabled = parse_bool(value, key);
            else if (key == "divergence_enabled")
                cfg.divergence_enabled = parse_bool(value, key);
            else if (key == "static_findings_enabled")
                cfg.static_findings_enabled = parse_bool(value, key);
            else if (key == "top_n_seeds")
                cfg.top_n_seeds = std::stoi(value);
            else if (key == "slice_context")
                cfg.slice_context = std::stol(value);
            else if (key == "refine_top_m")
                cfg.refine_top_m = std::stoi(value);
            else
                throw ValidationError("config: unknown key \"" + key + "\"");
        } catch (const std::invalid_argument&) {
            throw ValidationError("config: bad value for " + key + ": \"" + value + "\"");
        } catch (const std::out_of_range&) {
            throw ValidationError("config: value out of range for " + key);
        }
    }
    if (cfg.max_rounds < 1 || cfg.k_divergence < 1 || cfg.budget_usd <= 0.0)
        throw ValidationError("config: max_rounds >= 1, k_divergence >= 1 and budget_usd > 0 required");
}

} // namespace t2l
