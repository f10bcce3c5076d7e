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

#include "t2l/providers.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "t2l/error.hpp"

namespace t2l {

namespace {

    std::string env_or(const char* name, const std::string& fallback)
    {
        const char* v = std::getenv(name);
        return v && *v ? v : fallback;
    }

    // "#usage prompt=N completion=M" first line, when the recorder saved one.
    Completion decode_recording(const std::string& file_text, const Prompt& prompt)
    {
        Completion c;
        std::string text = file_text;
        Usage usage { 0, 0 };
        bool have_usage = false;
        if (text.rfind("#usage ", 0) == 0) {
            size_t eol = text.find('\n');
            std::string header = text.substr(7, eol == std::string::npos ? std::string::npos : eol - 7);
            long p = 0, q = 0;
            if (std::sscanf(header.c_str(), "prompt=%ld completion=%ld", &p, &q) == 2) {
                usage = { p, q };
                have_usage = true;
            }
            text = eol == std::string::npos ? std::string() : text.substr(eol + 1);
        }
        c.text = std::move(text);
        if (have_usage) {
            c.usage = usage;
        } else {
            // rough 4-chars-per-token estimate
            c.usage.prompt_tokens = static_cast<long>(render_prompt(prompt).size() / 4);
            c.usage.completion_tokens = static_cast<long>(c.text.size() / 4);
        }
        return c;
    }

} // namespace

HttpProvider::HttpProvider(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url))
    , api_key_(std::move(api_key))
{
    if (base_url_.empty())
        base_url_ = env_or("T2L_API_BASE", "");
    if (api_key_.empty())
        api_key_ = env_or("T2L_API_KEY", "");
    if (base_url_.empty())
        throw ProviderError("no API base url configured (set T2L_API_BASE)");
    while (!base_url_.empty() && base_url_.back() == '/')
        base_url_.pop_back();
}

Completion HttpProvider::complete(const Prompt& prompt, const SamplingParams& params)
{
    nlohmann::json body;
    body["model"] = params.model;
    body["messages"] = nlohmann::json::array({
        nlohmann::json { { "role", "system" }, { "content", prompt.system } },
        nlohmann::json { { "role", "user" }, { "content", render_prompt(prompt) } },
    });
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["seed"] = params.seed;
    if (params.reasoning_effort)
        body["reasoning_effort"] = *params.reasoning_effort;

    const std::string payload = body.dump();
    std::string last_error;

    for (int attempt = 1; attempt <= 3; ++attempt) {
        httplib::Client client(base_url_);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!api_key_.empty())
            headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post("/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == 401 || res->status == 403) {
            throw AuthError("provider rejected credentials (HTTP "
                + std::to_string(res->status) + ")");
        } else if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw ProviderError("provider returned HTTP " + std::to_string(res->status)
                + ": " + res->body);
        } else {
            nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
            if (reply.is_discarded())
                throw ProviderError("provider returned non-JSON body");
            Completion c;
            try {
                c.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw ProviderError(std::string("unexpected response shape: ") + e.what());
            }
            if (reply.contains("usage")) {
                c.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
                c.usage.completion_tokens = reply["usage"].value("completion_tokens", 0L);
            }
            return c;
        }
        if (attempt < 3)
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    }
    throw ProviderError("gave up after 3 attempts: " + last_error);
}

ReplayProvider::ReplayProvider(std::filesystem::path dir)
    : dir_(std::move(dir))
{
}

std::string ReplayProvider::recording_file_name(const std::string& digest)
{
    return digest + ".response.txt";
}

Completion ReplayProvider::complete(const Prompt& prompt, const SamplingParams& params)
{
    std::string digest = prompt_digest(prompt, params);
    std::filesystem::path path = dir_ / recording_file_name(digest);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ProviderError("no recording for digest " + digest + " under " + dir_.string()
            + " (prompt drift?)");
    std::stringstream buf;
    buf << in.rdbuf();
    return decode_recording(buf.str(), prompt);
}

RecordingProvider::RecordingProvider(LlmProvider& inner, std::filesystem::path dir)
    : inner_(inner)
    , dir_(std::move(dir))
{
    std::filesystem::create_directories(dir_);
}

Completion RecordingProvider::complete(const Prompt& prompt, const SamplingParams& params)
{
    Completion c = inner_.complete(prompt, params);
    std::string digest = prompt_digest(prompt, params);
    std::ofstream out(dir_ / ReplayProvider::recording_file_name(digest), std::ios::binary);
    out << "#usage prompt=" << c.usage.prompt_tokens << " completion="
        << c.usage.completion_tokens << "\n"
        << c.text;
    return c;
}

} // namespace t2l
