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

#include "t2l/ata.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "t2l/error.hpp"

namespace t2l {

namespace {

    std::vector<std::string> split_lines(std::string_view text)
    {
        std::vector<std::string> lines;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) {
                if (pos < text.size())
                    lines.emplace_back(text.substr(pos));
                break;
            }
            std::string line(text.substr(pos, nl - pos));
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            lines.push_back(std::move(line));
            pos = nl + 1;
        }
        return lines;
    }

    bool looks_like_location(const std::string& token, std::string& file, long& line, int& col)
    {
        static const std::regex loc_re(R"(^(.+?):(\d+)(?::(\d+))?$)");
        std::smatch m;
        if (!std::regex_match(token, m, loc_re))
            return false;
        file = m[1].str();
        line = std::stol(m[2].str());
        col = m[3].matched ? std::stoi(m[3].str()) : 0;
        return true;
    }

    // Sanitizer frame line:
    //   #k 0xADDR in FUNC FILE:LINE[:COL]
    //   #k 0xADDR in FUNC (module+0xOFF)
    //   #k 0xADDR  (module+0xOFF)
    std::optional<Frame> parse_sanitizer_frame(const std::string& line)
    {
        static const std::regex head_re(R"(^\s*#(\d+)\s+(0x[0-9a-fA-F]+)\s+(.*)$)");
        std::smatch m;
        if (!std::regex_match(line, m, head_re))
            return std::nullopt;

        Frame f;
        f.index = std::stoi(m[1].str());
        f.address = m[2].str();
        std::string rest = m[3].str();

        if (rest.rfind("in ", 0) == 0)
            rest = rest.substr(3);
        while (!rest.empty() && rest.back() == ' ')
            rest.pop_back();
        if (rest.empty())
            return f;

        if (rest.back() == ')') {
            // "(module+0x...)" or "FUNC (module+0x...)" or a BuildId suffix.
            size_t open = rest.rfind('(');
            if (open != std::string::npos) {
                std::string func = rest.substr(0, open);
                while (!func.empty() && func.back() == ' ')
                    func.pop_back();
                // ASan may append "(BuildId: ...)" after the location.
                if (rest.find("BuildId:", open) != std::string::npos && !func.empty()) {
                    rest = func;
                } else {
                    f.function = func;
                    return f;
                }
            }
        }

        size_t last_space = rest.find_last_of(' ');
        std::string tail = last_space == std::string::npos ? rest : rest.substr(last_space + 1);
        std::string file;
        long line_no = 0;
        int col = 0;
        if (looks_like_location(tail, file, line_no, col)) {
            f.file = file;
            f.line = line_no;
            if (col > 0)
                f.column = col;
            f.function = last_space == std::string::npos ? std::string()
                                                         : rest.substr(0, last_space);
            while (!f.function.empty() && f.function.back() == ' ')
                f.function.pop_back();
        } else {
            f.function = rest;
        }
        return f;
    }

    // Debugger frame line:
    //   #k  0xADDR in FUNC (args) at FILE:LINE
    //   #k  FUNC (args) at FILE:LINE
    //   #k  0xADDR in FUNC (args) from /lib/...
    std::optional<Frame> parse_debugger_frame(const std::string& line)
    {
        static const std::regex head_re(R"(^\s*#(\d+)\s+(.*)$)");
        std::smatch m;
        if (!std::regex_match(line, m, head_re))
            return std::nullopt;

        Frame f;
        f.index = std::stoi(m[1].str());
        std::string rest = m[2].str();

        static const std::regex addr_re(R"(^(0x[0-9a-fA-F]+)\s+in\s+(.*)$)");
        std::smatch am;
        if (std::regex_match(rest, am, addr_re)) {
            f.address = am[1].str();
            rest = am[2].str();
        }

        size_t at_pos = rest.rfind(" at ");
        if (at_pos != std::string::npos) {
            std::string loc = rest.substr(at_pos + 4);
            std::string file;
            long line_no = 0;
            int col = 0;
            if (looks_like_location(loc, file, line_no, col)) {
                f.file = file;
                f.line = line_no;
                if (col > 0)
                    f.column = col;
            }
            rest = rest.substr(0, at_pos);
        } else {
            size_t from_pos = rest.rfind(" from ");
            if (from_pos != std::string::npos)
                rest = rest.substr(0, from_pos);
        }

        // strip the argument list
        size_t args = rest.find(" (");
        if (args != std::string::npos)
            rest = rest.substr(0, args);
        while (!rest.empty() && rest.back() == ' ')
            rest.pop_back();
        f.function = rest;
        if (f.function.empty() && !f.file && !f.address)
            return std::nullopt;
        return f;
    }

    void resolve_in_project(Frame& frame, const std::filesystem::path& root)
    {
        frame.in_project = false;
        if (!frame.file || root.empty())
            return;
        std::string root_str = root.generic_string();
        while (root_str.size() > 1 && root_str.back() == '/')
            root_str.pop_back();
        const std::string& p = *frame.file;
        if (!p.empty() && p.front() == '/') {
            if (p.size() > root_str.size() + 1 && p.compare(0, root_str.size(), root_str) == 0
                && p[root_str.size()] == '/') {
                frame.file = p.substr(root_str.size() + 1);
                frame.in_project = true;
            }
            return;
        }
        if (p.rfind("../", 0) == 0 || p.rfind("./", 0) == 0)
            return;
        std::error_code ec;
        if (std::filesystem::exists(root / p, ec))
            frame.in_project = true;
    }

    void finalize_frames(std::vector<Frame>& frames, const std::filesystem::path& root)
    {
        std::stable_sort(frames.begin(), frames.end(),
            [](const Frame& a, const Frame& b) { return a.index < b.index; });
        for (size_t i = 0; i < frames.size(); ++i) {
            frames[i].index = static_cast<int>(i);
            resolve_in_project(frames[i], root);
        }
    }

    std::string synthesize_ubsan_crash_type(const std::string& description)
    {
        auto has = [&description](const char* needle) {
            return description.find(needle) != std::string::npos;
        };
        if (has("downcast of address") || has("does not point to an object of type")
            || has("member call on address") || has("invalid vptr"))
            return "Bad-cast";
        if (has("index") && has("out of bounds"))
            return "Index-out-of-bounds";
        if (has("null pointer"))
            return "Null-dereference";
        if (has("variable length array bound"))
            return "Non-positive-vla-bound-value";
        if (has("call to function") && has("through pointer to incorrect function type"))
            return "Incorrect-function-pointer-type";
        return "UNKNOWN";
    }

    // Banner tail after "AddressSanitizer: ", e.g.
    //   "heap-buffer-overflow on address 0x6020... at pc ..."
    //   "SEGV on unknown address 0x000000000000 (pc ...)"
    //   "attempting double-free on 0x5020... in thread T0:"
    void parse_asan_banner(const std::string& tail, CrashReport& report)
    {
        static const std::regex addr_re(R"(0x[0-9a-fA-F]+)");
        std::smatch m;
        if (std::regex_search(tail, m, addr_re))
            report.fault_address = m[0].str();

        if (tail.rfind("attempting double-free", 0) == 0) {
            report.crash_type = "double-free";
            return;
        }
        if (tail.rfind("SEGV on unknown address", 0) == 0) {
            report.crash_type = "SEGV on unknown address";
            return;
        }
        size_t cut = tail.find(" on address ");
        if (cut == std::string::npos)
            cut = tail.find(" on ");
        if (cut == std::string::npos)
            cut = tail.find(" at ");
        report.crash_type = cut == std::string::npos ? tail : tail.substr(0, cut);
        while (!report.crash_type.empty()
            && (report.crash_type.back() == ' ' || report.crash_type.back() == ':'))
            report.crash_type.pop_back();
    }

} // namespace

bool is_sanitizer_runtime_frame(const Frame& frame)
{
    static const char* prefixes[] = { "__asan", "__msan", "__ubsan", "__sanitizer",
        "__interceptor" };
    for (const char* prefix : prefixes)
        if (frame.function.rfind(prefix, 0) == 0)
            return true;
    return false;
}

CrashReport parse_sanitizer_report(std::string_view text, const std::filesystem::path& source_root)
{
    std::vector<std::string> lines = split_lines(text);

    static const std::regex asan_re(R"(^==\d+==\s*ERROR: AddressSanitizer:\s*(.+)$)");
    static const std::regex lsan_generic_re(R"(^==\d+==\s*ERROR: (\w+)Sanitizer:\s*(.+)$)");
    static const std::regex msan_re(R"(^==\d+==\s*WARNING: MemorySanitizer:\s*(.+)$)");
    static const std::regex ubsan_re(R"(^(\S+?):(\d+):(\d+):\s*runtime error:\s*(.+)$)");
    static const std::regex access_re(R"(^\s*(READ|WRITE) of size (\d+))");
    static const std::regex signal_access_re(R"(caused by a (READ|WRITE) memory access)");
    static const std::regex alloc_hdr_re(
        R"(^\s*((previously )?allocated by thread .* here:|Uninitialized value was created by a heap allocation.*)$)");
    static const std::regex free_hdr_re(R"(^\s*freed by thread .* here:$)");

    CrashReport report;
    report.raw = std::string(text);

    enum class Section { kMain, kAlloc, kFree, kDone };
    Section section = Section::kMain;
    bool found = false;

    for (size_t i = 0; i < lines.size() && !found; ++i) {
        const std::string& line = lines[i];
        std::smatch m;

        if (std::regex_match(line, m, asan_re)) {
            report.sanitizer = SanitizerKind::kAsan;
            parse_asan_banner(m[1].str(), report);
            found = true;
        } else if (std::regex_match(line, m, msan_re)) {
            report.sanitizer = SanitizerKind::kMsan;
            std::string tail = m[1].str();
            size_t cut = tail.find_first_of(" (");
            report.crash_type = cut == std::string::npos ? tail : tail.substr(0, cut);
            found = true;
        } else if (std::regex_match(line, m, ubsan_re)) {
            report.sanitizer = SanitizerKind::kUbsan;
            std::string description = m[4].str();
            report.crash_type = synthesize_ubsan_crash_type(description);
            Frame f;
            f.index = 0;
            f.file = m[1].str();
            f.line = std::stol(m[2].str());
            f.column = std::stoi(m[3].str());
            f.function = "";
            report.frames.push_back(std::move(f));
            found = true;
        } else if (std::regex_match(line, m, lsan_generic_re)) {
            // Other *Sanitizer banners (Leak, Thread, Memory-as-ERROR):
            // treated like the ASan shape.
            report.sanitizer = SanitizerKind::kAsan;
            parse_asan_banner(m[2].str(), report);
            found = true;
        }

        if (!found)
            continue;

        // consume the rest of the block
        for (size_t j = i + 1; j < lines.size(); ++j) {
            const std::string& body = lines[j];
            if (!report.access_op && std::regex_search(body, m, access_re)) {
                report.access_op = m[1].str() == "READ" ? AccessOp::kRead : AccessOp::kWrite;
                report.access_size = std::stol(m[2].str());
                continue;
            }
            if (!report.access_op && std::regex_search(body, m, signal_access_re)) {
                report.access_op = m[1].str() == "READ" ? AccessOp::kRead : AccessOp::kWrite;
                continue;
            }
            if (std::regex_match(body, m, alloc_hdr_re)) {
                section = Section::kAlloc;
                continue;
            }
            if (std::regex_match(body, m, free_hdr_re)) {
                section = Section::kFree;
                continue;
            }
            if (body.rfind("SUMMARY:", 0) == 0 || body.rfind("Shadow bytes", 0) == 0) {
                section = Section::kDone;
                continue;
            }
            if (section == Section::kDone)
                continue;
            if (auto frame = parse_sanitizer_frame(body)) {
                switch (section) {
                case Section::kMain:
                    report.frames.push_back(std::move(*frame));
                    break;
                case Section::kAlloc:
                    report.alloc_frames.push_back(std::move(*frame));
                    break;
                case Section::kFree:
                    report.free_frames.push_back(std::move(*frame));
                    break;
                case Section::kDone:
                    break;
                }
            }
        }
    }

    if (!found)
        throw NoCrashDetected("no sanitizer error block recognized");

    try {
        report.family = classify_crash(report.crash_type);
    } catch (const UnknownCrashType&) {
        // Sanitizer spoke a dialect outside the taxonomy; file it under the
        // unknown-state family but keep the literal type in raw.
        report.crash_type = "UNKNOWN";
        report.family = classify_crash(report.crash_type);
    }

    finalize_frames(report.frames, source_root);
    finalize_frames(report.alloc_frames, source_root);
    finalize_frames(report.free_frames, source_root);
    return report;
}

std::vector<Frame> parse_backtrace(std::string_view text, const std::filesystem::path& source_root)
{
    std::vector<Frame> frames;
    for (const std::string& line : split_lines(text)) {
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] != '#')
            continue;
        std::optional<Frame> frame;
        if (line.find(" at ") != std::string::npos || line.find(" from ") != std::string::npos)
            frame = parse_debugger_frame(line);
        else if (!(frame = parse_sanitizer_frame(line)))
            frame = parse_debugger_frame(line);
        if (frame)
            frames.push_back(std::move(*frame));
    }
    finalize_frames(frames, source_root);
    return frames;
}

} // namespace t2l
