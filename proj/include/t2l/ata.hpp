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

#ifndef T2L_ATA_HPP_
#define T2L_ATA_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2l/corpus.hpp"

namespace t2l {

enum class AccessOp { kRead, kWrite };

// One stack frame of runtime evidence. `file` holds the path as printed by
// the tool, rewritten to a root-relative form when the frame resolves under
// the case's source root (in_project = true).
struct Frame {
    int index = 0; // 0 = crash-most
    std::optional<std::string> address;
    std::string function;
    std::optional<std::string> file;
    std::optional<long> line;
    std::optional<int> column;
    bool in_project = false;
};

// Parsed sanitizer (or debugger-derived) crash evidence.
struct CrashReport {
    SanitizerKind sanitizer = SanitizerKind::kNone;
    std::string crash_type;
    CrashFamily family = CrashFamily::kUninitializedAccess;
    std::optional<AccessOp> access_op;
    std::optional<long> access_size;
    std::optional<std::string> fault_address;
    std::vector<Frame> frames;
    std::vector<Frame> alloc_frames;
    std::vector<Frame> free_frames;
    std::string raw;
};

// Recognizes ASan error blocks (including SEGV and double-free shapes with
// READ/WRITE access lines and allocated/freed sub-traces), MSan
// use-of-uninitialized-value blocks, and single-location UBSan runtime
// errors. Throws NoCrashDetected when the text contains none of these.
CrashReport parse_sanitizer_report(std::string_view text,
    const std::filesystem::path& source_root = {});

// Extracts `#k ... at file:line` / `#k 0xADDR in func file:line` frames from a
// debugger or sanitizer transcript. Returns an empty list when no frame lines
// are present; interleaved program output is skipped.
std::vector<Frame> parse_backtrace(std::string_view text,
    const std::filesystem::path& source_root = {});

// True for sanitizer-runtime and interceptor functions that should never be
// treated as project evidence (__asan_*, __msan_*, __ubsan_*, __sanitizer_*,
// __interceptor_*).
bool is_sanitizer_runtime_frame(const Frame& frame);

} // namespace t2l

#endif // T2L_ATA_HPP_
