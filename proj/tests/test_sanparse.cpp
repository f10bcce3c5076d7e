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

#include <fstream>
#include <sstream>

#include "support/fakes.hpp"
#include "t2l/ata.hpp"
#include "t2l/error.hpp"

using namespace t2l;

namespace {

std::string read_log(const std::string& name)
{
    std::ifstream in(t2l::testing::fixture_dir() / "sanlogs" / name, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::filesystem::path kDemoRoot = "/src/demo";

} // namespace

TEST_CASE("ASan heap-buffer-overflow report")
{
    CrashReport r = parse_sanitizer_report(read_log("asan_heap_buffer_overflow.log"), kDemoRoot);
    CHECK(r.sanitizer == SanitizerKind::kAsan);
    CHECK(r.crash_type == "heap-buffer-overflow");
    CHECK(r.family == CrashFamily::kBufferOverflow);
    REQUIRE(r.access_op.has_value());
    CHECK(*r.access_op == AccessOp::kRead);
    CHECK(*r.access_size == 4);
    CHECK(r.fault_address.has_value());

    REQUIRE(r.frames.size() >= 2);
    CHECK(r.frames[0].index == 0);
    CHECK(r.frames[0].function == "fetch");
    CHECK(*r.frames[0].file == "overflow.c");
    CHECK(*r.frames[0].line == 4);
    CHECK(r.frames[0].in_project);
    CHECK(r.frames[1].function == "main");
    CHECK(*r.frames[1].line == 9);

    // libc frames parse but stay outside the project
    bool saw_libc = false;
    for (const Frame& f : r.frames)
        if (f.function == "__libc_start_call_main") {
            saw_libc = true;
            CHECK_FALSE(f.in_project);
        }
    CHECK(saw_libc);

    REQUIRE(!r.alloc_frames.empty());
    CHECK(r.alloc_frames[0].function == "__interceptor_malloc");
    CHECK(r.raw.find("AddressSanitizer") != std::string::npos);
}

TEST_CASE("ASan heap-use-after-free report with alloc and free traces")
{
    CrashReport r = parse_sanitizer_report(read_log("asan_heap_use_after_free.log"), kDemoRoot);
    CHECK(r.crash_type == "heap-use-after-free");
    CHECK(r.family == CrashFamily::kMemoryLifecycle);
    CHECK(*r.access_op == AccessOp::kRead);
    CHECK(*r.access_size == 4);
    CHECK(r.frames[0].function == "reuse");
    CHECK(*r.frames[0].file == "uaf.c");
    CHECK(*r.frames[0].line == 4);

    REQUIRE(!r.free_frames.empty());
    REQUIRE(!r.alloc_frames.empty());
    // "freed by" trace points at the free() call in main
    bool free_in_main = false;
    for (const Frame& f : r.free_frames)
        if (f.function == "main" && f.line && *f.line == 10)
            free_in_main = true;
    CHECK(free_in_main);
}

TEST_CASE("ASan double-free report")
{
    CrashReport r = parse_sanitizer_report(read_log("asan_double_free.log"), kDemoRoot);
    CHECK(r.crash_type == "double-free");
    CHECK(r.family == CrashFamily::kMemoryLifecycle);
    REQUIRE(r.frames.size() >= 3);
    // frame 0 is the interceptor; the first project frame is release()
    CHECK(r.frames[0].function == "__interceptor_free");
    CHECK(is_sanitizer_runtime_frame(r.frames[0]));
    CHECK(r.frames[1].function == "release");
    CHECK(*r.frames[1].file == "dfree.c");
    CHECK(*r.frames[1].line == 4);
    CHECK(r.frames[1].in_project);
}

TEST_CASE("ASan SEGV report lands in the unknown-state family")
{
    CrashReport r = parse_sanitizer_report(read_log("asan_segv.log"), kDemoRoot);
    CHECK(r.crash_type == "SEGV on unknown address");
    CHECK(r.family == CrashFamily::kUninitializedAccess);
    CHECK(*r.access_op == AccessOp::kRead);
    CHECK(r.frames[0].function == "chase");
    CHECK(*r.frames[0].file == "segv.c");
    CHECK(*r.frames[0].line == 4);
    CHECK(*r.fault_address == "0x000000000000");
}

TEST_CASE("MSan use-of-uninitialized-value report")
{
    CrashReport r = parse_sanitizer_report(read_log("msan_uninit.log"), kDemoRoot);
    CHECK(r.sanitizer == SanitizerKind::kMsan);
    CHECK(r.crash_type == "use-of-uninitialized-value");
    CHECK(r.family == CrashFamily::kUninitializedAccess);
    CHECK(r.frames[0].function == "mat_scale");
    CHECK(*r.frames[0].file == "matrix.c");
    CHECK(*r.frames[0].line == 31);
    CHECK(*r.frames[0].column == 9);
    REQUIRE(!r.alloc_frames.empty());
    bool alloc_site = false;
    for (const Frame& f : r.alloc_frames)
        if (f.function == "mat_new" && f.line && *f.line == 12)
            alloc_site = true;
    CHECK(alloc_site);
}

TEST_CASE("UBSan bad-cast report synthesizes a single-frame crash type")
{
    CrashReport r = parse_sanitizer_report(read_log("ubsan_bad_cast.log"), kDemoRoot);
    CHECK(r.sanitizer == SanitizerKind::kUbsan);
    CHECK(r.crash_type == "Bad-cast");
    CHECK(r.family == CrashFamily::kTypeSafety);
    REQUIRE(r.frames.size() == 1);
    CHECK(*r.frames[0].file == "caster.cc");
    CHECK(*r.frames[0].line == 12);
    CHECK(*r.frames[0].column == 18);
    CHECK(r.frames[0].in_project);
}

TEST_CASE("clean run raises NoCrashDetected")
{
    CHECK_THROWS_AS(parse_sanitizer_report(read_log("clean_run.log"), kDemoRoot),
        NoCrashDetected);
    CHECK_THROWS_AS(parse_sanitizer_report("", kDemoRoot), NoCrashDetected);
}

TEST_CASE("frame indices are dense and ordered after parsing")
{
    CrashReport r = parse_sanitizer_report(read_log("asan_heap_buffer_overflow.log"), kDemoRoot);
    for (size_t k = 0; k < r.frames.size(); ++k)
        CHECK(r.frames[k].index == static_cast<int>(k));
    for (size_t k = 0; k < r.alloc_frames.size(); ++k)
        CHECK(r.alloc_frames[k].index == static_cast<int>(k));
}

TEST_CASE("parse_backtrace on a recorded debugger transcript")
{
    std::string transcript = read_log("gdb_backtrace.log");
    auto frames = parse_backtrace(transcript, kDemoRoot);
    REQUIRE(frames.size() >= 2);
    CHECK(frames[0].function == "chase");
    CHECK(*frames[0].file == "segv.c");
    CHECK(*frames[0].line == 4);
    CHECK(frames[0].in_project);
    CHECK(frames[1].function == "main");
    CHECK(*frames[1].line == 9);
}

TEST_CASE("parse_backtrace tolerates interleaved program output")
{
    auto frames = parse_backtrace(read_log("gdb_noisy.log"), kDemoRoot);
    REQUIRE(frames.size() == 4);
    CHECK(frames[0].function == "chase");
    CHECK(*frames[0].line == 4);
    CHECK(frames[1].function == "walk_list");
    CHECK(*frames[1].file == "list.c");
    CHECK(*frames[1].line == 17);
    CHECK(frames[2].function == "main");
    CHECK(*frames[2].line == 29);
    CHECK(frames[3].function == "__libc_start_call_main");
    CHECK_FALSE(frames[3].file.has_value()); // "from /lib/..." form has no source
}

TEST_CASE("parse_backtrace on empty text returns no frames")
{
    CHECK(parse_backtrace("", kDemoRoot).empty());
    CHECK(parse_backtrace("no frames here\njust text\n", kDemoRoot).empty());
}

TEST_CASE("sanitizer runtime frame filter")
{
    Frame f;
    for (const char* name : { "__asan_report_store4", "__msan_warning",
             "__ubsan_handle_dynamic_type_cache_miss", "__sanitizer::Die()",
             "__interceptor_memcpy" }) {
        f.function = name;
        CHECK(is_sanitizer_runtime_frame(f));
    }
    for (const char* name : { "main", "decode_records", "_start", "operator new" }) {
        f.function = name;
        CHECK_FALSE(is_sanitizer_runtime_frame(f));
    }
}

TEST_CASE("in_project path resolution")
{
    SUBCASE("absolute path under the root is relativized")
    {
        std::string log = "==1==ERROR: AddressSanitizer: heap-buffer-overflow on address 0x1 at pc 0x2 bp 0x3 sp 0x4\n"
                          "READ of size 1 at 0x1 thread T0\n"
                          "    #0 0x5 in f /src/demo/a/b.c:7\n"
                          "    #1 0x6 in g /other/tree/c.c:9\n";
        CrashReport r = parse_sanitizer_report(log, "/src/demo");
        CHECK(*r.frames[0].file == "a/b.c");
        CHECK(r.frames[0].in_project);
        CHECK(*r.frames[1].file == "/other/tree/c.c");
        CHECK_FALSE(r.frames[1].in_project);
    }
    SUBCASE("relative paths resolve by existence under the root")
    {
        auto root = t2l::testing::fixture_dir() / "toyproj";
        std::string log = "==1==ERROR: AddressSanitizer: heap-buffer-overflow on address 0x1 at pc 0x2 bp 0x3 sp 0x4\n"
                          "WRITE of size 4 at 0x1 thread T0\n"
                          "    #0 0x5 in decode_records src/decoder.c:22\n"
                          "    #1 0x6 in phantom src/absent.c:3\n";
        CrashReport r = parse_sanitizer_report(log, root);
        CHECK(r.frames[0].in_project);
        CHECK_FALSE(r.frames[1].in_project);
    }
    SUBCASE("empty root leaves every frame outside the project")
    {
        CrashReport r = parse_sanitizer_report(read_log("asan_segv.log"));
        for (const Frame& f : r.frames)
            CHECK_FALSE(f.in_project);
    }
}
