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

#ifndef T2L_RUNCONFIG_HPP_
#define T2L_RUNCONFIG_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "t2l/orchestrator.hpp"

namespace t2l {

// `key = value` lines, '#' comments. Keys mirror RunConfig field names.
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

// Applies key/value settings onto a RunConfig. Unknown keys throw
// ValidationError (typos must not silently vanish).
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& settings);

} // namespace t2l

#endif // T2L_RUNCONFIG_HPP_
