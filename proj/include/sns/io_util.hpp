// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

namespace sns {

/// Formats a double with 17 significant digits (%.17g), enough to
/// round-trip any finite value.
std::string format_double(double v);

/// Writes text to a file byte-for-byte (binary mode, LF endings preserved).
void write_text_file(const std::string& path, const std::string& contents);

/// Reads a whole file; throws ParseError if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace sns
