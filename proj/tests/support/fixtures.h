// Copyright 2026 The llmtv Authors. All rights reserved.
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

#include "llmtv/dataset.h"

#include <string>

namespace fixtures {

inline std::string corpus_path(const std::string &name) {
  return std::string(LLMTV_CORPUS_DIR) + "/" + name;
}

/// Loads `<id>.src.mir.ll` / `<id>.tgt.mir.ll` from the test corpus.
inline llmtv::TransformationPair load(const std::string &id) {
  return llmtv::parse_pair(llmtv::read_file(corpus_path(id + ".src.mir.ll")),
                           llmtv::read_file(corpus_path(id + ".tgt.mir.ll")),
                           id);
}

inline llmtv::TransformationPair pair(const std::string &src,
                                      const std::string &tgt,
                                      const std::string &id = "p") {
  return llmtv::parse_pair(src, tgt, id);
}

/// Wraps straight-line instructions into `define i8 @f(i8 %x)`.
inline std::string fn_i8(const std::string &body) {
  return "define i8 @f(i8 %x) {\nentry:\n" + body + "\n}\n";
}

} // namespace fixtures
