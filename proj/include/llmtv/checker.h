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

// Bounded-exhaustive refinement checker. Enumerates concrete inputs (and
// undef choices) for a source/target pair and decides Sound, Unsound with a
// counterexample, or Unknown when the finite model cannot decide.

#include "llmtv/semantics.h"

#include <chrono>

namespace llmtv {

struct CheckConfig {
  enum class FuelPolicy : uint8_t {
    GiveUp,    // first non-terminating input makes the verdict Unknown
    SkipInput, // discard non-terminating inputs and keep searching
  };

  unsigned max_enum_bits = 20;
  uint64_t fuel = 10'000;
  unsigned undef_budget = 2;
  unsigned undef_bits_budget = 16;
  unsigned mem_cells_per_ptr_param = 2;
  uint64_t timeout_ms = 30'000;
  FuelPolicy on_out_of_fuel = FuelPolicy::GiveUp;
  unsigned workers = 1;

  UndefBudget undef() const { return {undef_budget, undef_bits_budget}; }
};

/// Throws std::invalid_argument when a field is zero.
void validate_config(const CheckConfig &cfg);

enum class UnknownCause : uint8_t {
  UnboundedLoop,
  ExternalCall,
  EnumerationBudgetExceeded,
  Timeout,
  TruncatedUndefEnumeration,
};

std::string_view unknown_cause_name(UnknownCause cause);

struct Input {
  std::vector<Value> args;
  MemoryState mem;
  bool operator==(const Input &) const = default;
};

struct CounterExample {
  std::vector<Value> args;
  MemoryState mem0;
  ExecOutcome src_outcome;
  ExecOutcome tgt_outcome;
  // Undef assignments that reproduce the recorded outcomes.
  std::vector<uint64_t> src_choices;
  std::vector<uint64_t> tgt_choices;
};

struct Verdict {
  enum class Kind : uint8_t { Sound, Unsound, Unknown };

  Kind kind = Kind::Unknown;
  ReasonSet reasons;                 // Unsound
  std::optional<CounterExample> cex; // Unsound
  UnknownCause cause = UnknownCause::EnumerationBudgetExceeded;

  static Verdict sound() { return {Kind::Sound}; }
  static Verdict unknown(UnknownCause c) {
    Verdict v{Kind::Unknown};
    v.cause = c;
    return v;
  }
  static Verdict unsound(ReasonSet reasons, CounterExample cex) {
    return {Kind::Unsound, std::move(reasons), std::move(cex)};
  }

  bool is_sound() const { return kind == Kind::Sound; }
  bool is_unsound() const { return kind == Kind::Unsound; }
  bool is_unknown() const { return kind == Kind::Unknown; }
};

/// Shape of the inputs a function (pair) consumes: its parameters and, for
/// each pointer parameter, the element type and size of its buffer.
struct InputLayout {
  std::vector<Param> params;
  /// Element type per parameter; set only for pointer parameters.
  std::vector<std::optional<Type>> elem;
  unsigned cells_per_ptr = 2;

  /// Pointer argument for parameter `i` when bound to its own buffer.
  Value buffer_pointer(size_t i) const;
  /// One zero-filled block per pointer parameter.
  MemoryState blank_memory() const;
};

/// Infers buffer element types from the first load/store through each
/// pointer parameter (source first, then target); i8 otherwise.
InputLayout infer_layout(const Function &src, const Function *tgt,
                         unsigned cells_per_ptr);
InputLayout infer_layout(const TransformationPair &pair,
                         unsigned cells_per_ptr);

/// The finite input domain for one check, addressable by index.
/// Exhaustive when the total entropy fits the budget; otherwise a
/// boundary-value sub-lattice.
class InputSpace {
public:
  InputSpace(InputLayout layout, unsigned max_enum_bits);

  bool exhaustive() const { return exhaustive_; }
  unsigned entropy_bits() const { return entropy_; }
  uint64_t size() const { return size_; }
  Input at(uint64_t index) const;
  const InputLayout &layout() const { return layout_; }

private:
  struct Dim {
    enum class Kind : uint8_t { Arg, Cell } kind;
    size_t param = 0; // Arg: parameter index; Cell: pointer parameter index
    uint32_t block = 0;
    uint32_t cell = 0;
    std::vector<Value> values;
  };

  InputLayout layout_;
  std::vector<Dim> dims_;
  bool exhaustive_ = true;
  unsigned entropy_ = 0;
  uint64_t size_ = 1;
};

/// Boundary values for an integer width: 0, 1, all-ones, the sign bit and
/// the largest signed value, deduplicated in that order.
std::vector<uint64_t> boundary_values(unsigned width);

InputSpace enumerate_inputs(const Function &f, const CheckConfig &cfg);
InputSpace enumerate_inputs(const TransformationPair &pair,
                            const CheckConfig &cfg);

Verdict check_pair(const TransformationPair &pair, const CheckConfig &cfg);

ReasonSet classify_failure(const RefinementResult &result);

/// Re-executes both sides with the recorded undef choices and confirms the
/// recorded outcomes and a refinement failure on that input.
bool replay_counterexample(const TransformationPair &pair,
                           const CounterExample &cex, uint64_t fuel,
                           UndefBudget budget = {});

} // namespace llmtv
