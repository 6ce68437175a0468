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

// Execution semantics for the mini IR under undef/poison/UB rules, finite
// enumeration of nondeterministic outcomes, and the refinement relations
// used to compare a target program against its source.

#include "llmtv/ir.h"

#include <memory>
#include <set>
#include <span>

namespace llmtv {

/// A runtime value. Integers are stored reduced modulo 2^width.
struct Value {
  enum class Kind : uint8_t { Poison, Undef, Int, Ptr, Null };

  Kind kind = Kind::Poison;
  Type ty;
  uint64_t bits = 0;    // Int
  uint32_t block = 0;   // Ptr
  uint32_t offset = 0;  // Ptr

  static Value poison(Type ty) { return {Kind::Poison, ty}; }
  static Value undef(Type ty) { return {Kind::Undef, ty}; }
  static Value integer(unsigned width, uint64_t v) {
    return {Kind::Int, Type::i(width), v & width_mask(width)};
  }
  static Value pointer(uint32_t block, uint32_t offset) {
    return {Kind::Ptr, Type::ptr(), 0, block, offset};
  }
  static Value null() { return {Kind::Null, Type::ptr()}; }

  bool is_poison() const { return kind == Kind::Poison; }
  bool is_undef() const { return kind == Kind::Undef; }
  bool is_int() const { return kind == Kind::Int; }

  /// "i8 -1", "i1 true", "poison i8", "undef i8", "null", "ptr 0:1".
  std::string str() const;

  bool operator==(const Value &) const = default;
};

/// Inverse of Value::str. Throws std::invalid_argument on malformed text.
Value parse_value(std::string_view text);

struct MemBlock {
  Type elem;
  std::vector<Value> cells;
  bool operator==(const MemBlock &) const = default;
};

/// Blocks [0, param_blocks) are the pointee buffers of pointer parameters,
/// in parameter order; later blocks come from executed allocas.
struct MemoryState {
  std::vector<MemBlock> blocks;
  uint32_t param_blocks = 0;
  bool operator==(const MemoryState &) const = default;
};

enum class UBKind : uint8_t {
  DivByZero,
  RemByZero,
  DivOverflow,
  NullDeref,
  OutOfBounds,
  BranchOnPoison,
};

std::string_view ub_kind_name(UBKind kind);

struct Location {
  std::string block;
  int index = -1;
  bool operator==(const Location &) const = default;
};

struct ExecOutcome {
  enum class Kind : uint8_t { Returned, TriggeredUB, OutOfFuel };

  Kind kind = Kind::OutOfFuel;
  std::optional<Value> ret; // Returned; empty for void
  MemoryState mem;          // Returned
  UBKind ub = UBKind::DivByZero;
  Location at;              // TriggeredUB

  static ExecOutcome returned(std::optional<Value> v, MemoryState mem);
  static ExecOutcome triggered_ub(UBKind kind, Location at);
  static ExecOutcome out_of_fuel();

  bool is_returned() const { return kind == Kind::Returned; }
  bool is_ub() const { return kind == Kind::TriggeredUB; }
  bool is_out_of_fuel() const { return kind == Kind::OutOfFuel; }

  std::string str() const;

  bool operator==(const ExecOutcome &) const = default;
};

/// Supplies a concrete bit pattern each time an undef value is used.
class UndefChooser {
public:
  virtual ~UndefChooser() = default;
  virtual uint64_t choose(unsigned width) = 0;
};

/// Replays a fixed sequence of choices (0 once exhausted) and records the
/// width and value of every request.
class ReplayChooser final : public UndefChooser {
public:
  ReplayChooser() = default;
  explicit ReplayChooser(std::vector<uint64_t> choices)
      : choices_(std::move(choices)) {}

  uint64_t choose(unsigned width) override;

  const std::vector<unsigned> &widths() const { return widths_; }
  const std::vector<uint64_t> &used() const { return used_; }

private:
  std::vector<uint64_t> choices_;
  std::vector<unsigned> widths_;
  std::vector<uint64_t> used_;
};

/// A validated function lowered to slot-indexed form for fast repeated
/// execution. Immutable and shareable across threads.
class Program {
public:
  /// Throws std::logic_error if `f` does not pass validate_ssa.
  explicit Program(const Function &f);
  ~Program();
  Program(Program &&) noexcept;
  Program &operator=(Program &&) noexcept;

  const Function &function() const;

  ExecOutcome run(std::span<const Value> args, const MemoryState &mem0,
                  uint64_t fuel, UndefChooser &undef) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot execution. Compiles `f` on every call; use Program for loops.
ExecOutcome execute(const Function &f, std::span<const Value> args,
                    const MemoryState &mem0, uint64_t fuel,
                    UndefChooser &undef);

struct OutcomeSet {
  std::vector<ExecOutcome> outcomes;
  /// choices[i] is an undef assignment that reproduces outcomes[i].
  std::vector<std::vector<uint64_t>> choices;
  bool exhaustive = true;

  bool contains_ub() const;
  bool contains_out_of_fuel() const;
};

struct UndefBudget {
  unsigned max_occurrences = 2;
  /// Total undef bits enumerated per execution path.
  unsigned max_bits = 16;
};

/// All outcomes over every undef assignment when the dynamic undef uses fit
/// the budget. Otherwise falls back to {all-zeros, all-ones, one-hot per
/// occurrence} and clears `exhaustive`.
OutcomeSet outcome_set(const Program &p, std::span<const Value> args,
                       const MemoryState &mem0, uint64_t fuel,
                       UndefBudget budget = {});

enum class UnsoundReason : uint8_t { ReturnValue, Memory, NewUB };

std::string_view reason_name(UnsoundReason r);
std::optional<UnsoundReason> reason_from_name(std::string_view name);

using ReasonSet = std::set<UnsoundReason>;

/// Does target value `tgt` refine source value `src`?
bool value_refines(const Value &tgt, const Value &src);

/// Cell-wise refinement over the parameter-visible blocks only.
bool memory_refines(const MemoryState &tgt, const MemoryState &src);

struct RefinementResult {
  bool holds = true;
  bool out_of_fuel = false; // either side ran out of fuel; holds is false
  bool approximate = false; // an outcome set was not exhaustive
  ReasonSet reasons;
  std::optional<size_t> witness;   // offending target outcome index
  std::optional<size_t> src_match; // closest source outcome index
};

RefinementResult outcome_refines(const OutcomeSet &tgt, const OutcomeSet &src);

} // namespace llmtv
