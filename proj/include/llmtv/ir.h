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

// Core data structures for the mini SSA IR: a restricted, LLVM-assembly-like
// language with integers of widths {1, 8, 16, 32, 64}, opaque pointers,
// undef/poison constants and a small instruction set.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace llmtv {

struct Type {
  enum class Kind : uint8_t { Int, Ptr };

  Kind kind = Kind::Int;
  unsigned width = 0; // bit width for Int; 0 for Ptr

  static Type i(unsigned w) { return {Kind::Int, w}; }
  static Type ptr() { return {Kind::Ptr, 0}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_ptr() const { return kind == Kind::Ptr; }
  std::string str() const;

  bool operator==(const Type &) const = default;
};

bool is_valid_int_width(unsigned width);

/// All-ones mask for an integer width in [1, 64].
constexpr uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

struct Operand {
  enum class Kind : uint8_t { Register, ConstInt, Undef, Poison, NullPtr };

  Kind kind = Kind::Register;
  std::string name; // Register only
  Type ty;          // ConstInt / Undef / Poison; ptr for NullPtr
  uint64_t bits = 0;

  static Operand reg(std::string name);
  static Operand constant(Type ty, uint64_t bits);
  static Operand undef(Type ty);
  static Operand poison(Type ty);
  static Operand null();

  bool is_reg() const { return kind == Kind::Register; }

  bool operator==(const Operand &) const = default;
};

enum class BinOpcode : uint8_t {
  Add, Sub, Mul, UDiv, SDiv, URem, SRem, Shl, LShr, AShr, And, Or, Xor
};

enum BinFlag : uint8_t {
  kNoFlags = 0,
  kNsw = 1 << 0,
  kNuw = 1 << 1,
  kExact = 1 << 2,
};

enum class ICmpPred : uint8_t { Eq, Ne, Ult, Ule, Ugt, Uge, Slt, Sle, Sgt, Sge };

enum class CastOpcode : uint8_t { ZExt, SExt, Trunc };

struct BinOp {
  BinOpcode op;
  uint8_t flags = kNoFlags;
  Type ty;
  Operand lhs, rhs;
  bool operator==(const BinOp &) const = default;
};

struct ICmp {
  ICmpPred pred;
  Type ty; // operand type; the result is always i1
  Operand lhs, rhs;
  bool operator==(const ICmp &) const = default;
};

struct Select {
  Type ty; // arm type
  Operand cond, tval, fval;
  bool operator==(const Select &) const = default;
};

struct Cast {
  CastOpcode op;
  Type from;
  Operand src;
  Type to;
  bool operator==(const Cast &) const = default;
};

struct Alloca {
  Type ty;
  uint32_t count = 1;
  bool operator==(const Alloca &) const = default;
};

struct Load {
  Type ty;
  Operand ptr;
  bool operator==(const Load &) const = default;
};

struct Store {
  Type ty;
  Operand val;
  Operand ptr;
  bool operator==(const Store &) const = default;
};

/// Unconditional when `cond` is empty; then only `then_label` is used.
struct Br {
  std::optional<Operand> cond;
  std::string then_label;
  std::string else_label;
  bool operator==(const Br &) const = default;
};

struct PhiIncoming {
  std::string block;
  Operand value;
  bool operator==(const PhiIncoming &) const = default;
};

struct Phi {
  Type ty;
  std::vector<PhiIncoming> incomings;
  bool operator==(const Phi &) const = default;
};

struct Ret {
  std::optional<Type> ty; // empty for `ret void`
  std::optional<Operand> val;
  bool operator==(const Ret &) const = default;
};

struct CallArg {
  Type ty;
  Operand value;
  bool operator==(const CallArg &) const = default;
};

/// Calls to functions outside the unit. Parsed and printed, never executed.
struct CallExternal {
  std::optional<Type> ret_ty;
  std::string callee;
  std::vector<CallArg> args;
  bool operator==(const CallExternal &) const = default;
};

using InstOp = std::variant<BinOp, ICmp, Select, Cast, Alloca, Load, Store, Br,
                            Phi, Ret, CallExternal>;

struct Instruction {
  std::string result; // empty when the instruction defines nothing
  InstOp op;

  bool is_terminator() const;
  bool is_phi() const { return std::holds_alternative<Phi>(op); }
  /// Type of the defined value, if any.
  std::optional<Type> result_type() const;
  /// Operands read by the instruction, in printing order.
  std::vector<const Operand *> operands() const;

  bool operator==(const Instruction &) const = default;
};

struct Block {
  std::string label;
  std::vector<Instruction> insts;
  bool operator==(const Block &) const = default;
};

struct Param {
  std::string name;
  Type ty;
  bool operator==(const Param &) const = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::optional<Type> ret_ty; // empty for void
  std::vector<Block> blocks;

  const Block *find_block(std::string_view label) const;
  bool has_external_calls() const;

  bool operator==(const Function &) const = default;
};

struct TransformationPair {
  std::string id;
  Function src;
  Function tgt;
};

// ---------------------------------------------------------------------------
// Diagnostics and errors

enum class DiagKind : uint8_t {
  EmptyFunction,
  DuplicateLabel,
  DuplicateParam,
  UnknownLabel,
  UndefinedRegister,
  RedefinedRegister,
  UseNotDominated,
  MissingTerminator,
  MultipleTerminators,
  PhiInEntryBlock,
  PhiNotAtBlockStart,
  PhiPredecessorMismatch,
  TypeMismatch,
  InvalidWidth,
  InvalidFlag,
  InvalidCast,
  InvalidAllocaCount,
  InvalidPredicate,
  ReturnTypeMismatch,
  MissingResult,
  UnexpectedResult,
};

std::string_view diag_kind_name(DiagKind kind);

struct Diagnostic {
  DiagKind kind;
  std::string block; // label of the offending block, if any
  int index = -1;    // instruction index inside `block`, -1 if n/a
  std::string detail;

  std::string str() const;
};

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int column, const std::string &message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string &message() const { return message_; }

private:
  int line_;
  int column_;
  std::string message_;
};

class SsaError : public std::runtime_error {
public:
  explicit SsaError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic> &diagnostics() const { return diags_; }

private:
  std::vector<Diagnostic> diags_;
};

class SignatureMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Front door

/// Parses and validates one function. Throws ParseError on syntax errors and
/// SsaError when the function violates a structural invariant.
Function parse_function(std::string_view text);

/// Parses without running validate_ssa.
Function parse_function_unchecked(std::string_view text);

/// Canonical text: one instruction per line, two-space indent, labeled blocks.
std::string print_function(const Function &f);

std::vector<Diagnostic> validate_ssa(const Function &f);

/// Throws SignatureMismatch when parameter lists or return types differ.
TransformationPair parse_pair(std::string_view src_text,
                              std::string_view tgt_text, std::string id);

void check_signatures(const Function &src, const Function &tgt);

/// Renames every register to a positional name (%0, %1, ...) in definition
/// order, so that alpha-equivalent functions compare equal.
Function canonicalize_registers(const Function &f);

std::string_view binop_name(BinOpcode op);
std::string_view icmp_pred_name(ICmpPred pred);
std::string_view cast_name(CastOpcode op);

} // namespace llmtv
