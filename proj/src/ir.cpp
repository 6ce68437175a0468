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

#include "llmtv/ir.h"

#include <map>
#include <sstream>

namespace llmtv {

bool is_valid_int_width(unsigned width) {
  return width == 1 || width == 8 || width == 16 || width == 32 || width == 64;
}

std::string Type::str() const {
  if (is_ptr())
    return "ptr";
  return "i" + std::to_string(width);
}

Operand Operand::reg(std::string name) {
  Operand o;
  o.kind = Kind::Register;
  o.name = std::move(name);
  return o;
}

Operand Operand::constant(Type ty, uint64_t bits) {
  Operand o;
  o.kind = Kind::ConstInt;
  o.ty = ty;
  o.bits = bits & width_mask(ty.width);
  return o;
}

Operand Operand::undef(Type ty) {
  Operand o;
  o.kind = Kind::Undef;
  o.ty = ty;
  return o;
}

Operand Operand::poison(Type ty) {
  Operand o;
  o.kind = Kind::Poison;
  o.ty = ty;
  return o;
}

Operand Operand::null() {
  Operand o;
  o.kind = Kind::NullPtr;
  o.ty = Type::ptr();
  return o;
}

bool Instruction::is_terminator() const {
  return std::holds_alternative<Br>(op) || std::holds_alternative<Ret>(op);
}

std::optional<Type> Instruction::result_type() const {
  return std::visit(
      [](const auto &i) -> std::optional<Type> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, BinOp> || std::is_same_v<T, Select> ||
                      std::is_same_v<T, Load> || std::is_same_v<T, Phi>)
          return i.ty;
        else if constexpr (std::is_same_v<T, ICmp>)
          return Type::i(1);
        else if constexpr (std::is_same_v<T, Cast>)
          return i.to;
        else if constexpr (std::is_same_v<T, Alloca>)
          return Type::ptr();
        else if constexpr (std::is_same_v<T, CallExternal>)
          return i.ret_ty;
        else
          return std::nullopt;
      },
      op);
}

std::vector<const Operand *> Instruction::operands() const {
  std::vector<const Operand *> out;
  std::visit(
      [&](const auto &i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, BinOp> || std::is_same_v<T, ICmp>) {
          out = {&i.lhs, &i.rhs};
        } else if constexpr (std::is_same_v<T, Select>) {
          out = {&i.cond, &i.tval, &i.fval};
        } else if constexpr (std::is_same_v<T, Cast>) {
          out = {&i.src};
        } else if constexpr (std::is_same_v<T, Load>) {
          out = {&i.ptr};
        } else if constexpr (std::is_same_v<T, Store>) {
          out = {&i.val, &i.ptr};
        } else if constexpr (std::is_same_v<T, Br>) {
          if (i.cond)
            out = {&*i.cond};
        } else if constexpr (std::is_same_v<T, Phi>) {
          for (const auto &in : i.incomings)
            out.push_back(&in.value);
        } else if constexpr (std::is_same_v<T, Ret>) {
          if (i.val)
            out = {&*i.val};
        } else if constexpr (std::is_same_v<T, CallExternal>) {
          for (const auto &a : i.args)
            out.push_back(&a.value);
        }
      },
      op);
  return out;
}

const Block *Function::find_block(std::string_view label) const {
  for (const auto &b : blocks)
    if (b.label == label)
      return &b;
  return nullptr;
}

bool Function::has_external_calls() const {
  for (const auto &b : blocks)
    for (const auto &i : b.insts)
      if (std::holds_alternative<CallExternal>(i.op))
        return true;
  return false;
}

std::string_view binop_name(BinOpcode op) {
  switch (op) {
  case BinOpcode::Add: return "add";
  case BinOpcode::Sub: return "sub";
  case BinOpcode::Mul: return "mul";
  case BinOpcode::UDiv: return "udiv";
  case BinOpcode::SDiv: return "sdiv";
  case BinOpcode::URem: return "urem";
  case BinOpcode::SRem: return "srem";
  case BinOpcode::Shl: return "shl";
  case BinOpcode::LShr: return "lshr";
  case BinOpcode::AShr: return "ashr";
  case BinOpcode::And: return "and";
  case BinOpcode::Or: return "or";
  case BinOpcode::Xor: return "xor";
  }
  return "?";
}

std::string_view icmp_pred_name(ICmpPred pred) {
  switch (pred) {
  case ICmpPred::Eq: return "eq";
  case ICmpPred::Ne: return "ne";
  case ICmpPred::Ult: return "ult";
  case ICmpPred::Ule: return "ule";
  case ICmpPred::Ugt: return "ugt";
  case ICmpPred::Uge: return "uge";
  case ICmpPred::Slt: return "slt";
  case ICmpPred::Sle: return "sle";
  case ICmpPred::Sgt: return "sgt";
  case ICmpPred::Sge: return "sge";
  }
  return "?";
}

std::string_view cast_name(CastOpcode op) {
  switch (op) {
  case CastOpcode::ZExt: return "zext";
  case CastOpcode::SExt: return "sext";
  case CastOpcode::Trunc: return "trunc";
  }
  return "?";
}

std::string_view diag_kind_name(DiagKind kind) {
  switch (kind) {
  case DiagKind::EmptyFunction: return "EmptyFunction";
  case DiagKind::DuplicateLabel: return "DuplicateLabel";
  case DiagKind::DuplicateParam: return "DuplicateParam";
  case DiagKind::UnknownLabel: return "UnknownLabel";
  case DiagKind::UndefinedRegister: return "UndefinedRegister";
  case DiagKind::RedefinedRegister: return "RedefinedRegister";
  case DiagKind::UseNotDominated: return "UseNotDominated";
  case DiagKind::MissingTerminator: return "MissingTerminator";
  case DiagKind::MultipleTerminators: return "MultipleTerminators";
  case DiagKind::PhiInEntryBlock: return "PhiInEntryBlock";
  case DiagKind::PhiNotAtBlockStart: return "PhiNotAtBlockStart";
  case DiagKind::PhiPredecessorMismatch: return "PhiPredecessorMismatch";
  case DiagKind::TypeMismatch: return "TypeMismatch";
  case DiagKind::InvalidWidth: return "InvalidWidth";
  case DiagKind::InvalidFlag: return "InvalidFlag";
  case DiagKind::InvalidCast: return "InvalidCast";
  case DiagKind::InvalidAllocaCount: return "InvalidAllocaCount";
  case DiagKind::InvalidPredicate: return "InvalidPredicate";
  case DiagKind::ReturnTypeMismatch: return "ReturnTypeMismatch";
  case DiagKind::MissingResult: return "MissingResult";
  case DiagKind::UnexpectedResult: return "UnexpectedResult";
  }
  return "?";
}

std::string Diagnostic::str() const {
  std::string s(diag_kind_name(kind));
  if (!block.empty()) {
    s += " at " + block;
    if (index >= 0)
      s += "#" + std::to_string(index);
  }
  if (!detail.empty())
    s += ": " + detail;
  return s;
}

ParseError::ParseError(int line, int column, const std::string &message)
    : std::runtime_error("<input>:" + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + message),
      line_(line), column_(column), message_(message) {}

static std::string join_diags(const std::vector<Diagnostic> &diags) {
  std::string s = "invalid SSA";
  for (const auto &d : diags)
    s += "\n  " + d.str();
  return s;
}

SsaError::SsaError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diags(diags)), diags_(std::move(diags)) {}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string const_text(Type ty, uint64_t bits) {
  if (ty.width == 1)
    return bits ? "true" : "false";
  bits &= width_mask(ty.width);
  uint64_t sign = uint64_t{1} << (ty.width - 1);
  if (bits & sign) {
    // Magnitude of the negative value; well-defined for INT64_MIN too.
    uint64_t mag = (~bits + 1) & width_mask(ty.width);
    return "-" + std::to_string(mag);
  }
  return std::to_string(bits);
}

std::string operand_text(const Operand &o) {
  switch (o.kind) {
  case Operand::Kind::Register: return "%" + o.name;
  case Operand::Kind::ConstInt: return const_text(o.ty, o.bits);
  case Operand::Kind::Undef: return "undef";
  case Operand::Kind::Poison: return "poison";
  case Operand::Kind::NullPtr: return "null";
  }
  return "?";
}

std::string flags_text(uint8_t flags) {
  std::string s;
  if (flags & kNuw)
    s += " nuw";
  if (flags & kNsw)
    s += " nsw";
  if (flags & kExact)
    s += " exact";
  return s;
}

void print_inst(std::ostream &os, const Instruction &inst) {
  os << "  ";
  if (!inst.result.empty())
    os << "%" << inst.result << " = ";
  std::visit(
      [&](const auto &i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, BinOp>) {
          os << binop_name(i.op) << flags_text(i.flags) << " " << i.ty.str()
             << " " << operand_text(i.lhs) << ", " << operand_text(i.rhs);
        } else if constexpr (std::is_same_v<T, ICmp>) {
          os << "icmp " << icmp_pred_name(i.pred) << " " << i.ty.str() << " "
             << operand_text(i.lhs) << ", " << operand_text(i.rhs);
        } else if constexpr (std::is_same_v<T, Select>) {
          os << "select i1 " << operand_text(i.cond) << ", " << i.ty.str()
             << " " << operand_text(i.tval) << ", " << i.ty.str() << " "
             << operand_text(i.fval);
        } else if constexpr (std::is_same_v<T, Cast>) {
          os << cast_name(i.op) << " " << i.from.str() << " "
             << operand_text(i.src) << " to " << i.to.str();
        } else if constexpr (std::is_same_v<T, Alloca>) {
          os << "alloca " << i.ty.str();
          if (i.count != 1)
            os << ", i32 " << i.count;
        } else if constexpr (std::is_same_v<T, Load>) {
          os << "load " << i.ty.str() << ", ptr " << operand_text(i.ptr);
        } else if constexpr (std::is_same_v<T, Store>) {
          os << "store " << i.ty.str() << " " << operand_text(i.val)
             << ", ptr " << operand_text(i.ptr);
        } else if constexpr (std::is_same_v<T, Br>) {
          if (i.cond)
            os << "br i1 " << operand_text(*i.cond) << ", label %"
               << i.then_label << ", label %" << i.else_label;
          else
            os << "br label %" << i.then_label;
        } else if constexpr (std::is_same_v<T, Phi>) {
          os << "phi " << i.ty.str() << " ";
          for (size_t k = 0; k < i.incomings.size(); ++k) {
            if (k)
              os << ", ";
            os << "[ " << operand_text(i.incomings[k].value) << ", %"
               << i.incomings[k].block << " ]";
          }
        } else if constexpr (std::is_same_v<T, Ret>) {
          if (i.ty)
            os << "ret " << i.ty->str() << " " << operand_text(*i.val);
          else
            os << "ret void";
        } else if constexpr (std::is_same_v<T, CallExternal>) {
          os << "call " << (i.ret_ty ? i.ret_ty->str() : "void") << " @"
             << i.callee << "(";
          for (size_t k = 0; k < i.args.size(); ++k) {
            if (k)
              os << ", ";
            os << i.args[k].ty.str() << " " << operand_text(i.args[k].value);
          }
          os << ")";
        }
      },
      inst.op);
  os << "\n";
}

} // namespace

std::string print_function(const Function &f) {
  std::ostringstream os;
  os << "define " << (f.ret_ty ? f.ret_ty->str() : "void") << " @" << f.name
     << "(";
  for (size_t k = 0; k < f.params.size(); ++k) {
    if (k)
      os << ", ";
    os << f.params[k].ty.str() << " %" << f.params[k].name;
  }
  os << ") {\n";
  for (const auto &b : f.blocks) {
    os << b.label << ":\n";
    for (const auto &i : b.insts)
      print_inst(os, i);
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Pairs

void check_signatures(const Function &src, const Function &tgt) {
  if (src.params != tgt.params)
    throw SignatureMismatch("parameter lists differ between @" + src.name +
                            " and @" + tgt.name);
  if (src.ret_ty != tgt.ret_ty)
    throw SignatureMismatch("return types differ between @" + src.name +
                            " and @" + tgt.name);
}

TransformationPair parse_pair(std::string_view src_text,
                              std::string_view tgt_text, std::string id) {
  TransformationPair pair{std::move(id), parse_function(src_text),
                          parse_function(tgt_text)};
  check_signatures(pair.src, pair.tgt);
  return pair;
}

Function canonicalize_registers(const Function &f) {
  std::map<std::string, std::string> names;
  for (const auto &p : f.params)
    names.emplace(p.name, "a" + std::to_string(names.size()));
  size_t next = 0;
  for (const auto &b : f.blocks)
    for (const auto &i : b.insts)
      if (!i.result.empty())
        names.emplace(i.result, std::to_string(next++));

  Function out = f;
  auto rename = [&](Operand &o) {
    if (!o.is_reg())
      return;
    if (auto it = names.find(o.name); it != names.end())
      o.name = it->second;
  };
  for (auto &p : out.params)
    p.name = names[p.name];
  for (auto &b : out.blocks) {
    for (auto &inst : b.insts) {
      if (!inst.result.empty())
        inst.result = names[inst.result];
      std::visit(
          [&](auto &i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, BinOp> || std::is_same_v<T, ICmp>) {
              rename(i.lhs);
              rename(i.rhs);
            } else if constexpr (std::is_same_v<T, Select>) {
              rename(i.cond);
              rename(i.tval);
              rename(i.fval);
            } else if constexpr (std::is_same_v<T, Cast>) {
              rename(i.src);
            } else if constexpr (std::is_same_v<T, Load>) {
              rename(i.ptr);
            } else if constexpr (std::is_same_v<T, Store>) {
              rename(i.val);
              rename(i.ptr);
            } else if constexpr (std::is_same_v<T, Br>) {
              if (i.cond)
                rename(*i.cond);
            } else if constexpr (std::is_same_v<T, Phi>) {
              for (auto &in : i.incomings)
                rename(in.value);
            } else if constexpr (std::is_same_v<T, Ret>) {
              if (i.val)
                rename(*i.val);
            } else if constexpr (std::is_same_v<T, CallExternal>) {
              for (auto &a : i.args)
                rename(a.value);
            }
          },
          inst.op);
    }
  }
  return out;
}

} // namespace llmtv
