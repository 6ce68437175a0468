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
#include <set>

namespace llmtv {
namespace {

struct DefSite {
  Type ty;
  int block = -1; // -1 for parameters
  int index = -1;
};

class Validator {
public:
  explicit Validator(const Function &f) : f_(f) {}

  std::vector<Diagnostic> run() {
    if (f_.blocks.empty()) {
      add(DiagKind::EmptyFunction, "", -1, "function has no blocks");
      return diags_;
    }
    index_blocks();
    collect_defs();
    for (size_t b = 0; b < f_.blocks.size(); ++b)
      check_block(static_cast<int>(b));
    compute_dominators();
    check_dominance();
    return diags_;
  }

private:
  void add(DiagKind kind, const std::string &block, int index,
           std::string detail) {
    diags_.push_back({kind, block, index, std::move(detail)});
  }

  void index_blocks() {
    for (size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto &label = f_.blocks[b].label;
      if (!label_index_.emplace(label, static_cast<int>(b)).second)
        add(DiagKind::DuplicateLabel, label, -1, "label defined twice");
    }
    preds_.assign(f_.blocks.size(), {});
    succs_.assign(f_.blocks.size(), {});
    for (size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto &blk = f_.blocks[b];
      if (blk.insts.empty())
        continue;
      const auto *br = std::get_if<Br>(&blk.insts.back().op);
      if (!br)
        continue;
      auto link = [&](const std::string &target) {
        auto it = label_index_.find(target);
        if (it == label_index_.end()) {
          add(DiagKind::UnknownLabel, blk.label,
              static_cast<int>(blk.insts.size()) - 1,
              "branch to unknown label %" + target);
          return;
        }
        succs_[b].insert(it->second);
        preds_[it->second].insert(static_cast<int>(b));
      };
      link(br->then_label);
      if (br->cond)
        link(br->else_label);
    }
  }

  void collect_defs() {
    for (const auto &p : f_.params) {
      if (!is_valid_type(p.ty))
        add(DiagKind::InvalidWidth, "", -1, "parameter %" + p.name);
      if (!defs_.emplace(p.name, DefSite{p.ty, -1, -1}).second)
        add(DiagKind::DuplicateParam, "", -1, "parameter %" + p.name);
    }
    for (size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto &blk = f_.blocks[b];
      for (size_t i = 0; i < blk.insts.size(); ++i) {
        const auto &inst = blk.insts[i];
        auto ty = inst.result_type();
        if (inst.result.empty()) {
          if (ty && !std::holds_alternative<CallExternal>(inst.op))
            add(DiagKind::MissingResult, blk.label, static_cast<int>(i),
                "value-producing instruction needs a name");
          continue;
        }
        if (!ty) {
          add(DiagKind::UnexpectedResult, blk.label, static_cast<int>(i),
              "%" + inst.result + " names an instruction without a value");
          continue;
        }
        DefSite site{*ty, static_cast<int>(b), static_cast<int>(i)};
        if (!defs_.emplace(inst.result, site).second)
          add(DiagKind::RedefinedRegister, blk.label, static_cast<int>(i),
              "%" + inst.result + " defined more than once");
      }
    }
  }

  static bool is_valid_type(Type t) {
    return t.is_ptr() || is_valid_int_width(t.width);
  }

  // Returns the operand's type, or nullopt when it cannot be determined
  // (already diagnosed as an undefined register).
  std::optional<Type> operand_type(const Operand &o, const std::string &block,
                                   int index) {
    switch (o.kind) {
    case Operand::Kind::Register: {
      auto it = defs_.find(o.name);
      if (it == defs_.end()) {
        add(DiagKind::UndefinedRegister, block, index, "%" + o.name);
        return std::nullopt;
      }
      return it->second.ty;
    }
    case Operand::Kind::NullPtr:
      return Type::ptr();
    default:
      return o.ty;
    }
  }

  void expect_type(const Operand &o, Type want, const std::string &block,
                   int index) {
    auto got = operand_type(o, block, index);
    if (got && *got != want)
      add(DiagKind::TypeMismatch, block, index,
          "expected " + want.str() + ", got " + got->str());
  }

  void check_block(int b) {
    const auto &blk = f_.blocks[b];
    const auto &label = blk.label;
    if (blk.insts.empty() || !blk.insts.back().is_terminator())
      add(DiagKind::MissingTerminator, label, -1,
          "block does not end with br or ret");
    bool seen_non_phi = false;
    for (size_t k = 0; k < blk.insts.size(); ++k) {
      const auto &inst = blk.insts[k];
      int i = static_cast<int>(k);
      if (inst.is_terminator() && k + 1 != blk.insts.size())
        add(DiagKind::MultipleTerminators, label, i,
            "terminator before end of block");
      if (inst.is_phi()) {
        if (b == 0)
          add(DiagKind::PhiInEntryBlock, label, i, "");
        else if (seen_non_phi)
          add(DiagKind::PhiNotAtBlockStart, label, i, "");
      } else {
        seen_non_phi = true;
      }
      check_inst(b, i, inst);
    }
  }

  void check_inst(int b, int i, const Instruction &inst) {
    const auto &label = f_.blocks[b].label;
    std::visit(
        [&](const auto &op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, BinOp>) {
            if (!op.ty.is_int() || !is_valid_type(op.ty)) {
              add(DiagKind::InvalidWidth, label, i, op.ty.str());
              return;
            }
            bool wrap_ok = op.op == BinOpcode::Add || op.op == BinOpcode::Sub ||
                           op.op == BinOpcode::Mul || op.op == BinOpcode::Shl;
            bool exact_ok =
                op.op == BinOpcode::UDiv || op.op == BinOpcode::SDiv ||
                op.op == BinOpcode::LShr || op.op == BinOpcode::AShr;
            if ((op.flags & (kNsw | kNuw)) && !wrap_ok)
              add(DiagKind::InvalidFlag, label, i,
                  "nsw/nuw not allowed on " + std::string(binop_name(op.op)));
            if ((op.flags & kExact) && !exact_ok)
              add(DiagKind::InvalidFlag, label, i,
                  "exact not allowed on " + std::string(binop_name(op.op)));
            expect_type(op.lhs, op.ty, label, i);
            expect_type(op.rhs, op.ty, label, i);
          } else if constexpr (std::is_same_v<T, ICmp>) {
            if (op.ty.is_ptr() && op.pred != ICmpPred::Eq &&
                op.pred != ICmpPred::Ne)
              add(DiagKind::InvalidPredicate, label, i,
                  "pointer comparison supports only eq/ne");
            expect_type(op.lhs, op.ty, label, i);
            expect_type(op.rhs, op.ty, label, i);
          } else if constexpr (std::is_same_v<T, Select>) {
            expect_type(op.cond, Type::i(1), label, i);
            expect_type(op.tval, op.ty, label, i);
            expect_type(op.fval, op.ty, label, i);
          } else if constexpr (std::is_same_v<T, Cast>) {
            bool ok = op.from.is_int() && op.to.is_int() &&
                      (op.op == CastOpcode::Trunc ? op.to.width < op.from.width
                                                  : op.to.width > op.from.width);
            if (!ok)
              add(DiagKind::InvalidCast, label, i,
                  std::string(cast_name(op.op)) + " " + op.from.str() +
                      " to " + op.to.str());
            expect_type(op.src, op.from, label, i);
          } else if constexpr (std::is_same_v<T, Alloca>) {
            if (op.count == 0)
              add(DiagKind::InvalidAllocaCount, label, i, "");
          } else if constexpr (std::is_same_v<T, Load>) {
            expect_type(op.ptr, Type::ptr(), label, i);
          } else if constexpr (std::is_same_v<T, Store>) {
            expect_type(op.val, op.ty, label, i);
            expect_type(op.ptr, Type::ptr(), label, i);
          } else if constexpr (std::is_same_v<T, Br>) {
            if (op.cond)
              expect_type(*op.cond, Type::i(1), label, i);
          } else if constexpr (std::is_same_v<T, Phi>) {
            std::multiset<int> incoming;
            for (const auto &in : op.incomings) {
              expect_type(in.value, op.ty, label, i);
              auto it = label_index_.find(in.block);
              if (it == label_index_.end()) {
                add(DiagKind::UnknownLabel, label, i,
                    "phi incoming from unknown label %" + in.block);
                continue;
              }
              incoming.insert(it->second);
            }
            std::multiset<int> want(preds_[b].begin(), preds_[b].end());
            if (incoming != want)
              add(DiagKind::PhiPredecessorMismatch, label, i,
                  "incoming blocks do not match predecessors");
          } else if constexpr (std::is_same_v<T, Ret>) {
            if (op.ty != f_.ret_ty || op.val.has_value() != op.ty.has_value()) {
              add(DiagKind::ReturnTypeMismatch, label, i, "");
              return;
            }
            if (op.val)
              expect_type(*op.val, *op.ty, label, i);
          } else if constexpr (std::is_same_v<T, CallExternal>) {
            for (const auto &a : op.args)
              expect_type(a.value, a.ty, label, i);
          }
        },
        inst.op);
  }

  void compute_dominators() {
    size_t n = f_.blocks.size();
    reachable_.assign(n, false);
    std::vector<int> stack{0};
    reachable_[0] = true;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (int s : succs_[b])
        if (!reachable_[s]) {
          reachable_[s] = true;
          stack.push_back(s);
        }
    }
    std::vector<bool> all(n, true);
    dom_.assign(n, all);
    dom_[0].assign(n, false);
    dom_[0][0] = true;
    for (bool changed = true; changed;) {
      changed = false;
      for (size_t b = 1; b < n; ++b) {
        if (!reachable_[b])
          continue;
        std::vector<bool> d(n, true);
        for (int p : preds_[b]) {
          if (!reachable_[p])
            continue;
          for (size_t k = 0; k < n; ++k)
            d[k] = d[k] && dom_[p][k];
        }
        d[b] = true;
        if (d != dom_[b]) {
          dom_[b] = std::move(d);
          changed = true;
        }
      }
    }
  }

  // True when the definition of `name` is available at the end of block
  // `b` (inclusive) or before instruction `index` of `b`.
  bool available(const std::string &name, int b, int index) const {
    auto it = defs_.find(name);
    if (it == defs_.end())
      return true; // reported as UndefinedRegister
    const DefSite &d = it->second;
    if (d.block < 0)
      return true;
    if (d.block == b)
      return index < 0 || d.index < index;
    return reachable_[d.block] && dom_[b][d.block];
  }

  void check_dominance() {
    for (size_t b = 0; b < f_.blocks.size(); ++b) {
      if (!reachable_[b])
        continue;
      const auto &blk = f_.blocks[b];
      for (size_t k = 0; k < blk.insts.size(); ++k) {
        const auto &inst = blk.insts[k];
        int i = static_cast<int>(k);
        if (const auto *phi = std::get_if<Phi>(&inst.op)) {
          for (const auto &in : phi->incomings) {
            auto it = label_index_.find(in.block);
            if (!in.value.is_reg() || it == label_index_.end() ||
                !reachable_[it->second])
              continue;
            if (!available(in.value.name, it->second, -1))
              add(DiagKind::UseNotDominated, blk.label, i,
                  "%" + in.value.name + " along edge from %" + in.block);
          }
          continue;
        }
        for (const Operand *o : inst.operands())
          if (o->is_reg() && !available(o->name, static_cast<int>(b), i))
            add(DiagKind::UseNotDominated, blk.label, i, "%" + o->name);
      }
    }
  }

  const Function &f_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, int> label_index_;
  std::map<std::string, DefSite> defs_;
  std::vector<std::set<int>> preds_, succs_;
  std::vector<bool> reachable_;
  std::vector<std::vector<bool>> dom_;
};

} // namespace

std::vector<Diagnostic> validate_ssa(const Function &f) {
  return Validator(f).run();
}

} // namespace llmtv
