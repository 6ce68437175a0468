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

#include "llmtv/semantics.h"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

namespace llmtv {

// ---------------------------------------------------------------------------
// Values

std::string Value::str() const {
  switch (kind) {
  case Kind::Poison: return "poison " + ty.str();
  case Kind::Undef: return "undef " + ty.str();
  case Kind::Null: return "null";
  case Kind::Ptr:
    return "ptr " + std::to_string(block) + ":" + std::to_string(offset);
  case Kind::Int:
    break;
  }
  if (ty.width == 1)
    return std::string("i1 ") + (bits ? "true" : "false");
  std::string s = ty.str() + " ";
  uint64_t sign = uint64_t{1} << (ty.width - 1);
  if (bits & sign)
    return s + "-" + std::to_string((~bits + 1) & width_mask(ty.width));
  return s + std::to_string(bits);
}

namespace {

Type parse_type_word(std::string_view w) {
  if (w == "ptr")
    return Type::ptr();
  if (w.size() > 1 && w[0] == 'i') {
    unsigned width = std::stoul(std::string(w.substr(1)));
    if (is_valid_int_width(width))
      return Type::i(width);
  }
  throw std::invalid_argument("bad type '" + std::string(w) + "'");
}

} // namespace

Value parse_value(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string head, rest;
  is >> head >> rest;
  std::string extra;
  if (is >> extra)
    throw std::invalid_argument("trailing text in value '" +
                                std::string(text) + "'");
  try {
    if (head == "null" && rest.empty())
      return Value::null();
    if (head == "poison")
      return Value::poison(parse_type_word(rest));
    if (head == "undef")
      return Value::undef(parse_type_word(rest));
    if (head == "ptr") {
      auto colon = rest.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("pointer needs block:offset");
      return Value::pointer(std::stoul(rest.substr(0, colon)),
                            std::stoul(rest.substr(colon + 1)));
    }
    Type ty = parse_type_word(head);
    if (!ty.is_int())
      throw std::invalid_argument("expected integer type");
    if (ty.width == 1 && (rest == "true" || rest == "false"))
      return Value::integer(1, rest == "true");
    if (rest.empty())
      throw std::invalid_argument("missing integer");
    if (rest[0] == '-') {
      uint64_t mag = std::stoull(rest.substr(1));
      return Value::integer(ty.width, ~mag + 1);
    }
    size_t used = 0;
    uint64_t v = std::stoull(rest, &used);
    if (used != rest.size() || v > width_mask(ty.width))
      throw std::invalid_argument("integer out of range");
    return Value::integer(ty.width, v);
  } catch (const std::invalid_argument &) {
    throw;
  } catch (const std::exception &) {
    throw std::invalid_argument("malformed value '" + std::string(text) + "'");
  }
}

std::string_view ub_kind_name(UBKind kind) {
  switch (kind) {
  case UBKind::DivByZero: return "DivByZero";
  case UBKind::RemByZero: return "RemByZero";
  case UBKind::DivOverflow: return "DivOverflow";
  case UBKind::NullDeref: return "NullDeref";
  case UBKind::OutOfBounds: return "OutOfBounds";
  case UBKind::BranchOnPoison: return "BranchOnPoison";
  }
  return "?";
}

ExecOutcome ExecOutcome::returned(std::optional<Value> v, MemoryState mem) {
  ExecOutcome o;
  o.kind = Kind::Returned;
  o.ret = std::move(v);
  o.mem = std::move(mem);
  return o;
}

ExecOutcome ExecOutcome::triggered_ub(UBKind kind, Location at) {
  ExecOutcome o;
  o.kind = Kind::TriggeredUB;
  o.ub = kind;
  o.at = std::move(at);
  return o;
}

ExecOutcome ExecOutcome::out_of_fuel() { return ExecOutcome{}; }

std::string ExecOutcome::str() const {
  switch (kind) {
  case Kind::OutOfFuel:
    return "out of fuel";
  case Kind::TriggeredUB:
    return "UB " + std::string(ub_kind_name(ub)) + " at " + at.block + "#" +
           std::to_string(at.index);
  case Kind::Returned:
    break;
  }
  std::string s = "returned " + (ret ? ret->str() : std::string("void"));
  for (uint32_t b = 0; b < mem.param_blocks; ++b) {
    s += b == 0 ? " mem{" : "; ";
    s += std::to_string(b) + ":[";
    for (size_t c = 0; c < mem.blocks[b].cells.size(); ++c)
      s += (c ? ", " : "") + mem.blocks[b].cells[c].str();
    s += "]";
  }
  if (mem.param_blocks)
    s += "}";
  return s;
}

uint64_t ReplayChooser::choose(unsigned width) {
  size_t i = widths_.size();
  uint64_t v = i < choices_.size() ? choices_[i] & width_mask(width) : 0;
  widths_.push_back(width);
  used_.push_back(v);
  return v;
}

// ---------------------------------------------------------------------------
// Lowered program

namespace {

enum class Op : uint8_t {
  Bin, ICmp, Select, Cast, Alloca, Load, Store, Br, CondBr, Ret, Call
};

struct Slot {
  bool is_reg = false;
  uint32_t reg = 0;
  Value constant; // literal operand, including undef/poison/null
};

struct LInst {
  Op op;
  uint8_t sub = 0; // BinOpcode / ICmpPred / CastOpcode
  uint8_t flags = 0;
  Type ty;         // operand / element type
  Type to;         // cast destination
  uint32_t dst = 0;
  bool has_dst = false;
  Slot a, b, c;
  uint32_t target0 = 0, target1 = 0;
  uint32_t count = 1;
  bool has_val = false; // ret
};

struct LPhi {
  uint32_t dst;
  std::vector<std::pair<uint32_t, Slot>> incomings; // (pred block, value)
};

struct LBlock {
  std::vector<LPhi> phis;
  std::vector<LInst> insts;
  uint32_t first_index = 0; // index of the first non-phi in the source block
};

int64_t sext(uint64_t v, unsigned w) {
  if (w >= 64)
    return static_cast<int64_t>(v);
  uint64_t sign = uint64_t{1} << (w - 1);
  return static_cast<int64_t>((v ^ sign) - sign);
}

} // namespace

struct Program::Impl {
  Function fn;
  std::vector<LBlock> blocks;
  uint32_t num_regs = 0;
  std::vector<uint32_t> param_regs;
};

Program::Program(const Function &f) : impl_(std::make_unique<Impl>()) {
  if (auto diags = validate_ssa(f); !diags.empty())
    throw std::logic_error("cannot execute invalid function @" + f.name +
                           ": " + diags.front().str());
  Impl &m = *impl_;
  m.fn = f;
  std::map<std::string, uint32_t> regs;
  std::map<std::string, uint32_t> labels;
  for (const auto &p : f.params) {
    m.param_regs.push_back(m.num_regs);
    regs[p.name] = m.num_regs++;
  }
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    labels[f.blocks[b].label] = static_cast<uint32_t>(b);
    for (const auto &i : f.blocks[b].insts)
      if (!i.result.empty())
        regs[i.result] = m.num_regs++;
  }

  auto slot = [&](const Operand &o) {
    Slot s;
    switch (o.kind) {
    case Operand::Kind::Register:
      s.is_reg = true;
      s.reg = regs.at(o.name);
      break;
    case Operand::Kind::ConstInt:
      s.constant = Value::integer(o.ty.width, o.bits);
      break;
    case Operand::Kind::Undef:
      s.constant = Value::undef(o.ty);
      break;
    case Operand::Kind::Poison:
      s.constant = Value::poison(o.ty);
      break;
    case Operand::Kind::NullPtr:
      s.constant = Value::null();
      break;
    }
    return s;
  };

  m.blocks.resize(f.blocks.size());
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    LBlock &lb = m.blocks[b];
    bool in_phis = true;
    for (size_t k = 0; k < f.blocks[b].insts.size(); ++k) {
      const Instruction &inst = f.blocks[b].insts[k];
      if (const auto *phi = std::get_if<Phi>(&inst.op)) {
        LPhi lp{regs.at(inst.result), {}};
        for (const auto &in : phi->incomings)
          lp.incomings.emplace_back(labels.at(in.block), slot(in.value));
        lb.phis.push_back(std::move(lp));
        continue;
      }
      if (in_phis) {
        lb.first_index = static_cast<uint32_t>(k);
        in_phis = false;
      }
      LInst li{};
      if (!inst.result.empty()) {
        li.has_dst = true;
        li.dst = regs.at(inst.result);
      }
      std::visit(
          [&](const auto &i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, BinOp>) {
              li.op = Op::Bin;
              li.sub = static_cast<uint8_t>(i.op);
              li.flags = i.flags;
              li.ty = i.ty;
              li.a = slot(i.lhs);
              li.b = slot(i.rhs);
            } else if constexpr (std::is_same_v<T, ICmp>) {
              li.op = Op::ICmp;
              li.sub = static_cast<uint8_t>(i.pred);
              li.ty = i.ty;
              li.a = slot(i.lhs);
              li.b = slot(i.rhs);
            } else if constexpr (std::is_same_v<T, Select>) {
              li.op = Op::Select;
              li.ty = i.ty;
              li.a = slot(i.cond);
              li.b = slot(i.tval);
              li.c = slot(i.fval);
            } else if constexpr (std::is_same_v<T, Cast>) {
              li.op = Op::Cast;
              li.sub = static_cast<uint8_t>(i.op);
              li.ty = i.from;
              li.to = i.to;
              li.a = slot(i.src);
            } else if constexpr (std::is_same_v<T, Alloca>) {
              li.op = Op::Alloca;
              li.ty = i.ty;
              li.count = i.count;
            } else if constexpr (std::is_same_v<T, Load>) {
              li.op = Op::Load;
              li.ty = i.ty;
              li.a = slot(i.ptr);
            } else if constexpr (std::is_same_v<T, Store>) {
              li.op = Op::Store;
              li.ty = i.ty;
              li.a = slot(i.val);
              li.b = slot(i.ptr);
            } else if constexpr (std::is_same_v<T, Br>) {
              li.op = i.cond ? Op::CondBr : Op::Br;
              li.target0 = labels.at(i.then_label);
              if (i.cond) {
                li.a = slot(*i.cond);
                li.target1 = labels.at(i.else_label);
              }
            } else if constexpr (std::is_same_v<T, Ret>) {
              li.op = Op::Ret;
              li.has_val = i.val.has_value();
              if (i.val) {
                li.ty = *i.ty;
                li.a = slot(*i.val);
              }
            } else if constexpr (std::is_same_v<T, CallExternal>) {
              li.op = Op::Call;
            } else {
              static_assert(std::is_same_v<T, Phi>);
            }
          },
          inst.op);
      lb.insts.push_back(li);
    }
  }
}

Program::~Program() = default;
Program::Program(Program &&) noexcept = default;
Program &Program::operator=(Program &&) noexcept = default;

const Function &Program::function() const { return impl_->fn; }

namespace {

class Machine {
public:
  Machine(const Function &fn, const std::vector<LBlock> &blocks,
          uint32_t num_regs, UndefChooser &undef)
      : fn_(fn), blocks_(blocks), regs_(num_regs), undef_(undef) {}

  ExecOutcome run(std::span<const Value> args,
                  const std::vector<uint32_t> &param_regs,
                  const MemoryState &mem0, uint64_t fuel);

private:
  const Value &read(const Slot &s) const {
    return s.is_reg ? regs_[s.reg] : s.constant;
  }

  // Resolves undef to a chosen concrete integer; other values pass through.
  Value resolve(const Value &v) {
    if (v.is_undef() && v.ty.is_int())
      return Value::integer(v.ty.width, undef_.choose(v.ty.width));
    return v;
  }

  Location loc(uint32_t b, uint32_t i) const {
    return {fn_.blocks[b].label,
            static_cast<int>(blocks_[b].first_index + i)};
  }

  std::optional<UBKind> eval_bin(const LInst &li, Value &out);
  Value eval_icmp(const LInst &li);
  Value eval_cast(const LInst &li);
  // Resolves a pointer operand to a cell; returns UB kind on failure.
  std::optional<UBKind> address(const Value &p, Type access, MemBlock *&blk,
                                uint32_t &cell);

  const Function &fn_;
  const std::vector<LBlock> &blocks_;
  std::vector<Value> regs_;
  UndefChooser &undef_;
  MemoryState mem_;
};

std::optional<UBKind> Machine::eval_bin(const LInst &li, Value &out) {
  const unsigned w = li.ty.width;
  const uint64_t mask = width_mask(w);
  const auto op = static_cast<BinOpcode>(li.sub);
  const bool is_div = op == BinOpcode::UDiv || op == BinOpcode::SDiv ||
                      op == BinOpcode::URem || op == BinOpcode::SRem;
  const bool is_rem = op == BinOpcode::URem || op == BinOpcode::SRem;

  Value lhs = resolve(read(li.a));
  Value rhs = resolve(read(li.b));

  if (is_div) {
    // A poison divisor may be zero, which makes the division immediate UB.
    if (rhs.is_poison() || rhs.bits == 0)
      return is_rem ? UBKind::RemByZero : UBKind::DivByZero;
    if ((op == BinOpcode::SDiv || op == BinOpcode::SRem) && lhs.is_int() &&
        rhs.bits == mask && lhs.bits == (uint64_t{1} << (w - 1)))
      return UBKind::DivOverflow;
  }
  if (lhs.is_poison() || rhs.is_poison()) {
    out = Value::poison(li.ty);
    return std::nullopt;
  }

  const uint64_t a = lhs.bits, b = rhs.bits;
  const int64_t sa = sext(a, w), sb = sext(b, w);
  const bool nsw = li.flags & kNsw, nuw = li.flags & kNuw;
  const bool exact = li.flags & kExact;
  bool poison = false;
  uint64_t r = 0;

  switch (op) {
  case BinOpcode::Add: {
    r = (a + b) & mask;
    __int128 s = static_cast<__int128>(sa) + sb;
    if (nuw && static_cast<unsigned __int128>(a) + b > mask)
      poison = true;
    if (nsw && s != sext(r, w))
      poison = true;
    break;
  }
  case BinOpcode::Sub: {
    r = (a - b) & mask;
    __int128 s = static_cast<__int128>(sa) - sb;
    if (nuw && a < b)
      poison = true;
    if (nsw && s != sext(r, w))
      poison = true;
    break;
  }
  case BinOpcode::Mul: {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    r = static_cast<uint64_t>(p) & mask;
    __int128 s = static_cast<__int128>(sa) * sb;
    if (nuw && p > mask)
      poison = true;
    if (nsw && s != sext(r, w))
      poison = true;
    break;
  }
  case BinOpcode::UDiv:
    r = a / b;
    poison = exact && a % b != 0;
    break;
  case BinOpcode::SDiv:
    r = static_cast<uint64_t>(sa / sb) & mask;
    poison = exact && sa % sb != 0;
    break;
  case BinOpcode::URem:
    r = a % b;
    break;
  case BinOpcode::SRem:
    r = static_cast<uint64_t>(sa % sb) & mask;
    break;
  case BinOpcode::Shl:
    if (b >= w) {
      poison = true;
      break;
    }
    r = (a << b) & mask;
    if (nuw && (r >> b) != a)
      poison = true;
    if (nsw && (sext(r, w) >> b) != sa)
      poison = true;
    break;
  case BinOpcode::LShr:
    if (b >= w) {
      poison = true;
      break;
    }
    r = a >> b;
    poison = exact && (r << b) != a;
    break;
  case BinOpcode::AShr:
    if (b >= w) {
      poison = true;
      break;
    }
    r = static_cast<uint64_t>(sa >> b) & mask;
    poison = exact && ((r << b) & mask) != a;
    break;
  case BinOpcode::And: r = a & b; break;
  case BinOpcode::Or: r = a | b; break;
  case BinOpcode::Xor: r = a ^ b; break;
  }
  out = poison ? Value::poison(li.ty) : Value::integer(w, r);
  return std::nullopt;
}

Value Machine::eval_icmp(const LInst &li) {
  Value lhs = resolve(read(li.a));
  Value rhs = resolve(read(li.b));
  if (lhs.is_poison() || rhs.is_poison())
    return Value::poison(Type::i(1));
  const auto pred = static_cast<ICmpPred>(li.sub);
  if (li.ty.is_ptr()) {
    if (lhs.is_undef() || rhs.is_undef())
      return Value::integer(1, undef_.choose(1));
    bool eq = lhs == rhs;
    return Value::integer(1, pred == ICmpPred::Eq ? eq : !eq);
  }
  const unsigned w = li.ty.width;
  const uint64_t a = lhs.bits, b = rhs.bits;
  const int64_t sa = sext(a, w), sb = sext(b, w);
  bool r = false;
  switch (pred) {
  case ICmpPred::Eq: r = a == b; break;
  case ICmpPred::Ne: r = a != b; break;
  case ICmpPred::Ult: r = a < b; break;
  case ICmpPred::Ule: r = a <= b; break;
  case ICmpPred::Ugt: r = a > b; break;
  case ICmpPred::Uge: r = a >= b; break;
  case ICmpPred::Slt: r = sa < sb; break;
  case ICmpPred::Sle: r = sa <= sb; break;
  case ICmpPred::Sgt: r = sa > sb; break;
  case ICmpPred::Sge: r = sa >= sb; break;
  }
  return Value::integer(1, r);
}

Value Machine::eval_cast(const LInst &li) {
  Value src = resolve(read(li.a));
  if (src.is_poison())
    return Value::poison(li.to);
  switch (static_cast<CastOpcode>(li.sub)) {
  case CastOpcode::ZExt:
  case CastOpcode::Trunc:
    return Value::integer(li.to.width, src.bits);
  case CastOpcode::SExt:
    return Value::integer(li.to.width,
                          static_cast<uint64_t>(sext(src.bits, li.ty.width)));
  }
  return src;
}

std::optional<UBKind> Machine::address(const Value &p, Type access,
                                       MemBlock *&blk, uint32_t &cell) {
  if (p.kind != Value::Kind::Ptr)
    return UBKind::NullDeref;
  if (p.block >= mem_.blocks.size())
    return UBKind::OutOfBounds;
  MemBlock &b = mem_.blocks[p.block];
  // Cells are typed; an access of another type falls outside the object.
  if (p.offset >= b.cells.size() || b.elem != access)
    return UBKind::OutOfBounds;
  blk = &b;
  cell = p.offset;
  return std::nullopt;
}

ExecOutcome Machine::run(std::span<const Value> args,
                         const std::vector<uint32_t> &param_regs,
                         const MemoryState &mem0, uint64_t fuel) {
  if (args.size() != param_regs.size())
    throw std::logic_error("argument count mismatch for @" + fn_.name);
  for (size_t k = 0; k < args.size(); ++k)
    regs_[param_regs[k]] = args[k];
  mem_ = mem0;

  uint64_t steps = 0;
  uint32_t b = 0;
  for (;;) {
    const LBlock &blk = blocks_[b];
    uint32_t next = b;
    for (uint32_t i = 0; i < blk.insts.size(); ++i) {
      if (steps++ >= fuel)
        return ExecOutcome::out_of_fuel();
      const LInst &li = blk.insts[i];
      switch (li.op) {
      case Op::Bin: {
        Value out;
        if (auto ub = eval_bin(li, out))
          return ExecOutcome::triggered_ub(*ub, loc(b, i));
        regs_[li.dst] = out;
        break;
      }
      case Op::ICmp:
        regs_[li.dst] = eval_icmp(li);
        break;
      case Op::Select: {
        Value c = resolve(read(li.a));
        if (c.is_poison())
          regs_[li.dst] = Value::poison(li.ty);
        else
          regs_[li.dst] = c.bits ? read(li.b) : read(li.c);
        break;
      }
      case Op::Cast:
        regs_[li.dst] = eval_cast(li);
        break;
      case Op::Alloca: {
        MemBlock nb{li.ty, std::vector<Value>(li.count, Value::undef(li.ty))};
        mem_.blocks.push_back(std::move(nb));
        regs_[li.dst] = Value::pointer(
            static_cast<uint32_t>(mem_.blocks.size() - 1), 0);
        break;
      }
      case Op::Load: {
        MemBlock *mb = nullptr;
        uint32_t cell = 0;
        if (auto ub = address(read(li.a), li.ty, mb, cell))
          return ExecOutcome::triggered_ub(*ub, loc(b, i));
        regs_[li.dst] = mb->cells[cell];
        break;
      }
      case Op::Store: {
        MemBlock *mb = nullptr;
        uint32_t cell = 0;
        if (auto ub = address(read(li.b), li.ty, mb, cell))
          return ExecOutcome::triggered_ub(*ub, loc(b, i));
        mb->cells[cell] = read(li.a);
        break;
      }
      case Op::Br:
        next = li.target0;
        break;
      case Op::CondBr: {
        const Value &c = read(li.a);
        if (c.is_poison() || c.is_undef())
          return ExecOutcome::triggered_ub(UBKind::BranchOnPoison, loc(b, i));
        next = c.bits ? li.target0 : li.target1;
        break;
      }
      case Op::Ret: {
        std::optional<Value> v;
        if (li.has_val)
          v = resolve(read(li.a));
        return ExecOutcome::returned(std::move(v), std::move(mem_));
      }
      case Op::Call:
        throw std::logic_error("external call in @" + fn_.name +
                               " cannot be executed");
      }
    }
    // Enter the successor: evaluate its phis in parallel.
    const LBlock &succ = blocks_[next];
    if (!succ.phis.empty()) {
      std::vector<Value> vals;
      vals.reserve(succ.phis.size());
      for (const LPhi &phi : succ.phis) {
        if (steps++ >= fuel)
          return ExecOutcome::out_of_fuel();
        for (const auto &[pred, val] : phi.incomings)
          if (pred == b) {
            vals.push_back(read(val));
            break;
          }
      }
      for (size_t k = 0; k < succ.phis.size(); ++k)
        regs_[succ.phis[k].dst] = vals[k];
    }
    b = next;
  }
}

} // namespace

ExecOutcome Program::run(std::span<const Value> args, const MemoryState &mem0,
                         uint64_t fuel, UndefChooser &undef) const {
  Machine m(impl_->fn, impl_->blocks, impl_->num_regs, undef);
  return m.run(args, impl_->param_regs, mem0, fuel);
}

ExecOutcome execute(const Function &f, std::span<const Value> args,
                    const MemoryState &mem0, uint64_t fuel,
                    UndefChooser &undef) {
  return Program(f).run(args, mem0, fuel, undef);
}

// ---------------------------------------------------------------------------
// Outcome enumeration

bool OutcomeSet::contains_ub() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const ExecOutcome &o) { return o.is_ub(); });
}

bool OutcomeSet::contains_out_of_fuel() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const ExecOutcome &o) { return o.is_out_of_fuel(); });
}

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

uint64_t hash_value(uint64_t h, const Value &v) {
  h = mix(h, static_cast<uint64_t>(v.kind));
  h = mix(h, v.ty.width);
  h = mix(h, v.bits);
  return mix(h, (uint64_t{v.block} << 32) | v.offset);
}

uint64_t hash_outcome(const ExecOutcome &o) {
  uint64_t h = static_cast<uint64_t>(o.kind);
  if (o.is_ub())
    return mix(mix(h, static_cast<uint64_t>(o.ub)),
               static_cast<uint64_t>(o.at.index));
  if (o.ret)
    h = hash_value(h, *o.ret);
  for (const auto &b : o.mem.blocks)
    for (const auto &c : b.cells)
      h = hash_value(h, c);
  return h;
}

// Deduplicating builder for an OutcomeSet.
class OutcomeCollector {
public:
  explicit OutcomeCollector(OutcomeSet &set) : set_(set) {}

  void add(ExecOutcome o, std::vector<uint64_t> choice) {
    const uint64_t h = hash_outcome(o);
    auto [lo, hi] = index_.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (set_.outcomes[it->second] == o)
        return;
    index_.emplace(h, set_.outcomes.size());
    set_.outcomes.push_back(std::move(o));
    set_.choices.push_back(std::move(choice));
  }

private:
  OutcomeSet &set_;
  std::unordered_multimap<uint64_t, size_t> index_;
};

bool over_budget(const std::vector<unsigned> &widths, UndefBudget budget) {
  if (widths.size() > budget.max_occurrences)
    return true;
  unsigned bits = 0;
  for (unsigned w : widths)
    bits += w;
  return bits > budget.max_bits;
}

} // namespace

OutcomeSet outcome_set(const Program &p, std::span<const Value> args,
                       const MemoryState &mem0, uint64_t fuel,
                       UndefBudget budget) {
  OutcomeSet set;
  std::optional<OutcomeCollector> collect(std::in_place, set);
  std::vector<std::vector<uint64_t>> stack{{}};
  bool truncated = false;
  std::vector<unsigned> first_widths;

  // Depth-first over choice prefixes. A run consumes the prefix and uses 0
  // for later occurrences; the first unassigned occurrence is then expanded.
  while (!stack.empty()) {
    std::vector<uint64_t> prefix = std::move(stack.back());
    stack.pop_back();
    ReplayChooser ch(prefix);
    ExecOutcome o = p.run(args, mem0, fuel, ch);
    if (first_widths.empty() && prefix.empty())
      first_widths = ch.widths();
    if (over_budget(ch.widths(), budget)) {
      truncated = true;
      break;
    }
    if (ch.widths().size() == prefix.size()) {
      collect->add(std::move(o), std::move(prefix));
      continue;
    }
    uint64_t top = width_mask(ch.widths()[prefix.size()]);
    for (uint64_t v = top;; --v) {
      std::vector<uint64_t> child = prefix;
      child.push_back(v);
      stack.push_back(std::move(child));
      if (v == 0)
        break;
    }
  }

  if (!truncated)
    return set;

  set = OutcomeSet{};
  set.exhaustive = false;
  collect.emplace(set);
  const size_t n = std::min<size_t>(first_widths.size(), 64);
  auto run_with = [&](auto pick) {
    std::vector<uint64_t> choice(n);
    for (size_t k = 0; k < n; ++k)
      choice[k] = pick(k) & width_mask(first_widths[k]);
    // Occurrences past the first run's count (path-dependent) default to 0.
    ReplayChooser ch(choice);
    ExecOutcome o = p.run(args, mem0, fuel, ch);
    collect->add(std::move(o), ch.used());
  };
  run_with([](size_t) { return uint64_t{0}; });
  run_with([](size_t) { return ~uint64_t{0}; });
  for (size_t hot = 0; hot < n; ++hot)
    run_with([hot](size_t k) { return k == hot ? ~uint64_t{0} : 0; });
  return set;
}

// ---------------------------------------------------------------------------
// Refinement

std::string_view reason_name(UnsoundReason r) {
  switch (r) {
  case UnsoundReason::ReturnValue: return "return_value";
  case UnsoundReason::Memory: return "memory";
  case UnsoundReason::NewUB: return "new_ub";
  }
  return "?";
}

std::optional<UnsoundReason> reason_from_name(std::string_view name) {
  if (name == "return_value" || name == "return" || name == "ret")
    return UnsoundReason::ReturnValue;
  if (name == "memory" || name == "mem")
    return UnsoundReason::Memory;
  if (name == "new_ub" || name == "ub")
    return UnsoundReason::NewUB;
  return std::nullopt;
}

bool value_refines(const Value &tgt, const Value &src) {
  if (tgt.ty != src.ty)
    throw std::logic_error("value_refines on mismatched types " +
                           tgt.ty.str() + " and " + src.ty.str());
  switch (src.kind) {
  case Value::Kind::Poison:
    return true;
  case Value::Kind::Undef:
    return !tgt.is_poison();
  case Value::Kind::Int:
    return tgt.is_int() && tgt.bits == src.bits;
  case Value::Kind::Ptr:
  case Value::Kind::Null:
    return tgt == src;
  }
  return false;
}

bool memory_refines(const MemoryState &tgt, const MemoryState &src) {
  if (tgt.param_blocks != src.param_blocks ||
      tgt.blocks.size() < tgt.param_blocks ||
      src.blocks.size() < src.param_blocks)
    throw std::logic_error("memory_refines on mismatched layouts");
  for (uint32_t b = 0; b < src.param_blocks; ++b) {
    const auto &tc = tgt.blocks[b].cells;
    const auto &sc = src.blocks[b].cells;
    if (tc.size() != sc.size() || tgt.blocks[b].elem != src.blocks[b].elem)
      throw std::logic_error("memory_refines on mismatched block " +
                             std::to_string(b));
    for (size_t c = 0; c < sc.size(); ++c)
      if (!value_refines(tc[c], sc[c]))
        return false;
  }
  return true;
}

namespace {

bool ret_refines(const std::optional<Value> &tgt,
                 const std::optional<Value> &src) {
  if (tgt.has_value() != src.has_value())
    throw std::logic_error("comparing void and non-void returns");
  return !tgt || value_refines(*tgt, *src);
}

} // namespace

RefinementResult outcome_refines(const OutcomeSet &tgt, const OutcomeSet &src) {
  RefinementResult r;
  r.approximate = !tgt.exhaustive || !src.exhaustive;
  if (tgt.contains_out_of_fuel() || src.contains_out_of_fuel()) {
    r.holds = false;
    r.out_of_fuel = true;
    return r;
  }
  if (src.contains_ub())
    return r;

  // Source outcomes by returned integer; the rest (void, poison, undef,
  // pointers) are scanned for every target outcome.
  std::unordered_multimap<uint64_t, size_t> by_int;
  std::vector<size_t> others;
  for (size_t s = 0; s < src.outcomes.size(); ++s) {
    const auto &ret = src.outcomes[s].ret;
    if (ret && ret->is_int())
      by_int.emplace(ret->bits, s);
    else
      others.push_back(s);
  }

  for (size_t t = 0; t < tgt.outcomes.size(); ++t) {
    const ExecOutcome &to = tgt.outcomes[t];
    std::optional<UnsoundReason> why;
    std::optional<size_t> match;
    if (to.is_ub()) {
      why = UnsoundReason::NewUB;
    } else {
      std::vector<size_t> candidates = others;
      if (to.ret && to.ret->is_int()) {
        auto [lo, hi] = by_int.equal_range(to.ret->bits);
        for (auto it = lo; it != hi; ++it)
          candidates.push_back(it->second);
        std::sort(candidates.begin(), candidates.end());
      }
      bool value_ok = false, both_ok = false;
      for (size_t s : candidates) {
        const ExecOutcome &so = src.outcomes[s];
        if (!ret_refines(to.ret, so.ret))
          continue;
        if (!value_ok)
          match = s;
        value_ok = true;
        if (memory_refines(to.mem, so.mem)) {
          both_ok = true;
          match = s;
          break;
        }
      }
      if (!value_ok)
        why = UnsoundReason::ReturnValue;
      else if (!both_ok)
        why = UnsoundReason::Memory;
    }
    if (!why)
      continue;
    r.holds = false;
    r.reasons.insert(*why);
    if (!r.witness) {
      r.witness = t;
      r.src_match = match.value_or(0);
    }
  }
  return r;
}

} // namespace llmtv
