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

// Random straight-line expression pairs and a brute-force reference
// evaluator that works directly on the expression trees. The evaluator
// shares no code with the interpreter; it computes the set of possible
// results of each subtree, which is exact because every node has one use.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace exprgen {

enum class Op {
  Param, Const, Undef, Poison,
  Add, Sub, Mul, UDiv, SDiv, URem, SRem, Shl, LShr, AShr, And, Or, Xor,
  ICmp, Select, ZExt, SExt, Trunc,
};

enum Flag : unsigned { Nuw = 1, Nsw = 2, Exact = 4 };

struct Expr {
  Op op = Op::Const;
  unsigned width = 8;    // result width
  uint64_t value = 0;    // Const bits; Param index; ICmp predicate
  unsigned flags = 0;
  std::vector<std::shared_ptr<Expr>> kids;
};
using ExprPtr = std::shared_ptr<Expr>;

struct PairSpec {
  std::vector<unsigned> params; // widths
  unsigned ret_width = 8;
  ExprPtr src, tgt;
};

inline const char *kPreds[] = {"eq",  "ne",  "ult", "ule", "ugt",
                               "uge", "slt", "sle", "sgt", "sge"};

inline uint64_t mask(unsigned w) {
  return w >= 64 ? ~uint64_t{0} : (uint64_t{1} << w) - 1;
}

inline int64_t as_signed(uint64_t v, unsigned w) {
  v &= mask(w);
  return v >> (w - 1) ? static_cast<int64_t>(v) - (int64_t{1} << w)
                      : static_cast<int64_t>(v);
}

// --- generation -----------------------------------------------------------

class Generator {
public:
  explicit Generator(uint64_t seed) : rng_(seed) {}

  /// A pair whose parameter bits plus undef bits (per side) stay within
  /// `max_bits`, so both sides can be enumerated exhaustively.
  PairSpec pair(unsigned max_bits = 20) {
    for (;;) {
      PairSpec p = any_pair();
      if (entropy(p) <= max_bits)
        return p;
    }
  }

  static unsigned undef_bits(const ExprPtr &e) {
    unsigned n = e->op == Op::Undef ? e->width : 0;
    for (const auto &k : e->kids)
      n += undef_bits(k);
    return n;
  }

  static unsigned entropy(const PairSpec &p) {
    unsigned bits = 0;
    for (unsigned w : p.params)
      bits += w;
    return bits + std::max(undef_bits(p.src), undef_bits(p.tgt));
  }

  PairSpec any_pair() {
    static const std::vector<std::vector<unsigned>> shapes = {
        {8}, {8, 8}, {8, 1}, {8, 8, 1}, {1, 1, 8}, {16}, {8, 1, 1}};
    PairSpec p;
    p.params = shapes[below(shapes.size())];
    p.ret_width = pick<unsigned>({8, 8, 8, 1, 16});
    params_ = p.params;
    undefs_ = 0;
    p.src = gen(p.ret_width, 3);
    undefs_ = 0;
    p.tgt = mutate(p.src, p.ret_width);
    return p;
  }

  uint64_t below(uint64_t n) { return rng_() % n; }

  template <class T> T pick(std::initializer_list<T> xs) {
    return *(xs.begin() + below(xs.size()));
  }

private:
  ExprPtr leaf(unsigned w) {
    auto e = std::make_shared<Expr>();
    e->width = w;
    std::vector<size_t> same;
    for (size_t i = 0; i < params_.size(); ++i)
      if (params_[i] == w)
        same.push_back(i);
    unsigned r = below(20);
    if (r < 1 && undefs_ < 2 && w <= 8) {
      e->op = Op::Undef;
      ++undefs_;
    } else if (r < 2) {
      e->op = Op::Poison;
    } else if (r < 12 && !same.empty()) {
      e->op = Op::Param;
      e->value = same[below(same.size())];
    } else {
      e->op = Op::Const;
      uint64_t c = pick<uint64_t>({0, 1, 2, 3, 7, mask(w), mask(w) >> 1,
                                   uint64_t{1} << (w - 1)});
      e->value = c & mask(w);
    }
    return e;
  }

  ExprPtr gen(unsigned w, int depth) {
    if (depth == 0 || below(4) == 0)
      return leaf(w);
    auto e = std::make_shared<Expr>();
    e->width = w;
    unsigned r = below(10);
    if (w == 1 && r < 4) {
      e->op = Op::ICmp;
      e->value = below(10);
      unsigned ow = pick<unsigned>({8, 8, 1});
      e->kids = {gen(ow, depth - 1), gen(ow, depth - 1)};
    } else if (r < 6) {
      static const Op bins[] = {Op::Add,  Op::Sub,  Op::Mul,  Op::UDiv,
                                Op::SDiv, Op::URem, Op::SRem, Op::Shl,
                                Op::LShr, Op::AShr, Op::And,  Op::Or,
                                Op::Xor};
      e->op = bins[below(std::size(bins))];
      e->kids = {gen(w, depth - 1), gen(w, depth - 1)};
      e->flags = random_flags(e->op);
    } else if (r < 8) {
      e->op = Op::Select;
      e->kids = {gen(1, depth - 1), gen(w, depth - 1), gen(w, depth - 1)};
    } else {
      // Casts from a different width.
      std::vector<unsigned> froms;
      for (unsigned f : {1u, 8u, 16u})
        if (f != w)
          froms.push_back(f);
      unsigned from = froms[below(froms.size())];
      e->op = from < w ? (below(2) ? Op::ZExt : Op::SExt) : Op::Trunc;
      e->kids = {gen(from, depth - 1)};
    }
    return e;
  }

  unsigned random_flags(Op op) {
    switch (op) {
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Shl:
      return static_cast<unsigned>(below(4)); // nuw/nsw bits
    case Op::UDiv: case Op::SDiv: case Op::LShr: case Op::AShr:
      return below(3) == 0 ? Exact : 0;
    default:
      return 0;
    }
  }

  ExprPtr clone(const ExprPtr &e) {
    auto c = std::make_shared<Expr>(*e);
    for (auto &k : c->kids)
      k = clone(k);
    if (c->op == Op::Undef)
      ++undefs_;
    return c;
  }

  std::vector<ExprPtr *> nodes(ExprPtr &root) {
    std::vector<ExprPtr *> out{&root};
    for (size_t i = 0; i < out.size(); ++i)
      for (auto &k : (*out[i])->kids)
        out.push_back(&k);
    return out;
  }

  ExprPtr mutate(const ExprPtr &src, unsigned w) {
    unsigned r = below(10);
    if (r == 0)
      return gen(w, 3);
    ExprPtr t = clone(src);
    auto ns = nodes(t);
    ExprPtr &n = *ns[below(ns.size())];
    switch (below(6)) {
    case 0: // toggle flags
      n->flags ^= random_flags(n->op);
      break;
    case 1: // swap operands
      if (n->kids.size() == 2)
        std::swap(n->kids[0], n->kids[1]);
      break;
    case 2: // replace a subtree
      n = gen(n->width, 2);
      break;
    case 3: // change the opcode of a binop
      if (n->op >= Op::Add && n->op <= Op::Xor) {
        static const Op alt[] = {Op::Add, Op::Sub, Op::Mul, Op::Shl,
                                 Op::LShr, Op::AShr, Op::Or, Op::Xor};
        n->op = alt[below(std::size(alt))];
        n->flags = random_flags(n->op);
      }
      break;
    case 4: // perturb a constant
      if (n->op == Op::Const)
        n->value = (n->value + 1) & mask(n->width);
      break;
    default: // leave unchanged
      break;
    }
    return t;
  }

  std::mt19937_64 rng_;
  std::vector<unsigned> params_;
  int undefs_ = 0;
};

inline int count_undef(const ExprPtr &e) {
  int n = e->op == Op::Undef;
  for (const auto &k : e->kids)
    n += count_undef(k);
  return n;
}

// --- printing ---------------------------------------------------------------

inline std::string ty(unsigned w) { return "i" + std::to_string(w); }

class Printer {
public:
  std::string body;

  std::string operand(const ExprPtr &e) {
    switch (e->op) {
    case Op::Param: return "%a" + std::to_string(e->value);
    case Op::Undef: return "undef";
    case Op::Poison: return "poison";
    case Op::Const:
      if (e->width == 1)
        return e->value ? "true" : "false";
      return std::to_string(as_signed(e->value, e->width));
    default: break;
    }
    std::vector<std::string> ks;
    for (const auto &k : e->kids)
      ks.push_back(operand(k));
    std::string reg = "%t" + std::to_string(next_++);
    std::string line = "  " + reg + " = ";
    if (e->op == Op::ICmp) {
      line += std::string("icmp ") + kPreds[e->value] + " " +
              ty(e->kids[0]->width) + " " + ks[0] + ", " + ks[1];
    } else if (e->op == Op::Select) {
      line += "select i1 " + ks[0] + ", " + ty(e->width) + " " + ks[1] +
              ", " + ty(e->width) + " " + ks[2];
    } else if (e->op == Op::ZExt || e->op == Op::SExt || e->op == Op::Trunc) {
      const char *name = e->op == Op::ZExt   ? "zext"
                         : e->op == Op::SExt ? "sext"
                                             : "trunc";
      line += std::string(name) + " " + ty(e->kids[0]->width) + " " + ks[0] +
              " to " + ty(e->width);
    } else {
      static const char *names[] = {"add",  "sub",  "mul",  "udiv", "sdiv",
                                    "urem", "srem", "shl",  "lshr", "ashr",
                                    "and",  "or",   "xor"};
      line += names[static_cast<int>(e->op) - static_cast<int>(Op::Add)];
      if (e->flags & Nuw) line += " nuw";
      if (e->flags & Nsw) line += " nsw";
      if (e->flags & Exact) line += " exact";
      line += " " + ty(e->width) + " " + ks[0] + ", " + ks[1];
    }
    body += line + "\n";
    return reg;
  }

private:
  int next_ = 0;
};

inline std::string print_fn(const std::vector<unsigned> &params,
                            unsigned ret_width, const ExprPtr &root) {
  std::string head = "define " + ty(ret_width) + " @f(";
  for (size_t i = 0; i < params.size(); ++i)
    head += (i ? ", " : "") + ty(params[i]) + " %a" + std::to_string(i);
  head += ") {\nentry:\n";
  Printer p;
  std::string r = p.operand(root);
  return head + p.body + "  ret " + ty(ret_width) + " " + r + "\n}\n";
}

// --- reference evaluation --------------------------------------------------

// A possible result: an integer, poison, or undefined behavior.
struct R {
  enum Kind { Int, Poison, UB } kind;
  uint64_t v = 0;
  bool operator<(const R &o) const {
    return kind != o.kind ? kind < o.kind : v < o.v;
  }
  bool operator==(const R &o) const { return kind == o.kind && v == o.v; }
};
using RSet = std::set<R>;

inline R binop(Op op, unsigned flags, unsigned w, R a, R b) {
  const bool div = op == Op::UDiv || op == Op::SDiv || op == Op::URem ||
                   op == Op::SRem;
  if (div) {
    if (b.kind == R::Poison || b.v == 0)
      return {R::UB};
    bool sgn = op == Op::SDiv || op == Op::SRem;
    if (sgn && a.kind == R::Int && as_signed(a.v, w) == -(int64_t{1} << (w - 1)) &&
        as_signed(b.v, w) == -1)
      return {R::UB};
  }
  if (a.kind == R::Poison || b.kind == R::Poison)
    return {R::Poison};
  const int64_t lo = -(int64_t{1} << (w - 1)), hi = (int64_t{1} << (w - 1)) - 1;
  const int64_t sa = as_signed(a.v, w), sb = as_signed(b.v, w);
  const uint64_t ua = a.v, ub = b.v;
  auto in_signed = [&](int64_t x) { return x >= lo && x <= hi; };
  auto ok = [&](uint64_t v) { return R{R::Int, v & mask(w)}; };
  const R poison{R::Poison};
  switch (op) {
  case Op::Add:
    if ((flags & Nuw) && ua + ub > mask(w)) return poison;
    if ((flags & Nsw) && !in_signed(sa + sb)) return poison;
    return ok(ua + ub);
  case Op::Sub:
    if ((flags & Nuw) && ua < ub) return poison;
    if ((flags & Nsw) && !in_signed(sa - sb)) return poison;
    return ok(ua - ub);
  case Op::Mul:
    if ((flags & Nuw) && ua * ub > mask(w)) return poison;
    if ((flags & Nsw) && !in_signed(sa * sb)) return poison;
    return ok(ua * ub);
  case Op::UDiv:
    if ((flags & Exact) && ua % ub) return poison;
    return ok(ua / ub);
  case Op::SDiv:
    if ((flags & Exact) && sa % sb) return poison;
    return ok(static_cast<uint64_t>(sa / sb));
  case Op::URem:
    return ok(ua % ub);
  case Op::SRem:
    return ok(static_cast<uint64_t>(sa % sb));
  case Op::Shl:
    if (ub >= w) return poison;
    if ((flags & Nuw) && (ua << ub) > mask(w)) return poison;
    if ((flags & Nsw) && !in_signed(sa * (int64_t{1} << ub))) return poison;
    return ok(ua << ub);
  case Op::LShr:
    if (ub >= w) return poison;
    if ((flags & Exact) && ua % (uint64_t{1} << ub)) return poison;
    return ok(ua >> ub);
  case Op::AShr: {
    if (ub >= w) return poison;
    if ((flags & Exact) && ua % (uint64_t{1} << ub)) return poison;
    // floor division by 2^b
    int64_t d = int64_t{1} << ub;
    int64_t q = sa >= 0 ? sa / d : -((-sa + d - 1) / d);
    return ok(static_cast<uint64_t>(q));
  }
  case Op::And: return ok(ua & ub);
  case Op::Or: return ok(ua | ub);
  case Op::Xor: return ok(ua ^ ub);
  default: break;
  }
  return poison;
}

inline bool compare(unsigned pred, unsigned w, uint64_t a, uint64_t b) {
  int64_t sa = as_signed(a, w), sb = as_signed(b, w);
  switch (pred) {
  case 0: return a == b;
  case 1: return a != b;
  case 2: return a < b;
  case 3: return a <= b;
  case 4: return a > b;
  case 5: return a >= b;
  case 6: return sa < sb;
  case 7: return sa <= sb;
  case 8: return sa > sb;
  default: return sa >= sb;
  }
}

inline RSet all_ints(unsigned w) {
  RSet s;
  for (uint64_t v = 0; v <= mask(w); ++v)
    s.insert({R::Int, v});
  return s;
}

/// Possible results of `e` for the given parameter values.
inline RSet eval(const ExprPtr &e, const std::vector<uint64_t> &args) {
  switch (e->op) {
  case Op::Param: return {{R::Int, args[e->value]}};
  case Op::Const: return {{R::Int, e->value}};
  case Op::Undef: return all_ints(e->width);
  case Op::Poison: return {{R::Poison}};
  default: break;
  }
  std::vector<RSet> ks;
  bool ub = false;
  for (const auto &k : e->kids) {
    RSet s = eval(k, args);
    if (s.erase({R::UB}))
      ub = true;
    ks.push_back(std::move(s));
  }
  RSet out;
  if (ub)
    out.insert({R::UB});
  if (std::any_of(ks.begin(), ks.end(),
                  [](const RSet &s) { return s.empty(); }))
    return out;

  switch (e->op) {
  case Op::Select:
    for (const R &c : ks[0]) {
      if (c.kind == R::Poison) {
        out.insert({R::Poison});
        continue;
      }
      const RSet &arm = c.v ? ks[1] : ks[2];
      out.insert(arm.begin(), arm.end());
    }
    return out;
  case Op::ZExt: case Op::SExt: case Op::Trunc:
    for (const R &a : ks[0]) {
      if (a.kind == R::Poison) {
        out.insert(a);
      } else if (e->op == Op::SExt) {
        out.insert({R::Int, static_cast<uint64_t>(
                                as_signed(a.v, e->kids[0]->width)) &
                                mask(e->width)});
      } else {
        out.insert({R::Int, a.v & mask(e->width)});
      }
    }
    return out;
  case Op::ICmp:
    for (const R &a : ks[0])
      for (const R &b : ks[1]) {
        if (a.kind == R::Poison || b.kind == R::Poison)
          out.insert({R::Poison});
        else
          out.insert({R::Int, compare(static_cast<unsigned>(e->value),
                                      e->kids[0]->width, a.v, b.v)});
      }
    return out;
  default:
    for (const R &a : ks[0])
      for (const R &b : ks[1])
        out.insert(binop(e->op, e->flags, e->width, a, b));
    return out;
  }
}

enum class Why { None, ReturnValue, NewUB };

/// Reasons the target fails to refine the source on one input.
inline std::set<Why> failure(const RSet &src, const RSet &tgt) {
  std::set<Why> out;
  if (src.count({R::UB}))
    return out;
  bool src_poison = src.count({R::Poison});
  for (const R &t : tgt) {
    if (t.kind == R::UB)
      out.insert(Why::NewUB);
    else if (!src_poison && !src.count(t))
      out.insert(Why::ReturnValue);
  }
  return out;
}

/// Every assignment of the parameter widths, in no particular order.
inline std::vector<std::vector<uint64_t>>
all_inputs(const std::vector<unsigned> &widths) {
  std::vector<std::vector<uint64_t>> out{{}};
  for (unsigned w : widths) {
    std::vector<std::vector<uint64_t>> next;
    for (const auto &prefix : out)
      for (uint64_t v = 0; v <= mask(w); ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

} // namespace exprgen
