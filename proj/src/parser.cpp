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

// Hand-written lexer and recursive-descent parser for the .mir.ll syntax.
// Whitespace (including newlines) is insignificant; instruction boundaries
// follow from the grammar, so a whole function may sit on one line.

#include "llmtv/ir.h"

#include <cctype>
#include <charconv>

namespace llmtv {
namespace {

enum class Tok : uint8_t {
  Eof,
  Word,   // bare identifier: opcodes, types, labels, keywords
  Local,  // %name
  Global, // @name
  Int,    // optionally signed decimal literal
  Comma,
  Colon,
  Equal,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  int line = 1;
  int col = 1;
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-' || c == '$';
}

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      switch (c) {
      case ',': t.kind = Tok::Comma; break;
      case ':': t.kind = Tok::Colon; break;
      case '=': t.kind = Tok::Equal; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      default: break;
      }
      if (t.kind != Tok::Eof) {
        t.text = std::string(1, c);
        advance();
        out.push_back(std::move(t));
        continue;
      }
      if (c == '%' || c == '@') {
        advance();
        std::string name = take_ident();
        if (name.empty())
          throw ParseError(t.line, t.col + 1, "expected identifier");
        t.kind = c == '%' ? Tok::Local : Tok::Global;
        t.text = std::move(name);
      } else if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        t.text += c;
        advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text += src_[pos_];
          advance();
        }
        if (t.text == "-")
          throw ParseError(t.line, t.col, "expected integer");
        if (pos_ < src_.size() && is_ident_char(src_[pos_])) {
          // Labels such as `1b` or `0x` are not supported.
          throw ParseError(line_, col_, "unexpected character in number");
        }
      } else if (is_ident_char(c)) {
        t.kind = Tok::Word;
        t.text = take_ident();
      } else {
        throw ParseError(t.line, t.col,
                         std::string("unexpected '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string take_ident() {
    std::string s;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) {
      s += src_[pos_];
      advance();
    }
    return s;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::optional<BinOpcode> binop_from(std::string_view w) {
  static constexpr std::pair<std::string_view, BinOpcode> table[] = {
      {"add", BinOpcode::Add},   {"sub", BinOpcode::Sub},
      {"mul", BinOpcode::Mul},   {"udiv", BinOpcode::UDiv},
      {"sdiv", BinOpcode::SDiv}, {"urem", BinOpcode::URem},
      {"srem", BinOpcode::SRem}, {"shl", BinOpcode::Shl},
      {"lshr", BinOpcode::LShr}, {"ashr", BinOpcode::AShr},
      {"and", BinOpcode::And},   {"or", BinOpcode::Or},
      {"xor", BinOpcode::Xor},
  };
  for (auto [name, op] : table)
    if (name == w)
      return op;
  return std::nullopt;
}

std::optional<ICmpPred> pred_from(std::string_view w) {
  static constexpr std::pair<std::string_view, ICmpPred> table[] = {
      {"eq", ICmpPred::Eq},   {"ne", ICmpPred::Ne},   {"ult", ICmpPred::Ult},
      {"ule", ICmpPred::Ule}, {"ugt", ICmpPred::Ugt}, {"uge", ICmpPred::Uge},
      {"slt", ICmpPred::Slt}, {"sle", ICmpPred::Sle}, {"sgt", ICmpPred::Sgt},
      {"sge", ICmpPred::Sge},
  };
  for (auto [name, p] : table)
    if (name == w)
      return p;
  return std::nullopt;
}

std::optional<CastOpcode> cast_from(std::string_view w) {
  if (w == "zext")
    return CastOpcode::ZExt;
  if (w == "sext")
    return CastOpcode::SExt;
  if (w == "trunc")
    return CastOpcode::Trunc;
  return std::nullopt;
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Function parse() {
    Function f;
    expect_word("define");
    f.ret_ty = parse_type_or_void();
    f.name = expect(Tok::Global, "expected function name").text;
    expect(Tok::LParen, "expected '('");
    if (!at(Tok::RParen)) {
      for (;;) {
        Param p;
        p.ty = parse_type();
        p.name = expect(Tok::Local, "expected parameter name").text;
        f.params.push_back(std::move(p));
        if (!accept(Tok::Comma))
          break;
      }
    }
    expect(Tok::RParen, "expected ')'");
    expect(Tok::LBrace, "expected '{'");

    while (!at(Tok::RBrace)) {
      if (at(Tok::Eof))
        error(peek(), "expected '}'");
      if (at(Tok::Word) && peek(1).kind == Tok::Colon) {
        Block b;
        b.label = next().text;
        next();
        f.blocks.push_back(std::move(b));
        continue;
      }
      if (f.blocks.empty())
        error(peek(), "expected block label");
      f.blocks.back().insts.push_back(parse_instruction());
    }
    next();
    if (!at(Tok::Eof))
      error(peek(), "unexpected tokens after function body");
    return f;
  }

private:
  const Token &peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w) const {
    return at(Tok::Word) && peek().text == w;
  }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (!at(k))
      return false;
    next();
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!at_word(w))
      return false;
    next();
    return true;
  }

  [[noreturn]] void error(const Token &t, const std::string &msg) const {
    throw ParseError(t.line, t.col, msg);
  }

  const Token &expect(Tok k, const std::string &msg) {
    if (!at(k))
      error(peek(), msg);
    return next();
  }

  void expect_word(std::string_view w) {
    if (!at_word(w))
      error(peek(), "expected '" + std::string(w) + "'");
    next();
  }

  std::optional<Type> try_type() {
    if (!at(Tok::Word))
      return std::nullopt;
    const std::string &w = peek().text;
    if (w == "ptr") {
      next();
      return Type::ptr();
    }
    if (w.size() > 1 && w[0] == 'i') {
      unsigned width = 0;
      auto [p, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), width);
      if (ec == std::errc() && p == w.data() + w.size()) {
        if (!is_valid_int_width(width))
          error(peek(), "unsupported integer width " + w);
        next();
        return Type::i(width);
      }
    }
    return std::nullopt;
  }

  Type parse_type() {
    if (auto t = try_type())
      return *t;
    error(peek(), "expected type");
  }

  Type parse_int_type() {
    const Token &t = peek();
    Type ty = parse_type();
    if (!ty.is_int())
      error(t, "expected integer type");
    return ty;
  }

  std::optional<Type> parse_type_or_void() {
    if (accept_word("void"))
      return std::nullopt;
    return parse_type();
  }

  uint64_t parse_int_literal(const Token &t, Type ty) {
    const std::string &s = t.text;
    bool neg = s[0] == '-';
    uint64_t mag = 0;
    auto first = s.data() + (neg ? 1 : 0);
    auto [p, ec] = std::from_chars(first, s.data() + s.size(), mag);
    if (ec != std::errc() || p != s.data() + s.size())
      error(t, "integer literal out of range");
    unsigned w = ty.width;
    if (neg) {
      uint64_t limit = uint64_t{1} << (w - 1);
      if (w == 1)
        limit = 1;
      if (mag > limit)
        error(t, "integer literal does not fit in " + ty.str());
      return (~mag + 1) & width_mask(w);
    }
    if (mag > width_mask(w))
      error(t, "integer literal does not fit in " + ty.str());
    return mag;
  }

  Operand parse_operand(Type ty) {
    const Token &t = peek();
    switch (t.kind) {
    case Tok::Local:
      return Operand::reg(next().text);
    case Tok::Int:
      if (!ty.is_int())
        error(t, "integer constant used as " + ty.str());
      next();
      return Operand::constant(ty, parse_int_literal(t, ty));
    case Tok::Word:
      if (t.text == "undef") {
        next();
        return Operand::undef(ty);
      }
      if (t.text == "poison") {
        next();
        return Operand::poison(ty);
      }
      if (t.text == "null") {
        if (!ty.is_ptr())
          error(t, "null used as " + ty.str());
        next();
        return Operand::null();
      }
      if ((t.text == "true" || t.text == "false") && ty.is_int()) {
        if (ty.width != 1)
          error(t, "boolean constant used as " + ty.str());
        next();
        return Operand::constant(ty, t.text == "true" ? 1 : 0);
      }
      break;
    default:
      break;
    }
    error(t, "expected operand");
  }

  std::string parse_label_ref() {
    expect_word("label");
    return expect(Tok::Local, "expected block label").text;
  }

  Instruction parse_instruction() {
    Instruction inst;
    if (at(Tok::Local)) {
      inst.result = next().text;
      expect(Tok::Equal, "expected '='");
    }
    const Token &op_tok = peek();
    if (!at(Tok::Word))
      error(op_tok, "expected instruction");
    std::string op = next().text;

    if (auto bop = binop_from(op)) {
      BinOp b{*bop};
      for (;;) {
        if (accept_word("nsw"))
          b.flags |= kNsw;
        else if (accept_word("nuw"))
          b.flags |= kNuw;
        else if (accept_word("exact"))
          b.flags |= kExact;
        else
          break;
      }
      b.ty = parse_int_type();
      b.lhs = parse_operand(b.ty);
      expect(Tok::Comma, "expected ',' before second operand");
      b.rhs = parse_operand(b.ty);
      inst.op = std::move(b);
    } else if (op == "icmp") {
      auto pred = at(Tok::Word) ? pred_from(peek().text) : std::nullopt;
      if (!pred)
        error(peek(), "expected icmp predicate");
      next();
      ICmp c{*pred};
      c.ty = parse_type();
      c.lhs = parse_operand(c.ty);
      expect(Tok::Comma, "expected ',' before second operand");
      c.rhs = parse_operand(c.ty);
      inst.op = std::move(c);
    } else if (op == "select") {
      Select s;
      const Token &ct = peek();
      if (parse_type() != Type::i(1))
        error(ct, "select condition must be i1");
      s.cond = parse_operand(Type::i(1));
      expect(Tok::Comma, "expected ','");
      s.ty = parse_type();
      s.tval = parse_operand(s.ty);
      expect(Tok::Comma, "expected ','");
      const Token &ft = peek();
      if (parse_type() != s.ty)
        error(ft, "select arms must have the same type");
      s.fval = parse_operand(s.ty);
      inst.op = std::move(s);
    } else if (auto cop = cast_from(op)) {
      Cast c{*cop};
      c.from = parse_int_type();
      c.src = parse_operand(c.from);
      expect_word("to");
      c.to = parse_int_type();
      inst.op = std::move(c);
    } else if (op == "alloca") {
      Alloca a;
      a.ty = parse_type();
      if (accept(Tok::Comma)) {
        Type cty = parse_int_type();
        const Token &nt = expect(Tok::Int, "expected element count");
        uint64_t n = parse_int_literal(nt, cty);
        if (n == 0 || n > 4096)
          error(nt, "alloca count must be in [1, 4096]");
        a.count = static_cast<uint32_t>(n);
      }
      inst.op = std::move(a);
    } else if (op == "load") {
      Load l;
      l.ty = parse_type();
      expect(Tok::Comma, "expected ','");
      const Token &pt = peek();
      if (!parse_type().is_ptr())
        error(pt, "load address must be ptr");
      l.ptr = parse_operand(Type::ptr());
      inst.op = std::move(l);
    } else if (op == "store") {
      Store s;
      s.ty = parse_type();
      s.val = parse_operand(s.ty);
      expect(Tok::Comma, "expected ','");
      const Token &pt = peek();
      if (!parse_type().is_ptr())
        error(pt, "store address must be ptr");
      s.ptr = parse_operand(Type::ptr());
      inst.op = std::move(s);
    } else if (op == "br") {
      Br b;
      if (at_word("label")) {
        b.then_label = parse_label_ref();
      } else {
        const Token &ct = peek();
        if (parse_type() != Type::i(1))
          error(ct, "branch condition must be i1");
        b.cond = parse_operand(Type::i(1));
        expect(Tok::Comma, "expected ','");
        b.then_label = parse_label_ref();
        expect(Tok::Comma, "expected ','");
        b.else_label = parse_label_ref();
      }
      inst.op = std::move(b);
    } else if (op == "phi") {
      Phi p;
      p.ty = parse_type();
      for (;;) {
        expect(Tok::LBracket, "expected '['");
        PhiIncoming in;
        in.value = parse_operand(p.ty);
        expect(Tok::Comma, "expected ','");
        in.block = expect(Tok::Local, "expected block label").text;
        expect(Tok::RBracket, "expected ']'");
        p.incomings.push_back(std::move(in));
        if (!accept(Tok::Comma))
          break;
      }
      inst.op = std::move(p);
    } else if (op == "ret") {
      Ret r;
      if (!accept_word("void")) {
        r.ty = parse_type();
        r.val = parse_operand(*r.ty);
      }
      inst.op = std::move(r);
    } else if (op == "call") {
      CallExternal c;
      c.ret_ty = parse_type_or_void();
      c.callee = expect(Tok::Global, "expected callee").text;
      expect(Tok::LParen, "expected '('");
      if (!at(Tok::RParen)) {
        for (;;) {
          CallArg a;
          a.ty = parse_type();
          a.value = parse_operand(a.ty);
          c.args.push_back(std::move(a));
          if (!accept(Tok::Comma))
            break;
        }
      }
      expect(Tok::RParen, "expected ')'");
      inst.op = std::move(c);
    } else {
      error(op_tok, "unknown instruction '" + op + "'");
    }
    return inst;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

} // namespace

Function parse_function_unchecked(std::string_view text) {
  return Parser(Lexer(text).run()).parse();
}

Function parse_function(std::string_view text) {
  Function f = parse_function_unchecked(text);
  if (auto diags = validate_ssa(f); !diags.empty())
    throw SsaError(std::move(diags));
  return f;
}

} // namespace llmtv
