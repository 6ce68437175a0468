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

#include "support/exprgen.h"
#include "support/fixtures.h"

#include <gtest/gtest.h>

using namespace llmtv;

namespace {

constexpr uint64_t kFuel = 10'000;

Value i8(int64_t v) { return Value::integer(8, static_cast<uint64_t>(v)); }

ExecOutcome run(const std::string &text, std::vector<Value> args,
                MemoryState mem = {}) {
  ReplayChooser none;
  return execute(parse_function(text), args, mem, kFuel, none);
}

OutcomeSet outcomes(const std::string &text, std::vector<Value> args,
                    MemoryState mem = {}) {
  return outcome_set(Program(parse_function(text)), args, mem, kFuel);
}

ExecOutcome ret(std::optional<Value> v, MemoryState mem = {}) {
  return ExecOutcome::returned(v, std::move(mem));
}

MemoryState one_cell(Value v) {
  MemoryState m;
  m.blocks.push_back({Type::i(8), {v}});
  m.param_blocks = 1;
  return m;
}

TEST(Execute, Identity) {
  EXPECT_EQ(run(fixtures::fn_i8("  ret i8 %x"), {i8(7)}), ret(i8(7)));
}

TEST(Execute, DivisionByZeroIsUB) {
  auto o = run(fixtures::fn_i8("  %r = udiv i8 1, %x\n  ret i8 %r"), {i8(0)});
  ASSERT_TRUE(o.is_ub());
  EXPECT_EQ(o.ub, UBKind::DivByZero);
  EXPECT_EQ(o.at, (Location{"entry", 0}));
}

TEST(Execute, NswOverflowIsPoison) {
  auto o =
      run(fixtures::fn_i8("  %r = add nsw i8 %x, 1\n  ret i8 %r"), {i8(127)});
  EXPECT_EQ(o, ret(Value::poison(Type::i(8))));
}

TEST(Execute, NuwOverflowIsPoison) {
  auto o =
      run(fixtures::fn_i8("  %r = add nuw i8 %x, 1\n  ret i8 %r"), {i8(255)});
  EXPECT_EQ(o, ret(Value::poison(Type::i(8))));
  auto ok =
      run(fixtures::fn_i8("  %r = add nuw i8 %x, 1\n  ret i8 %r"), {i8(127)});
  EXPECT_EQ(ok, ret(i8(128)));
}

TEST(Execute, SignedDivisionOverflowIsUB) {
  auto o = run(fixtures::fn_i8("  %r = sdiv i8 %x, -1\n  ret i8 %r"),
               {i8(-128)});
  ASSERT_TRUE(o.is_ub());
  EXPECT_EQ(o.ub, UBKind::DivOverflow);
}

TEST(Execute, OversizedShiftIsPoison) {
  auto o = run(fixtures::fn_i8("  %r = shl i8 %x, 8\n  ret i8 %r"), {i8(1)});
  EXPECT_EQ(o, ret(Value::poison(Type::i(8))));
}

TEST(Execute, PoisonPropagatesThroughArithmetic) {
  auto o = run(fixtures::fn_i8("  %p = add nsw i8 %x, 1\n"
                               "  %r = mul i8 %p, 0\n  ret i8 %r"),
               {i8(127)});
  EXPECT_EQ(o, ret(Value::poison(Type::i(8))));
}

TEST(Execute, BranchOnPoisonIsUB) {
  auto o = run("define i8 @f(i8 %x) {\nentry:\n"
               "  %p = add nsw i8 %x, 1\n"
               "  %c = icmp eq i8 %p, 0\n"
               "  br i1 %c, label %a, label %b\n"
               "a:\n  ret i8 0\nb:\n  ret i8 1\n}\n",
               {i8(127)});
  ASSERT_TRUE(o.is_ub());
  EXPECT_EQ(o.ub, UBKind::BranchOnPoison);
}

TEST(Execute, NullDereferenceIsUB) {
  auto o = run("define i8 @f(ptr %p) {\nentry:\n  %v = load i8, ptr %p\n"
               "  ret i8 %v\n}\n",
               {Value::null()}, one_cell(i8(3)));
  ASSERT_TRUE(o.is_ub());
  EXPECT_EQ(o.ub, UBKind::NullDeref);
}

TEST(Execute, OutOfRangePointerIsUB) {
  auto o = run("define i8 @f(ptr %p) {\nentry:\n  %v = load i8, ptr %p\n"
               "  ret i8 %v\n}\n",
               {Value::pointer(0, 5)}, one_cell(i8(3)));
  ASSERT_TRUE(o.is_ub());
  EXPECT_EQ(o.ub, UBKind::OutOfBounds);
}

TEST(Execute, StoreUpdatesMemory) {
  auto o = run("define void @f(ptr %p, i8 %v) {\nentry:\n"
               "  store i8 %v, ptr %p\n  ret void\n}\n",
               {Value::pointer(0, 0), i8(9)}, one_cell(i8(0)));
  EXPECT_EQ(o, ret(std::nullopt, one_cell(i8(9))));
}

TEST(Execute, AllocaCellsStartUndef) {
  auto o = run("define i8 @f(i8 %x) {\nentry:\n  %a = alloca i8\n"
               "  %v = load i8, ptr %a\n  ret i8 %v\n}\n",
               {i8(0)});
  ASSERT_TRUE(o.is_returned());
  // Resolved at the return with the default chooser.
  EXPECT_EQ(o.ret, i8(0));
}

TEST(Execute, LoopRunsOutOfFuel) {
  auto o = run("define i8 @f(i8 %x) {\nentry:\n  br label %loop\n"
               "loop:\n  br label %loop\n}\n",
               {i8(0)});
  EXPECT_TRUE(o.is_out_of_fuel());
}

TEST(Execute, PhiSelectsIncomingEdge) {
  auto p = fixtures::load("hoist_udiv");
  ReplayChooser none;
  EXPECT_EQ(execute(p.src, std::vector{i8(7), i8(0)}, {}, kFuel, none),
            ret(i8(0)));
  EXPECT_EQ(execute(p.src, std::vector{i8(7), i8(2)}, {}, kFuel, none),
            ret(i8(3)));
}

TEST(Execute, ExternalCallIsRejected) {
  EXPECT_THROW(run("define void @f(i8 %x) {\nentry:\n"
                   "  call void @g(i8 %x)\n  ret void\n}\n",
                   {i8(0)}),
               std::logic_error);
}

TEST(OutcomeSet, UndefReturnHasEveryValue) {
  auto s = outcomes(fixtures::fn_i8("  ret i8 undef"), {i8(0)});
  EXPECT_TRUE(s.exhaustive);
  std::set<uint64_t> seen;
  for (const auto &o : s.outcomes)
    seen.insert(o.ret->bits);
  EXPECT_EQ(seen.size(), 256u);
}

TEST(OutcomeSet, NoUndefIsSingleton) {
  auto s = outcomes(fixtures::fn_i8("  %r = add i8 %x, 1\n  ret i8 %r"),
                    {i8(4)});
  EXPECT_TRUE(s.exhaustive);
  ASSERT_EQ(s.outcomes.size(), 1u);
  EXPECT_EQ(s.outcomes[0], ret(i8(5)));
}

TEST(OutcomeSet, Constant) {
  auto s = outcomes(fixtures::fn_i8("  ret i8 7"), {i8(0)});
  ASSERT_EQ(s.outcomes.size(), 1u);
  EXPECT_EQ(s.outcomes[0], ret(i8(7)));
}

TEST(OutcomeSet, UndefMaskedByAndIsBounded) {
  auto s = outcomes(fixtures::fn_i8("  %r = and i8 undef, 3\n  ret i8 %r"),
                    {i8(0)});
  std::set<uint64_t> seen;
  for (const auto &o : s.outcomes)
    seen.insert(o.ret->bits);
  EXPECT_EQ(seen, (std::set<uint64_t>{0, 1, 2, 3}));
}

TEST(OutcomeSet, OverBudgetFallsBack) {
  auto s = outcomes(fixtures::fn_i8("  %a = add i8 undef, %x\n"
                                    "  %b = add i8 undef, %a\n"
                                    "  %c = add i8 undef, %b\n  ret i8 %c"),
                    {i8(0)});
  EXPECT_FALSE(s.exhaustive);
  EXPECT_FALSE(s.outcomes.empty());
}

TEST(OutcomeSet, ChoicesReproduceOutcomes) {
  Program p(parse_function(
      fixtures::fn_i8("  %r = udiv i8 %x, undef\n  ret i8 %r")));
  auto s = outcome_set(p, std::vector{i8(200)}, {}, kFuel);
  ASSERT_EQ(s.outcomes.size(), s.choices.size());
  EXPECT_TRUE(s.contains_ub());
  for (size_t i = 0; i < s.outcomes.size(); ++i) {
    ReplayChooser c(s.choices[i]);
    EXPECT_EQ(p.run(std::vector{i8(200)}, {}, kFuel, c), s.outcomes[i]);
  }
}

TEST(ValueRefines, Vectors) {
  const Type t8 = Type::i(8);
  EXPECT_TRUE(value_refines(i8(5), Value::poison(t8)));
  EXPECT_FALSE(value_refines(Value::poison(t8), i8(5)));
  EXPECT_FALSE(value_refines(Value::poison(t8), Value::undef(t8)));
  EXPECT_TRUE(value_refines(i8(3), Value::undef(t8)));
  EXPECT_FALSE(value_refines(i8(4), i8(5)));
  EXPECT_THROW(value_refines(i8(4), Value::integer(16, 4)), std::logic_error);
}

TEST(MemoryRefines, CellWise) {
  EXPECT_TRUE(memory_refines(one_cell(i8(1)), one_cell(i8(1))));
  EXPECT_TRUE(
      memory_refines(one_cell(i8(9)), one_cell(Value::poison(Type::i(8)))));
  EXPECT_FALSE(memory_refines(one_cell(i8(1)), one_cell(i8(0))));
}

TEST(MemoryRefines, IgnoresLocalBlocks) {
  MemoryState a = one_cell(i8(1)), b = one_cell(i8(1));
  a.blocks.push_back({Type::i(8), {i8(5)}});
  EXPECT_TRUE(memory_refines(a, b));
}

OutcomeSet set_of(std::vector<ExecOutcome> os) {
  OutcomeSet s;
  s.outcomes = std::move(os);
  s.choices.resize(s.outcomes.size());
  return s;
}

TEST(OutcomeRefines, SourceUBPermitsAnything) {
  auto r = outcome_refines(set_of({ret(i8(42))}),
                           set_of({ExecOutcome::triggered_ub(
                               UBKind::DivByZero, {"entry", 0})}));
  EXPECT_TRUE(r.holds);
}

TEST(OutcomeRefines, NewUB) {
  auto r = outcome_refines(
      set_of({ExecOutcome::triggered_ub(UBKind::DivByZero, {"entry", 0})}),
      set_of({ret(i8(0))}));
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.reasons, ReasonSet{UnsoundReason::NewUB});
}

TEST(OutcomeRefines, ReturnValue) {
  auto r = outcome_refines(set_of({ret(i8(0))}), set_of({ret(i8(1))}));
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.reasons, ReasonSet{UnsoundReason::ReturnValue});
  EXPECT_EQ(r.witness, 0u);
}

TEST(OutcomeRefines, Memory) {
  auto r = outcome_refines(set_of({ret(i8(0), one_cell(i8(1)))}),
                           set_of({ret(i8(0), one_cell(i8(0)))}));
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.reasons, ReasonSet{UnsoundReason::Memory});
}

TEST(OutcomeRefines, OutOfFuelIsNeitherHoldsNorFails) {
  auto r = outcome_refines(set_of({ExecOutcome::out_of_fuel()}),
                           set_of({ret(i8(0))}));
  EXPECT_FALSE(r.holds);
  EXPECT_TRUE(r.out_of_fuel);
  EXPECT_TRUE(r.reasons.empty());
}

TEST(ValueText, RoundTrip) {
  for (const Value &v :
       {i8(-1), i8(0), Value::integer(1, 1), Value::integer(64, ~0ull),
        Value::poison(Type::i(16)), Value::undef(Type::i(8)), Value::null(),
        Value::pointer(2, 1)})
    EXPECT_EQ(parse_value(v.str()), v) << v.str();
  EXPECT_EQ(i8(-1).str(), "i8 -1");
  EXPECT_EQ(Value::integer(1, 1).str(), "i1 true");
  EXPECT_THROW(parse_value("i8"), std::invalid_argument);
  EXPECT_THROW(parse_value("i7 3"), std::invalid_argument);
}

// --- properties ------------------------------------------------------------

Value random_value(std::mt19937_64 &rng, Type ty) {
  switch (rng() % 6) {
  case 0: return Value::poison(ty);
  case 1: return Value::undef(ty);
  default: return Value::integer(ty.width, rng());
  }
}

TEST(Property, ValueRefinementIsAPreorder) {
  std::mt19937_64 rng(11);
  int cases = 0;
  for (unsigned w : {1u, 8u, 16u}) {
    const Type ty = Type::i(w);
    for (int i = 0; i < 5000; ++i, ++cases) {
      Value a = random_value(rng, ty), b = random_value(rng, ty),
            c = random_value(rng, ty);
      ASSERT_TRUE(value_refines(a, a));
      ASSERT_TRUE(value_refines(a, Value::poison(ty)));
      if (!a.is_poison())
        ASSERT_TRUE(value_refines(a, Value::undef(ty)));
      if (value_refines(a, b) && value_refines(b, c))
        ASSERT_TRUE(value_refines(a, c)) << a.str() << b.str() << c.str();
      if (value_refines(a, b) && value_refines(b, a))
        ASSERT_EQ(a, b);
    }
  }
  EXPECT_GE(cases, 10'000);
}

TEST(Property, ProgramsRefineThemselvesAndRunPurely) {
  exprgen::Generator gen(3);
  std::mt19937_64 rng(5);
  int cases = 0;
  while (cases < 10'000) {
    auto spec = gen.pair();
    Program p(parse_function(
        exprgen::print_fn(spec.params, spec.ret_width, spec.src)));
    for (int k = 0; k < 20; ++k, ++cases) {
      std::vector<Value> args;
      for (unsigned w : spec.params)
        args.push_back(Value::integer(w, rng()));
      const std::vector<Value> args_copy = args;
      MemoryState mem0 = one_cell(i8(static_cast<int64_t>(rng() % 256)));
      const MemoryState mem_copy = mem0;

      auto s = outcome_set(p, args, mem0, kFuel);
      ASSERT_EQ(mem0, mem_copy);
      ASSERT_EQ(args, args_copy);
      auto r = outcome_refines(s, s);
      ASSERT_TRUE(r.holds) << print_function(p.function());

      ReplayChooser c1(s.choices.front()), c2(s.choices.front());
      ASSERT_EQ(p.run(args, mem0, kFuel, c1), p.run(args, mem0, kFuel, c2));
    }
  }
}

TEST(Property, InterpreterAgreesWithReferenceEvaluator) {
  exprgen::Generator gen(17);
  std::mt19937_64 rng(19);
  int cases = 0;
  while (cases < 10'000) {
    auto spec = gen.pair();
    if (exprgen::count_undef(spec.src) > 0)
      continue;
    Program p(parse_function(
        exprgen::print_fn(spec.params, spec.ret_width, spec.src)));
    for (int k = 0; k < 10; ++k, ++cases) {
      std::vector<uint64_t> raw;
      std::vector<Value> args;
      for (unsigned w : spec.params) {
        raw.push_back(rng() & exprgen::mask(w));
        args.push_back(Value::integer(w, raw.back()));
      }
      auto ref = exprgen::eval(spec.src, raw);
      ASSERT_EQ(ref.size(), 1u);
      ReplayChooser none;
      auto o = p.run(args, {}, kFuel, none);
      const exprgen::R &want = *ref.begin();
      if (want.kind == exprgen::R::UB) {
        ASSERT_TRUE(o.is_ub()) << print_function(p.function());
      } else if (want.kind == exprgen::R::Poison) {
        ASSERT_TRUE(o.is_returned() && o.ret->is_poison())
            << print_function(p.function()) << o.str();
      } else {
        ASSERT_EQ(o, ret(Value::integer(spec.ret_width, want.v)))
            << print_function(p.function());
      }
    }
  }
}

} // namespace
