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

#include "llmtv/fuzzer.h"

#include <algorithm>
#include <chrono>

namespace llmtv {

ReasonSet fuzzable_reasons(const ReasonSet &reasons) {
  ReasonSet out;
  for (UnsoundReason r : reasons)
    if (r != UnsoundReason::NewUB)
      out.insert(r);
  return out;
}

std::vector<uint64_t> InputGenerator::boundary_set(unsigned width) {
  std::vector<uint64_t> out = boundary_values(width);
  for (uint64_t p : {2, 4, 8, 16}) {
    uint64_t v = p & width_mask(width);
    if (std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  }
  return out;
}

InputGenerator::InputGenerator(InputLayout layout, const ReasonSet &reasons,
                               uint64_t seed)
    : layout_(std::move(layout)), rng_(seed) {
  use_return_ = reasons.count(UnsoundReason::ReturnValue) != 0;
  use_memory_ = reasons.count(UnsoundReason::Memory) != 0;
  if (!use_return_ && !use_memory_)
    throw RejectedReason("no fuzzable reason (need return value or memory)");
}

Input InputGenerator::next() {
  FuzzStrategy s;
  if (use_return_ && use_memory_)
    s = trial_ % 2 == 0 ? FuzzStrategy::ReturnValue : FuzzStrategy::Memory;
  else
    s = use_return_ ? FuzzStrategy::ReturnValue : FuzzStrategy::Memory;
  ++trial_;
  return generate(s);
}

Input InputGenerator::generate(FuzzStrategy strategy) {
  last_ = strategy;
  Input in;
  in.mem = layout_.blank_memory();
  in.args.resize(layout_.params.size());

  if (strategy == FuzzStrategy::ReturnValue) {
    const uint64_t k = stats_.return_value_trials++;
    for (size_t i = 0; i < layout_.params.size(); ++i) {
      Type t = layout_.params[i].ty;
      if (t.is_ptr()) {
        in.args[i] = layout_.buffer_pointer(i);
        continue;
      }
      auto set = boundary_set(t.width);
      uint64_t v;
      if (k < set.size())
        v = set[k]; // initial sweep over the boundary set
      else if (below(2) == 0)
        v = set[below(set.size())];
      else
        v = uniform(t.width);
      in.args[i] = Value::integer(t.width, v);
    }
    return in;
  }

  // Memory strategy. Each i1 parameter starts at a random value and flips on
  // every trial, so any two consecutive trials cover both values.
  const bool flip = stats_.memory_trials++ > 0;
  std::vector<uint64_t> flags;
  size_t flag_idx = 0;
  for (size_t i = 0; i < layout_.params.size(); ++i) {
    Type t = layout_.params[i].ty;
    if (t.is_ptr()) {
      in.args[i] = layout_.buffer_pointer(i);
      continue;
    }
    uint64_t v;
    if (t.width == 1) {
      v = flip ? !pending_flags_.at(flag_idx) : below(2);
      ++flag_idx;
      flags.push_back(v);
    } else {
      auto set = boundary_set(t.width);
      v = below(4) != 0 ? set[below(set.size())] : uniform(t.width);
    }
    in.args[i] = Value::integer(t.width, v);
  }
  pending_flags_ = std::move(flags);

  for (auto &blk : in.mem.blocks) {
    if (!blk.elem.is_int())
      continue;
    const unsigned w = blk.elem.width;
    for (auto &cell : blk.cells) {
      uint64_t v = 0;
      switch (below(4)) {
      case 0: v = 0; break;
      case 1: v = 1; break;
      case 2: v = width_mask(w); break;
      default: v = uniform(w); break;
      }
      cell = Value::integer(w, v);
    }
  }
  return in;
}

Input generate_input(const TransformationPair &pair, const ReasonSet &reasons,
                     std::mt19937_64 &rng, unsigned cells_per_ptr) {
  InputGenerator gen(infer_layout(pair, cells_per_ptr), fuzzable_reasons(reasons),
                     rng());
  return gen.next();
}

DivergenceResult run_differential(const Program &src, const Program &tgt,
                                  const Input &input, uint64_t fuel,
                                  UndefBudget budget) {
  DivergenceResult d;
  d.src = outcome_set(src, input.args, input.mem, fuel, budget);
  d.tgt = outcome_set(tgt, input.args, input.mem, fuel, budget);
  d.refinement = outcome_refines(d.tgt, d.src);
  if (d.refinement.out_of_fuel) {
    d.discarded = true;
    return d;
  }
  // Only a fully enumerated source can witness a violation.
  if (d.refinement.holds || !d.src.exhaustive)
    return d;
  if (d.refinement.reasons.count(UnsoundReason::ReturnValue))
    d.reason = UnsoundReason::ReturnValue;
  else if (d.refinement.reasons.count(UnsoundReason::Memory))
    d.reason = UnsoundReason::Memory;
  d.diverged = d.reason.has_value();
  return d;
}

DivergenceResult run_differential(const TransformationPair &pair,
                                  const Input &input, uint64_t fuel,
                                  UndefBudget budget) {
  return run_differential(Program(pair.src), Program(pair.tgt), input, fuel,
                          budget);
}

namespace {

CounterExample to_counterexample(const Input &in, const DivergenceResult &d) {
  CounterExample cex;
  cex.args = in.args;
  cex.mem0 = in.mem;
  // Point the witness at the first target outcome with a fuzzable reason.
  size_t w = *d.refinement.witness;
  size_t s = *d.refinement.src_match;
  for (size_t t = 0; t < d.tgt.outcomes.size(); ++t) {
    if (!d.tgt.outcomes[t].is_returned())
      continue;
    OutcomeSet one;
    one.outcomes = {d.tgt.outcomes[t]};
    one.choices = {d.tgt.choices[t]};
    RefinementResult rr = outcome_refines(one, d.src);
    if (!rr.holds) {
      w = t;
      s = *rr.src_match;
      break;
    }
  }
  cex.tgt_outcome = d.tgt.outcomes[w];
  cex.tgt_choices = d.tgt.choices[w];
  cex.src_outcome = d.src.outcomes[s];
  cex.src_choices = d.src.choices[s];
  return cex;
}

} // namespace

FuzzReport fuzz(const TransformationPair &pair, const ReasonSet &reasons,
                const FuzzConfig &cfg) {
  const ReasonSet wanted = fuzzable_reasons(reasons);
  if (wanted.empty())
    throw RejectedReason("fuzzing only targets return-value or memory "
                         "unsoundness");
  if (cfg.iterations == 0 || cfg.fuel == 0)
    throw std::invalid_argument("fuzz iterations and fuel must be positive");

  const Program src(pair.src), tgt(pair.tgt);
  InputGenerator gen(infer_layout(pair, cfg.mem_cells_per_ptr_param), wanted,
                     cfg.seed);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(cfg.time_budget_ms);

  FuzzReport report;
  for (uint64_t trial = 0; trial < cfg.iterations; ++trial) {
    if (trial % 64 == 0 && std::chrono::steady_clock::now() > deadline)
      break;
    Input in = gen.next();
    report.trials_run = trial + 1;
    DivergenceResult d = run_differential(src, tgt, in, cfg.fuel, cfg.undef);
    if (d.discarded) {
      ++report.stats.discarded;
      continue;
    }
    if (!d.diverged)
      continue;
    report.cex = shrink(pair, to_counterexample(in, d), cfg.fuel, cfg.undef);
    report.reason = d.reason;
    break;
  }
  StrategyStats gs = gen.stats();
  report.stats.return_value_trials = gs.return_value_trials;
  report.stats.memory_trials = gs.memory_trials;
  return report;
}

CounterExample shrink(const TransformationPair &pair, const CounterExample &cex,
                      uint64_t fuel, UndefBudget budget) {
  const Program src(pair.src), tgt(pair.tgt);
  Input cur{cex.args, cex.mem0};
  CounterExample best = cex;

  auto try_candidate = [&](const Input &cand) {
    DivergenceResult d = run_differential(src, tgt, cand, fuel, budget);
    if (!d.diverged)
      return false;
    cur = cand;
    best = to_counterexample(cand, d);
    return true;
  };

  auto shrink_value = [&](auto &&slot) {
    bool moved = false;
    for (;;) {
      Input cand = cur;
      Value &v = slot(cand);
      if (!v.is_int() || v.bits == 0)
        return moved;
      v = Value::integer(v.ty.width, v.bits / 2);
      if (!try_candidate(cand))
        return moved;
      moved = true;
    }
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < cur.args.size(); ++i)
      changed |= shrink_value([i](Input &in) -> Value & { return in.args[i]; });
    for (uint32_t b = 0; b < cur.mem.param_blocks; ++b)
      for (size_t c = 0; c < cur.mem.blocks[b].cells.size(); ++c)
        changed |= shrink_value(
            [b, c](Input &in) -> Value & { return in.mem.blocks[b].cells[c]; });
  }
  return best;
}

} // namespace llmtv
