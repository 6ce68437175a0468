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

// Reason-directed differential fuzzer. Searches for a concrete input on
// which the target's return value or final memory fails to refine the
// source's, using a generation strategy chosen by the predicted reason.

#include "llmtv/checker.h"

#include <random>

namespace llmtv {

struct FuzzConfig {
  uint64_t iterations = 100'000;
  uint64_t seed = 1;
  uint64_t fuel = 10'000;
  uint64_t time_budget_ms = 10'000;
  unsigned mem_cells_per_ptr_param = 2;
  UndefBudget undef;
};

enum class FuzzStrategy : uint8_t { ReturnValue, Memory };

struct StrategyStats {
  uint64_t return_value_trials = 0;
  uint64_t memory_trials = 0;
  uint64_t discarded = 0; // trials dropped because a side ran out of fuel
};

struct FuzzReport {
  std::optional<CounterExample> cex; // set iff a counterexample was found
  std::optional<UnsoundReason> reason;
  uint64_t trials_run = 0;
  StrategyStats stats;

  bool found() const { return cex.has_value(); }
};

/// Thrown when none of the requested reasons can be fuzzed (NewUB only).
class RejectedReason : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Reasons the fuzzer acts on: the requested set restricted to
/// {ReturnValue, Memory}.
ReasonSet fuzzable_reasons(const ReasonSet &reasons);

/// Seeded input generator. With both reasons requested the strategies
/// alternate per trial, ReturnValue first.
class InputGenerator {
public:
  InputGenerator(InputLayout layout, const ReasonSet &reasons, uint64_t seed);

  Input next();
  Input generate(FuzzStrategy strategy);

  FuzzStrategy last_strategy() const { return last_; }
  const StrategyStats &stats() const { return stats_; }

  /// Boundary set used by the return-value strategy.
  static std::vector<uint64_t> boundary_set(unsigned width);

private:
  uint64_t below(uint64_t n) { return rng_() % n; }
  uint64_t uniform(unsigned width) { return rng_() & width_mask(width); }

  InputLayout layout_;
  bool use_return_ = false;
  bool use_memory_ = false;
  std::mt19937_64 rng_;
  uint64_t trial_ = 0;
  FuzzStrategy last_ = FuzzStrategy::ReturnValue;
  StrategyStats stats_;
  std::vector<uint64_t> pending_flags_; // i1 values of the previous trial
};

/// One-shot convenience over InputGenerator.
Input generate_input(const TransformationPair &pair, const ReasonSet &reasons,
                     std::mt19937_64 &rng, unsigned cells_per_ptr = 2);

struct DivergenceResult {
  bool diverged = false;
  bool discarded = false; // out of fuel on either side
  std::optional<UnsoundReason> reason;
  OutcomeSet src;
  OutcomeSet tgt;
  RefinementResult refinement;
};

DivergenceResult run_differential(const Program &src, const Program &tgt,
                                  const Input &input, uint64_t fuel,
                                  UndefBudget budget = {});
DivergenceResult run_differential(const TransformationPair &pair,
                                  const Input &input, uint64_t fuel,
                                  UndefBudget budget = {});

/// Throws RejectedReason when `reasons` holds nothing fuzzable.
FuzzReport fuzz(const TransformationPair &pair, const ReasonSet &reasons,
                const FuzzConfig &cfg);

/// Greedily halves arguments and memory cells toward zero while the
/// divergence persists.
CounterExample shrink(const TransformationPair &pair, const CounterExample &cex,
                      uint64_t fuel, UndefBudget budget = {});

} // namespace llmtv
