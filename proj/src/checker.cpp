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

#include "llmtv/checker.h"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace llmtv {

void validate_config(const CheckConfig &cfg) {
  if (cfg.max_enum_bits == 0 || cfg.fuel == 0 || cfg.undef_budget == 0 ||
      cfg.undef_bits_budget == 0 || cfg.mem_cells_per_ptr_param == 0 ||
      cfg.timeout_ms == 0 || cfg.workers == 0)
    throw std::invalid_argument("check configuration values must be positive");
}

std::string_view unknown_cause_name(UnknownCause cause) {
  switch (cause) {
  case UnknownCause::UnboundedLoop: return "unbounded_loop";
  case UnknownCause::ExternalCall: return "external_call";
  case UnknownCause::EnumerationBudgetExceeded:
    return "enumeration_budget_exceeded";
  case UnknownCause::Timeout: return "timeout";
  case UnknownCause::TruncatedUndefEnumeration:
    return "truncated_undef_enumeration";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Layout

Value InputLayout::buffer_pointer(size_t i) const {
  uint32_t block = 0;
  for (size_t k = 0; k < i; ++k)
    if (elem[k])
      ++block;
  return Value::pointer(block, 0);
}

MemoryState InputLayout::blank_memory() const {
  MemoryState m;
  for (const auto &e : elem) {
    if (!e)
      continue;
    Value zero = e->is_int() ? Value::integer(e->width, 0) : Value::null();
    m.blocks.push_back({*e, std::vector<Value>(cells_per_ptr, zero)});
  }
  m.param_blocks = static_cast<uint32_t>(m.blocks.size());
  return m;
}

namespace {

std::optional<Type> access_type(const Function &f, const std::string &name) {
  for (const auto &b : f.blocks)
    for (const auto &inst : b.insts) {
      if (const auto *l = std::get_if<Load>(&inst.op);
          l && l->ptr.is_reg() && l->ptr.name == name)
        return l->ty;
      if (const auto *s = std::get_if<Store>(&inst.op);
          s && s->ptr.is_reg() && s->ptr.name == name)
        return s->ty;
    }
  return std::nullopt;
}

} // namespace

InputLayout infer_layout(const Function &src, const Function *tgt,
                         unsigned cells_per_ptr) {
  InputLayout layout;
  layout.params = src.params;
  layout.cells_per_ptr = cells_per_ptr;
  for (const auto &p : src.params) {
    if (!p.ty.is_ptr()) {
      layout.elem.emplace_back();
      continue;
    }
    auto t = access_type(src, p.name);
    if (!t && tgt)
      t = access_type(*tgt, p.name);
    layout.elem.push_back(t.value_or(Type::i(8)));
  }
  return layout;
}

InputLayout infer_layout(const TransformationPair &pair,
                         unsigned cells_per_ptr) {
  return infer_layout(pair.src, &pair.tgt, cells_per_ptr);
}

// ---------------------------------------------------------------------------
// Input space

std::vector<uint64_t> boundary_values(unsigned width) {
  const uint64_t mask = width_mask(width);
  const uint64_t sign = uint64_t{1} << (width - 1);
  std::vector<uint64_t> out;
  for (uint64_t v : {uint64_t{0}, uint64_t{1}, mask, sign, sign - 1}) {
    v &= mask;
    if (std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  }
  return out;
}

namespace {

// Boundary values first, then every other value in ascending order.
std::vector<Value> full_domain(unsigned width) {
  std::vector<uint64_t> head = boundary_values(width);
  std::vector<Value> out;
  out.reserve(size_t{1} << width);
  for (uint64_t v : head)
    out.push_back(Value::integer(width, v));
  for (uint64_t v = 0; v <= width_mask(width); ++v)
    if (std::find(head.begin(), head.end(), v) == head.end())
      out.push_back(Value::integer(width, v));
  return out;
}

std::vector<Value> boundary_domain(unsigned width) {
  std::vector<Value> out;
  for (uint64_t v : boundary_values(width))
    out.push_back(Value::integer(width, v));
  return out;
}

std::vector<Value> cell_boundary_domain(unsigned width) {
  std::vector<Value> out;
  for (uint64_t v : {uint64_t{0}, uint64_t{1}, width_mask(width)}) {
    Value x = Value::integer(width, v);
    if (std::find(out.begin(), out.end(), x) == out.end())
      out.push_back(x);
  }
  return out;
}

} // namespace

InputSpace::InputSpace(InputLayout layout, unsigned max_enum_bits)
    : layout_(std::move(layout)) {
  for (size_t i = 0; i < layout_.params.size(); ++i) {
    Type t = layout_.params[i].ty;
    entropy_ += t.is_ptr() ? 1 : t.width;
    if (layout_.elem[i] && layout_.elem[i]->is_int())
      entropy_ += layout_.elem[i]->width * layout_.cells_per_ptr;
  }
  exhaustive_ = entropy_ <= max_enum_bits;

  for (size_t i = 0; i < layout_.params.size(); ++i) {
    Dim d{Dim::Kind::Arg, i};
    Type t = layout_.params[i].ty;
    if (t.is_ptr())
      d.values = {layout_.buffer_pointer(i), Value::null()};
    else
      d.values = exhaustive_ ? full_domain(t.width) : boundary_domain(t.width);
    dims_.push_back(std::move(d));
  }
  uint32_t block = 0;
  for (size_t i = 0; i < layout_.params.size(); ++i) {
    if (!layout_.elem[i])
      continue;
    Type e = *layout_.elem[i];
    for (uint32_t c = 0; c < layout_.cells_per_ptr; ++c) {
      Dim d{Dim::Kind::Cell, i, block, c};
      if (e.is_ptr())
        d.values = {Value::null()};
      else
        d.values =
            exhaustive_ ? full_domain(e.width) : cell_boundary_domain(e.width);
      dims_.push_back(std::move(d));
    }
    ++block;
  }
  for (const auto &d : dims_)
    size_ *= d.values.size();
}

Input InputSpace::at(uint64_t index) const {
  Input in;
  in.args.resize(layout_.params.size());
  in.mem = layout_.blank_memory();
  // Mixed radix with the last dimension varying fastest.
  for (size_t k = dims_.size(); k-- > 0;) {
    const Dim &d = dims_[k];
    const uint64_t n = d.values.size();
    const Value &v = d.values[index % n];
    index /= n;
    if (d.kind == Dim::Kind::Arg)
      in.args[d.param] = v;
    else
      in.mem.blocks[d.block].cells[d.cell] = v;
  }
  return in;
}

InputSpace enumerate_inputs(const Function &f, const CheckConfig &cfg) {
  return InputSpace(infer_layout(f, nullptr, cfg.mem_cells_per_ptr_param),
                    cfg.max_enum_bits);
}

InputSpace enumerate_inputs(const TransformationPair &pair,
                            const CheckConfig &cfg) {
  return InputSpace(infer_layout(pair, cfg.mem_cells_per_ptr_param),
                    cfg.max_enum_bits);
}

// ---------------------------------------------------------------------------
// Checking

ReasonSet classify_failure(const RefinementResult &result) {
  return result.holds ? ReasonSet{} : result.reasons;
}

namespace {

struct InputResult {
  enum class Kind : uint8_t { Pass, Fail, OutOfFuel } kind = Kind::Pass;
  bool truncated = false;
  ReasonSet reasons;
  std::optional<CounterExample> cex;
};

InputResult check_input(const Program &src, const Program &tgt,
                        const Input &in, const CheckConfig &cfg) {
  InputResult r;
  OutcomeSet ss = outcome_set(src, in.args, in.mem, cfg.fuel, cfg.undef());
  OutcomeSet ts = outcome_set(tgt, in.args, in.mem, cfg.fuel, cfg.undef());
  RefinementResult rr = outcome_refines(ts, ss);
  r.truncated = rr.approximate;
  if (rr.out_of_fuel) {
    r.kind = InputResult::Kind::OutOfFuel;
    return r;
  }
  // A partial source set under-approximates the source behaviours, so a
  // failure against it is not conclusive.
  if (rr.holds || !ss.exhaustive)
    return r;
  r.kind = InputResult::Kind::Fail;
  r.reasons = classify_failure(rr);
  CounterExample cex;
  cex.args = in.args;
  cex.mem0 = in.mem;
  cex.tgt_outcome = ts.outcomes[*rr.witness];
  cex.tgt_choices = ts.choices[*rr.witness];
  cex.src_outcome = ss.outcomes[*rr.src_match];
  cex.src_choices = ss.choices[*rr.src_match];
  r.cex = std::move(cex);
  return r;
}

bool decisive(const InputResult &r, const CheckConfig &cfg) {
  return r.kind == InputResult::Kind::Fail ||
         (r.kind == InputResult::Kind::OutOfFuel &&
          cfg.on_out_of_fuel == CheckConfig::FuelPolicy::GiveUp);
}

} // namespace

Verdict check_pair(const TransformationPair &pair, const CheckConfig &cfg) {
  validate_config(cfg);
  if (pair.src.has_external_calls() || pair.tgt.has_external_calls())
    return Verdict::unknown(UnknownCause::ExternalCall);
  check_signatures(pair.src, pair.tgt);

  const Program src(pair.src), tgt(pair.tgt);
  const InputSpace space = enumerate_inputs(pair, cfg);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(cfg.timeout_ms);

  bool skipped_fuel = false, truncated = false, timed_out = false;
  std::optional<InputResult> verdict_input;

  // Inputs are processed in chunks; within a chunk workers take strided
  // indices and the lowest decisive index wins, so the result matches a
  // sequential scan.
  const unsigned workers = cfg.workers;
  const uint64_t chunk = workers == 1 ? 64 : 256 * uint64_t{workers};
  for (uint64_t base = 0; base < space.size() && !verdict_input; base += chunk) {
    if (std::chrono::steady_clock::now() > deadline) {
      timed_out = true;
      break;
    }
    const uint64_t end = std::min(space.size(), base + chunk);
    std::mutex mu;
    uint64_t best = end;
    std::optional<InputResult> best_result;
    auto work = [&](unsigned w) {
      for (uint64_t idx = base + w; idx < end; idx += workers) {
        {
          std::lock_guard lock(mu);
          if (idx > best)
            return;
        }
        InputResult r = check_input(src, tgt, space.at(idx), cfg);
        std::lock_guard lock(mu);
        skipped_fuel |= r.kind == InputResult::Kind::OutOfFuel;
        truncated |= r.truncated;
        if (decisive(r, cfg) && idx < best) {
          best = idx;
          best_result = std::move(r);
        }
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work, w);
    }
    verdict_input = std::move(best_result);
  }

  if (verdict_input) {
    if (verdict_input->kind == InputResult::Kind::OutOfFuel)
      return Verdict::unknown(UnknownCause::UnboundedLoop);
    return Verdict::unsound(std::move(verdict_input->reasons),
                            std::move(*verdict_input->cex));
  }
  if (timed_out)
    return Verdict::unknown(UnknownCause::Timeout);
  if (skipped_fuel)
    return Verdict::unknown(UnknownCause::UnboundedLoop);
  if (!space.exhaustive())
    return Verdict::unknown(UnknownCause::EnumerationBudgetExceeded);
  if (truncated)
    return Verdict::unknown(UnknownCause::TruncatedUndefEnumeration);
  return Verdict::sound();
}

bool replay_counterexample(const TransformationPair &pair,
                           const CounterExample &cex, uint64_t fuel,
                           UndefBudget budget) {
  const Program src(pair.src), tgt(pair.tgt);
  ReplayChooser sc(cex.src_choices), tc(cex.tgt_choices);
  if (src.run(cex.args, cex.mem0, fuel, sc) != cex.src_outcome)
    return false;
  if (tgt.run(cex.args, cex.mem0, fuel, tc) != cex.tgt_outcome)
    return false;
  OutcomeSet ss = outcome_set(src, cex.args, cex.mem0, fuel, budget);
  OutcomeSet ts = outcome_set(tgt, cex.args, cex.mem0, fuel, budget);
  RefinementResult rr = outcome_refines(ts, ss);
  return !rr.holds && !rr.out_of_fuel;
}

} // namespace llmtv
