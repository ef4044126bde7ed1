#pragma once

// Deterministic and probabilistic Turing machine engines.
//
// A missing rule means the machine enters the halting state at once, without
// consuming a step. Halted configurations are absorbing.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/machine.hpp"

namespace qtmlab {

enum class RunStatus { Halted = 0, Running = 1 };

inline std::string_view status_name(RunStatus s) { return s == RunStatus::Halted ? "halted" : "running"; }

struct ClassicalOutcome {
  RunStatus status = RunStatus::Running;
  Tape tape;
  std::uint64_t steps = 0;

  friend bool operator==(const ClassicalOutcome&, const ClassicalOutcome&) = default;
};

/// Observable result of a classical run: halted or still running, with the tape.
struct OutputKey {
  RunStatus status = RunStatus::Halted;
  Tape tape;
  friend auto operator<=>(const OutputKey&, const OutputKey&) = default;
};

struct ClassicalDist {
  std::map<OutputKey, Rat> probs;
  std::uint64_t horizon = 0;
  std::size_t peak_support = 0;

  Rat total() const {
    Rat t = 0;
    for (const auto& [k, p] : probs) t += p;
    return t;
  }
  Rat halted_mass() const {
    Rat t = 0;
    for (const auto& [k, p] : probs) {
      if (k.status == RunStatus::Halted) t += p;
    }
    return t;
  }
};

inline constexpr std::size_t kDefaultMaxSupport = 1'000'000;

namespace detail {

inline Config apply(const MachineDesc& m, const Config& c, const Transition& t) {
  Config next;
  next.tape = c.tape.with(c.head, t.write);
  next.head = c.head + offset(t.move);
  next.state = t.next;
  next.halted = t.next == m.halt;
  return next;
}

}  // namespace detail

inline ClassicalOutcome tm_run(const MachineDesc& m, std::string_view input, std::uint64_t max_steps) {
  const TmTable& table = m.tm();
  Config c = initial_config(m, input);
  for (std::uint64_t steps = 0;; ++steps) {
    if (c.state == m.halt) return {RunStatus::Halted, c.tape, steps};
    const auto it = table.find(Source{c.state, c.read()});
    if (it == table.end()) return {RunStatus::Halted, c.tape, steps};
    if (steps == max_steps) return {RunStatus::Running, c.tape, steps};
    c = detail::apply(m, c, it->second);
  }
}

/// Exact breadth-first evolution of the configuration distribution for `horizon` steps.
inline ClassicalDist ptm_evolve_exact(const MachineDesc& m, std::string_view input, std::uint64_t horizon,
                                      std::size_t max_support = kDefaultMaxSupport) {
  const PtmTable& table = m.ptm();
  std::map<Config, Rat> running{{initial_config(m, input), Rat(1)}};
  std::map<Tape, Rat> halted;
  std::size_t peak = 1;

  // Configurations in qH or without a rule halt where they stand.
  auto absorb = [&] {
    for (auto it = running.begin(); it != running.end();) {
      const Config& c = it->first;
      if (c.state == m.halt || !table.contains(Source{c.state, c.read()})) {
        halted[c.tape] += it->second;
        it = running.erase(it);
      } else {
        ++it;
      }
    }
  };

  absorb();
  for (std::uint64_t t = 0; t < horizon && !running.empty(); ++t) {
    std::map<Config, Rat> next;
    for (const auto& [c, p] : running) {
      for (const auto& b : table.at(Source{c.state, c.read()})) {
        next[detail::apply(m, c, b.to)] += p * b.weight;
      }
    }
    running = std::move(next);
    absorb();
    const std::size_t support = running.size() + halted.size();
    peak = std::max(peak, support);
    if (support > max_support) {
      throw ResourceError("distribution support " + std::to_string(support) + " exceeds max-support bound " +
                          std::to_string(max_support));
    }
  }

  ClassicalDist d;
  d.horizon = horizon;
  d.peak_support = peak;
  for (const auto& [tape, p] : halted) d.probs[{RunStatus::Halted, tape}] += p;
  for (const auto& [c, p] : running) d.probs[{RunStatus::Running, c.tape}] += p;
  return d;
}

/// Returns y when Pr[halts with output y within horizon] > threshold (strict).
inline std::optional<Tape> ptm_decide(const MachineDesc& m, std::string_view input, std::uint64_t horizon,
                                      const Rat& threshold = Rat(3, 4),
                                      std::size_t max_support = kDefaultMaxSupport) {
  if (threshold <= Rat(1, 2)) throw PreconditionError("decision threshold must exceed 1/2");
  const ClassicalDist d = ptm_evolve_exact(m, input, horizon, max_support);
  for (const auto& [key, p] : d.probs) {
    if (key.status == RunStatus::Halted && p > threshold) return key.tape;
  }
  return std::nullopt;
}

/// One trajectory driven by std::mt19937_64(seed). Each branch point draws one 64-bit
/// word u and takes the first branch whose cumulative probability exceeds u / 2^64.
inline ClassicalOutcome ptm_sample(const MachineDesc& m, std::string_view input, std::uint64_t max_steps,
                                   std::uint64_t seed) {
  const PtmTable& table = m.ptm();
  std::mt19937_64 gen(seed);
  const BigInt two64 = BigInt(1) << 64;
  Config c = initial_config(m, input);
  for (std::uint64_t steps = 0;; ++steps) {
    if (c.state == m.halt) return {RunStatus::Halted, c.tape, steps};
    const auto it = table.find(Source{c.state, c.read()});
    if (it == table.end()) return {RunStatus::Halted, c.tape, steps};
    if (steps == max_steps) return {RunStatus::Running, c.tape, steps};
    const auto& row = it->second;
    const Transition* chosen = &row.back().to;
    if (row.size() > 1) {
      const std::uint64_t word = gen();
      const Rat u = make_rat(BigInt(static_cast<unsigned long>(word)), two64);
      Rat cumulative = 0;
      for (const auto& b : row) {
        cumulative += b.weight;
        if (u < cumulative) {
          chosen = &b.to;
          break;
        }
      }
    }
    c = detail::apply(m, c, *chosen);
  }
}

/// A TM viewed as a PTM whose every branch has probability 1.
inline MachineDesc lift_to_ptm(const MachineDesc& tm) {
  MachineDesc p{tm.name, tm.states, tm.start, tm.halt, PtmTable{}};
  auto& table = std::get<PtmTable>(p.rules);
  for (const auto& [src, t] : tm.tm()) table[src] = {Branch<Rat>{t, Rat(1)}};
  return p;
}

}  // namespace qtmlab
