#pragma once

// Cross-engine comparison (total variation distance), meta-circular
// universality checking, and the semi-universal hybrid device (SUHD) loop.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qtmlab/classical.hpp"
#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/godel.hpp"
#include "qtmlab/machine.hpp"
#include "qtmlab/qtm.hpp"
#include "qtmlab/superposition.hpp"

namespace qtmlab {

// ---------------------------------------------------------------------------
// Distributions

template <class Key>
using Distribution = std::map<Key, RealQ2>;

template <class Key>
RealQ2 total_mass(const Distribution<Key>& d) {
  RealQ2 t;
  for (const auto& [k, p] : d) t += p;
  return t;
}

namespace detail {

template <class Key>
void require_normalized(const Distribution<Key>& d, const char* which) {
  if (!(total_mass(d) == RealQ2(1))) {
    throw PreconditionError(std::string("distribution ") + which + " does not sum to 1 (sum = " +
                            to_string(total_mass(d)) + ")");
  }
}

}  // namespace detail

/// 1/2 sum_x |P(x) - Q(x)| over the union of supports; exact.
template <class Key>
RealQ2 tv_distance(const Distribution<Key>& p, const Distribution<Key>& q) {
  detail::require_normalized(p, "P");
  detail::require_normalized(q, "Q");
  RealQ2 sum;
  auto ip = p.begin();
  auto iq = q.begin();
  while (ip != p.end() || iq != q.end()) {
    if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
      sum += ip->second.abs();
      ++ip;
    } else if (ip == p.end() || iq->first < ip->first) {
      sum += iq->second.abs();
      ++iq;
    } else {
      sum += (ip->second - iq->second).abs();
      ++ip;
      ++iq;
    }
  }
  return sum * RealQ2(Rat(1, 2));
}

/// Exact equality of two normalized distributions (zero-probability keys ignored).
template <class Key>
bool distributions_equal(const Distribution<Key>& p, const Distribution<Key>& q) {
  return tv_distance(p, q).is_zero();
}

/// Observable output law of a run: halted tapes, plus one bucket for mass
/// still running at the horizon (Running, empty tape).
using OutputDist = Distribution<OutputKey>;

inline const OutputKey kRunningBucket{RunStatus::Running, Tape{}};

inline OutputDist output_distribution(const ClassicalOutcome& o) {
  return OutputDist{{o.status == RunStatus::Halted ? OutputKey{RunStatus::Halted, o.tape} : kRunningBucket, RealQ2(1)}};
}

inline OutputDist output_distribution(const ClassicalDist& d) {
  OutputDist out;
  for (const auto& [k, p] : d.probs) out[k.status == RunStatus::Halted ? k : kRunningBucket] += RealQ2(p);
  return out;
}

inline OutputDist output_distribution(const OutcomeDist& d) {
  OutputDist out;
  for (const auto& [tape, p] : d.by_tape()) out[OutputKey{RunStatus::Halted, tape}] += p;
  if (!d.residual_running.is_zero()) out[kRunningBucket] += d.residual_running;
  return out;
}

/// Exact TV distance together with an accuracy budget.
struct SimAccuracyReport {
  RealQ2 tv;
  Rat epsilon;
  bool within_budget = false;
};

inline SimAccuracyReport accuracy_report(const OutputDist& p, const OutputDist& q, const Rat& epsilon) {
  SimAccuracyReport r{tv_distance(p, q), epsilon, false};
  r.within_budget = r.tv <= RealQ2(epsilon);
  return r;
}

// ---------------------------------------------------------------------------
// Universality (the simulator plays the universal machine)

using UniversalOutcome = std::variant<ClassicalOutcome, ClassicalDist, OutcomeDist>;

using Decoder = std::function<MachineDesc(const BigInt&)>;

inline UniversalOutcome run_direct(const MachineDesc& m, std::string_view input, std::uint64_t horizon,
                                   const Limits& limits = {}) {
  switch (m.kind()) {
    case MachineKind::TM: return tm_run(m, input, horizon);
    case MachineKind::PTM: return ptm_evolve_exact(m, input, horizon, limits.max_support);
    case MachineKind::QTM: return run(m, input, MeasurementSchedule::every(horizon), horizon, limits);
  }
  throw StructuralError("unknown machine kind");
}

/// Phi_N(pair(n, m)): unpairs the code, decodes machine n and runs it on the
/// binary rendering of m with the engine for `kind`.
inline UniversalOutcome apply_universal(MachineKind kind, const BigInt& code, std::uint64_t horizon,
                                        const Decoder& decoder = decode_machine, const Limits& limits = {}) {
  const auto [n, m] = unpair_cantor(code);
  const MachineDesc machine = decoder(n);
  if (machine.kind() != kind) {
    throw StructuralError("machine " + n.get_str() + " is a " + std::string(kind_name(machine.kind())) +
                          ", universal machine expects " + std::string(kind_name(kind)));
  }
  return run_direct(machine, binary_string(m), horizon, limits);
}

inline bool outcomes_equal(const UniversalOutcome& a, const UniversalOutcome& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<ClassicalOutcome>(&a)) return *x == std::get<ClassicalOutcome>(b);
  if (const auto* x = std::get_if<ClassicalDist>(&a)) {
    const auto& y = std::get<ClassicalDist>(b);
    Distribution<OutputKey> px;
    Distribution<OutputKey> py;
    for (const auto& [k, p] : x->probs) px[k] = RealQ2(p);
    for (const auto& [k, p] : y.probs) py[k] = RealQ2(p);
    return distributions_equal(px, py);
  }
  const auto& x = std::get<OutcomeDist>(a);
  const auto& y = std::get<OutcomeDist>(b);
  // Events plus residual form a normalized law over (halt step, tape) and "not observed".
  auto law = [](const OutcomeDist& d) {
    Distribution<std::optional<HaltEvent>> out;
    for (const auto& [e, p] : d.events) out[e] = p;
    if (!d.residual_running.is_zero()) out[std::nullopt] = d.residual_running;
    return out;
  };
  return distributions_equal(law(x), law(y));
}

struct UniversalityDiscrepancy {
  BigInt machine_code;
  BigInt input;
  std::string detail;
};

struct UniversalityReport {
  MachineKind kind = MachineKind::TM;
  std::size_t checked = 0;
  std::uint64_t horizon = 0;
  std::vector<UniversalityDiscrepancy> discrepancies;
  std::string limitation =
      "agreement is certified within the stated horizon only; runs still going at the horizon are compared "
      "as running, which cannot establish that both are undefined";

  bool passed() const { return discrepancies.empty(); }
};

/// For every (machine, input) pair, compares apply_universal on the paired
/// code against a direct run of the canonically decoded machine.
inline UniversalityReport universality_check(MachineKind kind, const std::vector<BigInt>& family,
                                             const std::vector<BigInt>& inputs, std::uint64_t horizon,
                                             const Decoder& decoder = decode_machine, const Limits& limits = {}) {
  UniversalityReport report;
  report.kind = kind;
  report.horizon = horizon;
  for (const BigInt& n : family) {
    const MachineDesc reference = decode_machine(n);
    if (kind == MachineKind::QTM) WellFormedQtm::verify(reference);
    for (const BigInt& m : inputs) {
      ++report.checked;
      const UniversalOutcome direct = run_direct(reference, binary_string(m), horizon, limits);
      try {
        const UniversalOutcome via = apply_universal(kind, pair_cantor(n, m), horizon, decoder, limits);
        if (!outcomes_equal(via, direct)) {
          report.discrepancies.push_back({n, m, "universal run differs from direct run of " + reference.name});
        }
      } catch (const Error& e) {
        report.discrepancies.push_back({n, m, std::string("universal run failed: ") + e.what()});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// SUHD

struct ObservationPolicy {
  enum class Kind { Never, Always, AtIterations, Interactive };

  Kind kind = Kind::Never;
  std::vector<std::uint64_t> iterations;

  static ObservationPolicy never() { return {Kind::Never, {}}; }
  static ObservationPolicy always() { return {Kind::Always, {}}; }
  static ObservationPolicy interactive() { return {Kind::Interactive, {}}; }
  static ObservationPolicy at(std::vector<std::uint64_t> its) {
    for (std::size_t k = 1; k < its.size(); ++k) {
      if (its[k] <= its[k - 1]) throw PreconditionError("observation iterations must be strictly increasing");
    }
    return {Kind::AtIterations, std::move(its)};
  }

  /// never | always | interactive | at:k1,k2,...
  static ObservationPolicy parse(std::string_view text) {
    if (text == "never") return never();
    if (text == "always") return always();
    if (text == "interactive") return interactive();
    if (text.substr(0, 3) == "at:") {
      std::vector<std::uint64_t> its;
      std::string rest(text.substr(3));
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
          throw PreconditionError("bad iteration '" + item + "' in policy");
        }
        its.push_back(std::stoull(item));
      }
      if (its.empty()) throw PreconditionError("policy at: needs at least one iteration");
      return at(std::move(its));
    }
    throw PreconditionError("unknown policy '" + std::string(text) + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Never: return "never";
      case Kind::Always: return "always";
      case Kind::Interactive: return "interactive";
      case Kind::AtIterations: {
        std::string s = "at:";
        for (std::size_t k = 0; k < iterations.size(); ++k) s += (k ? "," : "") + std::to_string(iterations[k]);
        return s;
      }
    }
    return "?";
  }
};

/// What the device announces when the quantum part may be observed.
struct SuhdSignal {
  std::uint64_t outer_T = 0;
  std::uint64_t steps_executed = 0;
  RealQ2 halt_prob;
};

using Observer = std::function<bool(const SuhdSignal&)>;

struct SuhdIterationRecord {
  std::uint64_t outer_T = 0;
  std::uint64_t steps_executed = 0;  // S = f(T, n, T/eps) = T for the exact engine
  Rat accuracy;                      // eps / T handed to the program generator
  Rat slowdown_argument;             // T / eps handed to the slowdown function
  bool observed = false;
  std::optional<std::string> outcome;  // tape label, or "running"
  RealQ2 halt_prob_at_signal;
  RealQ2 reset_fidelity;
  bool state_restored = false;

  friend bool operator==(const SuhdIterationRecord&, const SuhdIterationRecord&) = default;
};

struct SuhdOptions {
  Rat epsilon{1, 10};
  ObservationPolicy policy;
  std::uint64_t max_outer_T = 5;
  std::uint64_t seed = 0;
  Observer observer;  // consulted by the interactive policy
  Limits limits;
};

namespace detail {

inline bool policy_observes(const SuhdOptions& opt, const SuhdSignal& sig) {
  switch (opt.policy.kind) {
    case ObservationPolicy::Kind::Never: return false;
    case ObservationPolicy::Kind::Always: return true;
    case ObservationPolicy::Kind::AtIterations:
      return std::binary_search(opt.policy.iterations.begin(), opt.policy.iterations.end(), sig.outer_T);
    case ObservationPolicy::Kind::Interactive:
      if (!opt.observer) throw PreconditionError("interactive policy needs an observer");
      return opt.observer(sig);
  }
  return false;
}

}  // namespace detail

/// Runs the SUHD loop with the exact engine as its quantum part.
///
/// Each iteration evolves the current quantum state S = T steps, signals,
/// lets the policy observe the halt bit (and, on a halted outcome, the tape),
/// then resets by S applications of step_inverse. The state is never
/// reloaded. The adjoint discards amplitude outside the image of the forward
/// map; a physical reset is unitary, so that amplitude is tracked as leaked
/// mass and counted in the fidelity denominator.
inline std::vector<SuhdIterationRecord> suhd_run(const MachineDesc& m, std::string_view input,
                                                 const SuhdOptions& opt) {
  if (opt.epsilon <= 0) throw PreconditionError("epsilon must be positive");
  const WellFormedQtm wf = WellFormedQtm::verify(m);
  const Superposition initial = Superposition::point(initial_config(m, input));
  Superposition state = initial;
  RealQ2 branch_mass(1);  // physical squared norm of the current branch
  std::mt19937_64 gen(opt.seed);
  const BigInt two64 = BigInt(1) << 64;

  std::vector<SuhdIterationRecord> records;
  for (std::uint64_t T = 1; T <= opt.max_outer_T; ++T) {
    SuhdIterationRecord rec;
    rec.outer_T = T;
    rec.steps_executed = T;
    rec.accuracy = opt.epsilon / Rat(static_cast<unsigned long>(T));
    rec.slowdown_argument = Rat(static_cast<unsigned long>(T)) / opt.epsilon;

    for (std::uint64_t s = 0; s < rec.steps_executed; ++s) {
      state = step(m, state);
      detail::check_support(state, opt.limits);
    }

    std::map<Tape, RealQ2> halted_mass;
    Superposition::Terms running_terms;
    RealQ2 halted_total;
    for (const auto& [basis, amp] : state.terms()) {
      if (basis.config.halted) {
        halted_mass[basis.config.tape] += amp.norm_sq();
        halted_total += amp.norm_sq();
      } else {
        running_terms.emplace(basis, amp);
      }
    }
    rec.halt_prob_at_signal = halted_total / branch_mass;

    rec.observed = detail::policy_observes(opt, SuhdSignal{T, rec.steps_executed, rec.halt_prob_at_signal});
    if (rec.observed) {
      const Rat u = make_rat(BigInt(static_cast<unsigned long>(gen())), two64);
      const RealQ2 draw(u);
      RealQ2 cumulative;
      std::optional<Tape> seen;
      for (const auto& [tape, mass] : halted_mass) {
        cumulative += mass / branch_mass;
        if (draw < cumulative) {
          seen = tape;
          break;
        }
      }
      if (seen) {
        Superposition::Terms kept;
        for (const auto& [basis, amp] : state.terms()) {
          if (basis.config.halted && basis.config.tape == *seen) kept.emplace(basis, amp);
        }
        state = Superposition(std::move(kept), state.clock());
        branch_mass = state.norm_sq();
        rec.outcome = seen->label();
      } else {
        branch_mass -= halted_total;
        state = Superposition(std::move(running_terms), state.clock());
        rec.outcome = "running";
      }
    }

    for (std::uint64_t s = 0; s < rec.steps_executed; ++s) {
      if (state.empty()) {
        state = Superposition({}, state.clock() - 1);
      } else {
        state = step_inverse(wf, state);
      }
    }

    rec.reset_fidelity = inner_product(initial, state).norm_sq() / (branch_mass * initial.norm_sq());
    rec.state_restored = rec.reset_fidelity == RealQ2(1);
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<SuhdIterationRecord> suhd_run(const BigInt& machine_code, std::string_view input,
                                                 const SuhdOptions& opt) {
  return suhd_run(decode_machine(machine_code), input, opt);
}

struct ConjectureEntry {
  std::string machine;
  bool reversible_unobserved = false;     // NEVER policy restores the state at every iteration
  std::size_t nontrivial_observations = 0;  // single observations with 0 < p1 < 1
  std::size_t irreversible_observations = 0;  // ... that left fidelity < 1 then and afterwards
  bool trivial_observations_restore = true;   // observations with p1 in {0, 1} that restored the state
  bool irreversible_under_observation() const { return irreversible_observations > 0; }
};

struct ConjectureReport {
  std::string header =
      "Empirical evidence at desk scale, not a proof: the SUHD reset by inverse evolution is exact when the "
      "quantum part is never observed, and fails whenever an observation had a non-trivial halt outcome.";
  Rat epsilon;
  std::uint64_t max_outer_T = 0;
  std::vector<ConjectureEntry> entries;
};

/// Runs NEVER and every single-observation policy at:k, k = 1..max_outer_T, per machine.
inline ConjectureReport conjecture_report(const std::vector<BigInt>& corpus, const Rat& epsilon,
                                          std::uint64_t max_outer_T, std::string_view input = "",
                                          std::uint64_t seed = 0) {
  ConjectureReport report;
  report.epsilon = epsilon;
  report.max_outer_T = max_outer_T;
  for (const BigInt& code : corpus) {
    const MachineDesc m = decode_machine(code);
    ConjectureEntry entry;
    entry.machine = m.name;
    SuhdOptions opt;
    opt.epsilon = epsilon;
    opt.max_outer_T = max_outer_T;
    opt.seed = seed;
    opt.policy = ObservationPolicy::never();
    const auto never = suhd_run(m, input, opt);
    entry.reversible_unobserved =
        std::all_of(never.begin(), never.end(), [](const SuhdIterationRecord& r) { return r.state_restored; });
    for (std::uint64_t k = 1; k <= max_outer_T; ++k) {
      opt.policy = ObservationPolicy::at({k});
      const auto recs = suhd_run(m, input, opt);
      const RealQ2& p1 = recs[k - 1].halt_prob_at_signal;
      const bool nontrivial = p1.sign() > 0 && p1 < RealQ2(1);
      if (nontrivial) {
        ++entry.nontrivial_observations;
        const bool broken = std::all_of(recs.begin() + static_cast<std::ptrdiff_t>(k - 1), recs.end(),
                                        [](const SuhdIterationRecord& r) { return !r.state_restored; });
        if (broken) ++entry.irreversible_observations;
      } else if (!recs[k - 1].state_restored) {
        entry.trivial_observations_restore = false;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace qtmlab
