#pragma once

// Exact quantum Turing machine engine: sparse evolution, its inverse,
// well-formedness checks, halt-bit measurement and output distributions.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "qtmlab/classical.hpp"
#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/machine.hpp"
#include "qtmlab/superposition.hpp"

namespace qtmlab {

struct Limits {
  std::size_t max_support = 1'000'000;
  std::size_t max_branches = 1'000'000;
};

namespace detail {

inline void check_support(const Superposition& psi, const Limits& limits) {
  if (psi.size() > limits.max_support) {
    throw ResourceError("superposition support " + std::to_string(psi.size()) + " exceeds max-support bound " +
                        std::to_string(limits.max_support));
  }
}

}  // namespace detail

/// One application of the transition operator. Halted terms are carried
/// unchanged; running terms expand through their rule row and newly halted
/// targets are stamped with the new clock value.
inline Superposition step(const MachineDesc& m, const Superposition& psi) {
  const QtmTable& table = m.qtm();
  const std::uint64_t clock = psi.clock() + 1;
  Superposition::Terms out;
  for (const auto& [basis, amp] : psi.terms()) {
    if (basis.config.halted) {
      out[basis] += amp;
      continue;
    }
    const auto it = table.find(Source{basis.config.state, basis.config.read()});
    if (it == table.end()) {
      throw StructuralError("no rule row for state '" + m.state_name(basis.config.state) + "' reading '" +
                            symbol_char(basis.config.read()) + "'");
    }
    for (const auto& b : it->second) {
      Config next = detail::apply(m, basis.config, b.to);
      const std::uint64_t stamp = next.halted ? clock : 0;
      out[BasisState{std::move(next), stamp}] += amp * b.weight;
    }
  }
  return Superposition(std::move(out), clock);
}

// ---------------------------------------------------------------------------
// Well-formedness

enum class Condition { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };

inline std::string condition_name(Condition c) { return "C" + std::to_string(static_cast<int>(c)); }

/// A failed local condition. For C1 `first == second` and the residual is
/// 1 - |row|^2; otherwise the residual is the offending inner product. For C3/C4,
/// `neighbors` holds the symbols (a, b) that the two sources' writes must match.
struct Violation {
  Condition condition = Condition::C1;
  Source first;
  Source second;
  std::optional<std::pair<Symbol, Symbol>> neighbors;
  CycQ8 residual;
};

struct WellFormedReport {
  bool well_formed = true;
  std::vector<Violation> violations;

  bool violates(Condition c) const {
    return std::any_of(violations.begin(), violations.end(), [c](const Violation& v) { return v.condition == c; });
  }
};

namespace detail {

// amplitude of row for a (next, write, move) target; zero if absent
inline CycQ8 row_amp(const std::vector<Branch<CycQ8>>& row, StateId next, Symbol write, Move move) {
  for (const auto& b : row) {
    if (b.to.next == next && b.to.write == write && b.to.move == move) return b.weight;
  }
  return CycQ8();
}

}  // namespace detail

/// Exact local well-formedness test of the rule table. Two running
/// configurations can only reach a common target when their heads are at most
/// two cells apart, so orthonormality of all configuration images reduces to:
///   C1  every row has squared norm 1;
///   C2  distinct rows are orthogonal (same head position);
///   C3  cross terms vanish for heads one cell apart: moves (S,L) and (R,S);
///   C4  cross terms vanish for heads two cells apart: moves (R,L).
inline WellFormedReport check_wellformed_local(const MachineDesc& m) {
  const QtmTable& table = m.qtm();
  WellFormedReport report;
  std::vector<Source> sources;
  for (const auto& [src, row] : table) sources.push_back(src);

  std::set<StateId> targets;
  for (const auto& [src, row] : table) {
    for (const auto& b : row) targets.insert(b.to.next);
  }

  auto add = [&](Condition c, const Source& a, const Source& b, std::optional<std::pair<Symbol, Symbol>> nb,
                 CycQ8 residual) {
    report.violations.push_back(Violation{c, a, b, nb, std::move(residual)});
  };

  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& row_a = table.at(sources[i]);
    // C1
    RealQ2 norm;
    for (const auto& b : row_a) norm += b.weight.norm_sq();
    if (!(norm == RealQ2(1))) add(Condition::C1, sources[i], sources[i], std::nullopt, CycQ8(RealQ2(1) - norm));
    // C2
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      const auto& row_b = table.at(sources[j]);
      CycQ8 ip;
      for (const auto& ba : row_a) {
        for (const auto& bb : row_b) {
          if (ba.to == bb.to) ip += ba.weight * bb.weight.conj();
        }
      }
      if (!ip.is_zero()) add(Condition::C2, sources[i], sources[j], std::nullopt, ip);
    }
  }

  // C3 and C4 range over ordered pairs (A left, B right), A == B included.
  for (const auto& src_a : sources) {
    const auto& row_a = table.at(src_a);
    for (const auto& src_b : sources) {
      const auto& row_b = table.at(src_b);
      for (Symbol a : kSymbols) {
        for (Symbol b : kSymbols) {
          CycQ8 c3;
          CycQ8 c4;
          for (StateId p : targets) {
            c3 += detail::row_amp(row_a, p, a, Move::Stay) * detail::row_amp(row_b, p, b, Move::Left).conj();
            c3 += detail::row_amp(row_a, p, a, Move::Right) * detail::row_amp(row_b, p, b, Move::Stay).conj();
            c4 += detail::row_amp(row_a, p, a, Move::Right) * detail::row_amp(row_b, p, b, Move::Left).conj();
          }
          if (!c3.is_zero()) add(Condition::C3, src_a, src_b, std::pair{a, b}, c3);
          if (!c4.is_zero()) add(Condition::C4, src_a, src_b, std::pair{a, b}, c4);
        }
      }
    }
  }
  report.well_formed = report.violations.empty();
  return report;
}

/// Brute-force oracle: builds the step matrix from running configurations of a
/// cyclic tape of length `tape_len` (head moves wrap) into all configurations
/// and checks exactly that M^dagger M = I.
inline bool check_unitary_window(const MachineDesc& m, std::size_t tape_len, std::size_t state_cap) {
  if (tape_len < 2 || tape_len > 8) throw PreconditionError("tape_len must be in 2..8");
  const QtmTable& table = m.qtm();
  std::vector<StateId> running;
  for (std::size_t q = 0; q < m.states.size(); ++q) {
    if (StateId{q} != m.halt) running.push_back(StateId{q});
  }
  std::size_t tapes = 1;
  for (std::size_t k = 0; k < tape_len; ++k) tapes *= 3;
  const std::size_t columns = running.size() * tape_len * tapes;
  if (columns > state_cap) {
    throw ResourceError("window configuration space " + std::to_string(columns) + " exceeds state cap " +
                        std::to_string(state_cap));
  }

  std::vector<std::size_t> pow3(tape_len, 1);
  for (std::size_t k = 1; k < tape_len; ++k) pow3[k] = pow3[k - 1] * 3;
  auto cell = [&](std::size_t tape, std::size_t pos) { return static_cast<Symbol>((tape / pow3[pos]) % 3); };
  auto with = [&](std::size_t tape, std::size_t pos, Symbol s) {
    return tape - static_cast<std::size_t>(cell(tape, pos)) * pow3[pos] + static_cast<std::size_t>(s) * pow3[pos];
  };

  // Targets are indexed (state, head, tape) over all states, halting included.
  auto target_index = [&](std::size_t q, std::size_t x, std::size_t t) { return (q * tape_len + x) * tapes + t; };
  std::vector<std::vector<std::pair<std::size_t, CycQ8>>> incoming(m.states.size() * tape_len * tapes);
  std::vector<std::pair<std::size_t, CycQ8>> image;
  std::size_t col = 0;
  for (StateId q : running) {
    for (std::size_t x = 0; x < tape_len; ++x) {
      for (std::size_t t = 0; t < tapes; ++t, ++col) {
        const auto it = table.find(Source{q, cell(t, x)});
        if (it == table.end()) throw StructuralError("rule table is not total");
        image.clear();
        for (const auto& b : it->second) {
          const auto nx = static_cast<std::size_t>((static_cast<std::int64_t>(x) + offset(b.to.move) +
                                                    static_cast<std::int64_t>(tape_len)) %
                                                   static_cast<std::int64_t>(tape_len));
          const std::size_t target = target_index(b.to.next.index, nx, with(t, x, b.to.write));
          auto same = std::find_if(image.begin(), image.end(), [&](const auto& e) { return e.first == target; });
          if (same == image.end()) {
            image.emplace_back(target, b.weight);
          } else {
            same->second += b.weight;
          }
        }
        for (auto& [target, amp] : image) {
          if (!amp.is_zero()) incoming[target].emplace_back(col, std::move(amp));
        }
      }
    }
  }

  // Gram matrix M^dagger M: diagonal densely, off-diagonal sparsely.
  std::vector<RealQ2> diag(columns);
  std::map<std::pair<std::size_t, std::size_t>, CycQ8> off;
  for (const auto& entries : incoming) {
    for (std::size_t a = 0; a < entries.size(); ++a) {
      diag[entries[a].first] += entries[a].second.norm_sq();
      for (std::size_t b = a + 1; b < entries.size(); ++b) {
        auto [i, j] = std::minmax(entries[a].first, entries[b].first);
        const CycQ8 v = i == entries[a].first ? entries[a].second.conj() * entries[b].second
                                              : entries[b].second.conj() * entries[a].second;
        off[{i, j}] += v;
      }
    }
  }
  for (const auto& [ij, v] : off) {
    if (!v.is_zero()) return false;
  }
  return std::all_of(diag.begin(), diag.end(), [](const RealQ2& d) { return d == RealQ2(1); });
}

/// A QTM whose rule table passed check_wellformed_local, with the reverse
/// index needed to apply the adjoint step.
class WellFormedQtm {
 public:
  static WellFormedQtm verify(const MachineDesc& m) {
    const WellFormedReport report = check_wellformed_local(m);
    if (!report.well_formed) {
      const Violation& v = report.violations.front();
      throw PreconditionError("machine '" + m.name + "' is not well-formed: " + condition_name(v.condition) +
                              " fails for rule " + m.state_name(v.first.state) + " " + symbol_char(v.first.read) +
                              " (" + std::to_string(report.violations.size()) + " violation(s))");
    }
    return WellFormedQtm(m);
  }

  const MachineDesc& machine() const { return machine_; }

  struct Preimage {
    Source source;
    CycQ8 amplitude;
  };

  /// Rows whose branch (next, write, move) equals the key.
  const std::vector<Preimage>& preimages(StateId next, Symbol write, Move move) const {
    static const std::vector<Preimage> none;
    const auto it = reverse_.find(std::tuple{next, write, move});
    return it == reverse_.end() ? none : it->second;
  }

 private:
  explicit WellFormedQtm(const MachineDesc& m) : machine_(m) {
    for (const auto& [src, row] : m.qtm()) {
      for (const auto& b : row) reverse_[std::tuple{b.to.next, b.to.write, b.to.move}].push_back({src, b.weight});
    }
  }

  MachineDesc machine_;
  std::map<std::tuple<StateId, Symbol, Move>, std::vector<Preimage>> reverse_;
};

/// Adjoint of `step`. Running terms and terms that halted at the current clock
/// are pulled back through conjugated amplitudes; older halted terms are kept.
inline Superposition step_inverse(const WellFormedQtm& wf, const Superposition& psi) {
  if (psi.clock() == 0) throw PreconditionError("step_inverse: no forward step to undo at clock 0");
  const std::uint64_t clock = psi.clock();
  Superposition::Terms out;
  for (const auto& [basis, amp] : psi.terms()) {
    const Config& c = basis.config;
    if (c.halted && basis.halt_step != clock) {
      out[basis] += amp;
      continue;
    }
    for (Move d : kMoves) {
      const std::int64_t x = c.head - offset(d);
      const Symbol written = c.tape.get(x);
      for (const auto& pre : wf.preimages(c.state, written, d)) {
        Config src{false, pre.source.state, x, c.tape.with(x, pre.source.read)};
        out[BasisState{std::move(src), 0}] += pre.amplitude.conj() * amp;
      }
    }
  }
  return Superposition(std::move(out), clock - 1);
}

/// Refuses machines that are not well-formed.
inline Superposition step_inverse(const MachineDesc& m, const Superposition& psi) {
  return step_inverse(WellFormedQtm::verify(m), psi);
}

/// Lifts a deterministic TM to a QTM with amplitude-1 branches; missing rows
/// become (qH, read, S). Throws ValidationError if the lift is not well-formed.
inline MachineDesc lift_to_qtm(const MachineDesc& tm) {
  MachineDesc q{tm.name, tm.states, tm.start, tm.halt, QtmTable{}};
  auto& table = std::get<QtmTable>(q.rules);
  for (std::size_t s = 0; s < tm.states.size(); ++s) {
    if (StateId{s} == tm.halt) continue;
    for (Symbol sym : kSymbols) {
      const Source src{StateId{s}, sym};
      const auto it = tm.tm().find(src);
      const Transition t = it != tm.tm().end() ? it->second : Transition{sym, Move::Stay, tm.halt};
      table[src] = {Branch<CycQ8>{t, CycQ8(1)}};
    }
  }
  validate(q);
  if (!check_wellformed_local(q).well_formed) {
    throw ValidationError("TM '" + tm.name + "' is not reversible; its amplitude-1 lift is not well-formed");
  }
  return q;
}

// ---------------------------------------------------------------------------
// Measurement and output

struct HaltMeasurement {
  RealQ2 p1;
  Superposition halted;
  Superposition running;
};

/// Projects on the halt bit. Both parts stay unnormalized.
inline HaltMeasurement measure_halt(const Superposition& psi) {
  if (psi.empty()) throw StructuralError("measure_halt on an empty superposition");
  Superposition::Terms h;
  Superposition::Terms r;
  for (const auto& [basis, amp] : psi.terms()) (basis.config.halted ? h : r).emplace(basis, amp);
  HaltMeasurement out{RealQ2(), Superposition(std::move(h), psi.clock()), Superposition(std::move(r), psi.clock())};
  out.p1 = out.halted.norm_sq() / psi.norm_sq();
  return out;
}

/// P(tape) over halted terms; probabilities (not amplitudes) add across
/// configurations sharing a tape.
inline std::map<Tape, RealQ2> read_output_distribution(const Superposition& halted_part) {
  if (halted_part.empty()) throw StructuralError("read_output_distribution on an empty superposition");
  std::map<Tape, RealQ2> mass;
  for (const auto& [basis, amp] : halted_part.terms()) {
    if (!basis.config.halted) throw PreconditionError("read_output_distribution: term with h = 0");
    mass[basis.config.tape] += amp.norm_sq();
  }
  const RealQ2 inv = halted_part.norm_sq().inverse();
  for (auto& [tape, p] : mass) p *= inv;
  return mass;
}

/// Strictly increasing list of steps after which the halt bit is measured.
class MeasurementSchedule {
 public:
  MeasurementSchedule() = default;
  explicit MeasurementSchedule(std::vector<std::uint64_t> steps) : steps_(std::move(steps)) {
    for (std::size_t k = 1; k < steps_.size(); ++k) {
      if (steps_[k] <= steps_[k - 1]) throw PreconditionError("measurement schedule must be strictly increasing");
    }
  }

  static MeasurementSchedule every(std::uint64_t horizon) {
    std::vector<std::uint64_t> s;
    for (std::uint64_t t = 1; t <= horizon; ++t) s.push_back(t);
    return MeasurementSchedule(std::move(s));
  }

  const std::vector<std::uint64_t>& steps() const { return steps_; }
  bool contains(std::uint64_t t) const { return std::binary_search(steps_.begin(), steps_.end(), t); }

 private:
  std::vector<std::uint64_t> steps_;
};

struct HaltEvent {
  std::uint64_t step = 0;
  Tape tape;
  friend auto operator<=>(const HaltEvent&, const HaltEvent&) = default;
};

struct OutcomeDist {
  std::map<HaltEvent, RealQ2> events;
  RealQ2 residual_running;
  std::size_t peak_support = 0;
  std::size_t branches = 0;

  RealQ2 halted_mass() const {
    RealQ2 t;
    for (const auto& [e, p] : events) t += p;
    return t;
  }

  /// Events marginalized over the halt step.
  std::map<Tape, RealQ2> by_tape() const {
    std::map<Tape, RealQ2> out;
    for (const auto& [e, p] : events) out[e.tape] += p;
    return out;
  }

  friend bool operator==(const OutcomeDist& a, const OutcomeDist& b) {
    return a.events == b.events && a.residual_running == b.residual_running;
  }
};

namespace detail {

inline OutcomeDist run_from(const MachineDesc& m, Superposition psi, const MeasurementSchedule& schedule,
                            std::uint64_t horizon, const Limits& limits) {
  if (!schedule.steps().empty() && schedule.steps().back() > horizon) {
    throw PreconditionError("measurement schedule extends past the horizon");
  }
  const RealQ2 total = psi.norm_sq();
  OutcomeDist out;
  out.peak_support = psi.size();

  auto observe = [&](std::uint64_t t) {
    if (psi.empty()) return;
    HaltMeasurement meas = measure_halt(psi);
    if (!meas.halted.empty()) {
      for (const auto& [basis, amp] : meas.halted.terms()) {
        out.events[HaltEvent{t, basis.config.tape}] += amp.norm_sq() / total;
      }
    }
    psi = std::move(meas.running);
    if (out.events.size() + 1 > limits.max_branches) {
      throw ResourceError("outcome tree branch count exceeds bound " + std::to_string(limits.max_branches));
    }
  };

  if (schedule.contains(0)) observe(0);
  for (std::uint64_t t = 1; t <= horizon && !psi.empty(); ++t) {
    psi = step(m, psi);
    check_support(psi, limits);
    out.peak_support = std::max(out.peak_support, psi.size());
    if (schedule.contains(t)) observe(t);
  }
  out.residual_running = RealQ2(1) - out.halted_mass();
  out.branches = out.events.size() + (psi.empty() ? 0 : 1);
  return out;
}

}  // namespace detail

/// Evolves |0, q0, 0, input> and measures the halt bit at each scheduled step.
/// Halted outcomes become (step, tape) events; the running branch continues.
inline OutcomeDist run(const MachineDesc& m, std::string_view input, const MeasurementSchedule& schedule,
                       std::uint64_t horizon, const Limits& limits = {}) {
  WellFormedQtm::verify(m);
  return detail::run_from(m, Superposition::point(initial_config(m, input)), schedule, horizon, limits);
}

/// Mass observed halted within the horizon when measuring after every step.
inline RealQ2 halting_probability(const MachineDesc& m, std::string_view input, std::uint64_t horizon,
                                  const Limits& limits = {}) {
  return run(m, input, MeasurementSchedule::every(horizon), horizon, limits).halted_mass();
}

/// |<psi|phi>|^2 / (|psi|^2 |phi|^2).
inline RealQ2 fidelity(const Superposition& psi, const Superposition& phi) {
  if (psi.empty() || phi.empty()) throw StructuralError("fidelity of an empty superposition");
  return inner_product(psi, phi).norm_sq() / (psi.norm_sq() * phi.norm_sq());
}

}  // namespace qtmlab
