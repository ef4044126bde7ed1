#pragma once

// Machine descriptions and classical configurations shared by every engine.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"

namespace qtmlab {

enum class Symbol : std::uint8_t { Zero = 0, One = 1, Blank = 2 };

inline constexpr std::array<Symbol, 3> kSymbols{Symbol::Zero, Symbol::One, Symbol::Blank};

inline char symbol_char(Symbol s) {
  switch (s) {
    case Symbol::Zero: return '0';
    case Symbol::One: return '1';
    case Symbol::Blank: return '_';
  }
  return '?';
}

inline std::optional<Symbol> symbol_from_char(char c) {
  switch (c) {
    case '0': return Symbol::Zero;
    case '1': return Symbol::One;
    case '_': return Symbol::Blank;
    default: return std::nullopt;
  }
}

enum class Move : std::int8_t { Left = -1, Stay = 0, Right = 1 };

inline constexpr std::array<Move, 3> kMoves{Move::Left, Move::Stay, Move::Right};

inline char move_char(Move m) {
  switch (m) {
    case Move::Left: return 'L';
    case Move::Stay: return 'S';
    case Move::Right: return 'R';
  }
  return '?';
}

inline std::int64_t offset(Move m) { return static_cast<std::int64_t>(m); }

struct StateId {
  std::size_t index = 0;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

/// Left-hand side of a rule: internal state and the symbol under the head.
struct Source {
  StateId state;
  Symbol read = Symbol::Blank;
  friend auto operator<=>(const Source&, const Source&) = default;
};

/// Right-hand side of one branch. Ordered by (write, move, next), the canonical branch order.
struct Transition {
  Symbol write = Symbol::Blank;
  Move move = Move::Stay;
  StateId next;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

template <class Weight>
struct Branch {
  Transition to;
  Weight weight;
  friend bool operator==(const Branch&, const Branch&) = default;
};

using TmTable = std::map<Source, Transition>;
using PtmTable = std::map<Source, std::vector<Branch<Rat>>>;
using QtmTable = std::map<Source, std::vector<Branch<CycQ8>>>;

enum class MachineKind { TM = 0, PTM = 1, QTM = 2 };

inline std::string_view kind_name(MachineKind k) {
  switch (k) {
    case MachineKind::TM: return "tm";
    case MachineKind::PTM: return "ptm";
    case MachineKind::QTM: return "qtm";
  }
  return "?";
}

inline std::optional<MachineKind> kind_from_name(std::string_view s) {
  if (s == "tm") return MachineKind::TM;
  if (s == "ptm") return MachineKind::PTM;
  if (s == "qtm") return MachineKind::QTM;
  return std::nullopt;
}

struct MachineDesc {
  std::string name;
  std::vector<std::string> states;  // index = StateId::index
  StateId start;
  StateId halt;
  std::variant<TmTable, PtmTable, QtmTable> rules;

  MachineKind kind() const { return static_cast<MachineKind>(rules.index()); }

  const TmTable& tm() const { return expect<TmTable>(MachineKind::TM); }
  const PtmTable& ptm() const { return expect<PtmTable>(MachineKind::PTM); }
  const QtmTable& qtm() const { return expect<QtmTable>(MachineKind::QTM); }

  const std::string& state_name(StateId s) const { return states.at(s.index); }

  std::optional<StateId> find_state(std::string_view name_) const {
    for (std::size_t k = 0; k < states.size(); ++k) {
      if (states[k] == name_) return StateId{k};
    }
    return std::nullopt;
  }

  std::size_t rule_count() const {
    return std::visit([](const auto& t) { return t.size(); }, rules);
  }

  friend bool operator==(const MachineDesc&, const MachineDesc&) = default;

 private:
  template <class Table>
  const Table& expect(MachineKind k) const {
    if (kind() != k) {
      throw StructuralError("machine '" + name + "' is a " + std::string(kind_name(kind())) +
                            ", expected " + std::string(kind_name(k)));
    }
    return std::get<Table>(rules);
  }
};

/// Sorts every branch list into canonical (write, move, next) order.
inline void canonicalize(MachineDesc& m) {
  auto by_target = [](const auto& a, const auto& b) { return a.to < b.to; };
  if (auto* p = std::get_if<PtmTable>(&m.rules)) {
    for (auto& [src, row] : *p) std::sort(row.begin(), row.end(), by_target);
  } else if (auto* q = std::get_if<QtmTable>(&m.rules)) {
    for (auto& [src, row] : *q) std::sort(row.begin(), row.end(), by_target);
  }
}

/// Checks every description invariant; throws ValidationError naming the first violation.
inline void validate(const MachineDesc& m) {
  if (m.states.empty()) throw ValidationError("machine declares no states");
  std::set<std::string> seen;
  for (const auto& s : m.states) {
    if (!seen.insert(s).second) throw ValidationError("state '" + s + "' declared twice");
  }
  const std::size_t n = m.states.size();
  if (m.start.index >= n || m.halt.index >= n) throw ValidationError("start or halt state not declared");
  if (m.start == m.halt) throw ValidationError("initial state must differ from the halting state");

  auto check_source = [&](const Source& src) {
    if (src.state.index >= n) throw ValidationError("rule source uses an undeclared state");
    if (src.state == m.halt) {
      throw ValidationError("halting state '" + m.state_name(m.halt) + "' cannot have rules");
    }
  };
  auto check_target = [&](const Transition& t) {
    if (t.next.index >= n) throw ValidationError("rule target uses an undeclared state");
  };
  auto where = [&](const Source& src) {
    return "rule " + m.state_name(src.state) + " " + symbol_char(src.read);
  };

  switch (m.kind()) {
    case MachineKind::TM:
      for (const auto& [src, t] : m.tm()) {
        check_source(src);
        check_target(t);
      }
      break;
    case MachineKind::PTM:
      for (const auto& [src, row] : m.ptm()) {
        check_source(src);
        if (row.empty()) throw ValidationError(where(src) + ": no branches");
        Rat sum = 0;
        std::set<Transition> targets;
        for (const auto& b : row) {
          check_target(b.to);
          if (b.weight <= 0 || b.weight > 1) {
            throw ValidationError(where(src) + ": probability " + to_string(b.weight) + " outside (0,1]");
          }
          if (!targets.insert(b.to).second) throw ValidationError(where(src) + ": repeated branch");
          sum += b.weight;
        }
        if (sum != 1) throw ValidationError(where(src) + ": probabilities sum to " + to_string(sum) + ", sum != 1");
      }
      break;
    case MachineKind::QTM: {
      for (const auto& [src, row] : m.qtm()) {
        check_source(src);
        if (row.empty()) throw ValidationError(where(src) + ": no branches");
        std::set<Transition> targets;
        for (const auto& b : row) {
          check_target(b.to);
          if (b.weight.is_zero()) throw ValidationError(where(src) + ": zero amplitude");
          if (!targets.insert(b.to).second) throw ValidationError(where(src) + ": repeated branch");
        }
      }
      for (std::size_t q = 0; q < n; ++q) {
        if (StateId{q} == m.halt) continue;
        for (Symbol s : kSymbols) {
          if (!m.qtm().contains(Source{StateId{q}, s})) {
            throw ValidationError("QTM rule table is not total: missing rule " + m.states[q] + " " +
                                  symbol_char(s));
          }
        }
      }
      break;
    }
  }
}

/// Finitely supported tape; cells absent from `cells()` are blank.
class Tape {
 public:
  using Cell = std::pair<std::int64_t, Symbol>;

  Tape() = default;

  /// Input convention: bits at positions 0..len-1.
  static Tape from_input(std::string_view bits) {
    Tape t;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      const char c = bits[k];
      if (c != '0' && c != '1') {
        throw PreconditionError("input must be a bit string, got '" + std::string(bits) + "'");
      }
      t.set(static_cast<std::int64_t>(k), c == '0' ? Symbol::Zero : Symbol::One);
    }
    return t;
  }

  Symbol get(std::int64_t pos) const {
    auto it = lower(pos);
    return (it != cells_.end() && it->first == pos) ? it->second : Symbol::Blank;
  }

  void set(std::int64_t pos, Symbol s) {
    auto it = lower(pos);
    const bool present = it != cells_.end() && it->first == pos;
    if (s == Symbol::Blank) {
      if (present) cells_.erase(it);
    } else if (present) {
      it->second = s;
    } else {
      cells_.insert(it, {pos, s});
    }
  }

  Tape with(std::int64_t pos, Symbol s) const {
    Tape t = *this;
    t.set(pos, s);
    return t;
  }

  const std::vector<Cell>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  /// Leftmost non-blank position (0 for an empty tape).
  std::int64_t offset() const { return cells_.empty() ? 0 : cells_.front().first; }

  /// Non-blank content from the leftmost to the rightmost non-blank cell; interior blanks as '_'.
  std::string bits() const {
    std::string out;
    if (cells_.empty()) return out;
    std::int64_t pos = cells_.front().first;
    for (const auto& [p, s] : cells_) {
      for (; pos < p; ++pos) out += '_';
      out += symbol_char(s);
      pos = p + 1;
    }
    return out;
  }

  /// "bits" when the content starts at position 0, "bits@offset" otherwise.
  std::string label() const {
    std::string b = bits();
    if (offset() != 0) b += "@" + std::to_string(offset());
    return b;
  }

  friend auto operator<=>(const Tape&, const Tape&) = default;

 private:
  std::vector<Cell>::iterator lower(std::int64_t pos) {
    return std::lower_bound(cells_.begin(), cells_.end(), pos,
                            [](const Cell& c, std::int64_t p) { return c.first < p; });
  }
  std::vector<Cell>::const_iterator lower(std::int64_t pos) const {
    return std::lower_bound(cells_.begin(), cells_.end(), pos,
                            [](const Cell& c, std::int64_t p) { return c.first < p; });
  }

  std::vector<Cell> cells_;
};

/// One classical configuration (h, q, x, T).
struct Config {
  bool halted = false;
  StateId state;
  std::int64_t head = 0;
  Tape tape;

  Symbol read() const { return tape.get(head); }

  friend auto operator<=>(const Config&, const Config&) = default;
};

inline Config initial_config(const MachineDesc& m, std::string_view input) {
  return Config{false, m.start, 0, Tape::from_input(input)};
}

/// Canonical binary rendering of a natural number (0 -> "0").
inline std::string binary_string(const BigInt& n) {
  if (n < 0) throw PreconditionError("binary_string of a negative number");
  return n.get_str(2);
}

}  // namespace qtmlab
