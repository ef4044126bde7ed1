#pragma once

// Line-oriented machine description format.
//
//   # comment
//   kind qtm
//   name hadamard-branch
//   states q0 qH
//   start q0                        (optional, defaults to the first state)
//   halt qH
//   rule q0 _ -> (qH, 0, S, 1/2*r2) + (qH, 1, S, 1/2*r2)
//
// A branch is (next, write, move[, weight]); symbols are 0, 1, _ and moves L, S, R.
// TM rules have one branch and no weight, PTM weights are rational probabilities,
// QTM weights are amplitudes in the amplitude grammar. An omitted weight is 1.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtmlab/amplitude.hpp"
#include "qtmlab/error.hpp"
#include "qtmlab/machine.hpp"

namespace qtmlab {

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline bool is_ident(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

inline std::vector<Token> split_ws(std::string_view line, std::size_t base_col) {
  std::vector<Token> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k > start) out.push_back({line.substr(start, k - start), base_col + start});
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class MachineParser {
 public:
  explicit MachineParser(std::string_view source) : source_(source) {}

  MachineDesc parse() {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source_.size()) {
      const std::size_t nl = source_.find('\n', pos);
      std::string_view line = source_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      parse_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    return finish(line_no);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t line, std::size_t col) const {
    throw ParseError(msg, line, col);
  }

  void parse_line(std::string_view line, std::size_t ln) {
    const auto toks = split_ws(line, 0);
    if (toks.empty()) return;
    const std::string_view key = toks[0].text;
    const std::size_t col = toks[0].column + 1;
    if (key == "kind") {
      if (kind_) fail("duplicate 'kind' header", ln, col);
      if (toks.size() != 2) fail("expected 'kind tm|ptm|qtm'", ln, col);
      kind_ = kind_from_name(toks[1].text);
      if (!kind_) fail("unknown machine kind '" + std::string(toks[1].text) + "'", ln, toks[1].column + 1);
    } else if (key == "name") {
      if (name_) fail("duplicate 'name' header", ln, col);
      const std::string_view rest = trim(line.substr(toks[0].column + key.size()));
      if (rest.empty()) fail("empty machine name", ln, col);
      name_ = std::string(rest);
    } else if (key == "states") {
      if (have_states_) fail("duplicate 'states' header", ln, col);
      if (toks.size() < 2) fail("'states' needs at least one state", ln, col);
      for (std::size_t k = 1; k < toks.size(); ++k) {
        if (!is_ident(toks[k].text)) fail("bad state name '" + std::string(toks[k].text) + "'", ln, toks[k].column + 1);
        if (desc_.find_state(toks[k].text)) {
          fail("state '" + std::string(toks[k].text) + "' declared twice", ln, toks[k].column + 1);
        }
        desc_.states.emplace_back(toks[k].text);
      }
      have_states_ = true;
    } else if (key == "start" || key == "halt") {
      if (toks.size() != 2) fail("expected '" + std::string(key) + " <state>'", ln, col);
      const StateId s = state_ref(toks[1], ln);
      auto& slot = key == "start" ? start_ : halt_;
      if (slot) fail("duplicate '" + std::string(key) + "' header", ln, col);
      slot = s;
    } else if (key == "rule") {
      parse_rule(line, toks, ln);
    } else {
      fail("unknown directive '" + std::string(key) + "'", ln, col);
    }
  }

  StateId state_ref(const Token& t, std::size_t ln) const {
    if (!have_states_) fail("'states' must be declared before use", ln, t.column + 1);
    const auto s = desc_.find_state(t.text);
    if (!s) fail("unknown state '" + std::string(t.text) + "'", ln, t.column + 1);
    return *s;
  }

  void parse_rule(std::string_view line, const std::vector<Token>& toks, std::size_t ln) {
    if (!kind_) fail("'kind' must be declared before rules", ln, 1);
    if (!halt_) fail("'halt' must be declared before rules", ln, 1);
    if (toks.size() < 4 || toks[3].text != "->") fail("expected 'rule <state> <symbol> -> <branches>'", ln, toks[0].column + 1);
    const StateId q = state_ref(toks[1], ln);
    if (q == *halt_) {
      throw ValidationError("line " + std::to_string(ln) + ": halting state '" + desc_.state_name(q) +
                            "' cannot have rules");
    }
    if (toks[2].text.size() != 1 || !symbol_from_char(toks[2].text[0])) {
      fail("bad symbol '" + std::string(toks[2].text) + "'", ln, toks[2].column + 1);
    }
    const Source src{q, *symbol_from_char(toks[2].text[0])};
    if (!sources_.insert(src).second) fail("duplicate rule for this state and symbol", ln, toks[0].column + 1);

    const std::size_t body_start = toks[3].column + 2;
    const auto branches = parse_branches(line, body_start, ln);
    switch (*kind_) {
      case MachineKind::TM: {
        if (branches.size() != 1 || branches[0].weight) fail("TM rules take exactly one (next, write, move) branch", ln, body_start + 1);
        tm_[src] = branches[0].to;
        break;
      }
      case MachineKind::PTM: {
        auto& row = ptm_[src];
        for (const auto& b : branches) {
          row.push_back({b.to, b.weight ? parse_rational(*b.weight, ln, b.weight_col) : Rat(1)});
        }
        sort_row(row);
        break;
      }
      case MachineKind::QTM: {
        auto& row = qtm_[src];
        for (const auto& b : branches) {
          row.push_back({b.to, b.weight ? parse_amplitude(*b.weight, ln, b.weight_col) : CycQ8(1)});
        }
        sort_row(row);
        break;
      }
    }
  }

  template <class W>
  static void sort_row(std::vector<Branch<W>>& row) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.to < b.to; });
  }

  struct RawBranch {
    Transition to;
    std::optional<std::string_view> weight;
    std::size_t weight_col = 0;  // 0-based offset of the weight inside the line
    std::size_t column = 0;      // 1-based column of '('
  };

  std::vector<RawBranch> parse_branches(std::string_view line, std::size_t from, std::size_t ln) const {
    std::vector<RawBranch> out;
    std::size_t k = from;
    auto skip = [&] {
      while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    };
    for (;;) {
      skip();
      if (k >= line.size() || line[k] != '(') fail("expected '(' to open a branch", ln, k + 1);
      const std::size_t open = k;
      int depth = 0;
      std::vector<std::pair<std::size_t, std::size_t>> fields;  // [begin, end)
      std::size_t field_begin = k + 1;
      for (; k < line.size(); ++k) {
        if (line[k] == '(') {
          ++depth;
        } else if (line[k] == ')') {
          if (--depth == 0) break;
        } else if (line[k] == ',' && depth == 1) {
          fields.emplace_back(field_begin, k);
          field_begin = k + 1;
        }
      }
      if (k >= line.size()) fail("unterminated branch", ln, open + 1);
      fields.emplace_back(field_begin, k);
      ++k;  // past ')'
      if (fields.size() != 3 && fields.size() != 4) fail("a branch has 3 or 4 fields", ln, open + 1);

      auto field = [&](std::size_t idx) {
        std::size_t b = fields[idx].first;
        std::size_t e = fields[idx].second;
        while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
        return Token{line.substr(b, e - b), b};
      };
      RawBranch rb;
      rb.column = open + 1;
      rb.to.next = state_ref(field(0), ln);
      const Token w = field(1);
      if (w.text.size() != 1 || !symbol_from_char(w.text[0])) fail("bad write symbol '" + std::string(w.text) + "'", ln, w.column + 1);
      rb.to.write = *symbol_from_char(w.text[0]);
      const Token mv = field(2);
      if (mv.text == "L") {
        rb.to.move = Move::Left;
      } else if (mv.text == "S") {
        rb.to.move = Move::Stay;
      } else if (mv.text == "R") {
        rb.to.move = Move::Right;
      } else {
        fail("bad move '" + std::string(mv.text) + "' (expected L, S or R)", ln, mv.column + 1);
      }
      if (fields.size() == 4) {
        const Token wt = field(3);
        if (wt.text.empty()) fail("empty weight", ln, wt.column + 1);
        rb.weight = wt.text;
        rb.weight_col = wt.column;
      }
      out.push_back(rb);
      skip();
      if (k >= line.size()) break;
      if (line[k] != '+') fail("expected '+' between branches", ln, k + 1);
      ++k;
    }
    return out;
  }

  MachineDesc finish(std::size_t last_line) {
    if (!kind_) fail("missing 'kind' header", last_line, 1);
    if (!name_) fail("missing 'name' header", last_line, 1);
    if (!have_states_) fail("missing 'states' header", last_line, 1);
    if (!halt_) fail("missing 'halt' header", last_line, 1);
    desc_.name = *name_;
    desc_.start = start_.value_or(StateId{0});
    desc_.halt = *halt_;
    switch (*kind_) {
      case MachineKind::TM: desc_.rules = std::move(tm_); break;
      case MachineKind::PTM: desc_.rules = std::move(ptm_); break;
      case MachineKind::QTM: desc_.rules = std::move(qtm_); break;
    }
    validate(desc_);
    return std::move(desc_);
  }

  std::string_view source_;
  MachineDesc desc_;
  std::optional<MachineKind> kind_;
  std::optional<std::string> name_;
  bool have_states_ = false;
  std::optional<StateId> start_;
  std::optional<StateId> halt_;
  std::set<Source> sources_;
  TmTable tm_;
  PtmTable ptm_;
  QtmTable qtm_;
};

inline std::string branch_text(const MachineDesc& m, const Transition& t) {
  std::string s = "(" + m.state_name(t.next) + ", ";
  s += symbol_char(t.write);
  s += ", ";
  s += move_char(t.move);
  return s;
}

}  // namespace detail

/// Parses and validates a machine description.
inline MachineDesc parse_machine(std::string_view source_text) {
  return detail::MachineParser(source_text).parse();
}

/// Canonical text: states by index, rows by (state, symbol), branches by (write, move, next).
inline std::string serialize_machine(const MachineDesc& m) {
  std::ostringstream out;
  out << "kind " << kind_name(m.kind()) << '\n';
  out << "name " << m.name << '\n';
  out << "states";
  for (const auto& s : m.states) out << ' ' << s;
  out << '\n';
  out << "start " << m.state_name(m.start) << '\n';
  out << "halt " << m.state_name(m.halt) << '\n';
  auto head = [&](const Source& src) {
    out << "rule " << m.state_name(src.state) << ' ' << symbol_char(src.read) << " ->";
  };
  switch (m.kind()) {
    case MachineKind::TM:
      for (const auto& [src, t] : m.tm()) {
        head(src);
        out << ' ' << detail::branch_text(m, t) << ")\n";
      }
      break;
    case MachineKind::PTM:
      for (const auto& [src, row] : m.ptm()) {
        head(src);
        for (std::size_t k = 0; k < row.size(); ++k) {
          out << (k ? " + " : " ") << detail::branch_text(m, row[k].to) << ", " << to_string(row[k].weight) << ')';
        }
        out << '\n';
      }
      break;
    case MachineKind::QTM:
      for (const auto& [src, row] : m.qtm()) {
        head(src);
        for (std::size_t k = 0; k < row.size(); ++k) {
          out << (k ? " + " : " ") << detail::branch_text(m, row[k].to) << ", " << to_string(row[k].weight) << ')';
        }
        out << '\n';
      }
      break;
  }
  return out.str();
}

}  // namespace qtmlab
