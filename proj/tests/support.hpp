#pragma once

// Shared fixtures for the test binaries: corpus access and hand-rolled
// random generators.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtmlab/dsl.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/machine.hpp"
#include "qtmlab/qtm.hpp"
#include "qtmlab/superposition.hpp"

#ifndef QTMLAB_CORPUS_DIR
#error "QTMLAB_CORPUS_DIR must be defined"
#endif

namespace qtmlab::fixture {

inline std::filesystem::path corpus_dir() { return QTMLAB_CORPUS_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MachineDesc load(const std::string& file) { return parse_machine(slurp(corpus_dir() / file)); }

/// Every machine file in the corpus, sorted by file name.
inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
    const auto ext = e.path().extension();
    if (ext == ".tm" || ext == ".ptm" || ext == ".qtm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<MachineDesc> corpus(std::optional<MachineKind> kind = std::nullopt) {
  std::vector<MachineDesc> out;
  for (const auto& f : corpus_files()) {
    MachineDesc m = parse_machine(slurp(f));
    if (!kind || m.kind() == *kind) out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<MachineDesc> wellformed_qtms() {
  std::vector<MachineDesc> out;
  for (auto& m : corpus(MachineKind::QTM)) {
    if (check_wellformed_local(m).well_formed) out.push_back(std::move(m));
  }
  return out;
}

/// All bit strings of length <= n.
inline std::vector<std::string> inputs_up_to(std::size_t n) {
  std::vector<std::string> out{""};
  for (std::size_t len = 1; len <= n; ++len) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << len); ++bits) {
      std::string s;
      for (std::size_t k = 0; k < len; ++k) s += ((bits >> (len - 1 - k)) & 1) ? '1' : '0';
      out.push_back(s);
    }
  }
  return out;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool coin() { return integer(0, 1) == 1; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

  Rat rat(std::int64_t bound = 12) {
    return make_rat(BigInt(static_cast<long>(integer(-bound, bound))), BigInt(static_cast<long>(integer(1, bound))));
  }
  Rat positive_rat(std::int64_t bound = 12) {
    return make_rat(BigInt(static_cast<long>(integer(1, bound))), BigInt(static_cast<long>(integer(1, bound))));
  }
  CycQ8 cyc(std::int64_t bound = 12) {
    CycQ8 z(rat(bound), rat(bound), rat(bound), rat(bound));
    return z;
  }
  CycQ8 nonzero_cyc() {
    for (;;) {
      CycQ8 z = cyc();
      if (!z.is_zero()) return z;
    }
  }
  RealQ2 real(std::int64_t bound = 12) { return RealQ2(rat(bound), rat(bound)); }

  /// Random probability vector of length n with rational entries summing to 1.
  std::vector<Rat> simplex(std::size_t n) {
    std::vector<Rat> w;
    Rat total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      w.push_back(Rat(static_cast<long>(integer(0, 9))));
      total += w.back();
    }
    if (total == 0) {
      w[0] = 1;
      total = 1;
    }
    for (auto& x : w) {
      x /= total;
      x.canonicalize();
    }
    return w;
  }

  Symbol symbol() { return kSymbols[static_cast<std::size_t>(integer(0, 2))]; }
  Move move() { return kMoves[static_cast<std::size_t>(integer(0, 2))]; }
  std::string bits(std::size_t max_len) {
    std::string s;
    const auto len = integer(0, static_cast<std::int64_t>(max_len));
    for (std::int64_t k = 0; k < len; ++k) s += coin() ? '1' : '0';
    return s;
  }

  /// A random valid machine of the given kind (not necessarily well-formed).
  MachineDesc machine(MachineKind kind, std::size_t max_states = 4) {
    MachineDesc m;
    m.name = "rand" + std::to_string(integer(0, 999999));
    const auto n = static_cast<std::size_t>(integer(2, static_cast<std::int64_t>(max_states)));
    for (std::size_t k = 0; k + 1 < n; ++k) m.states.push_back("q" + std::to_string(k));
    m.states.push_back("qH");
    m.start = StateId{0};
    m.halt = StateId{n - 1};
    auto target = [&] { return Transition{symbol(), move(), StateId{static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1))}}; };
    auto distinct_targets = [&](std::size_t count) {
      std::vector<Transition> ts;
      while (ts.size() < count) {
        Transition t = target();
        if (std::find(ts.begin(), ts.end(), t) == ts.end()) ts.push_back(t);
      }
      return ts;
    };
    switch (kind) {
      case MachineKind::TM: {
        TmTable t;
        for (std::size_t q = 0; q + 1 < n; ++q) {
          for (Symbol s : kSymbols) {
            if (coin() || coin()) t[Source{StateId{q}, s}] = target();
          }
        }
        m.rules = std::move(t);
        break;
      }
      case MachineKind::PTM: {
        PtmTable t;
        for (std::size_t q = 0; q + 1 < n; ++q) {
          for (Symbol s : kSymbols) {
            if (!(coin() || coin())) continue;
            const auto k = static_cast<std::size_t>(integer(1, 3));
            auto ts = distinct_targets(k);
            std::vector<Rat> p;
            do p = simplex(k);
            while (std::any_of(p.begin(), p.end(), [](const Rat& x) { return x == 0; }));
            auto& row = t[Source{StateId{q}, s}];
            for (std::size_t b = 0; b < k; ++b) row.push_back({ts[b], p[b]});
          }
        }
        m.rules = std::move(t);
        break;
      }
      case MachineKind::QTM: {
        QtmTable t;
        for (std::size_t q = 0; q + 1 < n; ++q) {
          for (Symbol s : kSymbols) {
            const auto k = static_cast<std::size_t>(integer(1, 3));
            auto ts = distinct_targets(k);
            auto& row = t[Source{StateId{q}, s}];
            for (std::size_t b = 0; b < k; ++b) row.push_back({ts[b], nonzero_cyc()});
          }
        }
        m.rules = std::move(t);
        break;
      }
    }
    canonicalize(m);
    validate(m);
    return m;
  }

  /// A random finite superposition of running configurations near the origin.
  Superposition superposition(const MachineDesc& m, std::size_t max_terms = 5) {
    Superposition::Terms t;
    const auto count = integer(1, static_cast<std::int64_t>(max_terms));
    for (std::int64_t k = 0; k < count; ++k) {
      std::size_t q;
      do q = static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(m.states.size()) - 1));
      while (StateId{q} == m.halt);
      Config c{false, StateId{q}, integer(-2, 2), Tape::from_input(bits(4)).with(integer(-2, 2), symbol())};
      t[BasisState{c, 0}] = nonzero_cyc();
    }
    return Superposition(std::move(t), 0);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Applies one random local edit to a QTM: an amplitude, a move, a next
/// state or a written symbol in one branch.
inline MachineDesc mutate(const MachineDesc& base, Gen& g) {
  MachineDesc m = base;
  auto& table = std::get<QtmTable>(m.rules);
  std::vector<Source> sources;
  for (const auto& [src, row] : table) sources.push_back(src);
  auto& row = table[g.pick(sources)];
  auto& br = row[static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(row.size()) - 1))];
  switch (g.integer(0, 3)) {
    case 0: {
      static const std::vector<CycQ8> amps = {CycQ8(1), CycQ8(-1), CycQ8::i(), CycQ8::inv_sqrt2(),
                                              -CycQ8::inv_sqrt2(), CycQ8(Rat(1, 2)), CycQ8::zeta()};
      br.weight = g.pick(amps);
      break;
    }
    case 1: br.to.move = g.move(); break;
    case 2: br.to.next = StateId{static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(m.states.size()) - 1))}; break;
    default: br.to.write = g.symbol(); break;
  }
  // Merge branches that collided on the same target.
  std::vector<Branch<CycQ8>> merged;
  for (const auto& b : row) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& x) { return x.to == b.to; });
    if (it == merged.end()) {
      merged.push_back(b);
    } else {
      it->weight += b.weight;
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const auto& x) { return x.weight.is_zero(); }),
               merged.end());
  if (merged.empty()) merged.push_back({Transition{Symbol::Blank, Move::Stay, m.halt}, CycQ8(1)});
  row = std::move(merged);
  canonicalize(m);
  validate(m);
  return m;
}

}  // namespace qtmlab::fixture
