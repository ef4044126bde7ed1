#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/machine.hpp"

namespace qtmlab {

/// A basis vector of the machine's state space: a configuration plus, for
/// halted configurations, the step at which the halt bit was set. The halt
/// step keeps halted branches from different times orthogonal, which is what
/// makes the global step operator an isometry.
struct BasisState {
  Config config;
  std::uint64_t halt_step = 0;  // 0 while running

  friend auto operator<=>(const BasisState&, const BasisState&) = default;
};

/// Finite superposition of basis states with exact amplitudes. Never stores
/// zero amplitudes; the squared norm is computed once at construction.
class Superposition {
 public:
  using Terms = std::map<BasisState, CycQ8>;

  Superposition() = default;

  Superposition(Terms terms, std::uint64_t clock) : clock_(clock) {
    for (auto it = terms.begin(); it != terms.end();) {
      if (it->second.is_zero()) {
        it = terms.erase(it);
      } else {
        norm_sq_ += it->second.norm_sq();
        ++it;
      }
    }
    terms_ = std::move(terms);
  }

  static Superposition point(const Config& c) {
    if (c.halted) throw PreconditionError("initial configurations must have h = 0");
    return Superposition(Terms{{BasisState{c, 0}, CycQ8(1)}}, 0);
  }

  const Terms& terms() const { return terms_; }
  const RealQ2& norm_sq() const { return norm_sq_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Number of forward steps applied since the initial state.
  std::uint64_t clock() const { return clock_; }

  CycQ8 amplitude(const BasisState& b) const {
    const auto it = terms_.find(b);
    return it == terms_.end() ? CycQ8() : it->second;
  }

  Superposition scaled(const CycQ8& factor) const {
    Terms t;
    for (const auto& [k, a] : terms_) t.emplace(k, a * factor);
    return Superposition(std::move(t), clock_);
  }

  friend bool operator==(const Superposition& a, const Superposition& b) {
    return a.clock_ == b.clock_ && a.terms_ == b.terms_;
  }

 private:
  Terms terms_;
  RealQ2 norm_sq_;
  std::uint64_t clock_ = 0;
};

/// <a|b>, conjugate-linear in the first argument.
inline CycQ8 inner_product(const Superposition& a, const Superposition& b) {
  CycQ8 sum;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  auto ia = ta.begin();
  auto ib = tb.begin();
  while (ia != ta.end() && ib != tb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second.conj() * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

}  // namespace qtmlab
