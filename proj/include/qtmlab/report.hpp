#pragma once

// Structured reports. Keys are sorted; exact values are strings in the
// amplitude grammar, with float approximations in separate "approx" fields.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qtmlab/classical.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/harness.hpp"
#include "qtmlab/machine.hpp"
#include "qtmlab/qtm.hpp"

namespace qtmlab::report {

using Json = nlohmann::json;

inline Json number(const Rat& r) { return Json{{"exact", to_string(r)}, {"approx", r.get_d()}}; }

inline Json number(const RealQ2& r) { return Json{{"exact", to_string(r)}, {"approx", r.to_double()}}; }

inline Json number(const CycQ8& z) {
  const auto c = z.to_complex();
  return Json{{"exact", to_string(z)}, {"approx", Json::array({c.real(), c.imag()})}};
}

inline Json machine_json(const MachineDesc& m) {
  return Json{{"name", m.name}, {"kind", std::string(kind_name(m.kind()))}, {"rules", m.rule_count()}};
}

inline std::string source_text(const MachineDesc& m, const Source& s) {
  return m.state_name(s.state) + "/" + std::string(1, symbol_char(s.read));
}

inline Json wellformed_json(const MachineDesc& m, const WellFormedReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    Json j{{"condition", condition_name(v.condition)},
           {"first", source_text(m, v.first)},
           {"second", source_text(m, v.second)},
           {"residual", number(v.residual)}};
    if (v.neighbors) {
      j["neighbors"] = std::string{symbol_char(v.neighbors->first), symbol_char(v.neighbors->second)};
    }
    violations.push_back(std::move(j));
  }
  return Json{{"verdict", r.well_formed ? "WELL_FORMED" : "VIOLATION"}, {"violations", std::move(violations)}};
}

inline Json outcome_json(const ClassicalOutcome& o) {
  return Json{{"status", std::string(status_name(o.status))}, {"tape", o.tape.label()}, {"steps", o.steps}};
}

inline Json outcome_json(const ClassicalDist& d) {
  Json rows = Json::array();
  for (const auto& [k, p] : d.probs) {
    rows.push_back(Json{{"status", std::string(status_name(k.status))}, {"tape", k.tape.label()}, {"p", number(p)}});
  }
  return Json{{"distribution", std::move(rows)},
              {"halted_mass", number(d.halted_mass())},
              {"horizon", d.horizon},
              {"peak_support", d.peak_support}};
}

inline Json outcome_json(const OutcomeDist& d) {
  Json events = Json::array();
  for (const auto& [e, p] : d.events) events.push_back(Json{{"step", e.step}, {"tape", e.tape.label()}, {"p", number(p)}});
  Json outputs = Json::array();
  for (const auto& [tape, p] : d.by_tape()) outputs.push_back(Json{{"tape", tape.label()}, {"p", number(p)}});
  return Json{{"events", std::move(events)},
              {"outputs", std::move(outputs)},
              {"halted_mass", number(d.halted_mass())},
              {"residual_running", number(d.residual_running)},
              {"peak_support", d.peak_support},
              {"branches", d.branches}};
}

inline Json outcome_json(const UniversalOutcome& u) {
  return std::visit([](const auto& x) { return outcome_json(x); }, u);
}

inline Json distribution_json(const OutputDist& d) {
  Json rows = Json::array();
  for (const auto& [k, p] : d) {
    rows.push_back(Json{{"status", std::string(status_name(k.status))}, {"tape", k.tape.label()}, {"p", number(p)}});
  }
  return rows;
}

inline Json accuracy_json(const SimAccuracyReport& r) {
  return Json{{"tv", number(r.tv)}, {"epsilon", number(r.epsilon)}, {"within_budget", r.within_budget}};
}

inline Json suhd_json(const std::vector<SuhdIterationRecord>& records) {
  Json rows = Json::array();
  for (const auto& r : records) {
    rows.push_back(Json{{"outer_T", r.outer_T},
                        {"steps_executed", r.steps_executed},
                        {"accuracy", number(r.accuracy)},
                        {"slowdown_argument", number(r.slowdown_argument)},
                        {"observed", r.observed},
                        {"outcome", r.outcome ? Json(*r.outcome) : Json(nullptr)},
                        {"halt_prob_at_signal", number(r.halt_prob_at_signal)},
                        {"reset_fidelity", number(r.reset_fidelity)},
                        {"state_restored", r.state_restored}});
  }
  return rows;
}

/// One-line summary for a SUHD run.
inline std::string suhd_evidence_line(const std::vector<SuhdIterationRecord>& records) {
  std::size_t observed = 0;
  std::size_t nontrivial = 0;
  std::size_t restored = 0;
  for (const auto& r : records) {
    if (r.state_restored) ++restored;
    if (r.observed) {
      ++observed;
      if (r.halt_prob_at_signal.sign() > 0 && r.halt_prob_at_signal < RealQ2(1)) ++nontrivial;
    }
  }
  std::ostringstream os;
  os << "evidence (not proof): " << restored << "/" << records.size() << " iterations restored the initial state; "
     << observed << " observation(s), " << nontrivial << " with halt probability strictly between 0 and 1";
  return os.str();
}

inline Json universality_json(const UniversalityReport& r) {
  Json disc = Json::array();
  for (const auto& d : r.discrepancies) {
    disc.push_back(Json{{"machine_code", d.machine_code.get_str()}, {"input", d.input.get_str()}, {"detail", d.detail}});
  }
  return Json{{"kind", std::string(kind_name(r.kind))},
              {"checked", r.checked},
              {"horizon", r.horizon},
              {"passed", r.passed()},
              {"discrepancies", std::move(disc)},
              {"limitation", r.limitation}};
}

inline Json conjecture_json(const ConjectureReport& r) {
  Json rows = Json::array();
  for (const auto& e : r.entries) {
    rows.push_back(Json{{"machine", e.machine},
                        {"reversible_unobserved", e.reversible_unobserved},
                        {"nontrivial_observations", e.nontrivial_observations},
                        {"irreversible_observations", e.irreversible_observations},
                        {"trivial_observations_restore", e.trivial_observations_restore}});
  }
  return Json{{"header", r.header}, {"epsilon", number(r.epsilon)}, {"max_outer_T", r.max_outer_T}, {"machines", rows}};
}

namespace detail {

inline void render_text(const Json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    // An exact/approx pair renders on one line.
    if (j.size() == 2 && j.contains("exact") && j.contains("approx")) {
      os << prefix << ": " << j["exact"].get<std::string>() << "  (~" << j["approx"].dump() << ")\n";
      return;
    }
    for (const auto& [k, v] : j.items()) render_text(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    if (j.empty()) os << prefix << ": []\n";
    for (std::size_t i = 0; i < j.size(); ++i) render_text(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else if (j.is_string()) {
    os << prefix << ": " << j.get<std::string>() << "\n";
  } else {
    os << prefix << ": " << j.dump() << "\n";
  }
}

}  // namespace detail

/// Flat "path: value" rendering of a report.
inline std::string to_text(const Json& j) {
  std::ostringstream os;
  detail::render_text(j, "", os);
  return os.str();
}

inline std::string render(const Json& j, std::string_view format) {
  if (format == "text") return to_text(j);
  return j.dump(2) + "\n";
}

}  // namespace qtmlab::report
