// qtmlab command-line tool.

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtmlab/classical.hpp"
#include "qtmlab/dsl.hpp"
#include "qtmlab/godel.hpp"
#include "qtmlab/harness.hpp"
#include "qtmlab/qtm.hpp"
#include "qtmlab/report.hpp"

namespace fs = std::filesystem;
using namespace qtmlab;
using report::Json;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kResource = 2, kInternal = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MachineDesc load_machine(const std::string& path) {
  try {
    return parse_machine(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line(), e.column());
  }
}

std::vector<std::uint64_t> parse_steps(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw PreconditionError("bad step '" + item + "'");
    }
    out.push_back(std::stoull(item));
  }
  return out;
}

Rat parse_epsilon(const std::string& text) {
  const Rat v = parse_rational(text);
  if (v < 0) throw PreconditionError("epsilon must be nonnegative");
  return v;
}

struct Common {
  std::string input;
  std::uint64_t horizon = 0;
  std::string measure_at;
  bool measure_every = false;
  std::size_t max_support = kDefaultMaxSupport;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
};

constexpr std::uint64_t kDefaultHorizon = 100;

/// Resolves the schedule and horizon for QTM runs. Without schedule flags a
/// single measurement is made at the horizon.
std::pair<MeasurementSchedule, std::uint64_t> qtm_schedule(const Common& c) {
  if (!c.measure_at.empty()) {
    auto steps = parse_steps(c.measure_at);
    const std::uint64_t h = c.horizon ? c.horizon : (steps.empty() ? kDefaultHorizon : steps.back());
    return {MeasurementSchedule(std::move(steps)), h};
  }
  const std::uint64_t h = c.horizon ? c.horizon : kDefaultHorizon;
  if (c.measure_every) return {MeasurementSchedule::every(h), h};
  return {MeasurementSchedule({h}), h};
}

Json schedule_json(const MeasurementSchedule& s) {
  Json a = Json::array();
  for (auto t : s.steps()) a.push_back(t);
  return a;
}

UniversalOutcome run_machine(const MachineDesc& m, const Common& c, Json& meta) {
  Limits limits;
  limits.max_support = c.max_support;
  if (m.kind() == MachineKind::QTM) {
    auto [schedule, horizon] = qtm_schedule(c);
    meta["schedule"] = schedule_json(schedule);
    meta["horizon"] = horizon;
    return run(m, c.input, schedule, horizon, limits);
  }
  const std::uint64_t horizon = c.horizon ? c.horizon : kDefaultHorizon;
  meta["horizon"] = horizon;
  if (m.kind() == MachineKind::TM) return tm_run(m, c.input, horizon);
  return ptm_evolve_exact(m, c.input, horizon, c.max_support);
}

OutputDist output_of(const UniversalOutcome& u) {
  return std::visit([](const auto& x) { return output_distribution(x); }, u);
}

void emit(const Json& j, const Common& c) { std::cout << report::render(j, c.format); }

// -- interactive observer --------------------------------------------------

/// Reads y/N answers from stdin, separated by commas or newlines, with an
/// optional per-answer deadline. Missing or late answers count as "no".
class AnswerReader {
 public:
  explicit AnswerReader(int deadline_ms) : deadline_ms_(deadline_ms) {}

  std::optional<std::string> next() {
    for (;;) {
      const auto cut = buffer_.find_first_of(",\n");
      if (cut != std::string::npos) {
        std::string tok = buffer_.substr(0, cut);
        buffer_.erase(0, cut + 1);
        return trim(tok);
      }
      if (eof_) {
        if (buffer_.empty()) return std::nullopt;
        std::string tok = trim(buffer_);
        buffer_.clear();
        return tok;
      }
      if (deadline_ms_ > 0) {
        pollfd p{STDIN_FILENO, POLLIN, 0};
        const int r = ::poll(&p, 1, deadline_ms_);
        if (r == 0) return std::nullopt;
      }
      char chunk[256];
      const ssize_t n = ::read(STDIN_FILENO, chunk, sizeof chunk);
      if (n <= 0) {
        eof_ = true;
      } else {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      }
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  int deadline_ms_;
  std::string buffer_;
  bool eof_ = false;
};

// -- commands ----------------------------------------------------------------

int cmd_check(const std::string& file, std::size_t window, const Common& c) {
  const MachineDesc m = load_machine(file);
  Json out{{"command", "check"}, {"machine", report::machine_json(m)}};
  if (m.kind() != MachineKind::QTM) {
    out["result"] = Json{{"verdict", "WELL_FORMED"}, {"note", "classical machines have no unitarity condition"}};
    emit(out, c);
    return kOk;
  }
  const WellFormedReport local = check_wellformed_local(m);
  out["result"] = report::wellformed_json(m, local);
  bool ok = local.well_formed;
  if (window > 0) {
    const bool unitary = check_unitary_window(m, window, c.max_support);
    out["window"] = Json{{"tape_len", window}, {"unitary", unitary}};
    ok = ok && unitary;
  }
  emit(out, c);
  return ok ? kOk : kInvalid;
}

int cmd_run(const std::string& file, const Common& c) {
  const MachineDesc m = load_machine(file);
  Json meta{{"command", "run"}, {"machine", report::machine_json(m)}, {"input", c.input}};
  const UniversalOutcome result = run_machine(m, c, meta);
  meta["result"] = report::outcome_json(result);
  if (m.kind() == MachineKind::PTM && c.seed) {
    meta["sample"] = report::outcome_json(ptm_sample(m, c.input, meta["horizon"].get<std::uint64_t>(), *c.seed));
    meta["seed"] = *c.seed;
  }
  emit(meta, c);
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& eps, const Common& c) {
  const MachineDesc ma = load_machine(a);
  const MachineDesc mb = load_machine(b);
  Json meta_a;
  Json meta_b;
  const OutputDist pa = output_of(run_machine(ma, c, meta_a));
  const OutputDist pb = output_of(run_machine(mb, c, meta_b));
  const SimAccuracyReport acc = accuracy_report(pa, pb, parse_epsilon(eps));
  Json out{{"command", "compare"},
           {"input", c.input},
           {"a", Json{{"machine", report::machine_json(ma)}, {"run", meta_a}, {"outputs", report::distribution_json(pa)}}},
           {"b", Json{{"machine", report::machine_json(mb)}, {"run", meta_b}, {"outputs", report::distribution_json(pb)}}},
           {"result", report::accuracy_json(acc)}};
  emit(out, c);
  return kOk;
}

int cmd_suhd(const std::string& file, const std::string& eps, const std::string& policy, std::uint64_t max_t,
             int deadline_ms, const Common& c) {
  const MachineDesc m = load_machine(file);
  SuhdOptions opt;
  opt.epsilon = parse_epsilon(eps);
  opt.policy = ObservationPolicy::parse(policy);
  opt.max_outer_T = max_t;
  opt.seed = c.seed.value_or(0);
  opt.limits.max_support = c.max_support;
  AnswerReader answers(deadline_ms);
  if (opt.policy.kind == ObservationPolicy::Kind::Interactive) {
    opt.observer = [&answers](const SuhdSignal& s) {
      std::cerr << "signal: T=" << s.outer_T << " steps=" << s.steps_executed << " halt probability "
                << to_string(s.halt_prob) << " (~" << s.halt_prob.to_double() << ")\n"
                << "observe halt bit? [y/N] " << std::flush;
      const auto ans = answers.next();
      if (!ans) {
        std::cerr << "(no answer, N)\n";
        return false;
      }
      std::string low = *ans;
      std::transform(low.begin(), low.end(), low.begin(), [](unsigned char ch) { return std::tolower(ch); });
      const bool yes = low == "y" || low == "yes";
      std::cerr << (yes ? "y" : "n") << "\n";
      return yes;
    };
  }
  const auto records = suhd_run(m, c.input, opt);
  Json out{{"command", "suhd"},
           {"machine", report::machine_json(m)},
           {"input", c.input},
           {"policy", opt.policy.to_string()},
           {"epsilon", report::number(opt.epsilon)},
           {"max_T", max_t},
           {"seed", opt.seed},
           {"records", report::suhd_json(records)},
           {"evidence", report::suhd_evidence_line(records)}};
  emit(out, c);
  return kOk;
}

int cmd_encode(const std::string& file, const std::optional<std::string>& input, const Common& c) {
  const MachineDesc m = load_machine(file);
  const BigInt code = encode_machine(m);
  Json out{{"command", "encode"}, {"machine", report::machine_json(m)}, {"code", code.get_str()}};
  if (input) {
    const BigInt x(*input, 10);
    if (x < 0) throw PreconditionError("input must be a natural number");
    out["input"] = x.get_str();
    out["paired_code"] = pair_cantor(code, x).get_str();
  }
  emit(out, c);
  return kOk;
}

BigInt parse_natural(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw NotAMachineCode("'" + s + "' is not a natural number");
  }
  return BigInt(s, 10);
}

int cmd_universal(const std::string& kind, const std::string& code_text, const Common& c) {
  const MachineKind k = *kind_from_name(kind);
  const BigInt code = parse_natural(code_text);
  const auto [n, x] = unpair_cantor(code);
  const MachineDesc m = decode_machine(n);
  Limits limits;
  limits.max_support = c.max_support;
  const std::uint64_t horizon = c.horizon ? c.horizon : kDefaultHorizon;
  const UniversalOutcome result = apply_universal(k, code, horizon, decode_machine, limits);
  Json out{{"command", "universal"},
           {"kind", kind},
           {"code", code.get_str()},
           {"machine", report::machine_json(m)},
           {"input", x.get_str()},
           {"input_bits", binary_string(x)},
           {"horizon", horizon},
           {"result", report::outcome_json(result)}};
  emit(out, c);
  return kOk;
}

const std::vector<std::string> kGoldenInputs = {"", "1", "10", "11"};
constexpr std::uint64_t kGoldenHorizon = 12;

Json golden_report(const MachineDesc& m) {
  Json runs = Json::array();
  const bool runnable = m.kind() != MachineKind::QTM || check_wellformed_local(m).well_formed;
  for (const auto& in : runnable ? kGoldenInputs : std::vector<std::string>{}) {
    Common c;
    c.input = in;
    c.horizon = kGoldenHorizon;
    c.measure_every = true;
    Json meta{{"input", in}};
    meta["result"] = report::outcome_json(run_machine(m, c, meta));
    runs.push_back(std::move(meta));
  }
  Json out{{"machine", report::machine_json(m)}, {"code", encode_machine(m).get_str()}, {"runs", std::move(runs)}};
  if (m.kind() == MachineKind::QTM) out["check"] = report::wellformed_json(m, check_wellformed_local(m));
  return out;
}

int cmd_corpus_test(const std::string& dir, bool update, const Common& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".tm" || ext == ".ptm" || ext == ".qtm")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const fs::path golden_dir = fs::path(dir) / "golden";
  Json results = Json::array();
  bool all_ok = true;
  for (const auto& f : files) {
    const MachineDesc m = load_machine(f.string());
    const std::string text = golden_report(m).dump(2) + "\n";
    const fs::path golden = golden_dir / (f.filename().string() + ".json");
    std::string status;
    if (update) {
      fs::create_directories(golden_dir);
      std::ofstream(golden, std::ios::binary) << text;
      status = "written";
    } else if (!fs::exists(golden)) {
      status = "missing";
      all_ok = false;
    } else if (read_file(golden.string()) != text) {
      status = "mismatch";
      all_ok = false;
    } else {
      status = "ok";
    }
    results.push_back(Json{{"file", f.filename().string()}, {"status", status}});
  }
  emit(Json{{"command", "corpus-test"}, {"files", results}, {"passed", all_ok}}, c);
  return all_ok ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtmlab: exact simulator for Turing, probabilistic and quantum Turing machines"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--max-support", c.max_support, "Bound on live configurations");
  };
  auto add_run_flags = [&c](CLI::App* sub) {
    sub->add_option("--input", c.input, "Input bit string");
    sub->add_option("--horizon", c.horizon, "Step horizon (default 100)");
    sub->add_option("--measure-at", c.measure_at, "Comma-separated measurement steps (QTM)");
    sub->add_flag("--measure-every", c.measure_every, "Measure the halt bit after every step (QTM)");
  };

  std::string file;
  std::string file_b;
  std::size_t window = 0;
  auto* check = app.add_subcommand("check", "Check well-formedness of a machine");
  check->add_option("file", file, "Machine file")->required();
  check->add_option("--window", window, "Also check unitarity on a cyclic tape of this length")
      ->check(CLI::Range(2, 8));
  add_common(check);

  auto* run_cmd = app.add_subcommand("run", "Run a machine");
  run_cmd->add_option("file", file, "Machine file")->required();
  add_run_flags(run_cmd);
  run_cmd->add_option("--seed", c.seed, "Also draw one sampled run of a PTM with this seed");
  add_common(run_cmd);

  std::string epsilon = "0";
  auto* compare = app.add_subcommand("compare", "Total variation distance between two machines' outputs");
  compare->add_option("file_a", file, "First machine")->required();
  compare->add_option("file_b", file_b, "Second machine")->required();
  compare->add_option("--epsilon", epsilon, "Accuracy budget p/q");
  add_run_flags(compare);
  add_common(compare);

  std::string policy = "never";
  std::uint64_t max_t = 5;
  int deadline_ms = 0;
  std::string suhd_epsilon = "1/10";
  auto* suhd = app.add_subcommand("suhd", "Run the semi-universal hybrid device loop");
  suhd->add_option("file", file, "Machine file")->required();
  suhd->add_option("--input", c.input, "Input bit string");
  suhd->add_option("--epsilon", suhd_epsilon, "Accuracy parameter p/q");
  suhd->add_option("--policy", policy, "never | always | at:k1,k2 | interactive");
  suhd->add_option("--max-T", max_t, "Number of outer iterations");
  suhd->add_option("--seed", c.seed, "Seed for observed outcomes");
  suhd->add_option("--deadline-ms", deadline_ms, "Interactive answer deadline in ms (0: wait)");
  add_common(suhd);

  std::optional<std::string> encode_input;
  auto* encode = app.add_subcommand("encode", "Print the code of a machine");
  encode->add_option("file", file, "Machine file")->required();
  encode->add_option("--input", encode_input, "Natural number to pair with the code");
  add_common(encode);

  std::string kind = "tm";
  std::string code;
  auto* universal = app.add_subcommand("universal", "Run the universal machine on a paired code");
  universal->add_option("code", code, "pair(machine code, input)")->required();
  universal->add_option("--kind", kind, "tm | ptm | qtm")->check(CLI::IsMember({"tm", "ptm", "qtm"}));
  universal->add_option("--horizon", c.horizon, "Step horizon (default 100)");
  add_common(universal);

  std::string dir = "corpus";
  bool update = false;
  auto* corpus = app.add_subcommand("corpus-test", "Compare corpus reports with golden files");
  corpus->add_option("dir", dir, "Corpus directory");
  corpus->add_flag("--update", update, "Rewrite golden files");
  add_common(corpus);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*check) return cmd_check(file, window, c);
    if (*run_cmd) return cmd_run(file, c);
    if (*compare) return cmd_compare(file, file_b, epsilon, c);
    if (*suhd) return cmd_suhd(file, suhd_epsilon, policy, max_t, deadline_ms, c);
    if (*encode) return cmd_encode(file, encode_input, c);
    if (*universal) return cmd_universal(kind, code, c);
    if (*corpus) return cmd_corpus_test(dir, update, c);
  } catch (const ResourceError& e) {
    std::cerr << "error: resource bound: " << e.what() << "\n";
    return kResource;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
