#include <gtest/gtest.h>

#include "qtmlab/amplitude.hpp"
#include "qtmlab/report.hpp"
#include "support.hpp"

using namespace qtmlab;
using qtmlab::fixture::Gen;
using qtmlab::fixture::load;
using report::Json;

namespace {

/// Collects every {"exact", "approx"} pair in a report.
void exact_fields(const Json& j, std::vector<Json>& out) {
  if (j.is_object()) {
    if (j.contains("exact") && j.contains("approx")) {
      out.push_back(j);
      return;
    }
    for (const auto& [k, v] : j.items()) exact_fields(v, out);
  } else if (j.is_array()) {
    for (const auto& v : j) exact_fields(v, out);
  }
}

}  // namespace

TEST(Report, NumberFields) {
  const Json j = report::number(RealQ2(Rat(3), Rat(-2)));
  EXPECT_EQ(j["exact"], "3-2*r2");
  EXPECT_NEAR(j["approx"].get<double>(), 3 - 2 * std::sqrt(2.0), 1e-12);
  const Json z = report::number(CycQ8::zeta());
  EXPECT_EQ(parse_amplitude(z["exact"].get<std::string>()), CycQ8::zeta());
  EXPECT_EQ(z["approx"].size(), 2u);
}

TEST(Report, ExactFieldsRoundTrip) {
  const MachineDesc i1 = load("i1.qtm");
  Json j = report::outcome_json(run(i1, "", MeasurementSchedule({1, 2}), 2));
  j["check"] = report::wellformed_json(load("bad-norm.qtm"), check_wellformed_local(load("bad-norm.qtm")));
  SuhdOptions opt;
  opt.policy = ObservationPolicy::always();
  j["suhd"] = report::suhd_json(suhd_run(load("halfhalt.qtm"), "", opt));
  std::vector<Json> fields;
  exact_fields(j, fields);
  ASSERT_GT(fields.size(), 10u);
  for (const auto& f : fields) {
    const CycQ8 v = parse_amplitude(f["exact"].get<std::string>());
    if (f["approx"].is_number()) {
      EXPECT_NEAR(v.to_complex().real(), f["approx"].get<double>(), 1e-12);
      EXPECT_EQ(v.to_complex().imag(), 0.0);
    }
  }
}

TEST(Report, KeysSortedAndDeterministic) {
  const Json a = report::outcome_json(run(load("h1.qtm"), "", MeasurementSchedule({1}), 1));
  const Json b = report::outcome_json(run(load("h1.qtm"), "", MeasurementSchedule({1}), 1));
  EXPECT_EQ(a.dump(2), b.dump(2));
  std::vector<std::string> keys;
  for (const auto& [k, v] : a.items()) keys.push_back(k);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(Report, WellFormedRendering) {
  const MachineDesc bad = load("bad-norm.qtm");
  const Json j = report::wellformed_json(bad, check_wellformed_local(bad));
  EXPECT_EQ(j["verdict"], "VIOLATION");
  ASSERT_EQ(j["violations"].size(), 1u);
  EXPECT_EQ(j["violations"][0]["condition"], "C1");
  EXPECT_EQ(j["violations"][0]["first"], "q0/_");
  EXPECT_EQ(j["violations"][0]["residual"]["exact"], "1/2");
}

TEST(Report, TextRendering) {
  const Json j{{"b", report::number(Rat(1, 4))}, {"a", Json::array({1, "x"})}, {"c", Json::array()}};
  EXPECT_EQ(report::to_text(j), "a[0]: 1\na[1]: x\nb: 1/4  (~0.25)\nc: []\n");
  EXPECT_EQ(report::render(j, "json"), j.dump(2) + "\n");
}

TEST(Report, EvidenceLine) {
  SuhdOptions opt;
  opt.policy = ObservationPolicy::at({2});
  const std::string line = report::suhd_evidence_line(suhd_run(load("halfhalt.qtm"), "", opt));
  EXPECT_NE(line.find("not proof"), std::string::npos);
  EXPECT_NE(line.find("1/5 iterations restored"), std::string::npos);
}
