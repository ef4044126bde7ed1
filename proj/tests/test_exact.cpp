#include <gtest/gtest.h>

#include <cmath>

#include "qtmlab/amplitude.hpp"
#include "qtmlab/exact.hpp"
#include "support.hpp"

using namespace qtmlab;
using qtmlab::fixture::Gen;

namespace {

const CycQ8 Z = CycQ8::zeta();
const CycQ8 Z3 = Z * Z * Z;

CycQ8 coeffs(long a, long b, long c, long d) { return CycQ8(Rat(a), Rat(b), Rat(c), Rat(d)); }

}  // namespace

TEST(Rat, CanonicalForm) {
  const Rat r = make_rat(BigInt(6), BigInt(-4));
  EXPECT_EQ(r.get_num(), -3);
  EXPECT_EQ(r.get_den(), 2);
  EXPECT_EQ(to_string(make_rat(BigInt(0), BigInt(7))), "0");
  EXPECT_EQ(make_rat(BigInt(0), BigInt(7)).get_den(), 1);
}

TEST(CycAdd, Examples) {
  EXPECT_TRUE(cyc_add(Z, -Z).is_zero());
  EXPECT_EQ(cyc_add(CycQ8(1), Z * Z), coeffs(1, 0, 1, 0));
  const CycQ8 half_r2 = (Z - Z3) / CycQ8(2);
  EXPECT_EQ(cyc_add(half_r2, half_r2), Z - Z3);
  EXPECT_EQ(Z - Z3, CycQ8::sqrt2());
}

TEST(CycMul, Examples) {
  EXPECT_EQ(cyc_mul(Z, Z), CycQ8::i());
  EXPECT_EQ(cyc_mul(Z, Z3), coeffs(-1, 0, 0, 0));
  const CycQ8 h = (Z - Z3) / CycQ8(2);
  EXPECT_EQ(cyc_mul(h, h), CycQ8(Rat(1, 2)));
}

TEST(CycConj, Examples) {
  EXPECT_EQ(cyc_conj(CycQ8(1)), CycQ8(1));
  EXPECT_EQ(cyc_conj(Z), -Z3);
  EXPECT_EQ(cyc_conj(Z * Z), -(Z * Z));
  EXPECT_EQ(cyc_conj(Z3), -Z);
}

TEST(CycNormSq, Examples) {
  EXPECT_EQ(cyc_norm_sq(Z), RealQ2(1));
  EXPECT_EQ(cyc_norm_sq((Z - Z3) / CycQ8(2)), RealQ2(Rat(1, 2)));
  EXPECT_EQ(cyc_norm_sq(CycQ8()), RealQ2(0));
  // |1 + zeta|^2 = 2 + sqrt2
  EXPECT_EQ(cyc_norm_sq(CycQ8(1) + Z), RealQ2(Rat(2), Rat(1)));
}

TEST(RealQ2Sign, Examples) {
  EXPECT_EQ(realq2_sign(RealQ2(Rat(3), Rat(-2))), 1);
  EXPECT_EQ(realq2_sign(RealQ2(0)), 0);
  EXPECT_EQ(realq2_sign(RealQ2(Rat(1), Rat(-1))), -1);
  EXPECT_EQ(realq2_sign(RealQ2(Rat(-3), Rat(2))), -1);
  EXPECT_EQ(realq2_sign(RealQ2(Rat(-1), Rat(1))), 1);
  EXPECT_EQ(realq2_sign(RealQ2(Rat(0), Rat(-1, 3))), -1);
}

TEST(RealQ2, InverseAndDivisionByZero) {
  const RealQ2 x(Rat(3), Rat(-2));
  EXPECT_EQ(x * x.inverse(), RealQ2(1));
  EXPECT_THROW(RealQ2(0).inverse(), Error);
  EXPECT_THROW(CycQ8().inverse(), Error);
}

TEST(ToFloat, Examples) {
  const auto z = to_float(Z);
  EXPECT_NEAR(z.real(), 0.70710678, 1e-8);
  EXPECT_NEAR(z.imag(), 0.70710678, 1e-8);
  EXPECT_DOUBLE_EQ(to_float(RealQ2(Rat(1, 2))), 0.5);
  EXPECT_NEAR(to_float(Z - Z3).real(), 1.41421356, 1e-8);
  EXPECT_NEAR(to_float(Z - Z3).imag(), 0.0, 1e-15);
}

TEST(ToFloat, OverflowIsRangeError) {
  const Rat huge(BigInt(1) << 5000);
  EXPECT_THROW(to_float(RealQ2(huge)), RangeError);
  EXPECT_THROW(to_float(CycQ8(huge)), RangeError);
}

TEST(Amplitude, GrammarExamples) {
  EXPECT_EQ(parse_amplitude("1/2"), CycQ8(Rat(1, 2)));
  EXPECT_EQ(parse_amplitude("i"), CycQ8::i());
  EXPECT_EQ(parse_amplitude("r2"), CycQ8::sqrt2());
  EXPECT_EQ(parse_amplitude("1/r2"), CycQ8::inv_sqrt2());
  EXPECT_EQ(parse_amplitude("-1/r2"), -CycQ8::inv_sqrt2());
  EXPECT_EQ(parse_amplitude("(1+i)/r2"), Z);
  EXPECT_EQ(parse_amplitude("--3"), CycQ8(3));
  EXPECT_EQ(parse_amplitude("2*(1 - r2) / 4"), CycQ8(RealQ2(Rat(1, 2), Rat(-1, 2))));
}

TEST(Amplitude, Errors) {
  EXPECT_THROW(parse_amplitude(""), ParseError);
  EXPECT_THROW(parse_amplitude("1/0"), ParseError);
  EXPECT_THROW(parse_amplitude("1/(r2-r2)"), ParseError);
  EXPECT_THROW(parse_amplitude("(1"), ParseError);
  EXPECT_THROW(parse_amplitude("1 2"), ParseError);
  EXPECT_THROW(parse_amplitude("0.5"), ParseError);
  try {
    parse_amplitude("sqrt3");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("CycQ8"), std::string::npos);
    EXPECT_EQ(e.column(), 1u);
  }
  EXPECT_THROW(parse_rational("r2"), ParseError);
  EXPECT_EQ(parse_rational("6/8"), Rat(3, 4));
}

TEST(Amplitude, RenderExamples) {
  EXPECT_EQ(to_string(CycQ8(RealQ2(Rat(3), Rat(-2)))), "3-2*r2");
  EXPECT_EQ(to_string(CycQ8::inv_sqrt2()), "1/2*r2");
  EXPECT_EQ(to_string(CycQ8()), "0");
  EXPECT_EQ(to_string(RealQ2(Rat(1, 2))), "1/2");
}

// -- properties ---------------------------------------------------------------

TEST(Property, RenderParseRoundTrip) {
  Gen g(11);
  for (int k = 0; k < 500; ++k) {
    const CycQ8 z = g.cyc();
    EXPECT_EQ(parse_amplitude(to_string(z)), z) << to_string(z);
    const RealQ2 r = g.real();
    EXPECT_EQ(parse_amplitude(to_string(r)), CycQ8(r)) << to_string(r);
  }
}

TEST(Property, FieldAxioms) {
  Gen g(12);
  for (int k = 0; k < 300; ++k) {
    const CycQ8 a = g.cyc(), b = g.cyc(), c = g.cyc();
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a - a, CycQ8());
    EXPECT_EQ(a * CycQ8(1), a);
    if (!a.is_zero()) EXPECT_EQ(a * a.inverse(), CycQ8(1));
  }
}

TEST(Property, RealSubfieldAxioms) {
  Gen g(13);
  for (int k = 0; k < 300; ++k) {
    const RealQ2 a = g.real(), b = g.real(), c = g.real();
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    if (!a.is_zero()) EXPECT_EQ(a * a.inverse(), RealQ2(1));
    // Exact sign agrees with the float value whenever the float is clearly away from zero.
    const double f = a.to_double();
    if (std::abs(f) > 1e-9) EXPECT_EQ(a.sign(), f > 0 ? 1 : -1);
    EXPECT_EQ((a < b) + (b < a) + (a == b), 1);
  }
}

TEST(Property, NormSquared) {
  Gen g(14);
  EXPECT_EQ(cyc_norm_sq(CycQ8()).sign(), 0);
  for (int k = 0; k < 300; ++k) {
    const CycQ8 a = g.cyc();
    const RealQ2 n = cyc_norm_sq(a);
    EXPECT_GE(n.sign(), 0);
    EXPECT_EQ(n.sign() == 0, a.is_zero());
    EXPECT_EQ(CycQ8(n), a * cyc_conj(a));
  }
}

TEST(Property, ConjugationIsRingHomomorphism) {
  Gen g(15);
  for (int k = 0; k < 300; ++k) {
    const CycQ8 a = g.cyc(), b = g.cyc();
    EXPECT_EQ(cyc_conj(a * b), cyc_conj(a) * cyc_conj(b));
    EXPECT_EQ(cyc_conj(a + b), cyc_conj(a) + cyc_conj(b));
    EXPECT_EQ(cyc_conj(cyc_conj(a)), a);
  }
}

TEST(Property, FloatAgreesWithExact) {
  Gen g(16);
  for (int k = 0; k < 200; ++k) {
    const CycQ8 a = g.cyc(), b = g.cyc();
    const auto fa = to_float(a), fb = to_float(b), fab = to_float(a * b);
    EXPECT_NEAR(std::abs(fa * fb - fab), 0.0, 1e-9 * (1 + std::abs(fab)));
    EXPECT_NEAR(std::norm(fa), to_float(cyc_norm_sq(a)), 1e-9 * (1 + std::norm(fa)));
  }
}
