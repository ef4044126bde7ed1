#pragma once

// Amplitude literal grammar:
//
//   amp      := term (("+" | "-") term)*
//   term     := factor (("*" | "/") factor)*
//   factor   := rational | "i" | "r2" | "(" amp ")" | "-" factor
//   rational := integer ["/" positive-integer]
//
// `i` is zeta^2 and `r2` is sqrt2 = zeta - zeta^3. Evaluation is exact.

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"

namespace qtmlab {

namespace detail {

class AmplitudeParser {
 public:
  AmplitudeParser(std::string_view text, std::size_t line, std::size_t column_offset)
      : text_(text), line_(line), column_offset_(column_offset) {}

  CycQ8 parse_all() {
    CycQ8 v = parse_amp();
    skip_ws();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "' in amplitude");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, column_offset_ + pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  CycQ8 parse_amp() {
    CycQ8 v = parse_term();
    for (;;) {
      if (peek('+')) {
        ++pos_;
        v += parse_term();
      } else if (peek('-')) {
        ++pos_;
        v -= parse_term();
      } else {
        return v;
      }
    }
  }

  CycQ8 parse_term() {
    CycQ8 v = parse_factor();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        v *= parse_factor();
      } else if (peek('/')) {
        ++pos_;
        const std::size_t at = pos_;
        CycQ8 d = parse_factor();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by zero in amplitude");
        }
        v = v / d;
      } else {
        return v;
      }
    }
  }

  BigInt parse_integer() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return BigInt(std::string(text_.substr(start, pos_ - start)));
  }

  CycQ8 parse_factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("amplitude ends unexpectedly");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return -parse_factor();
    }
    if (c == '(') {
      ++pos_;
      CycQ8 v = parse_amp();
      if (!peek(')')) fail("expected ')' in amplitude");
      ++pos_;
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      BigInt num = parse_integer();
      // "p/q" binds as one rational literal when a digit follows the slash.
      const std::size_t save = pos_;
      skip_ws();
      if (pos_ + 1 < text_.size() && text_[pos_] == '/') {
        std::size_t look = pos_ + 1;
        while (look < text_.size() && std::isspace(static_cast<unsigned char>(text_[look]))) ++look;
        if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
          pos_ = look;
          const std::size_t at = pos_;
          BigInt den = parse_integer();
          if (den == 0) {
            pos_ = at;
            fail("rational denominator must be positive");
          }
          return CycQ8(make_rat(num, den));
        }
      }
      pos_ = save;
      return CycQ8(Rat(num));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "i") return CycQ8::i();
      if (word == "r2") return CycQ8::sqrt2();
      pos_ = start;
      fail("'" + std::string(word) +
           "' is outside Q(zeta8); only rationals, i and r2 are supported (extension point: qtmlab::CycQ8)");
    }
    fail(std::string("unexpected '") + c + "' in amplitude");
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t column_offset_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an amplitude literal. `line`/`column_offset` locate it inside a larger document for diagnostics.
inline CycQ8 parse_amplitude(std::string_view text, std::size_t line = 1, std::size_t column_offset = 0) {
  return detail::AmplitudeParser(text, line, column_offset).parse_all();
}

/// Parses a literal that must evaluate to a rational number (PTM probabilities).
inline Rat parse_rational(std::string_view text, std::size_t line = 1, std::size_t column_offset = 0) {
  const CycQ8 v = parse_amplitude(text, line, column_offset);
  if (v[1] != 0 || v[2] != 0 || v[3] != 0) {
    throw ParseError("probability must be rational, got " + to_string(v), line, column_offset + 1);
  }
  return v[0];
}

}  // namespace qtmlab
