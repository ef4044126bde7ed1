#pragma once

// Goedel numbering of machine descriptions and pairing functions on N x N.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qtmlab/dsl.hpp"
#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"
#include "qtmlab/machine.hpp"

namespace qtmlab {

inline constexpr unsigned char kCodeMagic = 0x51;
inline constexpr unsigned char kCodeVersion = 0x01;

/// Big-endian integer of the bytes 0x51 0x01 <canonical serialization>.
inline BigInt encode_machine(const MachineDesc& m) {
  const std::string text = serialize_machine(m);
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() + 2);
  bytes.push_back(kCodeMagic);
  bytes.push_back(kCodeVersion);
  bytes.insert(bytes.end(), text.begin(), text.end());
  BigInt n;
  mpz_import(n.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return n;
}

/// Inverse of encode_machine; anything outside its range is rejected.
inline MachineDesc decode_machine(const BigInt& n) {
  if (n <= 0) throw NotAMachineCode("no header");
  std::vector<unsigned char> bytes((mpz_sizeinbase(n.get_mpz_t(), 2) + 7) / 8);
  std::size_t count = 0;
  mpz_export(bytes.data(), &count, 1, 1, 1, 0, n.get_mpz_t());
  bytes.resize(count);
  if (bytes.size() < 2 || bytes[0] != kCodeMagic) throw NotAMachineCode("bad magic byte");
  if (bytes[1] != kCodeVersion) throw NotAMachineCode("unsupported version");
  const std::string text(bytes.begin() + 2, bytes.end());
  MachineDesc m;
  try {
    m = parse_machine(text);
  } catch (const Error& e) {
    throw NotAMachineCode(e.what());
  }
  if (serialize_machine(m) != text) throw NotAMachineCode("payload is not in canonical form");
  return m;
}

/// 2^x 3^y. Injective, not surjective.
inline BigInt pair_exp(const BigInt& x, const BigInt& y) {
  if (x < 0 || y < 0) throw PreconditionError("pair_exp takes naturals");
  if (!x.fits_ulong_p() || !y.fits_ulong_p()) throw ResourceError("pair_exp exponent too large");
  BigInt a;
  BigInt b;
  mpz_ui_pow_ui(a.get_mpz_t(), 2, x.get_ui());
  mpz_ui_pow_ui(b.get_mpz_t(), 3, y.get_ui());
  return a * b;
}

inline std::pair<BigInt, BigInt> unpair_exp(BigInt n) {
  if (n <= 0) throw PreconditionError("not in range of pair_exp: " + n.get_str());
  const BigInt original = n;
  BigInt x = 0;
  BigInt y = 0;
  while (mpz_divisible_ui_p(n.get_mpz_t(), 2)) {
    n /= 2;
    ++x;
  }
  while (mpz_divisible_ui_p(n.get_mpz_t(), 3)) {
    n /= 3;
    ++y;
  }
  if (n != 1) throw PreconditionError("not in range of pair_exp: " + original.get_str());
  return {x, y};
}

/// Cantor diagonal bijection (x+y)(x+y+1)/2 + y.
inline BigInt pair_cantor(const BigInt& x, const BigInt& y) {
  if (x < 0 || y < 0) throw PreconditionError("pair_cantor takes naturals");
  const BigInt s = x + y;
  return s * (s + 1) / 2 + y;
}

inline std::pair<BigInt, BigInt> unpair_cantor(const BigInt& n) {
  if (n < 0) throw PreconditionError("unpair_cantor takes a natural");
  // w = floor((sqrt(8n+1) - 1) / 2)
  BigInt r;
  const BigInt disc = 8 * n + 1;
  mpz_sqrt(r.get_mpz_t(), disc.get_mpz_t());
  const BigInt w = (r - 1) / 2;
  const BigInt t = w * (w + 1) / 2;
  const BigInt y = n - t;
  return {w - y, y};
}

}  // namespace qtmlab
