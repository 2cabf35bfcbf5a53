#pragma once

#include <cstdint>
#include <vector>

#include "satotate/errors.hpp"

// Exact arithmetic in F_p and F_{p^2} for odd primes p < 2^20. The bound
// keeps every intermediate product inside 64 bits; point counting never
// needs larger moduli.

namespace satotate::ff {

inline constexpr std::int64_t kMaxPrime = std::int64_t(1) << 20;

inline bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::int64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

/// Validates an odd prime modulus in range; p = 2 is rejected everywhere
/// (hyperelliptic models y^2 = f(x) degenerate in characteristic 2).
inline void check_modulus(std::int64_t p) {
    if (p == 2) throw invalid_modulus_error("p = 2 is not supported");
    if (p < 3 || p >= kMaxPrime || !is_prime(p))
        throw invalid_modulus_error("modulus must be an odd prime below 2^20: " +
                                    std::to_string(p));
}

inline std::int64_t mod_reduce(std::int64_t a, std::int64_t p) {
    std::int64_t r = a % p;
    return r < 0 ? r + p : r;
}

inline std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t p) {
    return (a * b) % p;  // a, b < 2^20 so the product fits in 64 bits
}

inline std::int64_t pow_mod(std::int64_t base, std::int64_t exp, std::int64_t p) {
    std::int64_t acc = 1 % p;
    base = mod_reduce(base, p);
    while (exp > 0) {
        if (exp & 1) acc = mul_mod(acc, base, p);
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    return acc;
}

/// Legendre symbol (a|p) via the Euler criterion, in {-1, 0, 1}.
inline int legendre(std::int64_t a, std::int64_t p) {
    check_modulus(p);
    a = mod_reduce(a, p);
    if (a == 0) return 0;
    std::int64_t e = pow_mod(a, (p - 1) / 2, p);
    return e == 1 ? 1 : -1;
}

/// Smallest positive quadratic non-residue mod p.
inline std::int64_t find_nonresidue(std::int64_t p) {
    check_modulus(p);
    for (std::int64_t n = 2; n < p; ++n)
        if (legendre(n, p) == -1) return n;
    throw inconsistency_error("no non-residue found; modulus is not prime");
}

/// Element of F_{p^2} = F_p[s]/(s^2 - n) with n the smallest non-residue.
/// Elements carry their field parameters so mismatches are detectable.
struct Fp2 {
    std::int64_t p;
    std::int64_t n;  // s^2 = n, a verified non-residue
    std::int64_t a;  // coordinate of 1
    std::int64_t b;  // coordinate of s
};

/// Builds an element of F_{p^2}, deriving the canonical non-residue.
inline Fp2 fp2_make(std::int64_t a, std::int64_t b, std::int64_t p) {
    check_modulus(p);
    return Fp2{p, find_nonresidue(p), mod_reduce(a, p), mod_reduce(b, p)};
}

inline void fp2_check_same_field(const Fp2& x, const Fp2& y) {
    if (x.p != y.p || x.n != y.n)
        throw incompatible_field_error("F_{p^2} elements from different fields");
}

inline bool fp2_is_zero(const Fp2& x) { return x.a == 0 && x.b == 0; }

inline Fp2 fp2_add(const Fp2& x, const Fp2& y) {
    fp2_check_same_field(x, y);
    return Fp2{x.p, x.n, (x.a + y.a) % x.p, (x.b + y.b) % x.p};
}

inline Fp2 fp2_mul(const Fp2& x, const Fp2& y) {
    fp2_check_same_field(x, y);
    const std::int64_t p = x.p;
    // (a + bs)(c + ds) = ac + bdn + (ad + bc)s
    std::int64_t a = (mul_mod(x.a, y.a, p) + mul_mod(mul_mod(x.b, y.b, p), x.n, p)) % p;
    std::int64_t b = (mul_mod(x.a, y.b, p) + mul_mod(x.b, y.a, p)) % p;
    return Fp2{p, x.n, a, b};
}

inline Fp2 fp2_one(std::int64_t p, std::int64_t n) { return Fp2{p, n, 1, 0}; }

inline Fp2 fp2_pow(Fp2 x, std::int64_t k) {
    Fp2 acc = fp2_one(x.p, x.n);
    while (k > 0) {
        if (k & 1) acc = fp2_mul(acc, x);
        x = fp2_mul(x, x);
        k >>= 1;
    }
    return acc;
}

/// Square test via x^((p^2-1)/2); zero counts as a square.
inline bool fp2_is_square(const Fp2& x) {
    if (fp2_is_zero(x)) return true;
    Fp2 e = fp2_pow(x, (x.p * x.p - 1) / 2);
    return e.a == 1 && e.b == 0;
}

inline bool fp2_eq(const Fp2& x, const Fp2& y) {
    fp2_check_same_field(x, y);
    return x.a == y.a && x.b == y.b;
}

/// Odd primes in (2, bound], increasing.
inline std::vector<std::int64_t> odd_primes_up_to(std::int64_t bound) {
    std::vector<std::int64_t> out;
    if (bound < 3) return out;
    if (bound >= kMaxPrime)
        throw invalid_modulus_error("prime bound exceeds 2^20");
    std::vector<bool> composite(static_cast<std::size_t>(bound) + 1, false);
    for (std::int64_t i = 2; i * i <= bound; ++i)
        if (!composite[i])
            for (std::int64_t j = i * i; j <= bound; j += i) composite[j] = true;
    for (std::int64_t i = 3; i <= bound; i += 2)
        if (!composite[i]) out.push_back(i);
    return out;
}

/// Marks the quadratic residues of F_p in a reusable byte table:
/// table[v] = 1 iff v is a nonzero square mod p, table[0] = 2 (zero marker).
/// One pass over y = 1..p-1 replaces per-point Euler exponentiation.
inline void square_table(std::int64_t p, std::vector<std::uint8_t>& table) {
    table.assign(static_cast<std::size_t>(p), 0);
    table[0] = 2;
    for (std::int64_t y = 1; y <= (p - 1) / 2; ++y)
        table[static_cast<std::size_t>(mul_mod(y, y, p))] = 1;
}

/// chi(v) for the table above: +1 square, -1 non-square, 0 at zero.
inline int chi_from_table(const std::vector<std::uint8_t>& table, std::int64_t v) {
    std::uint8_t t = table[static_cast<std::size_t>(v)];
    return t == 2 ? 0 : (t == 1 ? 1 : -1);
}

}  // namespace satotate::ff
