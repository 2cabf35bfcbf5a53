#include <catch2/catch_amalgamated.hpp>

#include "satotate/ff.hpp"

using namespace satotate;
using namespace satotate::ff;

TEST_CASE("legendre symbol basics") {
    CHECK(legendre(0, 7) == 0);
    CHECK(legendre(1, 7) == 1);
    // squares mod 5 are {0, 1, 4}
    CHECK(legendre(3, 5) == -1);
    CHECK(legendre(4, 5) == 1);
    CHECK(legendre(-1, 5) == 1);   // 5 = 1 mod 4
    CHECK(legendre(-1, 7) == -1);  // 7 = 3 mod 4
}

TEST_CASE("legendre rejects bad moduli") {
    CHECK_THROWS_AS(legendre(1, 2), invalid_modulus_error);
    CHECK_THROWS_AS(legendre(1, 9), invalid_modulus_error);
    CHECK_THROWS_AS(legendre(1, 1), invalid_modulus_error);
    CHECK_THROWS_AS(legendre(1, (std::int64_t(1) << 20) + 7), invalid_modulus_error);
}

TEST_CASE("legendre counts residues evenly") {
    for (std::int64_t p : {3, 5, 7, 11, 13, 17}) {
        std::int64_t res = 0, non = 0;
        for (std::int64_t a = 1; a < p; ++a) {
            int l = legendre(a, p);
            (l == 1 ? res : non)++;
        }
        CHECK(res == (p - 1) / 2);
        CHECK(non == (p - 1) / 2);
    }
}

TEST_CASE("smallest non-residue") {
    CHECK(find_nonresidue(5) == 2);
    CHECK(find_nonresidue(7) == 3);
    CHECK(find_nonresidue(13) == 2);
    for (std::int64_t p : {3, 5, 7, 11, 13, 17, 19, 23}) {
        std::int64_t n = find_nonresidue(p);
        CHECK(legendre(n, p) == -1);
        for (std::int64_t m = 1; m < n; ++m) CHECK(legendre(m, p) != -1);
    }
}

TEST_CASE("fp2 multiplication agrees with s^2 = n") {
    // p = 3, n = 2: s * s = 2
    Fp2 s = fp2_make(0, 1, 3);
    Fp2 ss = fp2_mul(s, s);
    CHECK(ss.a == 2);
    CHECK(ss.b == 0);
}

TEST_CASE("fp2 group order") {
    Fp2 s = fp2_make(0, 1, 3);
    Fp2 e = fp2_pow(s, 3 * 3 - 1);
    CHECK(e.a == 1);
    CHECK(e.b == 0);
}

TEST_CASE("fp2 square detection") {
    Fp2 two = fp2_make(2, 0, 3);  // 2 = s^2 in F_9
    CHECK(fp2_is_square(two));
    // exhaustive count of nonzero squares in F_9: (9-1)/2 = 4
    std::int64_t squares = 0;
    for (std::int64_t a = 0; a < 3; ++a)
        for (std::int64_t b = 0; b < 3; ++b) {
            Fp2 x = fp2_make(a, b, 3);
            if (!fp2_is_zero(x) && fp2_is_square(x)) ++squares;
        }
    CHECK(squares == 4);
}

TEST_CASE("fp2 field mismatch detected") {
    Fp2 x = fp2_make(1, 1, 5);
    Fp2 y = fp2_make(1, 1, 7);
    CHECK_THROWS_AS(fp2_mul(x, y), incompatible_field_error);
}

TEST_CASE("every nonzero element has order dividing p^2 - 1") {
    for (std::int64_t p : {3, 5, 7, 11, 13}) {
        for (std::int64_t a = 0; a < p; ++a)
            for (std::int64_t b = 0; b < p; ++b) {
                if (a == 0 && b == 0) continue;
                Fp2 x = fp2_make(a, b, p);
                Fp2 e = fp2_pow(x, p * p - 1);
                CHECK(e.a == 1);
                CHECK(e.b == 0);
            }
    }
}

TEST_CASE("square counts in fp2") {
    for (std::int64_t p : {3, 5, 7}) {
        std::int64_t squares = 0;
        for (std::int64_t a = 0; a < p; ++a)
            for (std::int64_t b = 0; b < p; ++b) {
                Fp2 x = fp2_make(a, b, p);
                if (!fp2_is_zero(x) && fp2_is_square(x)) ++squares;
            }
        CHECK(squares == (p * p - 1) / 2);
    }
}

TEST_CASE("frobenius x -> x^p is an automorphism fixing exactly F_p") {
    for (std::int64_t p : {3, 5, 7}) {
        for (std::int64_t a = 0; a < p; ++a)
            for (std::int64_t b = 0; b < p; ++b) {
                Fp2 x = fp2_make(a, b, p);
                Fp2 fx = fp2_pow(x, p);
                bool fixed = fp2_eq(fx, x);
                CHECK(fixed == (b == 0));  // fixed field is F_p
                // multiplicativity on a second element
                Fp2 y = fp2_make((a + 1) % p, (b + 2) % p, p);
                CHECK(fp2_eq(fp2_pow(fp2_mul(x, y), p), fp2_mul(fx, fp2_pow(y, p))));
            }
    }
}

TEST_CASE("fp2 commutativity and associativity on a sample grid") {
    const std::int64_t p = 5;
    for (std::int64_t i = 0; i < 25; i += 3)
        for (std::int64_t j = 1; j < 25; j += 4) {
            Fp2 x = fp2_make(i / 5, i % 5, p);
            Fp2 y = fp2_make(j / 5, j % 5, p);
            Fp2 z = fp2_make((i + j) / 5 % 5, (i * j) % 5, p);
            CHECK(fp2_eq(fp2_mul(x, y), fp2_mul(y, x)));
            CHECK(fp2_eq(fp2_mul(fp2_mul(x, y), z), fp2_mul(x, fp2_mul(y, z))));
        }
}

TEST_CASE("prime sieve") {
    CHECK(odd_primes_up_to(2).empty());
    CHECK(odd_primes_up_to(10) == std::vector<std::int64_t>{3, 5, 7});
    auto ps = odd_primes_up_to(100);
    CHECK(ps.size() == 24);  // odd primes up to 100
    CHECK(ps.front() == 3);
    CHECK(ps.back() == 97);
}

TEST_CASE("square table matches legendre") {
    for (std::int64_t p : {5, 13, 101}) {
        std::vector<std::uint8_t> table;
        square_table(p, table);
        for (std::int64_t v = 0; v < p; ++v)
            CHECK(chi_from_table(table, v) == legendre(v, p));
    }
}
