#include <Eigen/Eigenvalues>
#include <catch2/catch_amalgamated.hpp>
#include <complex>

#include "satotate/lpoly.hpp"

using namespace satotate;
using namespace satotate::lpoly;

namespace {

// Independent double-loop counting oracle: scans all (x, y) pairs with raw
// % arithmetic and handles infinity by counting solutions of y^2 = lead.
std::int64_t brute_count(const std::vector<std::int64_t>& f, std::int64_t p) {
    auto eval = [&](std::int64_t x) {
        std::int64_t acc = 0;
        for (std::size_t i = f.size(); i-- > 0;) acc = (acc * x + ((f[i] % p) + p)) % p;
        return acc;
    };
    std::int64_t count = 0;
    for (std::int64_t x = 0; x < p; ++x)
        for (std::int64_t y = 0; y < p; ++y)
            if ((y * y) % p == eval(x)) ++count;
    const std::size_t deg = f.size() - 1;
    if (deg % 2 == 1) {
        ++count;
    } else {
        std::int64_t lead = ((f.back() % p) + p) % p;
        for (std::int64_t y = 0; y < p; ++y)
            if ((y * y) % p == lead) ++count;
    }
    return count;
}

std::vector<std::complex<double>> poly_roots(const std::vector<double>& monic_desc) {
    // companion matrix of T^n + a1 T^{n-1} + ... + an (descending coeffs)
    const int n = static_cast<int>(monic_desc.size()) - 1;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) comp(0, i) = -monic_desc[static_cast<std::size_t>(i) + 1];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<std::complex<double>> roots;
    for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i]);
    return roots;
}

}  // namespace

TEST_CASE("curve parsing and canonical strings") {
    CurveSpec c = parse_curve("y^2=x^3+x");
    CHECK(c.genus() == 1);
    CHECK(c.canonical_string() == "y^2=1*x^3+1*x^1");
    CHECK(parse_curve(c.canonical_string()).coeffs() == c.coeffs());

    CurveSpec q = parse_curve("y^2 = x^5 + x + 1");
    CHECK(q.genus() == 2);
    CHECK(q.canonical_string() == "y^2=1*x^5+1*x^1+1*x^0");

    CurveSpec neg = parse_curve("x^4-2*x^2-3");
    CHECK(neg.genus() == 1);
    CHECK(neg.degree() == 4);
    CHECK(parse_curve(neg.canonical_string()).coeffs() == neg.coeffs());

    CurveSpec g3 = parse_curve("y^2=x^7+x+1");
    CHECK(g3.genus() == 3);
}

TEST_CASE("singular models are rejected") {
    CHECK_THROWS_AS(parse_curve("y^2=x^3"), invalid_curve_error);
    CHECK_THROWS_AS(parse_curve("y^2=x^4+2*x^2+1"), invalid_curve_error);  // (x^2+1)^2
    CHECK_THROWS_AS(parse_curve("y^2=x^2+1"), invalid_curve_error);       // degree too low
}

TEST_CASE("discriminants") {
    CHECK(poly_discriminant({0, 1, 0, 1}) == -4);    // x^3 + x
    CHECK(poly_discriminant({1, 1, 0, 1}) == -31);   // x^3 + x + 1
    CHECK(poly_discriminant({1, 0, 0, 0, 0, 1}) == 3125);  // x^5 + 1
}

TEST_CASE("count_points examples") {
    CurveSpec cm = parse_curve("y^2=x^3+x");
    CHECK(count_points(cm, 5) == 4);
    CHECK(count_points(cm, 7) == 8);
    CHECK_THROWS_AS(count_points(cm, 2), invalid_modulus_error);

    CurveSpec g2 = parse_curve("y^2=x^5+1");
    CHECK(count_points(g2, 7) == 8);  // x -> x^5 is a bijection on F_7
    CHECK_THROWS_AS(count_points(g2, 5), bad_reduction_error);
}

TEST_CASE("count_points matches the brute-force oracle for p <= 13") {
    const std::vector<std::string> curves = {"y^2=x^3+x", "y^2=x^3+x+1", "y^2=x^5+1",
                                             "y^2=x^5+x+1", "y^2=x^6+x+3", "y^2=x^4+x+2"};
    for (const auto& text : curves) {
        CurveSpec c = parse_curve(text);
        for (std::int64_t p : {3, 5, 7, 11, 13}) {
            if (!c.good_reduction(p)) continue;
            INFO(text << " at p=" << p);
            CHECK(count_points(c, p) == brute_count(c.coeffs(), p));
        }
    }
}

TEST_CASE("count_points_p2 examples and oracle") {
    CurveSpec g2 = parse_curve("y^2=x^5+1");
    CHECK(count_points_p2(g2, 7) == 50);  // x -> x^5 bijective on F_49

    // genus-1 consistency: N2 = p^2 + 1 - (a_p^2 - 2p)
    CurveSpec cm = parse_curve("y^2=x^3+x");
    for (std::int64_t p : {3, 5, 7, 11, 13}) {
        std::int64_t ap = p + 1 - count_points(cm, p);
        CHECK(count_points_p2(cm, p) == p * p + 1 - (ap * ap - 2 * p));
    }

    CHECK_THROWS_AS(count_points_p2(g2, 5), bad_reduction_error);
}

TEST_CASE("count_points_p2 brute force for tiny p") {
    // independent scan over all of F_9 x F_9; even degree exercises the
    // two points at infinity as solutions of y^2 = lead
    CurveSpec c = parse_curve("y^2=x^6+x+3");
    const std::int64_t p = 3;
    REQUIRE(c.good_reduction(p));
    // multiplication table for F_9 = F_3[s]/(s^2 - 2), built from scratch
    auto mul = [&](std::pair<int, int> u, std::pair<int, int> v) {
        int a = (u.first * v.first + 2 * u.second * v.second) % 3;
        int b = (u.first * v.second + u.second * v.first) % 3;
        return std::make_pair(a, b);
    };
    auto add = [&](std::pair<int, int> u, std::pair<int, int> v) {
        return std::make_pair((u.first + v.first) % 3, (u.second + v.second) % 3);
    };
    auto horner = [&](std::pair<int, int> x) {
        std::pair<int, int> fx{0, 0};
        for (std::size_t i = c.coeffs().size(); i-- > 0;) {
            fx = mul(fx, x);
            int ci = static_cast<int>(((c.coeffs()[i] % 3) + 3) % 3);
            fx = add(fx, {ci, 0});
        }
        return fx;
    };
    std::int64_t count = 0;
    for (int xa = 0; xa < 3; ++xa)
        for (int xb = 0; xb < 3; ++xb) {
            auto fx = horner({xa, xb});
            for (int ya = 0; ya < 3; ++ya)
                for (int yb = 0; yb < 3; ++yb)
                    if (mul({ya, yb}, {ya, yb}) == fx) ++count;
        }
    // points at infinity: solutions of y^2 = lead(f) in F_9
    std::pair<int, int> lead{static_cast<int>(((c.leading_coeff() % 3) + 3) % 3), 0};
    for (int ya = 0; ya < 3; ++ya)
        for (int yb = 0; yb < 3; ++yb)
            if (mul({ya, yb}, {ya, yb}) == lead) ++count;
    CHECK(count_points_p2(c, p) == count);
}

TEST_CASE("frob_poly examples") {
    CurveSpec cm = parse_curve("y^2=x^3+x");
    FrobPoly f5 = frob_poly(cm, 5);
    CHECK(f5.c == std::vector<std::int64_t>{5, -2, 1});  // T^2 - 2T + 5
    FrobPoly f7 = frob_poly(cm, 7);
    CHECK(f7.c == std::vector<std::int64_t>{7, 0, 1});  // T^2 + 7

    CurveSpec g2 = parse_curve("y^2=x^5+1");
    FrobPoly f = frob_poly(g2, 7);
    CHECK(f.c == std::vector<std::int64_t>{49, 0, 0, 0, 1});  // T^4 + 49

    CurveSpec g3 = parse_curve("y^2=x^7+x+1");
    CHECK_THROWS_AS(frob_poly(g3, 5), unsupported_genus_error);
}

TEST_CASE("parity guard") {
    // t1 = 0, t2 = 1 makes t1^2 - t2 odd: impossible from honest counts
    CHECK_THROWS_AS(frob_poly_g2_from_counts(5, 6, 25), inconsistency_error);
}

TEST_CASE("normalize examples") {
    CurveSpec cm = parse_curve("y^2=x^3+x");
    NormalizedPoly n5 = normalize(frob_poly(cm, 5));
    CHECK_THAT(n5.a1(), Catch::Matchers::WithinAbs(-2.0 / std::sqrt(5.0), 1e-12));
    NormalizedPoly n7 = normalize(frob_poly(cm, 7));
    CHECK(n7.a1() == 0.0);

    CurveSpec g2 = parse_curve("y^2=x^5+1");
    NormalizedPoly n = normalize(frob_poly(g2, 7));
    CHECK(n.a1() == 0.0);
    CHECK(n.a2() == 0.0);
    // coefficient list is T^4 + 1 after normalization
    auto cs = n.coefficients();
    CHECK_THAT(cs[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(cs[4], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("weil bound and functional equation over a prime range") {
    for (const auto& text : {"y^2=x^3+x", "y^2=x^3+x+1", "y^2=x^5+1", "y^2=x^5+x+1"}) {
        CurveSpec c = parse_curve(text);
        auto seq = frob_sequence(c, 200);
        for (const auto& f : seq.entries) {
            INFO(text << " p=" << f.p);
            CHECK(weil_bound_ok(f));
            CHECK(functional_equation_ok(f));
            NormalizedPoly n = normalize(f);
            CHECK(std::abs(n.a1()) <= 2.0 * c.genus() + 1e-12);
        }
    }
}

TEST_CASE("power sums from roots reproduce the counts") {
    for (const auto& text : {"y^2=x^3+x+1", "y^2=x^5+x+1"}) {
        CurveSpec c = parse_curve(text);
        for (std::int64_t p : {7, 11, 13, 17}) {
            if (!c.good_reduction(p)) continue;
            FrobPoly f = frob_poly(c, p);
            std::vector<double> desc(f.c.rbegin(), f.c.rend());
            auto roots = poly_roots(desc);
            std::complex<double> s1{0, 0}, s2{0, 0};
            for (auto r : roots) {
                s1 += r;
                s2 += r * r;
                CHECK_THAT(std::abs(r), Catch::Matchers::WithinAbs(std::sqrt(double(p)), 1e-6));
            }
            double n1 = p + 1 - s1.real();
            CHECK_THAT(n1, Catch::Matchers::WithinAbs(double(count_points(c, p)), 0.01));
            if (c.genus() == 2) {
                double n2 = p * p + 1 - s2.real();
                CHECK_THAT(n2, Catch::Matchers::WithinAbs(double(count_points_p2(c, p)), 0.01));
            }
        }
    }
}

TEST_CASE("normalized roots sit on the unit circle") {
    for (const auto& text : {"y^2=x^3+x+1", "y^2=x^5+x+1"}) {
        CurveSpec c = parse_curve(text);
        auto seq = ap_sequence(c, 100);
        for (const auto& e : seq.entries) {
            auto roots = poly_roots(e.norm.coefficients());
            for (auto r : roots)
                CHECK_THAT(std::abs(r), Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
    }
}

TEST_CASE("ap_sequence prime selection") {
    CurveSpec cm = parse_curve("y^2=x^3+x");
    auto seq = ap_sequence(cm, 10);
    REQUIRE(seq.entries.size() == 3);  // disc = -4, so 3, 5, 7 are all good
    CHECK(seq.entries[0].p == 3);
    CHECK(seq.entries[1].p == 5);
    CHECK(seq.entries[2].p == 7);
    CHECK(seq.skipped.empty());

    CHECK(ap_sequence(cm, 2).entries.empty());

    CurveSpec g2 = parse_curve("y^2=x^5+1");
    auto seq2 = ap_sequence(g2, 12);
    std::vector<std::int64_t> ps;
    for (const auto& e : seq2.entries) ps.push_back(e.p);
    CHECK(ps == std::vector<std::int64_t>{3, 7, 11});
    CHECK(seq2.skipped == std::vector<std::int64_t>{5});
}

TEST_CASE("parallel counting agrees with serial") {
    CurveSpec c = parse_curve("y^2=x^3+x+1");
    auto serial = frob_sequence(c, 500, 1);
    auto parallel = frob_sequence(c, 500, 4);
    REQUIRE(serial.entries.size() == parallel.entries.size());
    for (std::size_t i = 0; i < serial.entries.size(); ++i) {
        CHECK(serial.entries[i].p == parallel.entries[i].p);
        CHECK(serial.entries[i].c == parallel.entries[i].c);
    }
}

TEST_CASE("trace-only sequences for genus 3") {
    CurveSpec g3 = parse_curve("y^2=x^7+x+1");
    auto seq = ap_sequence(g3, 50);
    CHECK(!seq.entries.empty());
    for (const auto& e : seq.entries) {
        CHECK(e.norm.trace_only);
        CHECK(std::abs(e.norm.a1()) <= 6.0 + 1e-12);
    }
}

TEST_CASE("cache round trip is byte exact") {
    CurveSpec c = parse_curve("y^2=x^5+1");
    auto seq = frob_sequence(c, 60);
    std::string text = cache_to_string(c, seq.entries);
    std::stringstream ss(text);
    ApCache cache = parse_cache(ss);
    CHECK(cache.curve_canonical == c.canonical_string());
    CHECK(cache.genus == 2);
    REQUIRE(cache.entries.size() == seq.entries.size());
    CHECK(cache_to_string(c, cache.entries) == text);
    for (std::size_t i = 0; i < cache.entries.size(); ++i)
        CHECK(cache.entries[i].c == seq.entries[i].c);
}
