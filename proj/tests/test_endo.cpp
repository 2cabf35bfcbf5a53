#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "endo_fixtures.hpp"
#include "satotate/endo.hpp"

using namespace satotate;
using namespace satotate::endo;
using satotate::exact::QMat;
using satotate::exact::Rat;

TEST_CASE("fixtures validate") {
    validate(fixtures::trivial(1));
    validate(fixtures::trivial(2));
    validate(fixtures::trivial(3));
    validate(fixtures::cm_elliptic());
    validate(fixtures::rm_genus2());
}

TEST_CASE("centralizer dimensions") {
    CHECK(centralizer_lie_dim(fixtures::trivial(1)) == 3);   // dim sp(2)
    CHECK(centralizer_lie_dim(fixtures::trivial(2)) == 10);  // dim sp(4)
    CHECK(centralizer_lie_dim(fixtures::trivial(3)) == 21);  // dim sp(6)
    CHECK(centralizer_lie_dim(fixtures::cm_elliptic()) == 1);
    CHECK(centralizer_lie_dim(fixtures::rm_genus2()) == 6);
}

TEST_CASE("twisted system at the identity") {
    auto cm = fixtures::cm_elliptic();
    // the identity always solves the tau = id system
    CHECK(solves_twisted(cm, 0, exact::qmat_identity(2)));
    CHECK(is_symplectic(cm, exact::qmat_identity(2)));
    // tau = id system solutions = commutant; dimension over Q is 2 for Q(i)
    auto sys = twisted_coset_constraints(cm, 0);
    CHECK(sys.solution_dim() == 2);
    // trivial Galois: any tau behaves like the identity
    auto triv = fixtures::trivial(1);
    CHECK(twisted_coset_constraints(triv, 0).solution_dim() == 4);
    CHECK_THROWS_AS(twisted_coset_constraints(triv, 1), unknown_element_error);
}

TEST_CASE("CM conjugation coset witnesses") {
    auto cm = fixtures::cm_elliptic();
    // g = [[1,0],[0,-1]] conjugates R to -R but has determinant -1
    QMat refl = {{Rat(1), Rat(0)}, {Rat(0), Rat(-1)}};
    CHECK(solves_twisted(cm, 1, refl));
    CHECK(!is_symplectic(cm, refl));
    // g = [[0,-1],[-1,0]] also solves and is symplectic up to sign:
    // g^T J g = -J exactly
    QMat g = {{Rat(0), Rat(-1)}, {Rat(-1), Rat(0)}};
    CHECK(solves_twisted(cm, 1, g));
    QMat gtjg = exact::qmat_mul(exact::qmat_transpose(g), exact::qmat_mul(cm.J, g));
    CHECK(exact::qmat_eq(gtjg, exact::qmat_scale(cm.J, Rat(-1))));
}

TEST_CASE("RM coset has rational symplectic points with coset structure") {
    auto rm = fixtures::rm_genus2();
    QMat g1 = exact::qmat_identity(4);
    g1[1][1] = -1;
    g1[3][3] = -1;  // diag(1,-1,1,-1)
    CHECK(solves_twisted(rm, 1, g1));
    CHECK(is_symplectic(rm, g1));
    // second witness: g1 times a symplectic element of the centralizer
    QMat h = exact::qmat_zero(4, 4);
    h[0][0] = 2;
    h[1][1] = 2;
    h[2][2] = Rat(1, 2);
    h[3][3] = Rat(1, 2);
    QMat g2 = exact::qmat_mul(g1, h);
    CHECK(solves_twisted(rm, 1, g2));
    CHECK(is_symplectic(rm, g2));
    // g2^{-1} g1 solves the identity system: cosets of the same fiber
    QMat ratio = exact::qmat_mul(exact::qmat_inverse(g2), g1);
    CHECK(solves_twisted(rm, 0, ratio));
}

TEST_CASE("classification of the basic models") {
    auto id1 = classify(fixtures::trivial(1));
    CHECK(id1.component == ComponentTag::SU2);
    CHECK(id1.lie_dim == 3);
    CHECK(id1.component_group.order() == 1);
    CHECK(id1.verified);

    auto id2 = classify(fixtures::trivial(2));
    CHECK(id2.component == ComponentTag::USp4);
    CHECK(id2.lie_dim == 10);
    CHECK(id2.theorem == Theorem::DimLe3);

    auto id3 = classify(fixtures::trivial(3));
    CHECK(id3.component == ComponentTag::USp6);
    CHECK(id3.lie_dim == 21);

    auto cm = classify(fixtures::cm_elliptic());
    CHECK(cm.component == ComponentTag::U1);
    CHECK(cm.lie_dim == 1);
    CHECK(cm.component_group.order() == 2);
    CHECK(cm.theorem == Theorem::CM);

    auto rm = classify(fixtures::rm_genus2());
    CHECK(rm.component == ComponentTag::SU2xSU2);
    CHECK(rm.lie_dim == 6);
    CHECK(rm.component_group.order() == 2);
    CHECK(rm.theorem == Theorem::AlbertOdd);  // type I, e = 2, g/(de) = 1
}

TEST_CASE("theorem selection order") {
    AlbertDescriptor cm{AlbertType::CM, 2, 1, 1};
    CHECK(select_theorem(cm, 1) == Theorem::CM);
    AlbertDescriptor rm4{AlbertType::I, 2, 1, 4};
    CHECK(select_theorem(rm4, 4) == Theorem::Unverified);  // 4/2 even, g > 3
    AlbertDescriptor qm{AlbertType::II, 1, 2, 2};
    CHECK(select_theorem(qm, 2) == Theorem::AlbertOdd);  // 2/2 odd
    AlbertDescriptor triv2{AlbertType::I, 1, 1, 2};
    CHECK(select_theorem(triv2, 2) == Theorem::DimLe3);  // 2/1 even
    AlbertDescriptor triv1{AlbertType::I, 1, 1, 1};
    CHECK(select_theorem(triv1, 1) == Theorem::AlbertOdd);  // 1/1 odd
}

TEST_CASE("base change") {
    auto cm = fixtures::cm_elliptic();
    auto full = base_change(cm, {0, 1});
    CHECK(full.galois.order() == 2);
    CHECK(exact::qmat_eq(full.galois.rho[1], cm.galois.rho[1]));

    // base change to the CM field kills the component group
    auto over_cm_field = base_change(cm, {0});
    CHECK(over_cm_field.galois.order() == 1);
    auto ident = classify(over_cm_field);
    CHECK(ident.component == ComponentTag::U1);
    CHECK(ident.component_group.order() == 1);
    CHECK(ident.theorem == Theorem::CM);
}

TEST_CASE("base change table surgery on Z/4") {
    // Z/4 table with rho factoring through Z/2 (pure table surgery)
    EndoData d = fixtures::cm_elliptic();
    GaloisTable z4;
    z4.mul.assign(4, std::vector<std::size_t>(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) z4.mul[i][j] = (i + j) % 4;
    QMat conj = {{Rat(1), Rat(0)}, {Rat(0), Rat(-1)}};
    z4.rho = {exact::qmat_identity(2), conj, exact::qmat_identity(2), conj};
    d.galois = z4;
    validate(d);

    auto half = base_change(d, {0, 2});
    CHECK(half.galois.order() == 2);
    CHECK(exact::qmat_eq(half.galois.rho[1], exact::qmat_identity(2)));

    CHECK_THROWS_AS(base_change(d, std::vector<std::size_t>{0, 1}), not_a_subgroup_error);
    CHECK_THROWS_AS(base_change(d, std::vector<std::size_t>{1, 3}), not_a_subgroup_error);
    CHECK_THROWS_AS(base_change(d, std::vector<std::size_t>{0, 7}), not_a_subgroup_error);
}

TEST_CASE("product powers preserve the identification") {
    auto triv = fixtures::trivial(1);
    auto cm = fixtures::cm_elliptic();

    CHECK_THROWS_AS(product_power(triv, 0), invalid_input_error);

    auto triv1 = product_power(triv, 1);
    CHECK(centralizer_lie_dim(triv1) == 3);

    for (int s : {2, 3}) {
        auto ts = product_power(triv, s);
        CHECK(ts.g == s);
        CHECK(centralizer_lie_dim(ts) == 3);
        auto ident = classify(ts);
        CHECK(ident.component == ComponentTag::SU2diag);
        CHECK(ident.component_group.order() == 1);

        auto cs = product_power(cm, s);
        CHECK(centralizer_lie_dim(cs) == 1);
        auto cident = classify(cs);
        CHECK(cident.component == ComponentTag::U1);
        CHECK(cident.component_group.order() == 2);
    }
}

TEST_CASE("direct sums add Lie dimensions") {
    auto triv = fixtures::trivial(1);
    auto cm = fixtures::cm_elliptic();

    JointGalois jtriv;
    jtriv.mul = {{0}};
    jtriv.onto_a = {0};
    jtriv.onto_b = {0};
    auto tt = direct_sum(triv, triv, jtriv);
    CHECK(centralizer_lie_dim(tt) == 6);
    auto tt_ident = classify(tt);
    CHECK(tt_ident.component == ComponentTag::SU2xSU2);

    // CM x generic with joint group Z/2 acting on the CM factor only
    JointGalois z2;
    z2.mul = {{0, 1}, {1, 0}};
    z2.onto_a = {0, 1};
    z2.onto_b = {0, 0};
    auto mixed = direct_sum(cm, triv, z2);
    CHECK(centralizer_lie_dim(mixed) == 4);  // 1 + 3
    auto mident = classify(mixed);
    CHECK(mident.component == ComponentTag::U1xSU2);
    CHECK(mident.component_group.order() == 2);

    // symmetry of the construction
    JointGalois z2r;
    z2r.mul = z2.mul;
    z2r.onto_a = {0, 0};
    z2r.onto_b = {0, 1};
    auto mixed_r = direct_sum(triv, cm, z2r);
    CHECK(centralizer_lie_dim(mixed_r) == centralizer_lie_dim(mixed));
    CHECK(classify(mixed_r).component_group.order() == mident.component_group.order());

    // CM x CM with the diagonal Z/2
    JointGalois zd;
    zd.mul = z2.mul;
    zd.onto_a = {0, 1};
    zd.onto_b = {0, 1};
    auto cmcm = direct_sum(cm, cm, zd);
    CHECK(centralizer_lie_dim(cmcm) == 2);  // 1 + 1
    CHECK(classify(cmcm).component == ComponentTag::U1xU1);

    // non-homomorphic joint data is rejected
    JointGalois broken;
    broken.mul = z2.mul;
    broken.onto_a = {1, 0};  // does not send identity to identity
    broken.onto_b = {0, 0};
    CHECK_THROWS_AS(direct_sum(cm, triv, broken), invalid_galois_error);
}

TEST_CASE("lie dimension is an isogeny invariant") {
    QMat m2 = {{Rat(1), Rat(1)}, {Rat(0), Rat(1)}};
    auto cm = fixtures::cm_elliptic();
    CHECK(centralizer_lie_dim(conjugate(cm, m2)) == 1);

    QMat m4 = exact::qmat_identity(4);
    m4[0][1] = 2;
    m4[2][3] = Rat(-1, 3);
    m4[0][3] = 1;
    auto rm = fixtures::rm_genus2();
    CHECK(centralizer_lie_dim(conjugate(rm, m4)) == 6);
    CHECK(centralizer_lie_dim(conjugate(fixtures::trivial(2), m4)) == 10);
}

TEST_CASE("commutant and its center") {
    auto cm = fixtures::cm_elliptic();
    auto comm = commutant_basis(cm);
    CHECK(comm.size() == 2);
    CHECK(center_dim(comm) == 2);

    auto triv = fixtures::trivial(1);
    auto full = commutant_basis(triv);
    CHECK(full.size() == 4);
    CHECK(center_dim(full) == 1);
}

TEST_CASE("validation rejects malformed data") {
    // basis not closed under multiplication: nilpotent shift of order 3
    EndoData bad = fixtures::trivial(2);
    QMat shift = exact::qmat_zero(4, 4);
    shift[0][1] = 1;
    shift[1][2] = 1;
    bad.basis.push_back(shift);
    bad.galois.rho[0] = exact::qmat_identity(2);
    CHECK_THROWS_AS(validate(bad), invalid_endo_error);

    // J not antisymmetric
    EndoData badj = fixtures::trivial(1);
    badj.J = {{Rat(1), Rat(0)}, {Rat(0), Rat(1)}};
    CHECK_THROWS_AS(validate(badj), invalid_endo_error);

    // J singular
    EndoData sing = fixtures::trivial(1);
    sing.J = {{Rat(0), Rat(0)}, {Rat(0), Rat(0)}};
    CHECK_THROWS_AS(validate(sing), invalid_endo_error);

    // rho must act by ring automorphisms: sending R to 2R fails
    EndoData badrho = fixtures::cm_elliptic();
    badrho.galois.rho[1] = {{Rat(1), Rat(0)}, {Rat(0), Rat(2)}};
    CHECK_THROWS_AS(validate(badrho), invalid_galois_error);

    // rho(id) must be the identity
    EndoData badid = fixtures::cm_elliptic();
    badid.galois.rho[0] = {{Rat(1), Rat(0)}, {Rat(0), Rat(-1)}};
    CHECK_THROWS_AS(validate(badid), invalid_galois_error);
}

TEST_CASE("unknown component for data outside the catalog") {
    EndoData g4 = fixtures::trivial(4);
    try {
        classify(g4);
        FAIL("expected unknown_component_error");
    } catch (const unknown_component_error& e) {
        CHECK(e.lie_dim == 36);  // dim sp(8)
    }
}

TEST_CASE("pi0 always reports the full Galois group order") {
    for (const auto& data : {fixtures::cm_elliptic(), fixtures::rm_genus2()}) {
        auto ident = classify(data);
        CHECK(ident.component_group.order() == data.galois.order());
    }
}

TEST_CASE("endo file round trip is exact") {
    for (const auto& data : {fixtures::cm_elliptic(), fixtures::rm_genus2(), fixtures::trivial(2)}) {
        std::string text = endo_to_string(data);
        std::istringstream in(text);
        EndoData back = parse_endo(in);
        CHECK(back.g == data.g);
        REQUIRE(back.dim() == data.dim());
        for (std::size_t i = 0; i < data.dim(); ++i)
            CHECK(exact::qmat_eq(back.basis[i], data.basis[i]));
        CHECK(exact::qmat_eq(back.J, data.J));
        CHECK(back.galois.mul == data.galois.mul);
        for (std::size_t t = 0; t < data.galois.order(); ++t)
            CHECK(exact::qmat_eq(back.galois.rho[t], data.galois.rho[t]));
        CHECK(endo_to_string(back) == text);
    }
}

TEST_CASE("galois action from generators only") {
    // Z/4 written with a single order-4 generator; parse must fill in the
    // remaining elements by products.
    EndoData d = fixtures::cm_elliptic();
    GaloisTable z4;
    z4.mul.assign(4, std::vector<std::size_t>(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) z4.mul[i][j] = (i + j) % 4;
    QMat conj = {{Rat(1), Rat(0)}, {Rat(0), Rat(-1)}};
    z4.rho = {exact::qmat_identity(2), conj, exact::qmat_identity(2), conj};
    d.galois = z4;
    validate(d);

    std::string text = "# endodata g=1 m=2\n[basis]\n";
    text += qmat_to_lines(d.basis[0]) + "\n" + qmat_to_lines(d.basis[1]);
    text += "[J]\n" + qmat_to_lines(d.J);
    text += "[galois]\norder 4\ntable\n";
    for (const auto& row : z4.mul) {
        for (std::size_t j = 0; j < 4; ++j) text += (j ? " " : "") + std::to_string(row[j]);
        text += "\n";
    }
    text += "gen 1\n" + qmat_to_lines(conj);
    std::istringstream in(text);
    EndoData back = parse_endo(in);
    CHECK(back.galois.order() == 4);
    CHECK(exact::qmat_eq(back.galois.rho[2], exact::qmat_identity(2)));
    CHECK(exact::qmat_eq(back.galois.rho[3], conj));
}
