#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "satotate/errors.hpp"
#include "satotate/exact_linalg.hpp"

// The twisted decomposable Lefschetz group, computed from a concrete
// presentation of the endomorphism algebra D as rational matrices on
// V = Q^{2g}. Everything here is exact rational arithmetic.

namespace satotate::endo {

using exact::QMat;
using exact::Rat;

/// Finite Galois group G(L_e/K) with its action on the basis of D.
/// mul[i][j] is the index of the product i*j; element 0 is the identity.
/// rho[t] is the m x m coordinate matrix of rho_e(t): column i holds the
/// coordinates of the image of basis element i, so rho[s*t] = rho[s]rho[t].
struct GaloisTable {
    std::vector<std::vector<std::size_t>> mul;
    std::vector<QMat> rho;

    std::size_t order() const { return mul.size(); }
};

struct EndoData {
    int g = 0;
    std::vector<QMat> basis;  // m rational 2g x 2g matrices, basis[0] = I
    QMat J;                   // the alternating Riemann form
    GaloisTable galois;

    std::size_t dim() const { return basis.size(); }
    std::size_t n() const { return static_cast<std::size_t>(2 * g); }
};

enum class AlbertType { I, II, III, IV, CM };

struct AlbertDescriptor {
    AlbertType type = AlbertType::I;
    int e = 1;  // [E:Q] for E the center of D
    int d = 1;  // d^2 = [D:E]
    int g = 1;
};

enum class ComponentTag { U1, SU2, U1xU1, U1xSU2, SU2xSU2, USp4, SU2diag, USp6 };

inline std::string component_name(ComponentTag tag, int g) {
    switch (tag) {
        case ComponentTag::U1: return "U1";
        case ComponentTag::SU2: return "SU2";
        case ComponentTag::U1xU1: return "U1xU1";
        case ComponentTag::U1xSU2: return "U1xSU2";
        case ComponentTag::SU2xSU2: return "SU2xSU2";
        case ComponentTag::USp4: return "USp4";
        case ComponentTag::SU2diag: return "SU2diag(" + std::to_string(g) + ")";
        case ComponentTag::USp6: return "USp6";
    }
    return "?";
}

inline std::optional<ComponentTag> component_from_name(const std::string& name) {
    if (name == "U1") return ComponentTag::U1;
    if (name == "SU2") return ComponentTag::SU2;
    if (name == "U1xU1") return ComponentTag::U1xU1;
    if (name == "U1xSU2") return ComponentTag::U1xSU2;
    if (name == "SU2xSU2") return ComponentTag::SU2xSU2;
    if (name == "USp4") return ComponentTag::USp4;
    if (name == "USp6") return ComponentTag::USp6;
    if (name.rfind("SU2diag", 0) == 0) return ComponentTag::SU2diag;
    return std::nullopt;
}

/// Theorem used to attribute the component group. ConditionsChecked is
/// reserved for inputs whose hypotheses were verified externally; classify
/// never produces it on its own.
enum class Theorem { CM, AlbertOdd, DimLe3, ConditionsChecked, Unverified };

inline std::string theorem_name(Theorem t) {
    switch (t) {
        case Theorem::CM: return "CM";
        case Theorem::AlbertOdd: return "AlbertOdd";
        case Theorem::DimLe3: return "DimLe3";
        case Theorem::ConditionsChecked: return "ConditionsChecked";
        case Theorem::Unverified: return "Unverified";
    }
    return "?";
}

struct GroupIdentification {
    ComponentTag component;
    int g = 0;
    int lie_dim = 0;
    GaloisTable component_group;  // identified with G(L_e/K)
    Theorem theorem = Theorem::Unverified;
    bool verified = false;
};

// ---- validation -----------------------------------------------------------

namespace detail {

/// Coordinates of `target` in the span of `basis`, if any.
inline std::optional<std::vector<Rat>> express_in_span(const std::vector<QMat>& basis,
                                                       const QMat& target) {
    const std::size_t n2 = basis[0].size() * basis[0][0].size();
    std::vector<std::vector<Rat>> rows(n2, std::vector<Rat>(basis.size()));
    std::vector<Rat> rhs(n2);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        auto v = exact::qmat_vec(basis[a]);
        for (std::size_t r = 0; r < n2; ++r) rows[r][a] = v[r];
    }
    auto tv = exact::qmat_vec(target);
    for (std::size_t r = 0; r < n2; ++r) rhs[r] = tv[r];
    return exact::solve(rows, rhs);
}

inline QMat from_coords(const std::vector<QMat>& basis, const std::vector<Rat>& coords) {
    QMat out = exact::qmat_zero(basis[0].size(), basis[0][0].size());
    for (std::size_t a = 0; a < basis.size(); ++a)
        if (coords[a] != 0) out = exact::qmat_add(out, exact::qmat_scale(basis[a], coords[a]));
    return out;
}

}  // namespace detail

/// Structure constants: product[i][j] = coordinates of basis[i] * basis[j].
/// Fails if the span is not closed under multiplication.
inline std::vector<std::vector<std::vector<Rat>>> structure_constants(const EndoData& data) {
    const std::size_t m = data.dim();
    std::vector<std::vector<std::vector<Rat>>> out(m, std::vector<std::vector<Rat>>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            auto coords = detail::express_in_span(data.basis, exact::qmat_mul(data.basis[i], data.basis[j]));
            if (!coords)
                throw invalid_endo_error("basis span is not closed under multiplication");
            out[i][j] = std::move(*coords);
        }
    return out;
}

/// Full invariant check: J alternating and invertible, basis[0] = I,
/// basis independent and multiplicatively closed, rho a group homomorphism
/// acting by ring automorphisms.
inline void validate(const EndoData& data) {
    const std::size_t n = data.n();
    const std::size_t m = data.dim();
    if (data.g < 1) throw invalid_endo_error("g must be >= 1");
    if (m == 0 || !exact::qmat_eq(data.basis[0], exact::qmat_identity(n)))
        throw invalid_endo_error("basis[0] must be the identity matrix");
    for (const auto& b : data.basis)
        if (b.size() != n || b[0].size() != n)
            throw invalid_endo_error("basis matrices must be 2g x 2g");
    if (data.J.size() != n || data.J[0].size() != n)
        throw invalid_endo_error("J must be 2g x 2g");
    if (!exact::qmat_eq(exact::qmat_transpose(data.J), exact::qmat_scale(data.J, Rat(-1))))
        throw invalid_endo_error("J must be antisymmetric");
    try {
        exact::qmat_inverse(data.J);
    } catch (const invalid_input_error&) {
        throw invalid_endo_error("J must be invertible");
    }

    // linear independence of the basis
    std::vector<std::vector<Rat>> stacked;
    for (const auto& b : data.basis) stacked.push_back(exact::qmat_vec(b));
    if (exact::rank(stacked, n * n) != m)
        throw invalid_endo_error("basis matrices are linearly dependent");

    auto sc = structure_constants(data);

    const auto& gal = data.galois;
    const std::size_t k = gal.order();
    if (k == 0 || gal.rho.size() != k)
        throw invalid_galois_error("galois table and action size mismatch");
    for (const auto& row : gal.mul) {
        if (row.size() != k) throw invalid_galois_error("galois table is not square");
        for (std::size_t v : row)
            if (v >= k) throw invalid_galois_error("galois table index out of range");
    }
    for (std::size_t j = 0; j < k; ++j)
        if (gal.mul[0][j] != j || gal.mul[j][0] != j)
            throw invalid_galois_error("element 0 must be the identity");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = 0; l < k; ++l)
                if (gal.mul[gal.mul[i][j]][l] != gal.mul[i][gal.mul[j][l]])
                    throw invalid_galois_error("galois table is not associative");

    if (!exact::qmat_eq(gal.rho[0], exact::qmat_identity(m)))
        throw invalid_galois_error("rho(id) must be the identity");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (!exact::qmat_eq(gal.rho[gal.mul[i][j]], exact::qmat_mul(gal.rho[i], gal.rho[j])))
                throw invalid_galois_error("rho is not a group homomorphism");

    // ring automorphism: rho(b_i b_j) = rho(b_i) rho(b_j), via images
    for (std::size_t t = 1; t < k; ++t) {
        std::vector<QMat> image(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<Rat> col(m);
            for (std::size_t l = 0; l < m; ++l) col[l] = gal.rho[t][l][i];
            image[i] = detail::from_coords(data.basis, col);
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                QMat lhs = exact::qmat_mul(image[i], image[j]);
                // rho applied to the coordinates of b_i b_j
                QMat rho_prod = exact::qmat_zero(data.n(), data.n());
                for (std::size_t l = 0; l < m; ++l)
                    if (sc[i][j][l] != 0)
                        rho_prod = exact::qmat_add(rho_prod, exact::qmat_scale(image[l], sc[i][j][l]));
                if (!exact::qmat_eq(lhs, rho_prod))
                    throw invalid_galois_error("rho is not a ring automorphism");
            }
    }
}

// ---- constraint systems ---------------------------------------------------

/// Exact linear system in the 4g^2 entries of an unknown matrix X,
/// flattened row-major.
struct LinearSystem {
    std::size_t unknowns = 0;
    std::vector<std::vector<Rat>> rows;

    std::size_t solution_dim() const { return unknowns - exact::rank(rows, unknowns); }

    std::vector<QMat> solution_basis(std::size_t n) const {
        exact::Echelon e(unknowns);
        for (const auto& r : rows) e.add_row(r);
        std::vector<QMat> out;
        for (const auto& v : e.nullspace_basis()) out.push_back(exact::qmat_unvec(v, n, n));
        return out;
    }
};

namespace detail {

/// Appends the 4g^2 rows of X A - B X = 0.
inline void append_intertwine_rows(LinearSystem& sys, const QMat& a, const QMat& b) {
    const std::size_t n = a.size();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            std::vector<Rat> row(n * n, Rat(0));
            for (std::size_t k = 0; k < n; ++k) {
                row[r * n + k] += a[k][c];   // (X A)[r][c]
                row[k * n + c] -= b[r][k];   // (B X)[r][c]
            }
            bool nonzero = false;
            for (const auto& v : row)
                if (v != 0) {
                    nonzero = true;
                    break;
                }
            if (nonzero) sys.rows.push_back(std::move(row));
        }
}

/// Appends the rows of X^T J + J X = 0 (the Lie algebra of Sp).
inline void append_symplectic_rows(LinearSystem& sys, const QMat& j) {
    const std::size_t n = j.size();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            std::vector<Rat> row(n * n, Rat(0));
            for (std::size_t k = 0; k < n; ++k) {
                row[k * n + r] += j[k][c];   // (X^T J)[r][c]
                row[k * n + c] += j[r][k];   // (J X)[r][c]
            }
            bool nonzero = false;
            for (const auto& v : row)
                if (v != 0) {
                    nonzero = true;
                    break;
                }
            if (nonzero) sys.rows.push_back(std::move(row));
        }
}

inline std::vector<QMat> galois_images(const EndoData& data, std::size_t tau) {
    const std::size_t m = data.dim();
    std::vector<QMat> image(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Rat> col(m);
        for (std::size_t l = 0; l < m; ++l) col[l] = data.galois.rho[tau][l][i];
        image[i] = from_coords(data.basis, col);
    }
    return image;
}

}  // namespace detail

/// Constraints { g b_i = rho_e(tau)(b_i) g } on the entries of g, to be
/// intersected with the symplectic condition. For tau = id this is the
/// commutant system of the centralizer computation.
inline LinearSystem twisted_coset_constraints(const EndoData& data, std::size_t tau) {
    if (tau >= data.galois.order())
        throw unknown_element_error("tau is not in the Galois table");
    const std::size_t n = data.n();
    LinearSystem sys;
    sys.unknowns = n * n;
    auto image = detail::galois_images(data, tau);
    for (std::size_t i = 1; i < data.dim(); ++i)
        detail::append_intertwine_rows(sys, data.basis[i], image[i]);
    return sys;
}

/// Exact test of the group-level equation g b g^{-1} = rho_e(tau)(b).
inline bool solves_twisted(const EndoData& data, std::size_t tau, const QMat& g_mat) {
    if (tau >= data.galois.order())
        throw unknown_element_error("tau is not in the Galois table");
    auto image = detail::galois_images(data, tau);
    for (std::size_t i = 0; i < data.dim(); ++i)
        if (!exact::qmat_eq(exact::qmat_mul(g_mat, data.basis[i]),
                            exact::qmat_mul(image[i], g_mat)))
            return false;
    return true;
}

inline bool is_symplectic(const EndoData& data, const QMat& g_mat) {
    return exact::qmat_eq(
        exact::qmat_mul(exact::qmat_transpose(g_mat), exact::qmat_mul(data.J, g_mat)), data.J);
}

/// dim over Q of { X : X^T J + J X = 0, X b = b X for all b in D }, the
/// Lie algebra of the Lefschetz group.
inline int centralizer_lie_dim(const EndoData& data) {
    const std::size_t n = data.n();
    LinearSystem sys;
    sys.unknowns = n * n;
    for (std::size_t i = 1; i < data.dim(); ++i)
        detail::append_intertwine_rows(sys, data.basis[i], data.basis[i]);
    detail::append_symplectic_rows(sys, data.J);
    return static_cast<int>(sys.solution_dim());
}

/// Basis of the commutant algebra C(D) inside M_{2g}(Q) (no symplectic
/// condition).
inline std::vector<QMat> commutant_basis(const EndoData& data) {
    const std::size_t n = data.n();
    LinearSystem sys;
    sys.unknowns = n * n;
    for (std::size_t i = 1; i < data.dim(); ++i)
        detail::append_intertwine_rows(sys, data.basis[i], data.basis[i]);
    return sys.solution_basis(n);
}

/// Dimension of the center of an algebra given by a spanning set.
inline int center_dim(const std::vector<QMat>& alg) {
    const std::size_t m = alg.size();
    if (m == 0) return 0;
    std::vector<std::vector<Rat>> rows;
    const std::size_t n2 = alg[0].size() * alg[0].size();
    for (std::size_t b = 0; b < m; ++b) {
        // commutators [X, alg_b] = 0 for X = sum_a x_a alg_a
        std::vector<std::vector<Rat>> comm_vec(m);
        for (std::size_t a = 0; a < m; ++a)
            comm_vec[a] = exact::qmat_vec(
                exact::qmat_add(exact::qmat_mul(alg[a], alg[b]),
                                exact::qmat_scale(exact::qmat_mul(alg[b], alg[a]), Rat(-1))));
        for (std::size_t entry = 0; entry < n2; ++entry) {
            std::vector<Rat> row(m);
            bool nonzero = false;
            for (std::size_t a = 0; a < m; ++a) {
                row[a] = comm_vec[a][entry];
                if (row[a] != 0) nonzero = true;
            }
            if (nonzero) rows.push_back(std::move(row));
        }
    }
    return static_cast<int>(m - exact::rank(rows, m));
}

/// Greedy maximal commutative subalgebra dimension; certifies CM type when
/// it reaches 2g. Basis-order dependent but exact on the shipped data.
inline int greedy_commutative_dim(const EndoData& data) {
    std::vector<QMat> picked;
    for (const auto& b : data.basis) {
        bool commutes = true;
        for (const auto& s : picked)
            if (!exact::qmat_eq(exact::qmat_mul(b, s), exact::qmat_mul(s, b))) {
                commutes = false;
                break;
            }
        if (commutes) picked.push_back(b);
    }
    std::vector<std::vector<Rat>> stacked;
    for (const auto& b : picked) stacked.push_back(exact::qmat_vec(b));
    return static_cast<int>(exact::rank(stacked, data.n() * data.n()));
}

// ---- classification -------------------------------------------------------

struct CatalogRow {
    int g;
    int lie_dim;
    int center_dim;
    ComponentTag tag;
};

/// Identity components keyed by (genus, Lie dimension); the center of the
/// commutant algebra disambiguates and cross-checks every hit.
inline const std::vector<CatalogRow>& component_catalog() {
    static const std::vector<CatalogRow> rows = {
        {1, 1, 2, ComponentTag::U1},      {1, 3, 1, ComponentTag::SU2},
        {2, 1, 2, ComponentTag::U1},      {2, 2, 4, ComponentTag::U1xU1},
        {2, 3, 1, ComponentTag::SU2diag}, {2, 4, 3, ComponentTag::U1xSU2},
        {2, 6, 2, ComponentTag::SU2xSU2}, {2, 10, 1, ComponentTag::USp4},
        {3, 1, 2, ComponentTag::U1},      {3, 3, 1, ComponentTag::SU2diag},
        {3, 21, 1, ComponentTag::USp6},
    };
    return rows;
}

/// Hypothesis selection, first match wins: CM, then Albert types I/II/III
/// with g/(de) odd, then dim <= 3.
inline Theorem select_theorem(const AlbertDescriptor& albert, int g) {
    if (albert.type == AlbertType::CM) return Theorem::CM;
    if (albert.type == AlbertType::I || albert.type == AlbertType::II ||
        albert.type == AlbertType::III) {
        const int de = albert.d * albert.e;
        if (de > 0 && g % de == 0 && (g / de) % 2 == 1) return Theorem::AlbertOdd;
    }
    if (g <= 3) return Theorem::DimLe3;
    return Theorem::Unverified;
}

inline void check_albert(const EndoData& data, const AlbertDescriptor& albert) {
    if (albert.g != data.g)
        throw invalid_endo_error("albert descriptor genus does not match the data");
    if (albert.e < 1 || albert.d < 1 || (2 * albert.g) % (albert.e * albert.d * albert.d) != 0)
        throw invalid_endo_error("albert descriptor must have e d^2 dividing 2g");
    if (albert.type == AlbertType::CM && greedy_commutative_dim(data) < 2 * data.g)
        throw invalid_endo_error("CM type requires a commutative subalgebra of dimension 2g");
}

/// Best-effort Albert descriptor from the matrix data. Commutative algebras
/// of dimension 2g are CM; other commutative algebras are reported as type
/// I; noncommutative ones as type II (types II and III behave identically
/// in the classification hypotheses).
inline AlbertDescriptor derive_albert(const EndoData& data) {
    AlbertDescriptor out;
    out.g = data.g;
    const int zdim = center_dim(data.basis);
    const int m = static_cast<int>(data.dim());
    if (greedy_commutative_dim(data) == 2 * data.g) {
        out.type = AlbertType::CM;
        out.e = 2 * data.g;
        out.d = 1;
        return out;
    }
    out.e = zdim;
    int dd = (zdim > 0 && m % zdim == 0) ? m / zdim : 1;
    int d = 1;
    while ((d + 1) * (d + 1) <= dd) ++d;
    out.d = (d * d == dd) ? d : 1;
    out.type = (m == zdim) ? AlbertType::I : AlbertType::II;
    if (out.e * out.d * out.d > 2 * out.g || (2 * out.g) % (out.e * out.d * out.d) != 0) {
        out.e = 1;
        out.d = 1;
        out.type = AlbertType::I;
    }
    return out;
}

inline GroupIdentification classify(const EndoData& data, const AlbertDescriptor& albert) {
    check_albert(data, albert);
    const int ld = centralizer_lie_dim(data);
    const Theorem theorem = select_theorem(albert, data.g);
    const CatalogRow* hit = nullptr;
    for (const auto& row : component_catalog())
        if (row.g == data.g && row.lie_dim == ld) {
            hit = &row;
            break;
        }
    if (!hit)
        throw unknown_component_error(
            "no catalog identity component at (g=" + std::to_string(data.g) +
                ", lie_dim=" + std::to_string(ld) + ")",
            ld);
    const int zd = center_dim(commutant_basis(data));
    if (zd != hit->center_dim)
        throw unknown_component_error(
            "catalog collision: commutant center dimension " + std::to_string(zd) +
                " does not match " + component_name(hit->tag, data.g),
            ld);
    GroupIdentification out;
    out.component = hit->tag;
    out.g = data.g;
    out.lie_dim = ld;
    out.component_group = data.galois;
    out.theorem = theorem;
    out.verified = theorem != Theorem::Unverified;
    return out;
}

inline GroupIdentification classify(const EndoData& data) {
    return classify(data, derive_albert(data));
}

// ---- functorial constructions ---------------------------------------------

/// Restricts the Galois action to a subgroup (base change to the fixed
/// field). Elements are given by their indices in the full table.
inline EndoData base_change(const EndoData& data, std::vector<std::size_t> subgroup) {
    std::sort(subgroup.begin(), subgroup.end());
    subgroup.erase(std::unique(subgroup.begin(), subgroup.end()), subgroup.end());
    if (subgroup.empty() || subgroup[0] != 0)
        throw not_a_subgroup_error("subgroup must contain the identity");
    for (std::size_t v : subgroup)
        if (v >= data.galois.order())
            throw not_a_subgroup_error("element index outside the Galois table");
    auto position = [&subgroup](std::size_t v) {
        auto it = std::lower_bound(subgroup.begin(), subgroup.end(), v);
        if (it == subgroup.end() || *it != v) return std::size_t(-1);
        return static_cast<std::size_t>(it - subgroup.begin());
    };
    const std::size_t k = subgroup.size();
    GaloisTable table;
    table.mul.assign(k, std::vector<std::size_t>(k));
    table.rho.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        table.rho[i] = data.galois.rho[subgroup[i]];
        for (std::size_t j = 0; j < k; ++j) {
            std::size_t prod = position(data.galois.mul[subgroup[i]][subgroup[j]]);
            if (prod == std::size_t(-1))
                throw not_a_subgroup_error("subset is not closed under the group product");
            table.mul[i][j] = prod;
        }
    }
    EndoData out = data;
    out.galois = std::move(table);
    return out;
}

namespace detail {

/// Coordinate matrix of tau on a new basis, built from explicit images.
inline QMat action_from_images(const std::vector<QMat>& basis, const std::vector<QMat>& images) {
    const std::size_t m = basis.size();
    QMat rho = exact::qmat_zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        auto coords = express_in_span(basis, images[i]);
        if (!coords) throw invalid_galois_error("galois image leaves the span");
        for (std::size_t l = 0; l < m; ++l) rho[l][i] = (*coords)[l];
    }
    return rho;
}

inline QMat block_embed(const QMat& m, std::size_t n_total, std::size_t row0, std::size_t col0) {
    QMat out = exact::qmat_zero(n_total, n_total);
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m[r].size(); ++c) out[row0 + r][col0 + c] = m[r][c];
    return out;
}

}  // namespace detail

/// D(A^s) = M_s(D) acting on V^s with the direct-sum form. The Galois
/// action applies entrywise to the s x s blocks.
inline EndoData product_power(const EndoData& data, int s) {
    if (s < 1) throw invalid_input_error("product power requires s >= 1");
    const std::size_t n = data.n();
    const std::size_t ns = n * static_cast<std::size_t>(s);
    EndoData out;
    out.g = data.g * s;
    out.J = exact::qmat_zero(ns, ns);
    for (int blk = 0; blk < s; ++blk)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                out.J[blk * n + r][blk * n + c] = data.J[r][c];

    // First basis element must be the identity of M_s(D); the slot it
    // displaces, E_00 (x) b_0, stays in the span.
    out.basis.push_back(exact::qmat_identity(ns));
    struct Slot {
        std::size_t r, c, i;
    };
    std::vector<Slot> slots;
    for (std::size_t r = 0; r < static_cast<std::size_t>(s); ++r)
        for (std::size_t c = 0; c < static_cast<std::size_t>(s); ++c)
            for (std::size_t i = 0; i < data.dim(); ++i) {
                if (r == 0 && c == 0 && i == 0) continue;
                slots.push_back({r, c, i});
                out.basis.push_back(detail::block_embed(data.basis[i], ns, r * n, c * n));
            }

    const std::size_t k = data.galois.order();
    GaloisTable table;
    table.mul = data.galois.mul;
    table.rho.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        auto factor_images = detail::galois_images(data, t);
        std::vector<QMat> images;
        images.push_back(exact::qmat_identity(ns));
        for (const auto& slot : slots)
            images.push_back(detail::block_embed(factor_images[slot.i], ns, slot.r * n, slot.c * n));
        table.rho[t] = detail::action_from_images(out.basis, images);
    }
    out.galois = std::move(table);
    validate(out);
    return out;
}

/// Surjections from a joint Galois table onto the factor tables.
struct JointGalois {
    std::vector<std::vector<std::size_t>> mul;
    std::vector<std::size_t> onto_a;
    std::vector<std::size_t> onto_b;
};

/// A x B with Hom(A, B) = 0: block-diagonal V and J, endomorphisms act
/// factorwise through the surjections.
inline EndoData direct_sum(const EndoData& a, const EndoData& b, const JointGalois& joint) {
    const std::size_t k = joint.mul.size();
    if (joint.onto_a.size() != k || joint.onto_b.size() != k)
        throw invalid_galois_error("joint table and surjections size mismatch");
    std::vector<bool> hit_a(a.galois.order(), false), hit_b(b.galois.order(), false);
    for (std::size_t i = 0; i < k; ++i) {
        if (joint.onto_a[i] >= a.galois.order() || joint.onto_b[i] >= b.galois.order())
            throw invalid_galois_error("surjection image out of range");
        hit_a[joint.onto_a[i]] = true;
        hit_b[joint.onto_b[i]] = true;
        for (std::size_t j = 0; j < k; ++j) {
            if (joint.onto_a[joint.mul[i][j]] != a.galois.mul[joint.onto_a[i]][joint.onto_a[j]] ||
                joint.onto_b[joint.mul[i][j]] != b.galois.mul[joint.onto_b[i]][joint.onto_b[j]])
                throw invalid_galois_error("surjection is not a homomorphism");
        }
    }
    for (bool h : hit_a)
        if (!h) throw invalid_galois_error("map onto first factor is not surjective");
    for (bool h : hit_b)
        if (!h) throw invalid_galois_error("map onto second factor is not surjective");

    const std::size_t na = a.n(), nb = b.n(), n = na + nb;
    EndoData out;
    out.g = a.g + b.g;
    out.J = exact::qmat_zero(n, n);
    for (std::size_t r = 0; r < na; ++r)
        for (std::size_t c = 0; c < na; ++c) out.J[r][c] = a.J[r][c];
    for (std::size_t r = 0; r < nb; ++r)
        for (std::size_t c = 0; c < nb; ++c) out.J[na + r][na + c] = b.J[r][c];

    out.basis.push_back(exact::qmat_identity(n));
    for (std::size_t i = 1; i < a.dim(); ++i)
        out.basis.push_back(detail::block_embed(a.basis[i], n, 0, 0));
    for (std::size_t j = 0; j < b.dim(); ++j)
        out.basis.push_back(detail::block_embed(b.basis[j], n, na, na));

    GaloisTable table;
    table.mul = joint.mul;
    table.rho.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        auto ia = detail::galois_images(a, joint.onto_a[t]);
        auto ib = detail::galois_images(b, joint.onto_b[t]);
        std::vector<QMat> images;
        images.push_back(exact::qmat_identity(n));
        for (std::size_t i = 1; i < a.dim(); ++i)
            images.push_back(detail::block_embed(ia[i], n, 0, 0));
        for (std::size_t j = 0; j < b.dim(); ++j)
            images.push_back(detail::block_embed(ib[j], n, na, na));
        table.rho[t] = detail::action_from_images(out.basis, images);
    }
    out.galois = std::move(table);
    validate(out);
    return out;
}

/// Conjugates the whole presentation by an invertible rational matrix
/// (an isogeny of the underlying polarized structure).
inline EndoData conjugate(const EndoData& data, const QMat& m) {
    QMat minv = exact::qmat_inverse(m);
    EndoData out = data;
    for (auto& b : out.basis) b = exact::qmat_mul(m, exact::qmat_mul(b, minv));
    out.J = exact::qmat_mul(exact::qmat_transpose(minv), exact::qmat_mul(data.J, minv));
    return out;
}

// ---- file format -----------------------------------------------------------
// Sections [basis], [J], [galois]; matrices as rows of space-separated
// fractions a/b; the galois section stores the Cayley table as permutation
// indices plus one m x m matrix per generator.

inline std::string rat_to_string(const Rat& r) {
    std::ostringstream out;
    out << r;
    return out.str();
}

inline std::string qmat_to_lines(const QMat& m) {
    std::string out;
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ' ';
            out += rat_to_string(row[j]);
        }
        out += '\n';
    }
    return out;
}

inline std::string endo_to_string(const EndoData& data) {
    std::string out = "# endodata g=" + std::to_string(data.g) +
                      " m=" + std::to_string(data.dim()) + "\n[basis]\n";
    for (std::size_t i = 0; i < data.dim(); ++i) {
        if (i) out += '\n';
        out += qmat_to_lines(data.basis[i]);
    }
    out += "[J]\n";
    out += qmat_to_lines(data.J);
    out += "[galois]\n";
    out += "order " + std::to_string(data.galois.order()) + "\n";
    out += "table\n";
    for (const auto& row : data.galois.mul) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ' ';
            out += std::to_string(row[j]);
        }
        out += '\n';
    }
    // every non-identity element written as a generator: always generates
    for (std::size_t t = 1; t < data.galois.order(); ++t) {
        out += "gen " + std::to_string(t) + "\n";
        out += qmat_to_lines(data.galois.rho[t]);
    }
    return out;
}

namespace detail {

inline Rat parse_rat(const std::string& tok) {
    const auto slash = tok.find('/');
    try {
        if (slash == std::string::npos) return Rat(exact::Int(tok));
        return Rat(exact::Int(tok.substr(0, slash)), exact::Int(tok.substr(slash + 1)));
    } catch (const std::exception&) {
        throw invalid_endo_error("cannot parse rational: " + tok);
    }
}

inline QMat read_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
    QMat m = exact::qmat_zero(rows, cols);
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw invalid_endo_error("unexpected end of matrix block");
        std::istringstream ss(line);
        for (std::size_t c = 0; c < cols; ++c) {
            std::string tok;
            if (!(ss >> tok)) throw invalid_endo_error("matrix row too short");
            m[r][c] = parse_rat(tok);
        }
    }
    return m;
}

}  // namespace detail

inline EndoData parse_endo(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# endodata g=", 0) != 0)
        throw invalid_endo_error("endo file missing header");
    std::istringstream hs(line.substr(2));
    std::string word, gtok, mtok;
    hs >> word >> gtok >> mtok;
    const int g = std::stoi(gtok.substr(2));
    const std::size_t m = std::stoul(mtok.substr(2));
    const std::size_t n = static_cast<std::size_t>(2 * g);

    EndoData data;
    data.g = g;
    if (!std::getline(in, line) || line != "[basis]")
        throw invalid_endo_error("expected [basis] section");
    for (std::size_t i = 0; i < m; ++i) {
        data.basis.push_back(detail::read_matrix(in, n, n));
        if (i + 1 < m && (!std::getline(in, line) || !line.empty()))
            throw invalid_endo_error("expected blank line between basis matrices");
    }
    if (!std::getline(in, line) || line != "[J]")
        throw invalid_endo_error("expected [J] section");
    data.J = detail::read_matrix(in, n, n);
    if (!std::getline(in, line) || line != "[galois]")
        throw invalid_endo_error("expected [galois] section");
    if (!std::getline(in, line) || line.rfind("order ", 0) != 0)
        throw invalid_endo_error("expected galois order");
    const std::size_t k = std::stoul(line.substr(6));
    if (!std::getline(in, line) || line != "table")
        throw invalid_endo_error("expected galois table");
    GaloisTable table;
    table.mul.assign(k, std::vector<std::size_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(in, line)) throw invalid_endo_error("galois table truncated");
        std::istringstream ss(line);
        for (std::size_t j = 0; j < k; ++j)
            if (!(ss >> table.mul[i][j])) throw invalid_endo_error("galois table row too short");
    }
    // generators, extended over the group by breadth-first products
    std::vector<std::pair<std::size_t, QMat>> gens;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("gen ", 0) != 0) throw invalid_endo_error("expected gen block");
        std::size_t idx = std::stoul(line.substr(4));
        if (idx >= k) throw invalid_endo_error("generator index out of range");
        gens.emplace_back(idx, detail::read_matrix(in, m, m));
    }
    table.rho.assign(k, QMat());
    table.rho[0] = exact::qmat_identity(m);
    std::vector<bool> known(k, false);
    known[0] = true;
    for (const auto& [idx, mat] : gens) {
        if (known[idx] && !exact::qmat_eq(table.rho[idx], mat))
            throw invalid_galois_error("inconsistent generator matrices");
        table.rho[idx] = mat;
        known[idx] = true;
    }
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t i = 0; i < k; ++i) {
            if (!known[i]) continue;
            for (const auto& [idx, mat] : gens) {
                std::size_t prod = table.mul[i][idx];
                QMat r = exact::qmat_mul(table.rho[i], mat);
                if (!known[prod]) {
                    table.rho[prod] = std::move(r);
                    known[prod] = true;
                    grew = true;
                } else if (!exact::qmat_eq(table.rho[prod], r)) {
                    throw invalid_galois_error("generator products are inconsistent");
                }
            }
        }
    }
    for (bool kn : known)
        if (!kn) throw invalid_galois_error("generators do not generate the table");
    data.galois = std::move(table);
    validate(data);
    return data;
}

inline EndoData read_endo(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input_error("cannot read endo file: " + path);
    return parse_endo(in);
}

inline void write_endo(const std::string& path, const EndoData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input_error("cannot write endo file: " + path);
    out << endo_to_string(data);
}

}  // namespace satotate::endo
