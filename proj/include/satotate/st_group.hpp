#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "satotate/endo.hpp"
#include "satotate/errors.hpp"
#include "satotate/moments.hpp"
#include "satotate/prng.hpp"

// The compact Sato-Tate group: a catalog identity component embedded in
// USp(2g) as eigenphase pairs, a finite component group, and one explicit
// unitary-symplectic representative per coset. Identity components are
// parametrized by their maximal torus with the Weyl eigenphase density, so
// all characteristic-polynomial statistics come out Haar-distributed.
// Matrix-level outputs depend on the chosen representatives; any two
// choices are conjugate.

namespace satotate::st {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using endo::ComponentTag;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTol = 1e-9;

struct IdentityComponent {
    ComponentTag tag;
    int g = 1;        // ambient genus: embeds into USp(2g)
    int lie_dim = 0;

    std::string name() const { return endo::component_name(tag, g); }
};

inline int catalog_lie_dim(ComponentTag tag) {
    switch (tag) {
        case ComponentTag::U1: return 1;
        case ComponentTag::SU2: return 3;
        case ComponentTag::U1xU1: return 2;
        case ComponentTag::U1xSU2: return 4;
        case ComponentTag::SU2xSU2: return 6;
        case ComponentTag::USp4: return 10;
        case ComponentTag::SU2diag: return 3;
        case ComponentTag::USp6: return 21;
    }
    return 0;
}

/// Number of independent eigenphase parameters.
inline int param_count(ComponentTag tag) {
    switch (tag) {
        case ComponentTag::U1:
        case ComponentTag::SU2:
        case ComponentTag::SU2diag: return 1;
        case ComponentTag::U1xU1:
        case ComponentTag::U1xSU2:
        case ComponentTag::SU2xSU2:
        case ComponentTag::USp4: return 2;
        case ComponentTag::USp6: return 3;
    }
    return 0;
}

inline IdentityComponent make_component(ComponentTag tag, int g) {
    const bool ok = (tag == ComponentTag::U1 && g >= 1 && g <= 3) ||
                    (tag == ComponentTag::SU2 && g == 1) ||
                    (tag == ComponentTag::U1xU1 && g == 2) ||
                    (tag == ComponentTag::U1xSU2 && g == 2) ||
                    (tag == ComponentTag::SU2xSU2 && g == 2) ||
                    (tag == ComponentTag::USp4 && g == 2) ||
                    (tag == ComponentTag::SU2diag && g >= 2 && g <= 3) ||
                    (tag == ComponentTag::USp6 && g == 3);
    if (!ok)
        throw embedding_error("component " + endo::component_name(tag, g) +
                              " has no embedding at genus " + std::to_string(g));
    return IdentityComponent{tag, g, catalog_lie_dim(tag)};
}

/// Eigenphase of each conjugate pair as a function of the parameters.
inline void pair_phases(const IdentityComponent& c, const double* params, double* phases) {
    switch (c.tag) {
        case ComponentTag::U1:
        case ComponentTag::SU2:
        case ComponentTag::SU2diag:
            for (int i = 0; i < c.g; ++i) phases[i] = params[0];
            return;
        case ComponentTag::U1xU1:
        case ComponentTag::U1xSU2:
        case ComponentTag::SU2xSU2:
        case ComponentTag::USp4:
            phases[0] = params[0];
            phases[1] = params[1];
            return;
        case ComponentTag::USp6:
            phases[0] = params[0];
            phases[1] = params[1];
            phases[2] = params[2];
            return;
    }
}

/// Unnormalized Weyl eigenphase density, 2pi-periodic and even in every
/// parameter (quadrature integrates over the full circle per parameter and
/// the symmetry factors cancel in the normalization).
inline double weyl_density(const IdentityComponent& c, const double* params) {
    auto sq = [](double v) { return v * v; };
    switch (c.tag) {
        case ComponentTag::U1:
        case ComponentTag::U1xU1:
            return 1.0;
        case ComponentTag::SU2:
        case ComponentTag::SU2diag:
            return sq(std::sin(params[0]));
        case ComponentTag::U1xSU2:
            return sq(std::sin(params[1]));
        case ComponentTag::SU2xSU2:
            return sq(std::sin(params[0])) * sq(std::sin(params[1]));
        case ComponentTag::USp4:
            return sq(std::cos(params[0]) - std::cos(params[1])) * sq(std::sin(params[0])) *
                   sq(std::sin(params[1]));
        case ComponentTag::USp6: {
            const double c0 = std::cos(params[0]), c1 = std::cos(params[1]),
                         c2 = std::cos(params[2]);
            return sq(c0 - c1) * sq(c0 - c2) * sq(c1 - c2) * sq(std::sin(params[0])) *
                   sq(std::sin(params[1])) * sq(std::sin(params[2]));
        }
    }
    return 0.0;
}

/// Torus element: conjugate eigenphase pairs on the diagonal,
/// diag(e^{i phi_0}, e^{-i phi_0}, ..., e^{i phi_{g-1}}, e^{-i phi_{g-1}}).
inline Matrix element_matrix(const IdentityComponent& c, const std::vector<double>& params) {
    std::vector<double> phases(static_cast<std::size_t>(c.g));
    pair_phases(c, params.data(), phases.data());
    Matrix m = Matrix::Zero(2 * c.g, 2 * c.g);
    for (int i = 0; i < c.g; ++i) {
        m(2 * i, 2 * i) = std::polar(1.0, phases[static_cast<std::size_t>(i)]);
        m(2 * i + 1, 2 * i + 1) = std::polar(1.0, -phases[static_cast<std::size_t>(i)]);
    }
    return m;
}

/// The symplectic form preserved by all models: pairwise blocks
/// [[0,1],[-1,0]] down the diagonal.
inline Eigen::MatrixXd symplectic_form(int g) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        j(2 * i, 2 * i + 1) = 1.0;
        j(2 * i + 1, 2 * i) = -1.0;
    }
    return j;
}

inline bool is_unitary_symplectic(const Matrix& u, double tol = kTol) {
    const int n = static_cast<int>(u.rows());
    Matrix j = symplectic_form(n / 2).cast<Cplx>();
    return (u.adjoint() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol &&
           (u.transpose() * j * u - j).cwiseAbs().maxCoeff() <= tol;
}

/// Membership of a matrix in the parametrized torus image: diagonal, unit
/// modulus, conjugate pairs, and (for replicated tags) equal pair phases.
inline bool in_torus_image(const IdentityComponent& c, const Matrix& m, double tol = kTol) {
    const int n = 2 * c.g;
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < n; ++col)
            if (r != col && std::abs(m(r, col)) > tol) return false;
    for (int i = 0; i < c.g; ++i) {
        if (std::abs(std::abs(m(2 * i, 2 * i)) - 1.0) > tol) return false;
        if (std::abs(m(2 * i, 2 * i) * m(2 * i + 1, 2 * i + 1) - 1.0) > tol) return false;
    }
    if (c.tag == ComponentTag::U1 || c.tag == ComponentTag::SU2diag)
        for (int i = 1; i < c.g; ++i)
            if (std::abs(m(2 * i, 2 * i) - m(0, 0)) > tol) return false;
    return true;
}

using Pi0Table = std::vector<std::vector<std::size_t>>;

inline Pi0Table trivial_pi0() { return {{0}}; }

struct STModel {
    IdentityComponent component;
    Pi0Table pi0;                    // Cayley table, identity at index 0
    std::vector<Matrix> coset_reps;  // one per element, reps[0] = I

    std::size_t pi0_order() const { return pi0.size(); }
    std::string name() const {
        return component.name() + "/" + std::to_string(pi0.size());
    }
};

/// Validates coset representatives: unitary-symplectic, normalizing the
/// parametrized component (checked at 10 pseudo-random parameter points),
/// and compatible with the component group law up to identity-component
/// elements.
inline STModel make_model(IdentityComponent component, Pi0Table pi0,
                          std::vector<Matrix> coset_reps) {
    const std::size_t k = pi0.size();
    if (k == 0 || coset_reps.size() != k)
        throw invalid_input_error("need one coset representative per pi0 element");
    for (std::size_t i = 0; i < k; ++i) {
        if (pi0[i].size() != k) throw invalid_input_error("pi0 table is not square");
        if (pi0[0][i] != i || pi0[i][0] != i)
            throw invalid_input_error("pi0 element 0 must be the identity");
    }
    const int n = 2 * component.g;
    if (coset_reps[0].rows() != n || !coset_reps[0].isIdentity(kTol))
        throw invalid_input_error("neutral coset representative must be the identity");

    SplitMix64 rng(0x5357474D4F44454CULL);  // fixed probe stream
    std::vector<std::vector<double>> probes;
    for (int t = 0; t < 10; ++t) {
        std::vector<double> params(static_cast<std::size_t>(param_count(component.tag)));
        for (auto& v : params) v = 2.0 * kPi * rng.next_double();
        probes.push_back(std::move(params));
    }

    for (const auto& rep : coset_reps) {
        if (rep.rows() != n || rep.cols() != n)
            throw invalid_input_error("coset representative has wrong shape");
        if (!is_unitary_symplectic(rep))
            throw invalid_input_error("coset representative is not in USp(2g)");
        for (const auto& params : probes) {
            Matrix conj = rep * element_matrix(component, params) * rep.adjoint();
            if (!in_torus_image(component, conj))
                throw invalid_input_error(
                    "coset representative does not normalize the identity component");
        }
    }
    for (std::size_t s = 0; s < k; ++s)
        for (std::size_t t = 0; t < k; ++t) {
            Matrix defect = coset_reps[pi0[s][t]].adjoint() * coset_reps[s] * coset_reps[t];
            if (!in_torus_image(component, defect))
                throw invalid_input_error(
                    "coset representatives are incompatible with the pi0 law");
        }
    return STModel{component, std::move(pi0), std::move(coset_reps)};
}

inline STModel connected_model(ComponentTag tag, int g) {
    IdentityComponent comp = make_component(tag, g);
    std::vector<Matrix> reps = {Matrix::Identity(2 * g, 2 * g)};
    return make_model(comp, trivial_pi0(), std::move(reps));
}

namespace detail {

/// 2x2 block [[0,1],[-1,0]] repeated along the diagonal on selected pairs.
inline Matrix phase_flip_rep(int g, const std::vector<bool>& flip) {
    Matrix r = Matrix::Zero(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        if (flip[static_cast<std::size_t>(i)]) {
            r(2 * i, 2 * i + 1) = 1.0;
            r(2 * i + 1, 2 * i) = -1.0;
        } else {
            r(2 * i, 2 * i) = 1.0;
            r(2 * i + 1, 2 * i + 1) = 1.0;
        }
    }
    return r;
}

inline Matrix pair_swap_rep() {
    Matrix r = Matrix::Zero(4, 4);
    r(0, 2) = 1.0;
    r(1, 3) = 1.0;
    r(2, 0) = 1.0;
    r(3, 1) = 1.0;
    return r;
}

}  // namespace detail

/// The normalizer of U(1) in SU(2): the circle plus the trace-free flip
/// coset.
inline STModel normalizer_u1_model() {
    auto comp = make_component(ComponentTag::U1, 1);
    Pi0Table z2 = {{0, 1}, {1, 0}};
    std::vector<Matrix> reps = {Matrix::Identity(2, 2), detail::phase_flip_rep(1, {true})};
    return make_model(comp, std::move(z2), std::move(reps));
}

/// Built-in coset representatives for the disconnected models produced by
/// the classification: the normalizer flip for U(1)-type components and
/// the factor swap for SU(2) x SU(2). Other component groups need
/// user-supplied representatives.
inline STModel build_st_model(const endo::GroupIdentification& ident) {
    IdentityComponent comp = make_component(ident.component, ident.g);
    const std::size_t k = ident.component_group.order();
    Pi0Table pi0 = ident.component_group.mul;
    if (k == 1)
        return make_model(comp, std::move(pi0),
                          {Matrix::Identity(2 * ident.g, 2 * ident.g)});
    if (k == 2) {
        Matrix rep;
        switch (ident.component) {
            case ComponentTag::U1:
            case ComponentTag::U1xU1:
                rep = detail::phase_flip_rep(ident.g, std::vector<bool>(ident.g, true));
                break;
            case ComponentTag::U1xSU2: {
                std::vector<bool> flip = {true, false};
                rep = detail::phase_flip_rep(ident.g, flip);
                break;
            }
            case ComponentTag::SU2xSU2:
                rep = detail::pair_swap_rep();
                break;
            default:
                throw embedding_error("no built-in coset representative for " + comp.name() +
                                      " with pi0 of order 2");
        }
        return make_model(comp, std::move(pi0),
                          {Matrix::Identity(2 * ident.g, 2 * ident.g), rep});
    }
    throw embedding_error("built-in representatives cover pi0 orders 1 and 2; supply " +
                          std::to_string(k) + " matrices explicitly");
}

// ---- sampling ---------------------------------------------------------------

struct HaarSample {
    Matrix matrix;
    std::size_t coset = 0;
};

/// Rejection envelope for the USp(4) eigenphase density over the uniform
/// box, fixed by contract for reproducibility.
inline constexpr double kUSp4Envelope = 16.0;
/// Envelope for USp(6); the density numerator peaks near 0.138.
inline constexpr double kUSp6Envelope = 0.2;

namespace detail {

inline std::vector<double> sample_params(const IdentityComponent& c, SplitMix64& rng) {
    auto su2_angle = [&rng]() {
        for (;;) {
            double t = kPi * rng.next_double();
            double s = std::sin(t);
            if (rng.next_double() <= s * s) return t;
        }
    };
    switch (c.tag) {
        case ComponentTag::U1:
            return {2.0 * kPi * rng.next_double()};
        case ComponentTag::SU2:
        case ComponentTag::SU2diag:
            return {su2_angle()};
        case ComponentTag::U1xU1:
            return {2.0 * kPi * rng.next_double(), 2.0 * kPi * rng.next_double()};
        case ComponentTag::U1xSU2:
            return {2.0 * kPi * rng.next_double(), su2_angle()};
        case ComponentTag::SU2xSU2:
            return {su2_angle(), su2_angle()};
        case ComponentTag::USp4:
            for (;;) {
                double t1 = kPi * rng.next_double();
                double t2 = kPi * rng.next_double();
                double c1 = std::cos(t1), c2 = std::cos(t2);
                double s1 = std::sin(t1), s2 = std::sin(t2);
                double f = (c1 - c2) * (c1 - c2) * s1 * s1 * s2 * s2;
                if (kUSp4Envelope * rng.next_double() <= f) return {t1, t2};
            }
        case ComponentTag::USp6:
            for (;;) {
                double t[3], cs[3], sn[3];
                for (int i = 0; i < 3; ++i) {
                    t[i] = kPi * rng.next_double();
                    cs[i] = std::cos(t[i]);
                    sn[i] = std::sin(t[i]);
                }
                double f = (cs[0] - cs[1]) * (cs[0] - cs[1]) * (cs[0] - cs[2]) *
                           (cs[0] - cs[2]) * (cs[1] - cs[2]) * (cs[1] - cs[2]) * sn[0] *
                           sn[0] * sn[1] * sn[1] * sn[2] * sn[2];
                if (kUSp6Envelope * rng.next_double() <= f) return {t[0], t[1], t[2]};
            }
    }
    throw embedding_error("unsupported component tag");
}

inline constexpr std::size_t kShardSize = 4096;

}  // namespace detail

/// n Haar samples, deterministic given the seed: sample i lives in shard
/// i / 4096, and each shard's stream depends only on (seed, shard index),
/// so runs of different lengths agree on their common prefix.
inline std::vector<HaarSample> sample(const STModel& model, std::uint64_t seed, std::size_t n) {
    if (n < 1) throw invalid_input_error("need n >= 1 samples");
    std::vector<HaarSample> out;
    out.reserve(n);
    const std::size_t k = model.pi0_order();
    for (std::size_t shard = 0; shard * detail::kShardSize < n; ++shard) {
        SplitMix64 rng(mix64(seed, shard));
        const std::size_t hi = std::min(n, (shard + 1) * detail::kShardSize);
        for (std::size_t i = shard * detail::kShardSize; i < hi; ++i) {
            std::size_t coset = k == 1 ? 0 : rng.next_below(k);
            auto params = detail::sample_params(model.component, rng);
            Matrix m = element_matrix(model.component, params);
            if (coset != 0) m = model.coset_reps[coset] * m;
            out.push_back({std::move(m), coset});
        }
    }
    return out;
}

/// First two characteristic-polynomial coefficients of a matrix in
/// USp(2g): a1 = -tr, a2 = (tr^2 - tr(M^2)) / 2.
inline std::pair<double, double> charpoly_a1_a2(const Matrix& m) {
    const Cplx tr = m.trace();
    const Cplx tr2 = (m * m).trace();
    return {-tr.real(), 0.5 * (tr * tr - tr2).real()};
}

/// Empirical moment report of a sample set; moments are accumulated with
/// compensated sums so partitioned reductions agree with serial ones.
inline MomentReport coefficient_stats(const std::vector<HaarSample>& samples,
                                      const std::string& source = "data") {
    if (samples.empty()) throw empty_sample_error("no samples to report on");
    const int g = static_cast<int>(samples[0].matrix.rows()) / 2;
    MomentReport r;
    r.source = source;
    r.genus = g;
    r.samples = samples.size();
    r.has_a2 = g >= 2;
    std::array<CompensatedSum, 9> acc1;
    std::array<CompensatedSum, 5> acc2;
    std::size_t zeros = 0;
    for (const auto& s : samples) {
        auto [a1, a2] = charpoly_a1_a2(s.matrix);
        double p = 1.0;
        for (int k = 1; k <= 8; ++k) {
            p *= a1;
            acc1[static_cast<std::size_t>(k)].add(p);
        }
        if (r.has_a2) {
            p = 1.0;
            for (int k = 1; k <= 4; ++k) {
                p *= a2;
                acc2[static_cast<std::size_t>(k)].add(p);
            }
        }
        if (std::abs(a1) < kTol) ++zeros;
    }
    const double n = static_cast<double>(samples.size());
    for (int k = 1; k <= 8; ++k) r.a1[static_cast<std::size_t>(k)] = acc1[static_cast<std::size_t>(k)].value() / n;
    if (r.has_a2)
        for (int k = 1; k <= 4; ++k) r.a2[static_cast<std::size_t>(k)] = acc2[static_cast<std::size_t>(k)].value() / n;
    r.zero_density = static_cast<double>(zeros) / n;
    return r;
}

// ---- exact moments -----------------------------------------------------------

namespace detail {

/// Per-pair trace law used on a coset: the component law itself, the
/// identically zero law (normalizer flip on a circle factor), or skip.
enum class BlockLaw { Component, Zero };

struct CosetPlan {
    bool abelian_matrix_path = false;   // integrate rep * element directly
    bool zero_trace = false;            // a1 identically zero on the coset
    bool a2_available = true;
    std::vector<BlockLaw> laws;         // per pair, for the block-diagonal path
};

inline bool is_zero_block(const Matrix& rep, int i, int j, double tol = kTol) {
    return std::abs(rep(2 * i, 2 * j)) <= tol && std::abs(rep(2 * i, 2 * j + 1)) <= tol &&
           std::abs(rep(2 * i + 1, 2 * j)) <= tol && std::abs(rep(2 * i + 1, 2 * j + 1)) <= tol;
}

inline bool is_block_diagonal(const Matrix& rep, int g) {
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            if (i != j && !is_zero_block(rep, i, j)) return false;
    return true;
}

inline bool block_is_diagonal_2x2(const Matrix& rep, int i, double tol = kTol) {
    return std::abs(rep(2 * i, 2 * i + 1)) <= tol && std::abs(rep(2 * i + 1, 2 * i)) <= tol;
}

/// Decides how a coset contributes to the exact moments. U(1)-type blocks
/// distinguish torus representatives (component law, by rotation
/// invariance) from normalizer flips (zero law); SU(2)-type blocks always
/// carry the component law because any fixed factor in SU(2) translates
/// Haar measure to itself.
inline CosetPlan plan_coset(const IdentityComponent& comp, const Matrix& rep) {
    CosetPlan plan;
    if (rep.isIdentity(kTol)) {
        plan.laws.assign(static_cast<std::size_t>(comp.g), BlockLaw::Component);
        return plan;
    }
    if (comp.tag == ComponentTag::U1 || comp.tag == ComponentTag::U1xU1) {
        plan.abelian_matrix_path = true;
        return plan;
    }
    const int g = comp.g;
    bool all_diag_blocks_zero = true;
    for (int i = 0; i < g; ++i)
        if (!is_zero_block(rep, i, i)) all_diag_blocks_zero = false;
    if (all_diag_blocks_zero) {
        plan.zero_trace = true;
        plan.a2_available = false;
        return plan;
    }
    if ((comp.tag == ComponentTag::U1xSU2 || comp.tag == ComponentTag::SU2xSU2) &&
        is_block_diagonal(rep, g)) {
        plan.laws.resize(static_cast<std::size_t>(g));
        for (int i = 0; i < g; ++i) {
            const bool su2_block = comp.tag == ComponentTag::SU2xSU2 ||
                                   (comp.tag == ComponentTag::U1xSU2 && i == 1);
            if (su2_block) {
                plan.laws[static_cast<std::size_t>(i)] = BlockLaw::Component;
            } else {
                plan.laws[static_cast<std::size_t>(i)] =
                    block_is_diagonal_2x2(rep, i) ? BlockLaw::Component : BlockLaw::Zero;
            }
        }
        return plan;
    }
    throw invalid_input_error(
        "exact moments are unavailable for this coset representative on " + comp.name());
}

inline constexpr int kQuadNodes = 64;  // exact for trig degree < 64

template <typename F>
void quad_grid(int dims, F&& body) {
    // uniform tensor grid over [0, 2pi)^dims; trapezoid = plain average
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    std::vector<double> theta(static_cast<std::size_t>(dims), 0.0);
    const double step = 2.0 * kPi / kQuadNodes;
    for (;;) {
        for (int d = 0; d < dims; ++d) theta[static_cast<std::size_t>(d)] = step * idx[static_cast<std::size_t>(d)];
        body(theta);
        int d = 0;
        while (d < dims && ++idx[static_cast<std::size_t>(d)] == kQuadNodes) {
            idx[static_cast<std::size_t>(d)] = 0;
            ++d;
        }
        if (d == dims) break;
    }
}

struct CosetMoments {
    std::array<double, 11> a1{};
    std::array<double, 11> a2{};
    bool zero_trace = false;
    bool a2_available = true;
};

inline CosetMoments integrate_coset(const IdentityComponent& comp, const Matrix& rep,
                                    const CosetPlan& plan, int k_max) {
    CosetMoments out;
    if (plan.zero_trace) {
        out.zero_trace = true;
        out.a2_available = false;
        return out;
    }
    const int dims = param_count(comp.tag);
    std::array<double, 11> acc1{};
    std::array<double, 11> acc2{};
    double norm = 0.0;
    double max_abs_a1 = 0.0;
    quad_grid(dims, [&](const std::vector<double>& theta) {
        const double w = weyl_density(comp, theta.data());
        if (w == 0.0) return;
        double a1, a2;
        if (plan.abelian_matrix_path) {
            Matrix m = rep * element_matrix(comp, theta);
            auto [x1, x2] = charpoly_a1_a2(m);
            a1 = x1;
            a2 = x2;
        } else {
            std::vector<double> phases(static_cast<std::size_t>(comp.g));
            pair_phases(comp, theta.data(), phases.data());
            double tsum = 0.0, cross = 0.0;
            std::vector<double> t(static_cast<std::size_t>(comp.g));
            for (int i = 0; i < comp.g; ++i)
                t[static_cast<std::size_t>(i)] =
                    plan.laws[static_cast<std::size_t>(i)] == BlockLaw::Component
                        ? 2.0 * std::cos(phases[static_cast<std::size_t>(i)])
                        : 0.0;
            for (int i = 0; i < comp.g; ++i) {
                tsum += t[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < comp.g; ++j)
                    cross += t[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(j)];
            }
            a1 = -tsum;
            a2 = static_cast<double>(comp.g) + cross;
        }
        max_abs_a1 = std::max(max_abs_a1, std::abs(a1));
        norm += w;
        double p1 = 1.0, p2 = 1.0;
        for (int k = 1; k <= k_max; ++k) {
            p1 *= a1;
            p2 *= a2;
            acc1[static_cast<std::size_t>(k)] += w * p1;
            acc2[static_cast<std::size_t>(k)] += w * p2;
        }
    });
    for (int k = 1; k <= k_max; ++k) {
        out.a1[static_cast<std::size_t>(k)] = acc1[static_cast<std::size_t>(k)] / norm;
        out.a2[static_cast<std::size_t>(k)] = acc2[static_cast<std::size_t>(k)] / norm;
    }
    if (max_abs_a1 < 1e-12) out.zero_trace = true;
    return out;
}

}  // namespace detail

/// Haar moments of a1 (and a2 for genus >= 2) by deterministic eigenphase
/// quadrature, averaged over the cosets. Identity-coset integrands are
/// trigonometric polynomials, so the 64-node periodic rule is exact to
/// rounding; the stated accuracy contract is 1e-6 absolute for g <= 2
/// models and 1e-3 for USp(6).
inline MomentReport exact_moments(const STModel& model, int k_max) {
    if (k_max < 1 || k_max > 10)
        throw invalid_input_error("exact moments support orders 1..10");
    const std::size_t k = model.pi0_order();
    MomentReport r;
    r.source = model.name();
    r.genus = model.component.g;
    r.samples = 0;
    r.has_a2 = model.component.g >= 2;
    std::size_t zero_cosets = 0;
    bool a2_ok = true;
    std::array<double, 11> m1{};
    std::array<double, 11> m2{};
    for (std::size_t c = 0; c < k; ++c) {
        auto plan = detail::plan_coset(model.component, model.coset_reps[c]);
        auto res = detail::integrate_coset(model.component, model.coset_reps[c], plan, k_max);
        if (res.zero_trace) ++zero_cosets;
        if (!res.a2_available) a2_ok = false;
        for (int i = 1; i <= k_max; ++i) {
            m1[static_cast<std::size_t>(i)] += res.a1[static_cast<std::size_t>(i)];
            m2[static_cast<std::size_t>(i)] += res.a2[static_cast<std::size_t>(i)];
        }
    }
    for (int i = 1; i <= std::min(k_max, 8); ++i)
        r.a1[static_cast<std::size_t>(i)] = m1[static_cast<std::size_t>(i)] / static_cast<double>(k);
    if (r.has_a2 && a2_ok)
        for (int i = 1; i <= std::min(k_max, 4); ++i)
            r.a2[static_cast<std::size_t>(i)] = m2[static_cast<std::size_t>(i)] / static_cast<double>(k);
    r.has_a2 = r.has_a2 && a2_ok;
    r.zero_density = static_cast<double>(zero_cosets) / static_cast<double>(k);
    return r;
}

}  // namespace satotate::st
