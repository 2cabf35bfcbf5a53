#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "satotate/curve.hpp"
#include "satotate/errors.hpp"
#include "satotate/ff.hpp"

// Point counts over F_p and F_{p^2} and the Frobenius characteristic
// polynomials they determine. Polynomial values over a full line are
// produced by forward differences (additions only); the quadratic
// character is a table lookup.

namespace satotate::lpoly {

/// Monic integer characteristic polynomial of Frobenius,
/// P(T) = T^{2g} + c[2g-1] T^{2g-1} + ... + c[0].
struct FrobPoly {
    std::int64_t p = 0;
    int genus = 0;
    std::vector<std::int64_t> c;  // c[0..2g], c[2g] = 1
};

/// Real coefficients of p^{-g} P(sqrt(p) T). Only a[1..g] are stored; the
/// lower half is forced by the weight-1 functional equation. trace_only
/// marks genus-3 entries where only a1 is available.
struct NormalizedPoly {
    int genus = 0;
    bool trace_only = false;
    std::array<double, 4> a{};  // a[k] for k = 1..genus

    double a1() const { return a[1]; }
    double a2() const { return a[2]; }

    /// All 2g+1 coefficients, highest degree first.
    std::vector<double> coefficients() const {
        const int n = 2 * genus;
        std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
        out[0] = 1.0;
        for (int k = 1; k <= genus; ++k) {
            out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)];
            out[static_cast<std::size_t>(n - k)] = a[static_cast<std::size_t>(k)];
        }
        out[static_cast<std::size_t>(n)] = 1.0;
        return out;
    }
};

namespace detail {

/// Barrett reduction for a fixed odd modulus; avoids hardware division in
/// the enumeration loops. Valid for inputs below 2^63.
struct FastMod {
    std::uint64_t p;
    std::uint64_t m;  // floor(2^64 / p)

    explicit FastMod(std::int64_t prime)
        : p(static_cast<std::uint64_t>(prime)),
          m(static_cast<std::uint64_t>(~std::uint64_t(0) / static_cast<std::uint64_t>(prime))) {}

    std::uint64_t reduce(std::uint64_t a) const {
        std::uint64_t q = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(a) * m) >> 64);
        std::uint64_t r = a - q * p;
        if (r >= p) r -= p;
        return r;
    }

    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return reduce(a * b); }
};

/// Forward-difference table for evaluating f over x = 0, 1, 2, ... mod p.
/// next() costs deg(f) modular additions.
class ForwardDifferences {
public:
    ForwardDifferences(const std::vector<std::int64_t>& coeffs, std::int64_t p)
        : p_(static_cast<std::uint64_t>(p)) {
        const std::size_t d = coeffs.size() - 1;
        FastMod fm(p);
        // f(0..d), then iterated differences.
        std::vector<std::uint64_t> vals(d + 1);
        for (std::size_t x = 0; x <= d; ++x) {
            std::uint64_t acc = 0;
            for (std::size_t i = coeffs.size(); i-- > 0;) {
                acc = fm.mul(acc, x % p_);
                acc += static_cast<std::uint64_t>(ff::mod_reduce(coeffs[i], p));
                if (acc >= p_) acc -= p_;
            }
            vals[x] = acc;
        }
        diffs_ = vals;
        for (std::size_t level = 1; level <= d; ++level)
            for (std::size_t i = d; i >= level; --i)
                diffs_[i] = (diffs_[i] + p_ - diffs_[i - 1]) % p_;
    }

    /// Value at the current point, then advances to the next one.
    std::uint64_t next() {
        std::uint64_t v = diffs_[0];
        for (std::size_t i = 0; i + 1 < diffs_.size(); ++i) {
            diffs_[i] += diffs_[i + 1];
            if (diffs_[i] >= p_) diffs_[i] -= p_;
        }
        return v;
    }

private:
    std::uint64_t p_;
    std::vector<std::uint64_t> diffs_;
};

inline void check_good_reduction(const CurveSpec& curve, std::int64_t p) {
    ff::check_modulus(p);
    if (!curve.good_reduction(p))
        throw bad_reduction_error("bad reduction at p = " + std::to_string(p));
}

}  // namespace detail

/// Number of projective points of the smooth model over F_p:
/// sum over x of (1 + chi(f(x))), plus 1 point at infinity for odd degree
/// or 1 + chi(lead f) for even degree.
inline std::int64_t count_points(const CurveSpec& curve, std::int64_t p) {
    detail::check_good_reduction(curve, p);
    std::vector<std::uint8_t> squares;
    ff::square_table(p, squares);
    detail::ForwardDifferences fd(curve.coeffs(), p);
    std::int64_t chi_sum = 0;
    for (std::int64_t x = 0; x < p; ++x)
        chi_sum += ff::chi_from_table(squares, static_cast<std::int64_t>(fd.next()));
    std::int64_t n = p + chi_sum;
    if (curve.degree() % 2 == 1)
        n += 1;
    else
        n += 1 + ff::chi_from_table(squares, ff::mod_reduce(curve.leading_coeff(), p));
    return n;
}

/// Number of points over F_{p^2}, by exhaustive x-enumeration. For table
/// sizes beyond memory reach this falls back to per-point square tests.
inline std::int64_t count_points_p2(const CurveSpec& curve, std::int64_t p) {
    detail::check_good_reduction(curve, p);
    const std::int64_t n = ff::find_nonresidue(p);
    const std::size_t q = static_cast<std::size_t>(p) * static_cast<std::size_t>(p);
    detail::FastMod fm(p);
    const std::uint64_t up = static_cast<std::uint64_t>(p);
    const std::uint64_t un = static_cast<std::uint64_t>(n);

    // Reduced coefficients, constant term first.
    std::vector<std::uint64_t> cf(curve.coeffs().size());
    for (std::size_t i = 0; i < cf.size(); ++i)
        cf[i] = static_cast<std::uint64_t>(ff::mod_reduce(curve.coeffs()[i], p));

    const bool use_table = p <= 4096;
    std::vector<std::uint8_t> sq;
    if (use_table) {
        // Mark (a + b s)^2 = a^2 + n b^2 + 2ab s for every element.
        sq.assign(q, 0);
        sq[0] = 2;
        for (std::uint64_t a = 0; a < up; ++a) {
            const std::uint64_t a2 = fm.mul(a, a);
            const std::uint64_t two_a = (2 * a) % up;
            for (std::uint64_t b = 0; b < up; ++b) {
                std::uint64_t re = a2 + fm.mul(un, fm.mul(b, b));
                if (re >= up) re -= up;
                std::uint64_t im = fm.mul(two_a, b);
                sq[static_cast<std::size_t>(re) * up + im] = 1;
            }
        }
        sq[0] = 2;
    }

    std::int64_t chi_sum = 0;
    const std::size_t d = cf.size() - 1;
    // x = xa + xb s; for fixed xb, f(x) along xa = 0..p-1 by forward
    // differences in F_{p^2} (component-wise additions).
    std::vector<std::uint64_t> dre(d + 1), dim(d + 1);
    for (std::uint64_t xb = 0; xb < up; ++xb) {
        // Horner evaluations at xa = 0..d seed the difference tables.
        std::vector<std::uint64_t> vre(d + 1), vim(d + 1);
        for (std::uint64_t xa = 0; xa <= d; ++xa) {
            std::uint64_t re = 0, im = 0;
            for (std::size_t i = cf.size(); i-- > 0;) {
                // (re + im s)(xa + xb s) + c_i
                std::uint64_t nre = fm.reduce(fm.mul(re, xa % up) + fm.mul(un, fm.mul(im, xb)));
                std::uint64_t nim = fm.reduce(fm.mul(re, xb) + fm.mul(im, xa % up));
                re = nre + cf[i];
                if (re >= up) re -= up;
                im = nim;
            }
            vre[static_cast<std::size_t>(xa)] = re;
            vim[static_cast<std::size_t>(xa)] = im;
        }
        dre = vre;
        dim = vim;
        for (std::size_t level = 1; level <= d; ++level)
            for (std::size_t i = d; i >= level; --i) {
                dre[i] = (dre[i] + up - dre[i - 1]) % up;
                dim[i] = (dim[i] + up - dim[i - 1]) % up;
            }
        for (std::uint64_t xa = 0; xa < up; ++xa) {
            const std::uint64_t re = dre[0], im = dim[0];
            for (std::size_t i = 0; i + 1 <= d; ++i) {
                dre[i] += dre[i + 1];
                if (dre[i] >= up) dre[i] -= up;
                dim[i] += dim[i + 1];
                if (dim[i] >= up) dim[i] -= up;
            }
            if (use_table) {
                std::uint8_t t = sq[static_cast<std::size_t>(re) * up + im];
                chi_sum += (t == 2) ? 0 : (t == 1 ? 1 : -1);
            } else {
                ff::Fp2 v{p, n, static_cast<std::int64_t>(re), static_cast<std::int64_t>(im)};
                if (ff::fp2_is_zero(v))
                    continue;
                chi_sum += ff::fp2_is_square(v) ? 1 : -1;
            }
        }
    }

    std::int64_t total = static_cast<std::int64_t>(q) + chi_sum;
    if (curve.degree() % 2 == 1) {
        total += 1;
    } else {
        ff::Fp2 lead{p, n, ff::mod_reduce(curve.leading_coeff(), p), 0};
        total += fp2_is_zero(lead) ? 1 : (ff::fp2_is_square(lead) ? 2 : 0);
    }
    return total;
}

/// Genus-2 assembly from the two power sums t1 = p+1-N1, t2 = p^2+1-N2.
/// Exposed separately so the parity guard can be exercised directly.
inline FrobPoly frob_poly_g2_from_counts(std::int64_t p, std::int64_t n1, std::int64_t n2) {
    const std::int64_t t1 = p + 1 - n1;
    const std::int64_t t2 = p * p + 1 - n2;
    if ((t1 * t1 - t2) % 2 != 0)
        throw inconsistency_error("parity failure assembling genus-2 L-factor at p = " +
                                  std::to_string(p));
    FrobPoly out;
    out.p = p;
    out.genus = 2;
    out.c.resize(5);
    out.c[4] = 1;
    out.c[3] = -t1;
    out.c[2] = (t1 * t1 - t2) / 2;
    out.c[1] = p * out.c[3];
    out.c[0] = p * p;
    return out;
}

inline FrobPoly frob_poly(const CurveSpec& curve, std::int64_t p) {
    detail::check_good_reduction(curve, p);
    if (curve.genus() == 1) {
        const std::int64_t ap = p + 1 - count_points(curve, p);
        FrobPoly out;
        out.p = p;
        out.genus = 1;
        out.c = {p, -ap, 1};
        return out;
    }
    if (curve.genus() == 2)
        return frob_poly_g2_from_counts(p, count_points(curve, p), count_points_p2(curve, p));
    throw unsupported_genus_error("genus 3 needs F_{p^3} counts; only trace statistics are available");
}

inline NormalizedPoly normalize(const FrobPoly& poly) {
    NormalizedPoly out;
    out.genus = poly.genus;
    const double sp = std::sqrt(static_cast<double>(poly.p));
    // a_k = c_{2g-k} p^{-k/2}
    double scale = 1.0;
    for (int k = 1; k <= poly.genus; ++k) {
        scale /= sp;
        out.a[static_cast<std::size_t>(k)] =
            static_cast<double>(poly.c[static_cast<std::size_t>(2 * poly.genus - k)]) * scale;
    }
    return out;
}

inline std::int64_t binomial(int n, int k) {
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Weil bound |c_k| <= binom(2g,k) p^{(2g-k)/2}, tested exactly as
/// c_k^2 <= binom^2 p^{2g-k}.
inline bool weil_bound_ok(const FrobPoly& poly) {
    const int n = 2 * poly.genus;
    for (int k = 0; k <= n; ++k) {
        BigInt lhs = BigInt(poly.c[static_cast<std::size_t>(k)]);
        lhs *= lhs;
        BigInt b(binomial(n, k));
        BigInt rhs = b * b;
        for (int i = 0; i < n - k; ++i) rhs *= poly.p;
        if (lhs > rhs) return false;
    }
    return true;
}

/// Self-reciprocity c_k = p^{g-k} c_{2g-k} for k = 0..g, exactly.
inline bool functional_equation_ok(const FrobPoly& poly) {
    for (int k = 0; k <= poly.genus; ++k) {
        BigInt rhs(poly.c[static_cast<std::size_t>(2 * poly.genus - k)]);
        for (int i = 0; i < poly.genus - k; ++i) rhs *= poly.p;
        if (BigInt(poly.c[static_cast<std::size_t>(k)]) != rhs) return false;
    }
    return true;
}

struct ApEntry {
    std::int64_t p;
    NormalizedPoly norm;
};

struct ApSequence {
    int genus = 0;
    std::vector<ApEntry> entries;
    std::vector<std::int64_t> skipped;  // odd bad primes <= bound
};

struct FrobSequence {
    int genus = 0;
    std::vector<FrobPoly> entries;
    std::vector<std::int64_t> skipped;
};

/// Integer L-factor data for every good odd prime up to the bound; bad
/// primes are skipped and reported, never imputed. Counting fans out over
/// `threads` workers; assembly is ordered regardless of completion order.
inline FrobSequence frob_sequence(const CurveSpec& curve, std::int64_t bound,
                                  unsigned threads = 1) {
    if (curve.genus() == 3)
        throw unsupported_genus_error("genus 3 supports trace-only sequences");
    FrobSequence out;
    out.genus = curve.genus();
    const auto primes = ff::odd_primes_up_to(bound);
    std::vector<std::int64_t> good;
    for (std::int64_t p : primes) {
        if (curve.good_reduction(p))
            good.push_back(p);
        else
            out.skipped.push_back(p);
    }
    out.entries.resize(good.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < good.size(); ++i)
            out.entries[i] = frob_poly(curve, good[i]);
        return out;
    }
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> cursor{0};
    for (unsigned t = 0; t < threads; ++t)
        jobs.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= good.size()) return;
                out.entries[i] = frob_poly(curve, good[i]);
            }
        }));
    for (auto& j : jobs) j.get();
    return out;
}

/// Trace-only sequence: a1 = (N1 - p - 1)/sqrt(p); this is the only path
/// available at genus 3.
inline ApSequence ap_sequence_trace_only(const CurveSpec& curve, std::int64_t bound) {
    ApSequence out;
    out.genus = curve.genus();
    for (std::int64_t p : ff::odd_primes_up_to(bound)) {
        if (!curve.good_reduction(p)) {
            out.skipped.push_back(p);
            continue;
        }
        const std::int64_t t1 = p + 1 - count_points(curve, p);
        NormalizedPoly norm;
        norm.genus = curve.genus();
        norm.trace_only = true;
        norm.a[1] = -static_cast<double>(t1) / std::sqrt(static_cast<double>(p));
        out.entries.push_back({p, norm});
    }
    return out;
}

inline ApSequence ap_sequence(const CurveSpec& curve, std::int64_t bound,
                              bool trace_only = false, unsigned threads = 1) {
    if (trace_only || curve.genus() == 3) return ap_sequence_trace_only(curve, bound);
    FrobSequence frob = frob_sequence(curve, bound, threads);
    ApSequence out;
    out.genus = frob.genus;
    out.skipped = frob.skipped;
    for (const auto& f : frob.entries) out.entries.push_back({f.p, normalize(f)});
    return out;
}

// ---- a_p cache file format ----------------------------------------------
// Header "# curve=<canonical> g=<g>", then one line "p,c_{2g-1},...,c_0"
// per good prime, sorted by p. Round-trips bit-exactly.

struct ApCache {
    std::string curve_canonical;
    int genus = 0;
    std::vector<FrobPoly> entries;
};

inline std::string cache_header(const CurveSpec& curve) {
    return "# curve=" + curve.canonical_string() + " g=" + std::to_string(curve.genus());
}

inline std::string cache_to_string(const CurveSpec& curve, const std::vector<FrobPoly>& entries) {
    std::string out = cache_header(curve) + "\n";
    for (const auto& e : entries) {
        out += std::to_string(e.p);
        for (int k = 2 * e.genus - 1; k >= 0; --k) {
            out += ',';
            out += std::to_string(e.c[static_cast<std::size_t>(k)]);
        }
        out += '\n';
    }
    return out;
}

inline void write_cache(const std::string& path, const CurveSpec& curve,
                        const std::vector<FrobPoly>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input_error("cannot write cache file: " + path);
    out << cache_to_string(curve, entries);
}

inline ApCache parse_cache(std::istream& in) {
    ApCache cache;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# curve=", 0) != 0)
        throw invalid_input_error("cache file missing header");
    const auto gpos = line.rfind(" g=");
    if (gpos == std::string::npos) throw invalid_input_error("cache header missing genus");
    cache.curve_canonical = line.substr(8, gpos - 8);
    cache.genus = std::stoi(line.substr(gpos + 3));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::int64_t> vals;
        while (std::getline(ss, field, ',')) vals.push_back(std::stoll(field));
        if (vals.size() != static_cast<std::size_t>(2 * cache.genus) + 1)
            throw invalid_input_error("cache line has wrong arity: " + line);
        FrobPoly f;
        f.p = vals[0];
        f.genus = cache.genus;
        f.c.resize(static_cast<std::size_t>(2 * cache.genus) + 1);
        f.c[static_cast<std::size_t>(2 * cache.genus)] = 1;
        for (int k = 2 * cache.genus - 1; k >= 0; --k)
            f.c[static_cast<std::size_t>(k)] = vals[static_cast<std::size_t>(2 * cache.genus - k)];
        cache.entries.push_back(std::move(f));
    }
    return cache;
}

inline ApCache read_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input_error("cannot read cache file: " + path);
    return parse_cache(in);
}

}  // namespace satotate::lpoly
