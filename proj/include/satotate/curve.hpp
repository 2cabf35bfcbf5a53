#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "satotate/errors.hpp"

namespace satotate::lpoly {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

/// Determinant by fraction-free (Bareiss) elimination.
inline BigInt bareiss_det(std::vector<std::vector<BigInt>> m) {
    const std::size_t n = m.size();
    BigInt prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t swap_row = k + 1;
            while (swap_row < n && m[swap_row][k] == 0) ++swap_row;
            if (swap_row == n) return 0;
            std::swap(m[k], m[swap_row]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return n == 0 ? BigInt(1) : BigInt(sign) * m[n - 1][n - 1];
}

/// Resultant of two integer polynomials via the Sylvester matrix.
inline BigInt resultant(const std::vector<BigInt>& f, const std::vector<BigInt>& g) {
    const std::size_t df = f.size() - 1, dg = g.size() - 1;
    const std::size_t n = df + dg;
    std::vector<std::vector<BigInt>> syl(n, std::vector<BigInt>(n, BigInt(0)));
    for (std::size_t i = 0; i < dg; ++i)
        for (std::size_t j = 0; j <= df; ++j) syl[i][i + j] = f[df - j];
    for (std::size_t i = 0; i < df; ++i)
        for (std::size_t j = 0; j <= dg; ++j) syl[dg + i][i + j] = g[dg - j];
    return bareiss_det(std::move(syl));
}

}  // namespace detail

/// Discriminant of an integer polynomial (coefficients in increasing degree).
inline BigInt poly_discriminant(const std::vector<std::int64_t>& coeffs) {
    const std::size_t d = coeffs.size() - 1;
    std::vector<BigInt> f(coeffs.begin(), coeffs.end());
    std::vector<BigInt> fp(d);
    for (std::size_t i = 1; i <= d; ++i) fp[i - 1] = BigInt(i) * f[i];
    while (fp.size() > 1 && fp.back() == 0) fp.pop_back();
    if (fp.size() == 1 && fp[0] == 0) return 0;
    BigInt res = detail::resultant(f, fp);
    BigInt disc = res / f[d];
    if ((d * (d - 1) / 2) % 2 == 1) disc = -disc;
    return disc;
}

/// Hyperelliptic model y^2 = f(x) with f squarefree over the integers,
/// deg f in {2g+1, 2g+2} and g in {1, 2, 3}.
class CurveSpec {
public:
    /// coeffs[i] is the coefficient of x^i.
    explicit CurveSpec(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
        while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
        const std::size_t deg = coeffs_.size() - 1;
        if (coeffs_.empty() || deg < 3 || deg > 8)
            throw invalid_curve_error("deg f must be between 3 and 8");
        genus_ = static_cast<int>((deg - 1) / 2);
        disc_ = poly_discriminant(coeffs_);
        if (disc_ == 0)
            throw invalid_curve_error("f must be squarefree (disc = 0)");
    }

    int genus() const { return genus_; }
    std::size_t degree() const { return coeffs_.size() - 1; }
    std::int64_t leading_coeff() const { return coeffs_.back(); }
    const std::vector<std::int64_t>& coeffs() const { return coeffs_; }
    const BigInt& discriminant() const { return disc_; }

    bool good_reduction(std::int64_t p) const {
        return disc_ % p != 0 && leading_coeff() % p != 0;
    }

    /// Canonical form "y^2=<c>*x^<d>+..." with nonzero terms in decreasing
    /// degree. Cache headers depend on this string byte for byte.
    std::string canonical_string() const {
        std::string out = "y^2=";
        bool first = true;
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            std::int64_t c = coeffs_[i];
            if (c == 0) continue;
            if (!first && c > 0) out += '+';
            out += std::to_string(c);
            out += "*x^";
            out += std::to_string(i);
            first = false;
        }
        return out;
    }

private:
    std::vector<std::int64_t> coeffs_;
    int genus_ = 0;
    BigInt disc_;
};

/// Parses "y^2=x^3+x", "x^3 - x + 1", or the canonical form above.
inline CurveSpec parse_curve(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.rfind("y^2=", 0) == 0) s = s.substr(4);
    else if (s.rfind("y2=", 0) == 0) s = s.substr(3);
    if (s.empty()) throw invalid_curve_error("empty curve expression");

    std::vector<std::int64_t> coeffs;
    auto add_term = [&coeffs](std::int64_t c, std::size_t d) {
        if (coeffs.size() <= d) coeffs.resize(d + 1, 0);
        coeffs[d] += c;
    };

    std::size_t i = 0;
    while (i < s.size()) {
        std::int64_t sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            if (s[i] == '-') sign = -1;
            ++i;
        }
        std::int64_t coef = 1;
        bool saw_digits = false;
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) {
            coef = std::stoll(s.substr(start, i - start));
            saw_digits = true;
        }
        if (i < s.size() && s[i] == '*') ++i;
        std::size_t deg = 0;
        if (i < s.size() && s[i] == 'x') {
            ++i;
            deg = 1;
            if (i < s.size() && s[i] == '^') {
                ++i;
                std::size_t dstart = i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                if (i == dstart) throw invalid_curve_error("missing exponent in: " + text);
                deg = static_cast<std::size_t>(std::stoull(s.substr(dstart, i - dstart)));
            }
        } else if (!saw_digits) {
            throw invalid_curve_error("cannot parse curve term in: " + text);
        }
        add_term(sign * coef, deg);
    }
    return CurveSpec(coeffs);
}

}  // namespace satotate::lpoly
