#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>

#include "satotate/errors.hpp"

namespace satotate {

/// Neumaier-compensated accumulator. Partitioned accumulation stays
/// order-independent to well below 1e-12 for desk-scale magnitudes, so
/// parallel and serial reductions agree.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    void merge(const CompensatedSum& other) {
        add(other.sum_);
        comp_ += other.comp_;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Moment profile of the normalized coefficient a1 (orders 1..8) and, for
/// genus >= 2, a2 (orders 1..4), plus the density of exact zeros of a1.
/// Empirical reports carry jackknife variance estimates of each entry.
struct MomentReport {
    std::string source = "data";  // "<tag>/<pi0 order>" for model profiles
    int genus = 1;
    std::size_t samples = 0;
    std::array<double, 9> a1{};  // a1[k] = M_k, k = 1..8
    bool has_a2 = false;
    std::array<double, 5> a2{};  // a2[k] = M_k, k = 1..4
    double zero_density = 0.0;

    bool has_variance = false;
    std::array<double, 9> a1_var{};
    std::array<double, 5> a2_var{};
    double zero_density_var = 0.0;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Key-value lines "group=<source> coeff=a<i> k=<k> moment=<decimal>"
/// followed by the zero density and sample count.
inline std::string report_to_string(const MomentReport& r) {
    std::string out;
    for (int k = 1; k <= 8; ++k)
        out += "group=" + r.source + " coeff=a1 k=" + std::to_string(k) +
               " moment=" + detail::fmt_double(r.a1[static_cast<std::size_t>(k)]) + "\n";
    if (r.has_a2)
        for (int k = 1; k <= 4; ++k)
            out += "group=" + r.source + " coeff=a2 k=" + std::to_string(k) +
                   " moment=" + detail::fmt_double(r.a2[static_cast<std::size_t>(k)]) + "\n";
    out += "group=" + r.source + " zero_density=" + detail::fmt_double(r.zero_density) + "\n";
    out += "group=" + r.source + " samples=" + std::to_string(r.samples) + "\n";
    return out;
}

inline MomentReport parse_report(std::istream& in) {
    MomentReport r;
    r.genus = 1;
    std::string line;
    bool saw_any = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::string coeff;
        int k = -1;
        double moment = 0.0;
        bool has_moment = false;
        while (ss >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw invalid_input_error("bad report token: " + tok);
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "group") r.source = val;
            else if (key == "coeff") coeff = val;
            else if (key == "k") k = std::stoi(val);
            else if (key == "moment") { moment = std::stod(val); has_moment = true; }
            else if (key == "zero_density") r.zero_density = std::stod(val);
            else if (key == "samples") r.samples = std::stoul(val);
            else throw invalid_input_error("unknown report key: " + key);
        }
        saw_any = true;
        if (has_moment) {
            if (coeff == "a1" && k >= 1 && k <= 8) r.a1[static_cast<std::size_t>(k)] = moment;
            else if (coeff == "a2" && k >= 1 && k <= 4) {
                r.a2[static_cast<std::size_t>(k)] = moment;
                r.has_a2 = true;
                r.genus = 2;
            } else {
                throw invalid_input_error("bad report line: " + line);
            }
        }
    }
    if (!saw_any) throw invalid_input_error("empty moment report");
    return r;
}

}  // namespace satotate
