#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satotate/errors.hpp"
#include "satotate/lpoly.hpp"
#include "satotate/moments.hpp"
#include "satotate/st_group.hpp"

// Empirical moment statistics of normalized Frobenius data and the
// comparison against candidate Sato-Tate groups.

namespace satotate::stats {

inline constexpr int kJackknifeBlocks = 20;

namespace detail {

struct Accumulators {
    std::array<CompensatedSum, 9> a1;
    std::array<CompensatedSum, 5> a2;
    CompensatedSum zeros;
    std::size_t count = 0;

    void add(const lpoly::NormalizedPoly& poly, bool with_a2) {
        double p = 1.0;
        for (int k = 1; k <= 8; ++k) {
            p *= poly.a1();
            a1[static_cast<std::size_t>(k)].add(p);
        }
        if (with_a2) {
            p = 1.0;
            for (int k = 1; k <= 4; ++k) {
                p *= poly.a2();
                a2[static_cast<std::size_t>(k)].add(p);
            }
        }
        if (std::abs(poly.a1()) < 1e-9) zeros.add(1.0);
        ++count;
    }
};

}  // namespace detail

/// Plain moment averages of a1 (and a2 for genus >= 2 full entries), the
/// exact-zero density, and jackknife variance estimates over 20 contiguous
/// blocks (deterministic given the input order).
inline MomentReport empirical_moments(const std::vector<lpoly::ApEntry>& aps,
                                      const std::string& source = "data") {
    if (aps.empty()) throw empty_sample_error("no normalized polynomials to average");
    const int genus = aps[0].norm.genus;
    bool with_a2 = genus >= 2;
    for (const auto& e : aps)
        if (e.norm.trace_only) with_a2 = false;

    const std::size_t n = aps.size();
    const std::size_t blocks = n >= kJackknifeBlocks ? kJackknifeBlocks : 0;
    std::vector<detail::Accumulators> per_block(blocks ? blocks : 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t b = blocks ? std::min(i * blocks / n, blocks - 1) : 0;
        per_block[b].add(aps[i].norm, with_a2);
    }

    detail::Accumulators total;
    for (const auto& blk : per_block) {
        for (int k = 1; k <= 8; ++k) total.a1[static_cast<std::size_t>(k)].merge(blk.a1[static_cast<std::size_t>(k)]);
        for (int k = 1; k <= 4; ++k) total.a2[static_cast<std::size_t>(k)].merge(blk.a2[static_cast<std::size_t>(k)]);
        total.zeros.merge(blk.zeros);
        total.count += blk.count;
    }

    MomentReport r;
    r.source = source;
    r.genus = genus;
    r.samples = n;
    r.has_a2 = with_a2;
    const double dn = static_cast<double>(n);
    for (int k = 1; k <= 8; ++k) r.a1[static_cast<std::size_t>(k)] = total.a1[static_cast<std::size_t>(k)].value() / dn;
    if (with_a2)
        for (int k = 1; k <= 4; ++k) r.a2[static_cast<std::size_t>(k)] = total.a2[static_cast<std::size_t>(k)].value() / dn;
    r.zero_density = total.zeros.value() / dn;

    if (blocks) {
        r.has_variance = true;
        auto jackknife = [&](auto stat_sum, double full_mean) {
            // leave-one-block-out means
            std::vector<double> loo(blocks);
            double avg = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) {
                const double nb = static_cast<double>(per_block[b].count);
                loo[b] = (full_mean * dn - stat_sum(per_block[b])) / (dn - nb);
                avg += loo[b];
            }
            avg /= static_cast<double>(blocks);
            double var = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) var += (loo[b] - avg) * (loo[b] - avg);
            return var * (static_cast<double>(blocks) - 1.0) / static_cast<double>(blocks);
        };
        for (int k = 1; k <= 8; ++k)
            r.a1_var[static_cast<std::size_t>(k)] = jackknife(
                [k](const detail::Accumulators& a) { return a.a1[static_cast<std::size_t>(k)].value(); },
                r.a1[static_cast<std::size_t>(k)]);
        if (with_a2)
            for (int k = 1; k <= 4; ++k)
                r.a2_var[static_cast<std::size_t>(k)] = jackknife(
                    [k](const detail::Accumulators& a) { return a.a2[static_cast<std::size_t>(k)].value(); },
                    r.a2[static_cast<std::size_t>(k)]);
        r.zero_density_var = jackknife(
            [](const detail::Accumulators& a) { return a.zeros.value(); }, r.zero_density);
    }
    return r;
}

struct MatchVerdict {
    std::string best;
    bool decisive = false;
    std::vector<std::pair<std::string, double>> scores;  // candidate order
};

/// Sum of squared deviations of the report from each candidate's exact
/// profile (a1 orders 2, 4, 6; a2 orders 1, 2 when present on both sides;
/// zero density), weighted by inverse estimated variance. Decisive when
/// the best score is below half of the second best.
inline MatchVerdict match(const MomentReport& report, const std::vector<st::STModel>& candidates) {
    if (candidates.size() < 2)
        throw invalid_input_error("match needs at least two candidate groups");
    if (report.samples < 100)
        throw insufficient_data_error("need at least 100 samples, have " +
                                      std::to_string(report.samples));
    auto weight = [&](double var) { return 1.0 / (var + 1e-9); };
    MatchVerdict verdict;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& model = candidates[i];
        if (2 * model.component.g != 2 * report.genus)
            throw invalid_input_error("candidate genus does not match the data");
        MomentReport prof = st::exact_moments(model, 6);
        double score = 0;
        for (int k = 2; k <= 6; k += 2) {
            const double d = report.a1[static_cast<std::size_t>(k)] - prof.a1[static_cast<std::size_t>(k)];
            const double w = report.has_variance ? weight(report.a1_var[static_cast<std::size_t>(k)]) : 1.0;
            score += w * d * d;
        }
        if (report.genus >= 2 && report.has_a2 && prof.has_a2) {
            for (int k = 1; k <= 2; ++k) {
                const double d = report.a2[static_cast<std::size_t>(k)] - prof.a2[static_cast<std::size_t>(k)];
                const double w = report.has_variance ? weight(report.a2_var[static_cast<std::size_t>(k)]) : 1.0;
                score += w * d * d;
            }
        }
        {
            const double d = report.zero_density - prof.zero_density;
            const double w = report.has_variance ? weight(report.zero_density_var) : 1.0;
            score += w * d * d;
        }
        verdict.scores.emplace_back(model.name(), score);
    }
    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < verdict.scores.size(); ++i)
        if (verdict.scores[i].second < verdict.scores[best_idx].second) best_idx = i;
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < verdict.scores.size(); ++i)
        if (i != best_idx) second = std::min(second, verdict.scores[i].second);
    verdict.best = verdict.scores[best_idx].first;
    verdict.decisive = verdict.scores[best_idx].second < 0.5 * second;
    return verdict;
}

/// Assignment of primes to component-group labels; must cover every prime
/// it is asked about.
using SplitRule = std::function<std::optional<std::string>(std::int64_t)>;

/// Residue-class rule p mod m -> label "r<residue>".
inline SplitRule mod_rule(std::int64_t m) {
    return [m](std::int64_t p) -> std::optional<std::string> {
        return "r" + std::to_string(p % m);
    };
}

/// Partitions the sequence by coset label and reports per-coset moments.
inline std::map<std::string, MomentReport> component_split(
    const std::vector<lpoly::ApEntry>& aps, const SplitRule& rule) {
    std::map<std::string, std::vector<lpoly::ApEntry>> groups;
    for (const auto& e : aps) {
        auto label = rule(e.p);
        if (!label)
            throw incomplete_rule_error("splitting rule does not cover p = " +
                                        std::to_string(e.p));
        groups[*label].push_back(e);
    }
    std::map<std::string, MomentReport> out;
    for (auto& [label, entries] : groups) out.emplace(label, empirical_moments(entries, label));
    return out;
}

// ---- exports ----------------------------------------------------------------

struct Histogram {
    double lo = 0, hi = 0;
    std::vector<std::int64_t> counts;
};

/// 50 bins over [-2g, 2g]; boundary values land in the last bin.
inline Histogram a1_histogram(const std::vector<lpoly::ApEntry>& aps, int genus) {
    Histogram h;
    h.lo = -2.0 * genus;
    h.hi = 2.0 * genus;
    h.counts.assign(50, 0);
    const double width = (h.hi - h.lo) / 50.0;
    for (const auto& e : aps) {
        int bin = static_cast<int>((e.norm.a1() - h.lo) / width);
        if (bin < 0) bin = 0;
        if (bin > 49) bin = 49;
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

inline std::string histogram_to_csv(const Histogram& h) {
    std::string out;
    const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += satotate::detail::fmt_double(h.lo + width * static_cast<double>(i));
        out += ',';
        out += satotate::detail::fmt_double(h.lo + width * static_cast<double>(i + 1));
        out += ',';
        out += std::to_string(h.counts[i]);
        out += '\n';
    }
    return out;
}

/// Machine-readable verdict: one summary line plus a score table.
inline std::string verdict_to_string(const MatchVerdict& v) {
    std::string out = "best=" + v.best + " decisive=" + (v.decisive ? "1" : "0") + "\n";
    for (const auto& [name, score] : v.scores)
        out += "score " + name + " " + satotate::detail::fmt_double(score) + "\n";
    return out;
}

/// Genus-derived default candidate sets for the comparison pipeline.
inline std::vector<st::STModel> default_candidates(int genus) {
    using endo::ComponentTag;
    std::vector<st::STModel> out;
    if (genus == 1) {
        out.push_back(st::connected_model(ComponentTag::U1, 1));
        out.push_back(st::normalizer_u1_model());
        out.push_back(st::connected_model(ComponentTag::SU2, 1));
    } else if (genus == 2) {
        out.push_back(st::connected_model(ComponentTag::USp4, 2));
        out.push_back(st::connected_model(ComponentTag::SU2xSU2, 2));
        out.push_back(st::connected_model(ComponentTag::U1xSU2, 2));
        out.push_back(st::connected_model(ComponentTag::U1xU1, 2));
        out.push_back(st::connected_model(ComponentTag::SU2diag, 2));
    } else if (genus == 3) {
        out.push_back(st::connected_model(ComponentTag::USp6, 3));
        out.push_back(st::connected_model(ComponentTag::SU2diag, 3));
        out.push_back(st::connected_model(ComponentTag::U1, 3));
    } else {
        throw invalid_input_error("no default candidates at genus " + std::to_string(genus));
    }
    return out;
}

}  // namespace satotate::stats
