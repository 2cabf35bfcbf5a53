// End-to-end driver: point counting into a_p caches, Sato-Tate group
// identification from endomorphism data, moment comparison, and Haar
// sampling. Exit codes: 0 success, 2 invalid input, 3 insufficient data,
// 4 internal inconsistency.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "satotate/endo.hpp"
#include "satotate/lpoly.hpp"
#include "satotate/st_group.hpp"
#include "satotate/stats.hpp"

namespace fs = std::filesystem;
using namespace satotate;

namespace {

struct RunConfig {
    std::string mode;
    std::string curve;
    std::string endo_path;
    std::string out = ".";
    std::string candidates;
    std::int64_t bound = 0;
    std::uint64_t seed = 1;
    std::uint64_t n = 100000;
    unsigned threads = 1;
};

std::string cache_path(const RunConfig& cfg) { return cfg.out + "/ap_cache.txt"; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input_error("cannot write output file: " + path);
    out << content;
}

/// Loads the cache if present (validating it against the curve and
/// re-deriving one seeded random entry), counts whatever is missing up to
/// the bound, and rewrites the file sorted by p.
lpoly::FrobSequence ensure_cache(const lpoly::CurveSpec& curve, const RunConfig& cfg) {
    if (cfg.bound < 3) throw invalid_input_error("prime bound must be at least 3");
    std::vector<lpoly::FrobPoly> entries;
    std::set<std::int64_t> have;
    const std::string path = cache_path(cfg);
    if (fs::exists(path)) {
        lpoly::ApCache cache = lpoly::read_cache(path);
        if (cache.curve_canonical != curve.canonical_string() || cache.genus != curve.genus())
            throw invalid_input_error("cache file belongs to a different curve: " + path);
        if (!cache.entries.empty()) {
            SplitMix64 rng(cfg.seed);
            const auto& probe = cache.entries[rng.next_below(cache.entries.size())];
            lpoly::FrobPoly fresh = lpoly::frob_poly(curve, probe.p);
            if (fresh.c != probe.c)
                throw inconsistency_error("cached entry at p = " + std::to_string(probe.p) +
                                          " does not re-derive");
        }
        for (auto& e : cache.entries) {
            have.insert(e.p);
            entries.push_back(std::move(e));
        }
    }
    lpoly::FrobSequence result;
    result.genus = curve.genus();
    std::vector<std::int64_t> missing;
    for (std::int64_t p : ff::odd_primes_up_to(cfg.bound)) {
        if (!curve.good_reduction(p))
            result.skipped.push_back(p);
        else if (!have.count(p))
            missing.push_back(p);
    }
    if (!missing.empty()) {
        std::vector<lpoly::FrobPoly> fresh(missing.size());
        if (cfg.threads <= 1) {
            for (std::size_t i = 0; i < missing.size(); ++i)
                fresh[i] = lpoly::frob_poly(curve, missing[i]);
        } else {
            std::atomic<std::size_t> cursor{0};
            std::vector<std::future<void>> jobs;
            for (unsigned t = 0; t < cfg.threads; ++t)
                jobs.push_back(std::async(std::launch::async, [&]() {
                    for (;;) {
                        std::size_t i = cursor.fetch_add(1);
                        if (i >= missing.size()) return;
                        fresh[i] = lpoly::frob_poly(curve, missing[i]);
                    }
                }));
            for (auto& j : jobs) j.get();
        }
        for (auto& f : fresh) entries.push_back(std::move(f));
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.p < b.p; });
    lpoly::write_cache(path, curve, entries);
    result.entries = std::move(entries);
    return result;
}

int run_count(const RunConfig& cfg) {
    lpoly::CurveSpec curve = lpoly::parse_curve(cfg.curve);
    auto seq = ensure_cache(curve, cfg);
    std::printf("cache=%s entries=%zu\n", cache_path(cfg).c_str(), seq.entries.size());
    if (!seq.skipped.empty()) {
        std::printf("skipped_bad_primes=");
        for (std::size_t i = 0; i < seq.skipped.size(); ++i)
            std::printf("%s%lld", i ? "," : "", static_cast<long long>(seq.skipped[i]));
        std::printf("\n");
    }
    return 0;
}

int run_identify(const RunConfig& cfg) {
    if (cfg.endo_path.empty()) throw invalid_input_error("identify mode needs --endo");
    endo::EndoData data = endo::read_endo(cfg.endo_path);
    endo::GroupIdentification ident = endo::classify(data);
    std::printf("component=%s lie_dim=%d pi0=%zu theorem=%s%s\n",
                endo::component_name(ident.component, ident.g).c_str(), ident.lie_dim,
                ident.component_group.order(), endo::theorem_name(ident.theorem).c_str(),
                ident.verified ? "" : " flagged=unverified");
    try {
        st::STModel model = st::build_st_model(ident);
        std::printf("st_model=%s coset_reps=%zu validated=1\n", model.name().c_str(),
                    model.pi0_order());
    } catch (const invalid_input_error& e) {
        std::printf("st_model=unavailable reason=\"%s\"\n", e.what());
    }
    return 0;
}

std::vector<st::STModel> candidate_set(const RunConfig& cfg, int genus) {
    if (cfg.candidates.empty()) return stats::default_candidates(genus);
    std::vector<st::STModel> out;
    std::stringstream ss(cfg.candidates);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok == "NU1") {
            out.push_back(st::normalizer_u1_model());
            continue;
        }
        auto tag = endo::component_from_name(tok);
        if (!tag) throw invalid_input_error("unknown candidate group: " + tok);
        out.push_back(st::connected_model(*tag, genus));
    }
    return out;
}

int run_compare(const RunConfig& cfg) {
    if (cfg.n < 1000) throw invalid_input_error("compare mode requires n >= 1000");
    lpoly::CurveSpec curve = lpoly::parse_curve(cfg.curve);
    std::vector<lpoly::ApEntry> aps;
    if (curve.genus() == 3) {
        auto seq = lpoly::ap_sequence(curve, cfg.bound, /*trace_only=*/true);
        aps = std::move(seq.entries);
    } else {
        auto frob = ensure_cache(curve, cfg);
        for (const auto& f : frob.entries) aps.push_back({f.p, lpoly::normalize(f)});
    }
    if (aps.size() < 100)
        throw insufficient_data_error("only " + std::to_string(aps.size()) +
                                      " good primes below the bound; need 100");
    MomentReport report = stats::empirical_moments(aps);
    auto candidates = candidate_set(cfg, curve.genus());
    stats::MatchVerdict verdict = stats::match(report, candidates);

    std::string moments_text = report_to_string(report);
    for (const auto& model : candidates)
        moments_text += report_to_string(st::exact_moments(model, 6));
    write_file(cfg.out + "/moments.txt", moments_text);
    write_file(cfg.out + "/verdict.txt", stats::verdict_to_string(verdict));
    write_file(cfg.out + "/hist.csv",
               stats::histogram_to_csv(stats::a1_histogram(aps, curve.genus())));
    std::fputs(stats::verdict_to_string(verdict).c_str(), stdout);
    return 0;
}

int run_sample(const RunConfig& cfg) {
    if (cfg.endo_path.empty()) throw invalid_input_error("sample mode needs --endo");
    if (cfg.n < 1) throw invalid_input_error("need n >= 1");
    endo::EndoData data = endo::read_endo(cfg.endo_path);
    st::STModel model = st::build_st_model(endo::classify(data));
    auto samples = st::sample(model, cfg.seed, cfg.n);
    MomentReport report = st::coefficient_stats(samples, model.name());
    write_file(cfg.out + "/sample_moments.txt", report_to_string(report));
    std::string csv = "index,coset,a1,a2\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto [a1, a2] = st::charpoly_a1_a2(samples[i].matrix);
        char line[128];
        std::snprintf(line, sizeof(line), "%zu,%zu,%.17g,%.17g\n", i, samples[i].coset, a1, a2);
        csv += line;
    }
    write_file(cfg.out + "/samples.csv", csv);
    std::printf("model=%s samples=%zu zero_density=%.6f\n", model.name().c_str(),
                samples.size(), report.zero_density);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Sato-Tate statistics toolkit"};
    app.set_config("--config")->description("key=value config file");
    app.add_option("--mode", cfg.mode, "count | identify | compare | sample")->required();
    app.add_option("--curve", cfg.curve, "curve model, e.g. y^2=x^3+x");
    app.add_option("--endo", cfg.endo_path, "endomorphism data file");
    app.add_option("--bound", cfg.bound, "prime bound");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--n", cfg.n, "Monte Carlo sample count");
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--candidates", cfg.candidates, "comma-separated candidate groups");
    app.add_option("--threads", cfg.threads, "counting worker threads");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        fs::create_directories(cfg.out);
        if (cfg.mode == "count") return run_count(cfg);
        if (cfg.mode == "identify") return run_identify(cfg);
        if (cfg.mode == "compare") return run_compare(cfg);
        if (cfg.mode == "sample") return run_sample(cfg);
        throw invalid_input_error("unknown mode: " + cfg.mode);
    } catch (const insufficient_data_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const inconsistency_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
