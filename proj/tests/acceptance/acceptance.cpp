// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: cmj_acceptance [output-root]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cmj/cmj.hpp"
#include "cmj/harness.hpp"
#include "oracles.hpp"

using namespace cmj;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x, int digits = 4) {
    std::ostringstream o;
    o.precision(digits);
    o << x;
    return o.str();
}

WeightSpec wrrt(ScalarLaw v) { return PairSpec(Coupling::u_zero, std::move(v)); }
WeightSpec bb(ScalarLaw v) { return PairSpec(Coupling::u_equals_v, std::move(v)); }
WeightSpec additive(ScalarLaw v) { return PairSpec(Coupling::u_one, std::move(v)); }

const FitnessSpec kLinear = FitnessSpec::linear();

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) row.push_back(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

RunOutcome run(const std::string& cmd, Config cfg, const fs::path& out, std::uint64_t seed,
               std::optional<std::uint64_t> replicates = std::nullopt) {
    RunRequest r;
    r.command = cmd;
    r.config = std::move(cfg);
    r.seed = seed;
    r.replicates = replicates;
    r.out = out;
    r.config_source = "<acceptance>";
    return run_command(r);
}

/// Median with a distribution-free 95% interval from binomial order statistics.
struct MedianCi {
    double median = 0.0, lo = 0.0, hi = 0.0;
};

MedianCi median_ci(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const double half = 1.96 * std::sqrt(n) / 2.0;
    auto at = [&](double rank) {
        const auto i = static_cast<std::size_t>(std::clamp(rank, 0.0, n - 1.0));
        return xs[i];
    };
    MedianCi m;
    m.median = median(xs);
    m.lo = at(std::floor(n / 2.0 - half) - 1.0);
    m.hi = at(std::ceil(n / 2.0 + half));
    return m;
}

// ---------------------------------------------------------------------------

struct BirthGrid {
    std::vector<std::vector<std::string>> rows;
    double seconds = 0.0;
};

BirthGrid birth_grid(const fs::path& root) {
    // The command's default grid is the 36-point (c1, c2, t) grid.
    const auto start = Clock::now();
    run("birth-moments", Config{}, root / "birth_moments", 101, 100000);
    BirthGrid g;
    g.seconds = seconds_since(start);
    g.rows = read_csv(root / "birth_moments" / "birth_moments.csv");
    return g;
}

Outcome grid_check(const BirthGrid& g, const std::string& stat, bool timed) {
    std::size_t points = 0, within = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < g.rows.size(); ++i) {
        const auto& r = g.rows[i];
        if (r[3] != stat) continue;
        ++points;
        const double analytic = std::stod(r[4]), mc = std::stod(r[5]), se = std::stod(r[6]);
        const double z = se > 0.0 ? std::abs(mc - analytic) / se : (mc == analytic ? 0.0 : INFINITY);
        worst = std::max(worst, z);
        within += z < 4.0;
    }
    Outcome o;
    o.pass = points == 36 && within == points && (!timed || g.seconds < 60.0);
    o.detail = std::to_string(within) + "/" + std::to_string(points) + " grid points within 4 SE, max |z| = " +
               fmt(worst, 3);
    if (timed) o.detail += ", mean+second-moment run " + fmt(g.seconds, 3) + " s";
    return o;
}

Outcome ac3_pgf() {
    const BirthRates rates(1.0, 1.0);
    const double t = std::numbers::ln2;
    const std::vector<double> zs = {0.0, 0.3, 0.7, 1.0};
    std::vector<RunningMoments> acc(zs.size());
    Rng rng(derive_seed(103, 0));
    const OffspringModel model = OffspringModel::fixed(rates);
    for (int r = 0; r < 100000; ++r) {
        const auto x = simulate_count(model, t, rng).count;
        for (std::size_t k = 0; k < zs.size(); ++k)
            acc[k].add(x == 0 ? 1.0 : std::pow(zs[k], static_cast<double>(x)));
    }
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < zs.size(); ++k) {
        const double exact = pgf(rates, t, zs[k]);
        const double se = acc[k].standard_error();
        const bool hit = se > 0.0 ? std::abs(acc[k].mean() - exact) < 4.0 * se : acc[k].mean() == exact;
        ok = ok && hit;
        detail += "z=" + fmt(zs[k]) + ": " + fmt(acc[k].mean(), 5) + " vs " + fmt(exact, 5) + "; ";
    }
    ok = ok && pgf(rates, t, 1.0) == 1.0 && acc[3].mean() == 1.0;
    ok = ok && std::abs(pgf(rates, t, 0.0) - std::exp(-rates.c2() * t)) < 1e-15;
    return {ok, detail + "z=1 exact, z=0 equals e^{-c2 t}"};
}

Outcome ac4_skeleton() {
    const auto start = Clock::now();
    const WeightSpec w = additive(PointMass(1.0));
    const int n = 4;
    const auto exact = oracle::enumerate_shapes(n, [](int outdeg, int) { return outdeg + 1.0; });
    std::map<std::vector<int>, std::size_t> index;
    for (const auto& [shape, p] : exact) index.emplace(shape, index.size());

    const std::uint64_t samples = 200000;
    auto key_of = [](const RecursiveTree& t) {
        std::vector<int> k;
        for (std::size_t i = 1; i < t.size(); ++i) k.push_back(static_cast<int>(t.parent()[i]));
        return k;
    };
    std::vector<double> disc(index.size()), cont(index.size()), expected;
    for (const auto& [shape, p] : exact) expected.push_back(p * static_cast<double>(samples));

    Rng rng(derive_seed(104, 0));
    for (std::uint64_t s = 0; s < samples; ++s) {
        GrowthState g = new_growth(kLinear, w, rng);
        grow(g, n - 1, rng);
        disc[index.at(key_of(g.tree()))] += 1.0;
    }
    Rng rng2(derive_seed(104, 1));
    StopRule stop;
    stop.population = n;
    bool sizes_ok = true;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const CmjRun r = run_until(kLinear, w, rng2, stop);
        const RecursiveTree t = skeleton(r.genealogy);
        sizes_ok = sizes_ok && t.size() == static_cast<std::size_t>(n);
        cont[index.at(key_of(t))] += 1.0;
    }
    const double p_disc = oracle::chi_square_pvalue(disc, expected);
    const double p_cont = oracle::chi_square_pvalue(cont, expected);
    const double secs = seconds_since(start);
    const bool ok = sizes_ok && exact.size() == 6 && p_disc > 0.001 && p_cont > 0.001 && secs < 120.0;
    return {ok, std::to_string(exact.size()) + " shapes, grow() p = " + fmt(p_disc, 3) + ", skeleton() p = " +
                    fmt(p_cont, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome ac5_consistency() {
    Rng rng(derive_seed(105, 0));
    bool ok = true;
    std::string detail;
    const std::vector<std::pair<std::string, WeightSpec>> models = {{"WRRT V=1", wrrt(PointMass(1.0))},
                                                                    {"BB U=V~U(1,2)", bb(Uniform(1.0, 2.0))}};
    for (const auto& [name, w] : models) {
        const MomentResult m = linear_moment_test(w, 1.0, MomentConfig{}, rng);
        const CriterionReport s =
            summability_test(OffspringModel::mixed(w, kLinear), SequencePlan{}, SummabilityConfig{}, rng);
        const bool all_exact = std::all_of(s.terms.begin(), s.terms.end(), [](const auto& e) { return e.exact; });
        ok = ok && m.status == MomentStatus::finite && m.closed_form &&
             s.verdict == CriterionVerdict::divergent_evidence && all_exact;
        detail += name + ": moment " + status_name(m.status) + " (" + fmt(m.value) + "), summability " +
                  verdict_name(s.verdict) + (all_exact ? " (exact terms); " : " (simulated terms); ");
    }
    return {ok, detail};
}

Outcome ac6_phases() {
    const double e = std::numbers::e;
    struct Case {
        std::string name;
        WeightSpec w;
        Phase want;
    };
    // For U = V ~ LogParetoTail, e^{Ut} has the log-scaled heavy tail.
    const std::vector<Case> cases = {
        {"WRRT Exp(1)", wrrt(Exponential(1.0)), Phase::every_node_max_degree},
        {"WRRT LogParetoTail(1)", wrrt(LogParetoTail(1.0, e)), Phase::locally_finite_unique_path},
        {"BB U=V~U(1,2)", bb(Uniform(1.0, 2.0)), Phase::every_node_max_degree},
        {"BB U=V~LogParetoTail(1)", bb(LogParetoTail(1.0, e)), Phase::locally_finite_unique_path}};
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        Rng rng(derive_seed(106, i));
        const PhaseClassification pc = classify_phase(cases[i].w, ClassifyConfig{}, rng);
        ok = ok && pc.phase == cases[i].want;
        detail += cases[i].name + " -> " + phase_name(pc.phase) + "; ";
    }
    return {ok, detail};
}

std::vector<double> max_degree_ratios(const WeightSpec& w, std::uint64_t n, std::uint64_t reps,
                                      std::uint64_t seed) {
    std::vector<double> out(reps);
    for (std::uint64_t r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, r));
        GrowthState g = new_growth(kLinear, w, rng);
        g.reserve(n);
        grow(g, n - 1, rng);
        out[r] = static_cast<double>(max_out_degree(g.tree())) / static_cast<double>(n);
    }
    return out;
}

Outcome ac7_structure(const fs::path& root) {
    const WeightSpec heavy = wrrt(Pareto(0.5, 1.0));
    const WeightSpec light = wrrt(Exponential(1.0));

    // Pilot: the largest max-degree share seen among light-tail trees at n = 10^4.
    const auto pilot = max_degree_ratios(light, 10000, 20, 1070);
    const double threshold = *std::max_element(pilot.begin(), pilot.end());

    Config cfg;
    cfg.set("tree.n", "10000");
    cfg.set("tree.export", "none");
    cfg.set("tree.ratio_threshold", format_double(threshold));
    cfg.set("weights.coupling", "u_zero");
    cfg.set("weights.v", "pareto");
    cfg.set("weights.v.shape", "0.5");
    const RunOutcome o = run("tree-grow", cfg, root / "structure_heavy", 107, 20);
    const double med = std::stod(o.summary_value("median_max_degree_ratio"));
    bool ok = o.summary_value("median_ratio_exceeds_threshold") == "true" && med > threshold;
    std::string detail = "heavy median " + fmt(med) + " > pilot threshold " + fmt(threshold) + " (20 seeds); ";

    // Trend over n with 200 replicates per size.
    const std::vector<std::uint64_t> sizes = {1000, 10000, 100000};
    std::vector<MedianCi> h, l;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        h.push_back(median_ci(max_degree_ratios(heavy, sizes[i], 200, 1071 + i)));
        l.push_back(median_ci(max_degree_ratios(light, sizes[i], 200, 1081 + i)));
    }
    detail += "heavy medians";
    for (const auto& m : h) detail += " " + fmt(m.median);
    detail += ", light medians";
    for (const auto& m : l) detail += " " + fmt(m.median, 3);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        ok = ok && h[i + 1].hi >= h[i].lo;  // no significant decrease
        ok = ok && h[i + 1].median > threshold;
        ok = ok && l[i + 1].hi < l[i].lo;  // significant decrease
    }
    return {ok, detail};
}

Outcome ac8_explosion() {
    bool ok = true;
    std::string detail;
    {
        Rng rng(derive_seed(108, 0));
        StopRule stop;
        stop.population = std::uint64_t{1} << 20;
        const CmjRun r = run_until(kLinear, additive(PointMass(1.0)), rng, stop);
        const ExplosionDiagnosis d = diagnose_explosion(r.estimate);
        ok = ok && d.verdict == ExplosionVerdict::growth_unbounded && d.log_fit.r_squared > 0.99 &&
             r.estimate.tau.size() > 1000000;
        detail += "Yule k<=2^20: " + std::string(verdict_name(d.verdict)) + ", R^2 = " +
                  fmt(d.log_fit.r_squared, 5) + ", slope " + fmt(d.log_fit.slope, 3) + "; ";
    }
    {
        const int reps = 20;
        int suspected = 0;
        std::vector<double> ratios;
        for (int i = 0; i < reps; ++i) {
            Rng rng(derive_seed(108, 100 + static_cast<std::uint64_t>(i)));
            StopRule stop;
            stop.population = std::uint64_t{1} << 20;
            const CmjRun r = run_until(kLinear, wrrt(Pareto(0.5, 1.0)), rng, stop);
            const ExplosionDiagnosis d = diagnose_explosion(r.estimate);
            suspected += d.verdict == ExplosionVerdict::explosion_suspected;
            ratios.push_back(d.fitted_ratio);
        }
        const double med = median(ratios);
        ok = ok && 2 * suspected > reps && med < DiagnosisConfig{}.decay_ratio;
        detail += "WRRT Pareto(0.5): ExplosionSuspected in " + std::to_string(suspected) + "/" +
                  std::to_string(reps) + " runs, median fitted ratio over 4 levels " + fmt(med, 3);
    }
    return {ok, detail};
}

Outcome ac9_witness() {
    const SequencePlan plan;
    const int target = 10;
    bool ok = true;
    bool within = true;
    auto batch = [&](const WeightSpec& w, int reps, std::uint64_t seed, int& shallow, int& deep) {
        shallow = deep = 0;
        for (int i = 0; i < reps; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
            const WitnessResult r = greedy_path_witness(kLinear, w, plan, target, rng);
            shallow += r.depth <= 1;
            deep += r.depth >= target;
            within = within && r.elapsed <= plan.t_sum(std::max(r.depth, 1)) && r.elapsed <= plan.t_sum(target);
        }
    };
    int ps = 0, pd = 0, hs = 0, hd = 0;
    batch(wrrt(PointMass(1.0)), 1000, 109, ps, pd);
    batch(wrrt(LogParetoTail(1.0, std::numbers::e)), 200, 1090, hs, hd);
    ok = ps >= 950 && hd > 0 && within;
    return {ok, "Poisson depth<=1 in " + std::to_string(ps) + "/1000; heavy depth>=10 in " + std::to_string(hd) +
                    "/200; elapsed within sum t_i: " + (within ? "yes" : "no")};
}

Outcome ac10_condensation() {
    Rng rng(derive_seed(110, 0));
    const std::uint64_t j_max = 1000;
    const double c = 1.0, lambda = 0.5;
    const auto a = condensation_sum(kLinear, wrrt(PointMass(c)), lambda, j_max, 1000, rng);
    const double geo = c / lambda * (1.0 - std::pow(c / (c + lambda), static_cast<double>(j_max)));
    const auto b = condensation_sum(kLinear, additive(PointMass(1.0)), 2.0, j_max, 1000, rng);
    const double tele = 1.0 - 2.0 / (static_cast<double>(j_max) + 2.0);
    auto close = [](double x, double y, double se) { return std::abs(x - y) <= 4.0 * se + 1e-12 * std::abs(y); };
    const bool ok = close(a.partial_sum.back(), geo, a.standard_error) &&
                    close(b.partial_sum.back(), tele, b.standard_error) && std::abs(geo - c / lambda) < 1e-12 &&
                    std::abs(b.partial_sum.back() - 1.0) < 2.5e-3;
    return {ok, "constant c=1, lambda=0.5: " + fmt(a.partial_sum.back(), 10) + " vs " + fmt(geo, 10) +
                    " (limit c/lambda = 2); Yule lambda=2: " + fmt(b.partial_sum.back(), 10) + " vs " +
                    fmt(tele, 10) + " (limit 1)"};
}

Outcome ac11_determinism(const fs::path& root) {
    const fs::path configs = CMJ_CONFIG_DIR;
    const std::vector<std::tuple<std::string, std::string, std::optional<std::uint64_t>>> cases = {
        {"tree-grow", "tree_wrrt.conf", std::nullopt},
        {"cmj-run", "cmj_yule.conf", std::nullopt},
        {"birth-moments", "birth_moments.conf", 5000},
        {"criterion", "criterion_poisson.conf", std::nullopt},
        {"classify", "classify_exponential.conf", std::nullopt},
        {"phase-sweep", "sweep_pareto.conf", std::nullopt},
        {"witness", "witness_heavy.conf", std::nullopt}};
    bool ok = true;
    std::size_t files = 0;
    std::string bad;
    for (const auto& [cmd, conf, reps] : cases) {
        const Config cfg = Config::load(configs / conf);
        const fs::path a = root / "determinism" / (cmd + "_a");
        const fs::path b = root / "determinism" / (cmd + "_b");
        fs::remove_all(a);
        fs::remove_all(b);
        RunRequest req;
        req.command = cmd;
        req.config = cfg;
        req.replicates = reps;
        req.config_source = (configs / conf).string();
        req.out = a;
        const RunOutcome oa = run_command(req);
        req.out = b;
        const RunOutcome ob = run_command(req);
        if (oa.files != ob.files || !verify_manifest(a).empty() || !verify_manifest(b).empty()) {
            ok = false;
            bad += " " + cmd;
            continue;
        }
        for (const auto& f : oa.files) {
            ++files;
            if (sha256_file(a / f) != sha256_file(b / f)) {
                ok = false;
                bad += " " + cmd + "/" + f;
            }
        }
    }
    return {ok, std::to_string(cases.size()) + " commands, " + std::to_string(files) + " data files compared" +
                    (bad.empty() ? ", all byte-identical" : "; mismatches:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(root);

    int failures = 0;
    auto report = [&](const char* id, const char* title, const std::function<Outcome()>& fn) {
        Outcome o;
        const auto start = Clock::now();
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.detail << " ["
                  << fmt(seconds_since(start), 3) << " s]" << std::endl;
    };

    BirthGrid grid;
    report("AC1", "pure-birth mean", [&] {
        grid = birth_grid(root);
        return grid_check(grid, "mean", true);
    });
    report("AC2", "pure-birth second moment", [&] { return grid_check(grid, "second_moment", false); });
    report("AC3", "pure-birth PGF", ac3_pgf);
    report("AC4", "skeleton equivalence", ac4_skeleton);
    report("AC5", "criterion consistency", ac5_consistency);
    report("AC6", "phase classification", ac6_phases);
    report("AC7", "structural proxies", [&] { return ac7_structure(root); });
    report("AC8", "explosion diagnostics", ac8_explosion);
    report("AC9", "witness search", ac9_witness);
    report("AC10", "condensation sums", ac10_condensation);
    report("AC11", "determinism", [&] { return ac11_determinism(root); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
