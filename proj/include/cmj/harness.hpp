#pragma once

// Experiment commands behind the `cmjlab` CLI. Each command reads a Config,
// writes CSV files plus summary.txt into the output directory and finishes
// with manifest.txt, which echoes the configuration and lists a SHA-256
// checksum for every other file written.
//
// Replicate i always runs on derive_seed(seed, i), whatever the thread count,
// so data files are byte-identical across runs with the same seed.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cmj/cmj_process.hpp"
#include "cmj/config.hpp"
#include "cmj/criteria.hpp"
#include "cmj/csv.hpp"
#include "cmj/pure_birth.hpp"
#include "cmj/random.hpp"
#include "cmj/recursive_tree.hpp"
#include "cmj/sequence_plan.hpp"
#include "cmj/stats.hpp"

#ifndef CMJLAB_VERSION
#define CMJLAB_VERSION "dev"
#endif

namespace cmj {

inline constexpr const char* kArtifactVersion = CMJLAB_VERSION;

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"tree-grow", "cmj-run",       "birth-moments", "criterion",
                                                   "classify",  "phase-sweep", "witness"};
    return names;
}

// ---------------------------------------------------------------------------

/// Runs body(0), ..., body(n - 1) on up to `threads` threads. The first
/// exception thrown stops the remaining work and is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 unavailable");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// ---------------------------------------------------------------------------

struct RunRequest {
    std::string command;
    Config config;
    std::optional<std::uint64_t> seed;        // overrides the `seed` key
    std::optional<std::uint64_t> replicates;  // overrides `run.replicates`
    unsigned threads = 1;
    std::filesystem::path out = ".";
    std::string config_source = "<inline>";
};

struct RunOutcome {
    std::vector<std::string> files;  // data files in manifest order
    std::vector<std::pair<std::string, std::string>> summary;
    std::uint64_t events = 0;
    double wall_seconds = 0.0;

    std::string summary_value(const std::string& key) const {
        for (const auto& [k, v] : summary)
            if (k == key) return v;
        throw std::out_of_range("no summary entry " + key);
    }
};

/// Shared state of one command invocation.
class RunContext {
public:
    explicit RunContext(const RunRequest& req) : req_(req), cfg_(req.config) {
        if (cfg_.has("seed")) seed_ = cfg_.get_u64("seed");
        if (req.seed) seed_ = *req.seed;
        else if (!cfg_.has("seed")) throw ConfigError("seed", "a seed is required (--seed or seed = ...)");
        if (req.threads < 1) throw ConfigError("--threads", "must be >= 1");
    }

    const Config& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t seed_for(std::uint64_t i) const { return derive_seed(seed_, i); }
    unsigned threads() const { return req_.threads; }

    std::uint64_t replicates(std::uint64_t fallback) {
        const std::uint64_t from_config = cfg_.get_u64("run.replicates", fallback);
        replicates_ = req_.replicates.value_or(from_config);
        if (*replicates_ < 1) throw ConfigError("--replicates", "must be >= 1");
        return *replicates_;
    }

    /// Opens `<out>/<name>` for a single writer and lists it in the manifest.
    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        const auto path = req_.out / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        fn(static_cast<std::ostream&>(out));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + path.string());
        files_.push_back(name);
    }

    void note(const std::string& key, const std::string& value) { summary_.emplace_back(key, value); }
    void note(const std::string& key, double value) { note(key, format_double(value)); }
    void note(const std::string& key, std::uint64_t value) { note(key, std::to_string(value)); }
    void note(const std::string& key, int value) { note(key, std::to_string(value)); }
    void note(const std::string& key, bool value) { note(key, std::string(value ? "true" : "false")); }

    void add_events(std::uint64_t n) { events_.fetch_add(n, std::memory_order_relaxed); }

    RunOutcome finish(double wall_seconds) {
        write("summary.txt", [&](std::ostream& out) {
            out << "command = " << req_.command << '\n';
            out << "seed = " << seed_ << '\n';
            for (const auto& [k, v] : summary_) out << k << " = " << v << '\n';
        });

        const auto path = req_.out / "manifest.txt";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "artifact = cmjlab\n";
        out << "version = " << kArtifactVersion << '\n';
        out << "command = " << req_.command << '\n';
        out << "config_source = " << req_.config_source << '\n';
        out << "seed = " << seed_ << '\n';
        if (replicates_) out << "replicates = " << *replicates_ << '\n';
        out << "threads = " << req_.threads << '\n';
        out << "\n[config]\n";
        for (const auto& [k, v] : cfg_.entries()) out << k << " = " << v << '\n';
        out << "\n[outputs]\n";
        for (const auto& f : files_) {
            out << f << ".sha256 = " << sha256_file(req_.out / f) << '\n';
            out << f << ".bytes = " << std::filesystem::file_size(req_.out / f) << '\n';
        }
        out << "\n[metrics]\n";
        out << "events = " << events_.load() << '\n';
        out << "wall_clock_seconds = " << format_double(wall_seconds) << '\n';
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + path.string());

        RunOutcome o;
        o.files = files_;
        o.summary = summary_;
        o.events = events_.load();
        o.wall_seconds = wall_seconds;
        return o;
    }

private:
    const RunRequest& req_;
    const Config& cfg_;
    std::uint64_t seed_ = 0;
    std::optional<std::uint64_t> replicates_;
    std::vector<std::string> files_;
    std::vector<std::pair<std::string, std::string>> summary_;
    std::atomic<std::uint64_t> events_{0};
};

/// Recomputes every checksum listed in `<dir>/manifest.txt`. Returns the
/// names whose checksum does not match; an unreadable manifest throws.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
    const Config m = Config::load(dir / "manifest.txt");
    std::vector<std::string> bad;
    bool any = false;
    for (const auto& [k, v] : m.entries()) {
        const std::string prefix = "outputs.";
        const std::string suffix = ".sha256";
        if (k.rfind(prefix, 0) != 0 || k.size() <= prefix.size() + suffix.size() ||
            k.compare(k.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        any = true;
        const std::string name = k.substr(prefix.size(), k.size() - prefix.size() - suffix.size());
        const auto path = dir / name;
        if (!std::filesystem::exists(path) || sha256_file(path) != v) bad.push_back(name);
    }
    if (!any) bad.emplace_back("<no outputs listed>");
    return bad;
}

// ---------------------------------------------------------------------------
// Plot scripts: standalone Python reading the CSVs next to them.

namespace detail {
inline constexpr const char* kPlotHistogram = R"PY(#!/usr/bin/env python3
"""Log-log plot of degree_histogram.csv (k,count)."""
import csv, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "degree_histogram.csv")))
k = [int(r["k"]) for r in rows if int(r["k"]) > 0]
c = [int(r["count"]) for r in rows if int(r["k"]) > 0]
plt.loglog(k, c, "o", ms=3)
plt.xlabel("out-degree k")
plt.ylabel("number of nodes")
plt.savefig(here / "degree_histogram.png", dpi=150)
)PY";

inline constexpr const char* kPlotTau = R"PY(#!/usr/bin/env python3
"""tau_k against log k from tau.csv (k,tau_k)."""
import csv, math, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "tau.csv")))
k = [int(r["k"]) for r in rows]
tau = [float(r["tau_k"]) for r in rows]
plt.semilogx(k, tau)
plt.xlabel("population k")
plt.ylabel("tau_k")
plt.savefig(here / "tau.png", dpi=150)
)PY";

inline constexpr const char* kPlotSweep = R"PY(#!/usr/bin/env python3
"""Phase label per swept value from phase_sweep.csv."""
import csv, pathlib
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "phase_sweep.csv")))
phases = ["EveryNodeMaxDegree", "LocallyFiniteUniquePath", "SingleInfiniteDegreeNode", "Inconclusive", "error"]
x = [float(r["value"]) for r in rows]
y = [phases.index(r["phase"] or "error") for r in rows]
plt.plot(x, y, "s")
plt.yticks(range(len(phases)), phases)
plt.xlabel(rows[0]["key"] if rows else "value")
plt.tight_layout()
plt.savefig(here / "phase_sweep.png", dpi=150)
)PY";

inline std::vector<std::uint64_t> to_counts(const std::string& key, const std::vector<double>& xs) {
    std::vector<std::uint64_t> out;
    for (double x : xs) {
        if (!(x >= 0.0) || x != std::floor(x) || x > 1e18) throw ConfigError(key, "expected nonnegative integers");
        out.push_back(static_cast<std::uint64_t>(x));
    }
    return out;
}

inline void require_linear(const Config& cfg) {
    if (cfg.get_string("fitness.kind", "linear") != "linear")
        throw ConfigError("fitness.kind", "this command needs linear fitness");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// tree-grow

inline void cmd_tree_grow(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const FitnessSpec fitness = parse_fitness(cfg);
    const WeightSpec weights = parse_weights(cfg);
    const std::uint64_t n = cfg.get_u64("tree.n");
    if (n < 1 || n > (std::uint64_t{1} << 31)) throw ConfigError("tree.n", "must be in [1, 2^31]");
    const auto caps = detail::to_counts(
        "tree.edge_mass_caps", cfg.get_doubles("tree.edge_mass_caps", {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024}));
    const std::string exports = cfg.get_string("tree.export", "first");
    if (exports != "first" && exports != "all" && exports != "none")
        throw ConfigError("tree.export", "expected first, all or none");
    const auto threshold = cfg.raw("tree.ratio_threshold");
    const double ratio_threshold = threshold ? cfg.get_double("tree.ratio_threshold") : 0.0;
    const std::uint64_t reps = ctx.replicates(1);
    cfg.require_all_used();

    struct Row {
        std::uint64_t size = 0, steps = 0;
        std::uint32_t max_degree = 0, height = 0;
        bool halted = false;
        std::vector<double> edge_mass;
        std::optional<RecursiveTree> tree;
    };
    std::vector<Row> rows(reps);
    parallel_for(reps, ctx.threads(), [&](std::size_t i) {
        Rng rng(ctx.seed_for(i));
        GrowthState state = new_growth(fitness, weights, rng);
        state.reserve(n);
        Row& r = rows[i];
        r.steps = grow(state, n - 1, rng);
        const RecursiveTree& t = state.tree();
        r.size = t.size();
        r.halted = state.halted() && r.size < n;
        r.max_degree = max_out_degree(t);
        r.height = height(t);
        const DegreeHistogram h = degree_histogram(t);
        for (auto c : caps) r.edge_mass.push_back(edge_mass_below(h, c));
        if (exports == "all" || (exports == "first" && i == 0)) r.tree = t;
        ctx.add_events(r.steps);
    });

    for (std::size_t i = 0; i < reps; ++i) {
        if (!rows[i].tree) continue;
        const std::string suffix = exports == "all" ? "_r" + std::to_string(i) : "";
        ctx.write("tree" + suffix + ".csv", [&](std::ostream& o) { write_tree_csv(*rows[i].tree, o); });
        ctx.write("degree_histogram" + suffix + ".csv",
                  [&](std::ostream& o) { write_histogram_csv(degree_histogram(*rows[i].tree), o); });
    }
    ctx.write("tree_summary.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("replicate", "n", "max_degree", "max_degree_ratio", "height", "halted");
        for (std::size_t i = 0; i < reps; ++i) {
            const Row& r = rows[i];
            csv.row(static_cast<std::uint64_t>(i), r.size, r.max_degree,
                    static_cast<double>(r.max_degree) / static_cast<double>(r.size), r.height, r.halted ? 1 : 0);
        }
    });
    ctx.write("edge_mass.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("replicate", "cap", "edge_mass_below");
        for (std::size_t i = 0; i < reps; ++i)
            for (std::size_t c = 0; c < caps.size(); ++c)
                csv.row(static_cast<std::uint64_t>(i), caps[c], rows[i].edge_mass[c]);
    });
    if (exports != "none") ctx.write("plot_degree_histogram.py", [](std::ostream& o) { o << detail::kPlotHistogram; });

    std::vector<double> ratios, heights;
    std::uint64_t halted = 0, max_degree = 0;
    for (const Row& r : rows) {
        ratios.push_back(static_cast<double>(r.max_degree) / static_cast<double>(r.size));
        heights.push_back(r.height);
        halted += r.halted;
        max_degree = std::max<std::uint64_t>(max_degree, r.max_degree);
    }
    const double med = median(ratios);
    ctx.note("n", n);
    ctx.note("replicates", reps);
    ctx.note("max_degree", max_degree);
    ctx.note("median_max_degree_ratio", med);
    ctx.note("median_height", median(heights));
    ctx.note("halted_replicates", halted);
    if (threshold) {
        ctx.note("ratio_threshold", ratio_threshold);
        ctx.note("median_ratio_exceeds_threshold", med > ratio_threshold);
    }
}

// ---------------------------------------------------------------------------
// cmj-run

inline void cmd_cmj_run(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const FitnessSpec fitness = parse_fitness(cfg);
    const WeightSpec weights = parse_weights(cfg);
    StopRule stop;
    if (cfg.raw("cmj.population")) stop.population = cfg.get_u64("cmj.population");
    if (cfg.raw("cmj.horizon")) stop.horizon = cfg.get_double("cmj.horizon");
    stop.population_cap = cfg.get_u64("cmj.population_cap", stop.population_cap);
    if (!stop.population && !stop.horizon) throw ConfigError("cmj.population", "need cmj.population or cmj.horizon");
    if (stop.population && *stop.population < 1) throw ConfigError("cmj.population", "must be >= 1");
    if (stop.horizon && !(*stop.horizon >= 0.0)) throw ConfigError("cmj.horizon", "must be >= 0");
    if (stop.population_cap < 1 || stop.population_cap > (std::uint64_t{1} << 31))
        throw ConfigError("cmj.population_cap", "must be in [1, 2^31]");
    DiagnosisConfig diag;
    diag.levels = cfg.get_int("diagnosis.levels", diag.levels);
    diag.decay_ratio = cfg.get_double("diagnosis.decay_ratio", diag.decay_ratio);
    diag.bounded_ratio = cfg.get_double("diagnosis.bounded_ratio", diag.bounded_ratio);
    diag.fit_from = cfg.get_u64("diagnosis.fit_from", diag.fit_from);
    if (diag.levels < 1) throw ConfigError("diagnosis.levels", "must be >= 1");
    const std::uint64_t reps = ctx.replicates(1);
    cfg.require_all_used();

    struct Row {
        std::uint64_t size = 0, events = 0;
        double final_time = 0.0;
        bool saturated = false, exhausted = false;
        ExplosionDiagnosis diagnosis;
    };
    std::vector<Row> rows(reps);
    std::optional<CmjRun> first;
    parallel_for(reps, ctx.threads(), [&](std::size_t i) {
        Rng rng(ctx.seed_for(i));
        CmjRun run = run_until(fitness, weights, rng, stop);
        Row& r = rows[i];
        r.size = run.genealogy.size();
        r.events = run.events;
        r.final_time = run.estimate.tau.back();
        r.saturated = run.estimate.saturated;
        r.exhausted = run.exhausted;
        r.diagnosis = diagnose_explosion(run.estimate, diag);
        ctx.add_events(run.events);
        if (i == 0) first = std::move(run);
    });

    ctx.write("genealogy.csv", [&](std::ostream& o) { write_genealogy_csv(first->genealogy, o); });
    ctx.write("tau.csv", [&](std::ostream& o) { write_tau_csv(first->estimate, o); });
    ctx.write("cmj_summary.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("replicate", "size", "events", "last_birth_time", "saturated", "exhausted", "verdict", "fitted_ratio",
                "log_fit_slope", "log_fit_r2");
        for (std::size_t i = 0; i < reps; ++i) {
            const Row& r = rows[i];
            csv.row(static_cast<std::uint64_t>(i), r.size, r.events, r.final_time, r.saturated ? 1 : 0,
                    r.exhausted ? 1 : 0, std::string(verdict_name(r.diagnosis.verdict)), r.diagnosis.fitted_ratio,
                    r.diagnosis.log_fit.slope, r.diagnosis.log_fit.r_squared);
        }
    });
    ctx.write("plot_tau.py", [](std::ostream& o) { o << detail::kPlotTau; });

    std::map<std::string, std::uint64_t> verdicts;
    for (const Row& r : rows) ++verdicts[verdict_name(r.diagnosis.verdict)];
    ctx.note("replicates", reps);
    ctx.note("first_size", rows[0].size);
    ctx.note("first_verdict", std::string(verdict_name(rows[0].diagnosis.verdict)));
    ctx.note("first_rationale", rows[0].diagnosis.rationale);
    for (const auto& [v, c] : verdicts) ctx.note("verdict_count." + v, c);
}

// ---------------------------------------------------------------------------
// birth-moments

inline void cmd_birth_moments(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const auto c1s = cfg.get_doubles("birth.c1", {0.0, 0.5, 1.0, 2.0});
    const auto c2s = cfg.get_doubles("birth.c2", {0.5, 1.0, 2.0});
    const auto ts = cfg.get_doubles("birth.t", {0.25, 0.7, 1.5});
    const auto zs = cfg.get_doubles("birth.z", {});
    for (double z : zs)
        if (!(z >= 0.0 && z <= 1.0)) throw ConfigError("birth.z", "every z must lie in [0, 1]");
    for (double t : ts)
        if (!(t >= 0.0 && std::isfinite(t))) throw ConfigError("birth.t", "every t must be finite and >= 0");
    const std::uint64_t reps = ctx.replicates(100000);
    cfg.require_all_used();

    struct Point {
        double c1, c2, t;
        std::optional<BirthRates> rates;
        RunningMoments first, second;
        std::vector<RunningMoments> pgf;
        std::uint64_t saturated = 0;
    };
    std::vector<Point> points;
    for (double c1 : c1s)
        for (double c2 : c2s)
            for (double t : ts) {
                Point p{c1, c2, t, std::nullopt, {}, {}, {}, 0};
                p.rates = detail::as_config_error("birth.c1", [&] { return BirthRates(c1, c2); });
                p.pgf.resize(zs.size());
                points.push_back(std::move(p));
            }

    parallel_for(points.size(), ctx.threads(), [&](std::size_t idx) {
        Point& p = points[idx];
        Rng rng(ctx.seed_for(idx));
        const OffspringModel model = OffspringModel::fixed(*p.rates);
        std::uint64_t births = 0;
        for (std::uint64_t r = 0; r < reps; ++r) {
            const BirthCount c = simulate_count(model, p.t, rng);
            const auto x = static_cast<double>(c.count);
            births += c.count;
            p.saturated += c.saturated;
            p.first.add(x);
            p.second.add(x * x);
            for (std::size_t k = 0; k < zs.size(); ++k) p.pgf[k].add(c.count == 0 ? 1.0 : std::pow(zs[k], x));
        }
        ctx.add_events(births);
    });

    double worst = 0.0;
    std::uint64_t saturated = 0;
    ctx.write("birth_moments.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("c1", "c2", "t", "stat", "analytic", "mc", "se");
        auto emit = [&](const Point& p, const std::string& stat, double analytic, const RunningMoments& m) {
            csv.row(p.c1, p.c2, p.t, stat, analytic, m.mean(), m.standard_error());
            const double se = m.standard_error();
            if (se > 0.0) worst = std::max(worst, std::abs(m.mean() - analytic) / se);
        };
        for (const Point& p : points) {
            emit(p, "mean", mean(*p.rates, p.t), p.first);
            emit(p, "second_moment", second_moment(*p.rates, p.t), p.second);
            for (std::size_t k = 0; k < zs.size(); ++k)
                emit(p, "pgf:" + format_double(zs[k]), pgf_any(*p.rates, p.t, zs[k]), p.pgf[k]);
            saturated += p.saturated;
        }
    });
    ctx.note("grid_points", static_cast<std::uint64_t>(points.size()));
    ctx.note("replicates_per_point", reps);
    ctx.note("max_abs_z_score", worst);
    ctx.note("saturated_samples", saturated);
}

// ---------------------------------------------------------------------------
// criterion

inline void cmd_criterion(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const std::string kind = cfg.get_string("criterion.kind");
    Rng rng(ctx.seed_for(0));
    CriterionReport rep;
    if (kind == "summability") {
        const OffspringModel model = parse_offspring(cfg);
        const SequencePlan plan = parse_plan(cfg);
        SummabilityConfig sc;
        sc.nsamples = cfg.get_u64("criterion.samples", sc.nsamples);
        const std::string method = cfg.get_string("criterion.method", "exact");
        if (method == "mc") sc.method = TailMethod::monte_carlo;
        else if (method != "exact") throw ConfigError("criterion.method", "expected exact or mc");
        if (sc.nsamples < 10000) throw ConfigError("criterion.samples", "need at least 1e4 samples per term");
        cfg.require_all_used();
        rep = summability_test(model, plan, sc, rng);
    } else if (kind == "tail") {
        const OffspringModel model = parse_offspring(cfg);
        const TailGridConfig grid = parse_tail_grid(cfg);
        cfg.require_all_used();
        rep = tail_criterion_test(model, grid, rng);
    } else if (kind == "linear-tail") {
        detail::require_linear(cfg);
        const WeightSpec weights = parse_weights(cfg);
        const TailGridConfig grid = parse_tail_grid(cfg);
        cfg.require_all_used();
        rep = linear_tail_test(weights, grid, rng);
    } else {
        throw ConfigError("criterion.kind", "expected summability, tail or linear-tail");
    }

    ctx.write("report.txt", [&](std::ostream& o) { write_report(rep, o); });
    if (!rep.terms.empty()) {
        ctx.write("criterion_terms.csv", [&](std::ostream& o) {
            CsvWriter csv(o);
            csv.row("i", "t_i", "M_i", "M_next", "q", "q_lo", "q_hi", "term", "term_lo", "term_hi", "resolved",
                    "partial_sum", "partial_sum_lo", "partial_sum_hi");
            for (std::size_t k = 0; k < rep.terms.size(); ++k) {
                const auto& e = rep.terms[k];
                csv.row(e.i, e.t, e.budget, e.threshold, e.q, e.q_ci.lo, e.q_ci.hi, e.term, e.term_lo, e.term_hi,
                        e.resolved ? 1 : 0, rep.partial_sum[k], rep.partial_sum_lo[k], rep.partial_sum_hi[k]);
            }
        });
    } else {
        ctx.write("criterion_points.csv", [&](std::ostream& o) { write_points_csv(rep, o); });
    }
    ctx.note("criterion", rep.criterion);
    ctx.note("verdict", std::string(verdict_name(rep.verdict)));
    if (!rep.points.empty()) ctx.note("passed", rep.passed);
    ctx.note("rationale", rep.rationale);
}

// ---------------------------------------------------------------------------
// classify

inline void write_moments_csv(const std::vector<MomentResult>& ms, std::ostream& o) {
    CsvWriter csv(o);
    csv.row("t", "status", "value", "ci_lo", "ci_hi", "closed_form", "low_confidence");
    for (const auto& m : ms)
        csv.row(m.t, std::string(status_name(m.status)), m.value, m.ci.lo, m.ci.hi, m.closed_form ? 1 : 0,
                m.low_confidence ? 1 : 0);
}

inline void cmd_classify(RunContext& ctx) {
    const Config& cfg = ctx.config();
    detail::require_linear(cfg);
    const WeightSpec weights = parse_weights(cfg);
    const ClassifyConfig cc = parse_classify(cfg);
    cfg.require_all_used();
    Rng rng(ctx.seed_for(0));
    const PhaseClassification pc = detail::as_config_error("weights", [&] { return classify_phase(weights, cc, rng); });

    ctx.write("classification.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("phase", "rationale");
        csv.row(std::string(phase_name(pc.phase)), pc.rationale);
    });
    ctx.write("moments.csv", [&](std::ostream& o) { write_moments_csv(pc.moments, o); });
    if (pc.tail) ctx.write("tail_points.csv", [&](std::ostream& o) { write_points_csv(*pc.tail, o); });
    ctx.note("phase", std::string(phase_name(pc.phase)));
    ctx.note("rationale", pc.rationale);
}

// ---------------------------------------------------------------------------
// phase-sweep

inline void cmd_phase_sweep(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const std::string key = cfg.get_string("sweep.key");
    const auto values = cfg.has("sweep.values") ? cfg.get_strings("sweep.values") : std::vector<std::string>{};
    detail::require_linear(cfg);
    for (const char* p : {"weights", "moment", "tail"}) cfg.consume_prefix(p);
    cfg.require_all_used();

    struct Row {
        std::string phase, rationale, error;
        std::optional<PhaseClassification> pc;
    };
    std::vector<Row> rows(values.size());
    parallel_for(values.size(), ctx.threads(), [&](std::size_t i) {
        Config point = cfg;
        point.set(key, values[i]);
        Row& r = rows[i];
        try {
            const WeightSpec weights = parse_weights(point);
            const ClassifyConfig cc = parse_classify(point);
            Rng rng(ctx.seed_for(i));
            r.pc = classify_phase(weights, cc, rng);
            r.phase = phase_name(r.pc->phase);
            r.rationale = r.pc->rationale;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });

    ctx.write("phase_sweep.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("key", "value", "phase", "moment_t", "moment_value", "moment_closed_form", "tail_pass", "tail_fail",
                "tail_unresolved", "error");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Row& r = rows[i];
            csv.field(key).field(values[i]).field(r.phase);
            if (r.pc && !r.pc->moments.empty()) {
                const MomentResult& m = r.pc->moments.back();
                csv.field(m.t).field(m.value).field(m.closed_form ? 1 : 0);
            } else {
                csv.empty().empty().empty();
            }
            if (r.pc && r.pc->tail) {
                int pass = 0, fail = 0, unresolved = 0;
                for (const auto& p : r.pc->tail->points) {
                    pass += p.status == PointStatus::pass;
                    fail += p.status == PointStatus::fail;
                    unresolved += p.status == PointStatus::unresolved;
                }
                csv.field(pass).field(fail).field(unresolved);
            } else {
                csv.empty().empty().empty();
            }
            csv.field(r.error);
            csv.end_row();
        }
    });
    ctx.write("plot_phase_sweep.py", [](std::ostream& o) { o << detail::kPlotSweep; });
    std::uint64_t errors = 0;
    for (const Row& r : rows) errors += !r.error.empty();
    ctx.note("key", key);
    ctx.note("points", static_cast<std::uint64_t>(values.size()));
    ctx.note("failed_points", errors);
}

// ---------------------------------------------------------------------------
// witness

inline void cmd_witness(RunContext& ctx) {
    const Config& cfg = ctx.config();
    const FitnessSpec fitness = parse_fitness(cfg);
    const WeightSpec weights = parse_weights(cfg);
    const SequencePlan plan = parse_plan(cfg);
    const int target = cfg.get_int("witness.depth_target", 10);
    if (target < 1) throw ConfigError("witness.depth_target", "must be >= 1");
    if (target > plan.i_max) throw ConfigError("witness.depth_target", "must not exceed plan.i_max");
    const std::uint64_t reps = ctx.replicates(1000);
    cfg.require_all_used();

    std::vector<WitnessResult> results(reps);
    parallel_for(reps, ctx.threads(), [&](std::size_t i) {
        Rng rng(ctx.seed_for(i));
        results[i] = greedy_path_witness(fitness, weights, plan, target, rng);
        std::uint64_t examined = 0;
        for (const auto& l : results[i].levels) examined += l.examined;
        ctx.add_events(examined);
    });

    const double bound = plan.t_sum(target);
    std::uint64_t shallow = 0, reached = 0;
    bool within = true;
    double longest = 0.0;
    ctx.write("witness.csv", [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row("replicate", "depth", "elapsed", "time_bound", "examined");
        for (std::size_t i = 0; i < reps; ++i) {
            const WitnessResult& w = results[i];
            std::uint64_t examined = 0;
            for (const auto& l : w.levels) examined += l.examined;
            const double b = plan.t_sum(std::max(w.depth, 1));
            csv.row(static_cast<std::uint64_t>(i), w.depth, w.elapsed, b, examined);
            shallow += w.depth <= 1;
            reached += w.depth >= target;
            within = within && w.elapsed <= b;
            longest = std::max(longest, w.elapsed);
        }
    });
    ctx.note("replicates", reps);
    ctx.note("depth_target", target);
    ctx.note("fraction_depth_at_most_1", static_cast<double>(shallow) / static_cast<double>(reps));
    ctx.note("fraction_reaching_target", static_cast<double>(reached) / static_cast<double>(reps));
    ctx.note("max_elapsed", longest);
    ctx.note("time_bound", bound);
    ctx.note("all_within_time_bound", within);
}

// ---------------------------------------------------------------------------

/// Runs one command end to end. Throws ConfigError for configuration
/// problems and other exceptions for runtime failures.
inline RunOutcome run_command(const RunRequest& req) {
    using Cmd = void (*)(RunContext&);
    static const std::map<std::string, Cmd> table = {
        {"tree-grow", &cmd_tree_grow}, {"cmj-run", &cmd_cmj_run},       {"birth-moments", &cmd_birth_moments},
        {"criterion", &cmd_criterion}, {"classify", &cmd_classify}, {"phase-sweep", &cmd_phase_sweep},
        {"witness", &cmd_witness}};
    const auto it = table.find(req.command);
    if (it == table.end()) throw ConfigError("command", "unknown command '" + req.command + "'");

    const auto start = std::chrono::steady_clock::now();
    RunContext ctx(req);
    std::error_code ec;
    std::filesystem::create_directories(req.out, ec);
    if (ec || !std::filesystem::is_directory(req.out))
        throw std::runtime_error("cannot create output directory " + req.out.string());
    it->second(ctx);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    return ctx.finish(wall.count());
}

}  // namespace cmj
