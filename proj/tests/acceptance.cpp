// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorasim/config.hpp"
#include "lorasim/energy.hpp"
#include "lorasim/metrics.hpp"
#include "lorasim/netsim.hpp"
#include "lorasim/policies.hpp"
#include "lorasim/rng.hpp"
#include "lorasim/sweep.hpp"

using namespace lorasim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  criterion %d  %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Step-by-step UCB1-tuned evaluator, written out longhand.
struct Ucb {
    static double bound(double sigma2, double s, double m) {
        const double log_m = std::log(m);
        const double ratio = 2.0 * log_m / s;
        const double root = std::sqrt(ratio);
        return sigma2 + root;
    }
    static double score(double c, double sigma2, double s, double m) {
        const double mean = c / s;
        double v = bound(sigma2, s, m);
        if (v > 0.25) v = 0.25;
        const double width = std::log(m) / s * v;
        return mean + std::sqrt(width);
    }
};

// 1. Airtime for SF7 / 125 kHz / 8 preamble / 36 payload symbols.
void airtime() {
    const double t_sym = 128.0 / 125000.0;           // 2^7 / BW = 1.024 ms
    const double want = (4.25 + 8.0) * t_sym + 36.0 * t_sym;  // 12.544 + 36.864 ms
    const auto got = time_on_air(RadioConfig{7, 125000, 8, 36});
    const double err = std::max(rel_err(got.t_toa, want), rel_err(got.t_toa, 0.049408));
    report(1, "airtime oracle", err <= 1e-12,
           "t_toa=" + fmt("%.9g", got.t_toa * 1e3) + " ms, rel err " + fmt("%.2e", err));
}

// 2. Score and variance bound against the longhand evaluator on random tuples.
void ucb_oracle() {
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double s = 1.0 + std::floor(frac(gen) * 500.0);
        const double m = s + std::floor(frac(gen) * 5000.0);
        const double c = frac(gen) * s;
        const double sigma2 = frac(gen) * 0.3;
        worst = std::max(worst, rel_err(ucb_score(c, sigma2, s, m), Ucb::score(c, sigma2, s, m)));
        worst = std::max(worst, rel_err(ucb_variance(sigma2, s, m), Ucb::bound(sigma2, s, m)));
    }
    report(2, "UCB oracle", worst <= 1e-12, "1000 tuples, max rel err " + fmt("%.2e", worst));
}

// 3. Replays a default run's log: initialization covers each arm once, afterwards every
// decision is the argmax of scores recomputed from logged outcomes, and each tie-break
// equals the draw replayed from the device's stream.
void algorithm_conformance() {
    SimConfig cfg;
    cfg.policy = PolicyKind::proposed_ucb_tuned;
    cfg.devices = 30;
    const std::uint64_t seed = run_seed(1, cfg.policy, cfg.devices, 0);
    const auto res = run_simulation(cfg, seed);
    const std::size_t k = cfg.channels.size() * cfg.powers.size();
    const Micros interval = seconds_to_micros(cfg.interval_s);

    std::size_t checked = 0, ties = 0, bad = 0;
    std::string first_bad;
    for (std::size_t dev = 0; dev < cfg.devices; ++dev) {
        Rng replay(derive_seed(seed, {dev}));
        replay.uniform_index(static_cast<std::uint64_t>(interval));  // start offset

        std::vector<double> c(k, 0.0), c2(k, 0.0), s(k, 0.0);
        std::vector<bool> seen(k, false);
        std::size_t m = 0;
        for (const auto& r : res.records) {
            if (r.device != dev) continue;
            auto fail = [&](const std::string& why) {
                if (bad++ == 0) {
                    first_bad = "device " + std::to_string(dev) + " attempt " +
                                std::to_string(r.attempt) + ": " + why;
                }
            };
            if (m < k) {
                if (r.phase != Phase::initialization || seen[r.arm_index]) fail("initialization");
                seen[r.arm_index] = true;
            } else {
                std::vector<double> score(k);
                for (std::size_t a = 0; a < k; ++a) {
                    const double mean = c[a] / s[a];
                    const double var = std::max(0.0, c2[a] / s[a] - mean * mean);
                    score[a] = Ucb::score(c[a], var, s[a], static_cast<double>(m));
                }
                const double best = *std::max_element(score.begin(), score.end());
                std::vector<std::size_t> tied;
                for (std::size_t a = 0; a < k; ++a) {
                    if (score[a] == best) tied.push_back(a);
                }
                std::size_t expect = tied.front();
                if (tied.size() > 1) {
                    ++ties;
                    expect = tied[replay.uniform_index(tied.size())];
                }
                if (r.phase != Phase::learned) fail("phase");
                if (r.tie_count != tied.size()) fail("tie count");
                if (r.arm_index != expect) fail("not the argmax");
            }
            c[r.arm_index] += r.reward;
            c2[r.arm_index] += r.reward * r.reward;
            s[r.arm_index] += 1.0;
            ++m;
            ++checked;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            if (bad++ == 0) first_bad = "device " + std::to_string(dev) + " skipped an arm";
        }
    }
    report(3, "Algorithm 1 conformance", bad == 0 && checked == res.records.size(),
           std::to_string(checked) + " decisions, " + std::to_string(ties) + " ties, " +
               std::to_string(bad) + " mismatches" + (bad ? " (" + first_bad + ")" : ""));
}

// 4. 25-arm Bernoulli bandit: arm 0 pays 0.9, the rest 0.3.
void bandit_convergence() {
    const ArmSpace space(default_channels(), default_powers());
    double total = 0.0;
    const int seeds = 20;
    for (int sd = 0; sd < seeds; ++sd) {
        auto policy = make_policy(PolicyKind::proposed_ucb_tuned, space, 0, {});
        Rng rng(derive_seed(0xBA4D17, {static_cast<std::uint64_t>(sd)}));
        Rng env(derive_seed(0xE4F, {static_cast<std::uint64_t>(sd)}));
        int best = 0, window = 0;
        for (int play = 1; play <= 2000; ++play) {
            const auto d = policy->select(rng);
            const bool hit = env.uniform01() < (d.arm_index == 0 ? 0.9 : 0.3);
            policy->observe({d.arm_index, hit, hit ? 1.0 : 0.0, 0.0});
            if (play >= 500) {
                ++window;
                best += d.arm_index == 0;
            }
        }
        total += static_cast<double>(best) / window;
    }
    const double frac = total / seeds;
    report(4, "stationary bandit", frac > 0.85,
           "best-arm fraction over plays 500-2000 = " + fmt("%.4f", frac) + " (> 0.85)");
}

struct Sweep {
    fs::path dir;
    RunManifest manifest;
    std::map<std::pair<PolicyKind, std::size_t>, MetricsSummary> mean;
};

Sweep default_sweep(const fs::path& dir) {
    fs::remove_all(dir);
    Sweep s{dir, run_sweep(parse_config("{}"), dir), {}};
    for (auto& p : load_points(s.manifest)) s.mean[{p.policy, p.devices}] = p.mean;
    return s;
}

constexpr PolicyKind P = PolicyKind::proposed_ucb_tuned;
constexpr PolicyKind E = PolicyKind::epsilon_greedy;
constexpr PolicyKind A = PolicyKind::adr_lite;
constexpr PolicyKind F = PolicyKind::fixed;
const std::vector<std::size_t> kNs{10, 15, 20, 25, 30};

std::string short_name(PolicyKind k) {
    switch (k) {
        case P: return "prop";
        case E: return "eps";
        case A: return "adr";
        case F: return "fixed";
    }
    return "?";
}

// 5. Success rate falls with N and ranks proposed >= eps >= max(adr, fixed) at N = 30.
void success_trend(const Sweep& s) {
    auto sr = [&](PolicyKind k, std::size_t n) { return *s.mean.at({k, n}).success_rate; };
    bool ok = true;
    std::string detail;
    for (auto k : {P, E, A, F}) {
        int violations = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < kNs.size(); ++i) {
            const double rise = sr(k, kNs[i + 1]) - sr(k, kNs[i]);
            if (rise > 0.0) {
                ++violations;
                worst = std::max(worst, rise);
            }
        }
        const bool mono = violations == 0 || (violations == 1 && worst <= 0.02);
        ok = ok && mono;
        detail += short_name(k) + "[";
        for (auto n : kNs) detail += fmt("%.3f", sr(k, n)) + (n == 30 ? "" : " ");
        detail += mono ? "] " : "]! ";
    }
    const bool rank = sr(P, 30) >= sr(E, 30) && sr(E, 30) >= std::max(sr(A, 30), sr(F, 30));
    ok = ok && rank;
    detail += rank ? "ranking@30 ok" : "ranking@30 violated";
    report(5, "success-rate trend", ok, detail);
}

// 6. Proposed has the highest energy efficiency at every N; ADR-Lite never does.
void efficiency_trend(const Sweep& s) {
    auto ee = [&](PolicyKind k, std::size_t n) { return *s.mean.at({k, n}).energy_efficiency; };
    bool ok = true;
    std::string detail;
    for (auto n : kNs) {
        PolicyKind top = P;
        for (auto k : {E, A, F}) {
            if (ee(k, n) > ee(top, n)) top = k;
        }
        const bool proposed_top = ee(P, n) >= std::max({ee(E, n), ee(A, n), ee(F, n)});
        ok = ok && proposed_top && top != A;
        detail += "N" + std::to_string(n) + ":" + short_name(top) + fmt("(%.3e) ", ee(top, n)) +
                  "prop" + fmt("(%.3e)", ee(P, n)) + (n == 30 ? "" : "; ");
    }
    report(6, "energy-efficiency trend", ok, detail);
}

// 7. Share of successes at -3 dBm, N = 30: proposed > eps, ADR-Lite lowest of the learners.
void power_trend(const Sweep& s) {
    auto low = [&](PolicyKind k) {
        const auto& tp = s.mean.at({k, 30}).tp_ratio;
        const auto it = tp.find(-3);
        return it == tp.end() ? 0.0 : it->second;
    };
    const bool ok = low(P) > low(E) && low(A) < std::min(low(P), low(E));
    report(7, "min-power share trend", ok,
           "-3 dBm share @N=30: prop " + fmt("%.3f", low(P)) + ", eps " + fmt("%.3f", low(E)) +
               ", adr " + fmt("%.3f", low(A)) + ", fixed " + fmt("%.3f", low(F)));
}

// 8. A second identical sweep produces identical record logs and tables.
void determinism(const Sweep& a, const fs::path& dir) {
    const Sweep b = default_sweep(dir);
    std::size_t compared = 0, differ = 0;
    for (std::size_t i = 0; i < a.manifest.runs.size(); ++i) {
        const auto& ra = a.manifest.runs[i];
        const auto& rb = b.manifest.runs[i];
        ++compared;
        if (ra.records != rb.records || slurp(a.dir / ra.records) != slurp(b.dir / rb.records)) {
            ++differ;
        }
    }
    for (const auto& t : a.manifest.tables) {
        ++compared;
        if (slurp(a.dir / t) != slurp(b.dir / t)) ++differ;
    }
    const bool same_manifest = slurp(a.dir / "manifest.json") == slurp(b.dir / "manifest.json");
    report(8, "determinism", differ == 0 && same_manifest && a.manifest.runs.size() == 100,
           std::to_string(compared) + " files compared, " + std::to_string(differ) +
               " differ, manifest " + (same_manifest ? "identical" : "differs"));
}

// 9. One fixed device: every attempt lands, EE = 1 / E_Active.
void degenerate() {
    SimConfig cfg;
    cfg.policy = PolicyKind::fixed;
    cfg.devices = 1;
    const auto res = run_simulation(cfg, 99);
    const auto s = summarize(res.records);
    const auto& m = cfg.energy;
    // Device 0 sends 36 symbols at -3 dBm: 49.408 ms on air.
    const double e_active = m.e_wu + m.e_proc + m.e_r + (m.p_mcu + m.p_toa_by_level.at(-3)) * 0.049408;
    const double want = 1.0 / e_active;
    const double err = rel_err(*s.energy_efficiency, want);
    const bool ok = *s.success_rate == 1.0 && err <= 1e-12;
    report(9, "degenerate exactness", ok,
           "success " + fmt("%.6f", *s.success_rate) + ", EE " + fmt("%.12e", *s.energy_efficiency) +
               " vs 1/E_Active " + fmt("%.12e", want) + " (rel err " + fmt("%.1e", err) + ")");
}

}  // namespace

int main() {
    std::random_device rd;
    const fs::path scratch = fs::temp_directory_path() / ("lorasim_acceptance_" + std::to_string(rd()));

    airtime();
    ucb_oracle();
    algorithm_conformance();
    bandit_convergence();
    const Sweep first = default_sweep(scratch / "a");
    success_trend(first);
    efficiency_trend(first);
    power_trend(first);
    determinism(first, scratch / "b");
    degenerate();

    std::error_code ec;
    fs::remove_all(scratch, ec);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
