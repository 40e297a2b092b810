#include "isinglab/experiments.hpp"

#include "isinglab/cftp.hpp"
#include "isinglab/constants.hpp"
#include "isinglab/es_coupling.hpp"
#include "isinglab/fk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace isinglab {

ScalingFit fit_loglog(const std::vector<ScalingPoint>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_loglog: need >= 3 points");
    std::vector<double> x, y, s;
    for (const auto& pt : points) {
        if (pt.value <= 0.0) throw std::invalid_argument("fit_loglog: nonpositive value");
        x.push_back(std::log(pt.n));
        y.push_back(std::log(pt.value));
        s.push_back(std::max(pt.se / pt.value, 1e-6));
    }
    LineFit lf = weighted_line_fit(x, y, s);
    ScalingFit out;
    out.points = points;
    out.slope = lf.slope;
    out.intercept = lf.intercept;
    out.slope_se = lf.slope_se;
    return out;
}

std::pair<int, int> lambda_star_range(int n) {
    int lo = (n + 3) / 4;        // ceil(n/4)
    int hi = (3 * n) / 4;        // floor(3n/4)
    return {lo, hi};
}

VarianceScalingResult variance_scaling(const std::vector<int>& n_list, const std::string& bc_spec,
                                       long samples, const RandomSource& rng, double beta) {
    VarianceScalingResult result;
    double p = beta_to_p(beta);
    RateFamily fam = RateFamily::heat_bath(beta);
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        int n = n_list[ni];
        Box box = build_box(n, n, bc_spec);
        const Lattice& lat = box.lat;
        WiringPartition wiring = wiring_from_bc(lat, box.bc);
        bool forced = wiring.classes.size() == 2 &&
                      !(wiring.classes[0].empty() && wiring.classes[1].empty());
        bool conditioned = forced && !wiring.classes[0].empty() && !wiring.classes[1].empty();
        auto [lo, hi] = lambda_star_range(n);
        std::vector<std::uint8_t> in_star(lat.n_interior, 0);
        for (int y = lo; y <= hi; ++y)
            for (int x = lo; x <= hi; ++x) in_star[lat.interior_id(x, y)] = 1;

        RandomSource chain = rng.fork(7000 + ni);
        // Sampling route: equilibrated sweeps when A^xi is vacuous; exact
        // conditioned draws otherwise (feasible only at small sizes).
        FkSampler sweeper(lat, wiring, p);
        std::unique_ptr<ConditionedFkSampler> cond;
        BondConfig omega = BondConfig::all_open(lat);
        std::uint64_t sweep_idx = 0;
        if (conditioned) {
            cond = std::make_unique<ConditionedFkSampler>(lat, box.bc, p);
        } else {
            int burn = std::max(200, 2 * n);
            for (int b = 0; b < burn; ++b) sweeper.sweep(omega, chain, sweep_idx++);
        }

        double sum_v = 0, sum_v2 = 0, sum_d = 0, sum_d2 = 0, sum_f = 0, sum_f2 = 0, max_d = 0;
        std::vector<long long> star_count(lat.n_sites, 0);
        for (long s = 0; s < samples; ++s) {
            if (conditioned) {
                omega = cond->sample(chain, static_cast<std::uint64_t>(s));
            } else {
                sweeper.sweep(omega, chain, sweep_idx++);
                sweeper.sweep(omega, chain, sweep_idx++);
            }
            ClusterStructure cs = count_clusters(lat, omega, wiring).second;
            // E[f^2 | omega] = sum over clusters of |C cap Lambda*|^2 when no
            // cluster has a forced spin (Rao-Blackwellized estimator).
            std::fill(star_count.begin(), star_count.end(), 0);
            for (int i = 0; i < lat.n_interior; ++i)
                if (in_star[i]) ++star_count[cs.find(i)];
            double v = 0.0;
            for (int i = 0; i < lat.n_sites; ++i)
                if (star_count[i]) v += static_cast<double>(star_count[i]) * star_count[i];
            SpinConfig sigma = forced ? ising_from_fk_forced(lat, omega, wiring, chain, s)
                                      : ising_from_fk(lat, omega, wiring, chain, s);
            double f = 0.0, d = 0.0;
            for (int i = 0; i < lat.n_interior; ++i)
                if (in_star[i]) {
                    f += sigma.s[i];
                    d += 2.0 * flip_rate(fam, lat, box.bc, sigma, i);
                }
            if (forced) v = f * f; // second moment; mean is subtracted below
            sum_v += v;
            sum_v2 += v * v;
            sum_d += d;
            sum_d2 += d * d;
            sum_f += f;
            sum_f2 += f * f;
            max_d = std::max(max_d, d);
        }
        auto mean_se = [&](double sum, double sum2) {
            double m = sum / samples;
            double var = std::max(0.0, sum2 / samples - m * m);
            return std::pair<double, double>{m, std::sqrt(var / samples)};
        };
        VarianceScalingRow row;
        row.n = n;
        row.samples = samples;
        std::tie(row.var_f, row.var_se) = mean_se(sum_v, sum_v2);
        std::tie(row.dirichlet, row.dirichlet_se) = mean_se(sum_d, sum_d2);
        std::tie(row.mean_f, row.mean_f_se) = mean_se(sum_f, sum_f2);
        if (forced) row.var_f -= row.mean_f * row.mean_f;
        row.max_dirichlet_sample = max_d;
        row.lambda_star_lo = lo;
        row.lambda_star_hi = hi;
        result.rows.push_back(row);
    }
    std::vector<ScalingPoint> var_pts, ratio_pts;
    for (const auto& r : result.rows) {
        var_pts.push_back({static_cast<double>(r.n), r.var_f, r.var_se});
        double ratio = r.var_f / r.dirichlet;
        double rel = std::sqrt(std::pow(r.var_se / r.var_f, 2) + std::pow(r.dirichlet_se / r.dirichlet, 2));
        ratio_pts.push_back({static_cast<double>(r.n), ratio, ratio * rel});
    }
    result.var_fit = fit_loglog(var_pts);
    result.ratio_fit = fit_loglog(ratio_pts);
    return result;
}

AutocorrResult autocorr_exponent(int n, long sweeps, const RandomSource& rng, double beta) {
    if (sweeps < 10000) throw std::invalid_argument("autocorr_exponent: need >= 1e4 sweeps");
    Box box = build_box(n, n, "periodic");
    const Lattice& lat = box.lat;
    RateFamily fam = RateFamily::heat_bath(beta);
    ChainState state{SpinConfig::constant(lat, 1), 0.0};
    RandomSource chain = rng.fork(41);

    const long burn = 100L * n * n;
    const long burn_updates = burn * lat.n_interior;
    for (long u = 0; u < burn_updates; ++u) random_scan_step(state, fam, lat, box.bc, chain);

    // Packed snapshots once per sweep; log-spaced lag set.
    std::vector<double> lags_d = {1, 2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256};
    std::vector<int> lags(lags_d.begin(), lags_d.end());
    int max_lag = lags.back();
    const int words = (lat.n_interior + 63) / 64;
    std::vector<std::uint64_t> ring(static_cast<std::size_t>(max_lag + 1) * words, 0);
    std::vector<double> acc(lags.size(), 0.0);
    std::vector<long> cnt(lags.size(), 0);

    auto pack = [&](std::uint64_t* dst) {
        for (int w = 0; w < words; ++w) dst[w] = 0;
        for (int i = 0; i < lat.n_interior; ++i)
            if (state.sigma.s[i] > 0) dst[i >> 6] |= (std::uint64_t{1} << (i & 63));
    };

    const long per_sweep = lat.n_interior;
    for (long t = 0; t < sweeps; ++t) {
        for (long u = 0; u < per_sweep; ++u) random_scan_step(state, fam, lat, box.bc, chain);
        std::uint64_t* slot = &ring[static_cast<std::size_t>(t % (max_lag + 1)) * words];
        pack(slot);
        for (std::size_t li = 0; li < lags.size(); ++li) {
            int lag = lags[li];
            if (t < lag) continue;
            const std::uint64_t* past = &ring[static_cast<std::size_t>((t - lag) % (max_lag + 1)) * words];
            int agree = 0;
            for (int w = 0; w < words; ++w) agree += __builtin_popcountll(~(slot[w] ^ past[w]));
            agree -= 64 * words - lat.n_interior; // padding bits always agree
            acc[li] += 2.0 * agree - lat.n_interior;
            ++cnt[li];
        }
    }

    AutocorrResult out;
    std::vector<double> xs_pow, ys_pow, xs_exp, ys_exp;
    for (std::size_t li = 0; li < lags.size(); ++li) {
        double c = acc[li] / (cnt[li] * static_cast<double>(lat.n_interior));
        out.lag_sweeps.push_back(lags[li]);
        out.corr.push_back(c);
        // fit window: clear of the statistical noise floor
        if (c > 1e-3 && lags[li] >= 2 && lags[li] <= 64) {
            xs_pow.push_back(std::log(static_cast<double>(lags[li])));
            ys_pow.push_back(std::log(c));
            xs_exp.push_back(static_cast<double>(lags[li]));
            ys_exp.push_back(std::log(c));
        }
    }
    if (xs_pow.size() < 4) throw std::runtime_error("autocorr_exponent: fit window underpopulated");
    std::vector<double> ones(xs_pow.size(), 1.0);
    LineFit fp = weighted_line_fit(xs_pow, ys_pow, ones);
    LineFit fe = weighted_line_fit(xs_exp, ys_exp, ones);
    out.exponent = -fp.slope;
    double resid = fp.chi2 / std::max<std::size_t>(1, xs_pow.size() - 2);
    out.se = fp.slope_se * std::sqrt(std::max(resid, 1e-30));
    out.power_law_preferred = fp.chi2 <= fe.chi2;
    return out;
}

CoalescenceResult coalescence_scaling(const std::vector<int>& n_list, const std::string& bc_spec,
                                      long reps, double beta, const RandomSource& rng) {
    if (reps < 30) throw std::invalid_argument("coalescence_scaling: need >= 30 reps per size");
    CoalescenceResult result;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        int n = n_list[ni];
        Box box = build_box(n, n, bc_spec);
        std::vector<double> sweeps(reps, 0.0);
        std::vector<double> updates(reps, 0.0);
        parallel_chains(reps, [&](long rep) {
            CftpResult res =
                cftp_sample(box.lat, box.bc, beta, rng.fork(1000000 * (ni + 1) + rep));
            sweeps[rep] = res.sweeps_to_coalesce;
            updates[rep] = static_cast<double>(res.updates);
        });
        double m = 0, m2 = 0, mu = 0;
        for (long i = 0; i < reps; ++i) {
            m += sweeps[i];
            m2 += sweeps[i] * sweeps[i];
            mu += updates[i];
        }
        m /= reps;
        m2 /= reps;
        mu /= reps;
        CoalescenceRow row;
        row.n = n;
        row.reps = reps;
        row.mean_sweeps = m;
        row.se = std::sqrt(std::max(0.0, m2 - m * m) / reps);
        row.mean_updates = mu;
        result.rows.push_back(row);
    }
    std::vector<ScalingPoint> pts;
    for (const auto& r : result.rows)
        pts.push_back({static_cast<double>(r.n), r.mean_sweeps, std::max(r.se, 1e-9)});
    result.fit = fit_loglog(pts);
    return result;
}

std::pair<SpinConfig, BoundaryCondition> antiferro_map(const Lattice& lat, const BoundaryCondition& bc,
                                                       const SpinConfig& sigma) {
    SpinConfig out = sigma;
    for (int i = 0; i < lat.n_interior; ++i) {
        const Coord c = lat.coords[i];
        if ((c.x + c.y) & 1) out.s[i] = static_cast<std::int8_t>(-out.s[i]);
    }
    BoundaryCondition nbc = bc;
    for (int s = lat.n_interior; s < lat.n_sites; ++s) {
        const Coord c = lat.coords[s];
        if ((c.x + c.y) & 1) nbc.spin[s - lat.n_interior] = static_cast<std::int8_t>(-nbc.spin[s - lat.n_interior]);
    }
    nbc.label = "antiferro(" + bc.label + ")";
    return {std::move(out), std::move(nbc)};
}

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    cfg.beta = beta_critical;
    for (const auto& [k, v] : kv) {
        if (k == "experiment") cfg.experiment = v;
        else if (k == "size") {
            auto xpos = v.find('x');
            cfg.r = std::stoi(v.substr(0, xpos));
            cfg.r_prime = (xpos == std::string::npos) ? cfg.r : std::stoi(v.substr(xpos + 1));
        } else if (k == "bc") cfg.bc_spec = v;
        else if (k == "beta") cfg.beta = std::stod(v);
        else if (k == "seed") cfg.seed = std::stoull(v);
        else if (k == "samples") cfg.samples = std::stol(v);
        else if (k == "burnin") cfg.burn_in = std::stol(v);
        else if (k == "out") cfg.out = v;
        else throw std::invalid_argument("config: unknown key '" + k + "'");
    }
    return cfg;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        std::string t;
        for (char c : line)
            if (c != ' ' && c != '\t' && c != '\r') t.push_back(c);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config: line without '=' (" + line + ")");
        kv[t.substr(0, eq)] = t.substr(eq + 1);
    }
    return kv;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream out;
    for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    write_text_atomic(path, out.str());
}

int thread_cap() {
    if (const char* env = std::getenv("ISING_LAB_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

void parallel_chains(long n_tasks, const std::function<void(long)>& fn) {
    int threads = std::min<long>(thread_cap(), n_tasks);
    if (threads <= 1) {
        for (long i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t]() {
            for (long i = t; i < n_tasks; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace isinglab
