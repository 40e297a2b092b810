// ising-lab: experiment front door for the critical Ising / FK simulation
// laboratory. Every output is a pure function of the configuration; results
// are CSV with a one-line header plus a key = value manifest.

#include "isinglab/blocks.hpp"
#include "isinglab/cftp.hpp"
#include "isinglab/constants.hpp"
#include "isinglab/crossing.hpp"
#include "isinglab/es_coupling.hpp"
#include "isinglab/experiments.hpp"
#include "isinglab/exposure.hpp"
#include "isinglab/fk.hpp"
#include "isinglab/glauber.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/lattice.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace isinglab;

namespace {

struct CommonArgs {
    std::string size = "8";
    std::string bc = "free";
    double beta = beta_critical;
    std::uint64_t seed = 1;
    long samples = 1000;
    long burnin = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--size", a.size, "lattice size R or RxR'");
    cmd->add_option("--bc", a.bc, "boundary condition spec");
    cmd->add_option("--beta", a.beta, "inverse temperature (default: critical)");
    cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--samples", a.samples, "number of samples");
    cmd->add_option("--burnin", a.burnin, "burn-in sweeps (0 = experiment default)");
    cmd->add_option("--out", a.out, "output CSV path (default: stdout)");
    cmd->set_config("--config");
}

std::pair<int, int> parse_size(const std::string& s) {
    auto xpos = s.find('x');
    int r = std::stoi(s.substr(0, xpos));
    int rp = (xpos == std::string::npos) ? r : std::stoi(s.substr(xpos + 1));
    return {r, rp};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const CommonArgs& a, const std::string& experiment, const std::string& csv,
          double wall_ms, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    if (a.out.empty()) {
        std::cout << csv;
        return;
    }
    write_text_atomic(a.out, csv);
    std::vector<std::pair<std::string, std::string>> kv = {
        {"experiment", experiment}, {"size", a.size},
        {"bc", a.bc},               {"beta", fmt(a.beta)},
        {"seed", std::to_string(a.seed)}, {"samples", std::to_string(a.samples)},
        {"burnin", std::to_string(a.burnin)}, {"out", a.out},
        {"code_version", "ising-lab 0.1.0"},  {"wall_time_ms", fmt(wall_ms)},
    };
    kv.insert(kv.end(), extra.begin(), extra.end());
    write_manifest(a.out + ".manifest", kv);
}

class Timer {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
    }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical Ising / FK simulation laboratory"};
    app.require_subcommand(1);

    CommonArgs a;

    // exact-check ------------------------------------------------------
    auto* cmd_exact = app.add_subcommand("exact-check", "small-lattice exact identities");
    add_common(cmd_exact, a);
    cmd_exact->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        if (box.lat.n_interior > 12) throw CLI::ValidationError("exact-check needs <= 12 sites");
        RateFamily fam = RateFamily::heat_bath(a.beta);
        ExactDistribution mu = gibbs_exact(box.lat, box.bc, a.beta);
        Mat gen = generator_matrix(box.lat, box.bc, fam);
        std::vector<double> pi = stationary_vector(gen);
        double linf = 0.0;
        for (std::size_t i = 0; i < mu.p.size(); ++i) linf = std::max(linf, std::fabs(pi[i] - mu.p[i]));
        double gap = exact_generator_gap(box.lat, box.bc, fam);
        double gap2 = dirichlet_gap_infimum(box.lat, box.bc, fam, mu);
        std::ostringstream csv;
        csv << "check,value,threshold,pass\n";
        csv << "stationary_linf," << fmt(linf) << ",1e-10," << (linf < 1e-10) << "\n";
        csv << "gap_vs_dirichlet," << fmt(std::fabs(gap - gap2)) << ",1e-8,"
            << (std::fabs(gap - gap2) < 1e-8) << "\n";
        csv << "gap," << fmt(gap) << ",,1\n";
        emit(a, "exact-check", csv.str(), t.ms());
    });

    // sample -----------------------------------------------------------
    long stride = 1;
    auto* cmd_sample = app.add_subcommand("sample", "Glauber trajectory (heat-bath random scan)");
    add_common(cmd_sample, a);
    cmd_sample->add_option("--stride", stride, "sweeps between records");
    cmd_sample->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        RateFamily fam = RateFamily::heat_bath(a.beta);
        RandomSource rng(a.seed);
        ChainState st{SpinConfig::constant(box.lat, 1), 0.0};
        long burn = a.burnin > 0 ? a.burnin : 100L * r * r;
        for (long s = 0; s < burn; ++s)
            for (int u = 0; u < box.lat.n_interior; ++u) random_scan_step(st, fam, box.lat, box.bc, rng);
        std::ostringstream csv;
        csv << "sweep,magnetization,energy\n";
        for (long s = 0; s < a.samples; ++s) {
            for (long k = 0; k < stride; ++k)
                for (int u = 0; u < box.lat.n_interior; ++u)
                    random_scan_step(st, fam, box.lat, box.bc, rng);
            csv << fmt(st.sweeps) << "," << magnetization(st.sigma) << ","
                << -interaction_sum(box.lat, box.bc, st.sigma) << "\n";
        }
        emit(a, "sample", csv.str(), t.ms());
    });

    // fk-sample ----------------------------------------------------------
    std::string wiring_out;
    auto* cmd_fk = app.add_subcommand("fk-sample", "equilibrated FK configuration snapshot");
    add_common(cmd_fk, a);
    cmd_fk->add_option("--wiring-out", wiring_out, "write the boundary wiring dump to this path");
    cmd_fk->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
        double p = beta_to_p(a.beta);
        FkSampler sampler(box.lat, wiring, p);
        BondConfig omega = BondConfig::all_open(box.lat);
        RandomSource rng(a.seed);
        long burn = a.burnin > 0 ? a.burnin : 200;
        std::uint64_t idx = 0;
        for (long s = 0; s < burn + a.samples; ++s) sampler.sweep(omega, rng, idx++);
        std::ostringstream csv;
        csv << "edge,open\n";
        for (std::size_t e = 0; e < omega.open.size(); ++e)
            csv << e << "," << int(omega.open[e]) << "\n";
        if (!wiring_out.empty()) write_text_atomic(wiring_out, wiring_dump(wiring));
        emit(a, "fk-sample", csv.str(), t.ms(),
             {{"open_fraction", fmt(double(omega.open_count()) / omega.open.size())}});
    });

    // cftp ---------------------------------------------------------------
    auto* cmd_cftp = app.add_subcommand("cftp", "perfect samples by coupling from the past");
    add_common(cmd_cftp, a);
    cmd_cftp->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        RandomSource rng(a.seed);
        std::ostringstream csv;
        csv << "n,bc,seed,sweeps_to_coalesce,updates\n";
        for (long s = 0; s < a.samples; ++s) {
            CftpResult res = cftp_sample(box.lat, box.bc, a.beta, rng.fork(s));
            csv << r << "," << box.bc.label << "," << s << "," << fmt(res.sweeps_to_coalesce) << ","
                << res.updates << "\n";
        }
        emit(a, "cftp", csv.str(), t.ms());
    });

    // crossing -------------------------------------------------------------
    auto* cmd_cross = app.add_subcommand("crossing", "vertical crossing probability estimate");
    add_common(cmd_cross, a);
    cmd_cross->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        EstimateOptions opt;
        if (a.burnin > 0) opt.initial_burn_in = static_cast<int>(a.burnin);
        CrossingReport rep =
            estimate_crossing(r, rp, a.bc, beta_to_p(a.beta), a.samples, RandomSource(a.seed), opt);
        std::ostringstream csv;
        csv << "r,rho,bc,p,samples,estimate,stderr\n";
        csv << rep.r << "," << fmt(rep.rho) << "," << rep.bc << "," << fmt(rep.p) << "," << rep.samples
            << "," << fmt(rep.estimate) << "," << fmt(rep.std_error) << "\n";
        emit(a, "crossing", csv.str(), t.ms(),
             {{"burn_in_used", std::to_string(rep.burn_in_used)}});
    });

    // strip-decay -----------------------------------------------------------
    std::string rhos = "1,2,3";
    auto* cmd_strip = app.add_subcommand("strip-decay", "crossing decay over strips of growing height");
    add_common(cmd_strip, a);
    cmd_strip->add_option("--rhos", rhos, "comma-separated aspect ratios");
    cmd_strip->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        (void)rp;
        std::vector<double> rho_list;
        std::stringstream ss(rhos);
        std::string tok;
        while (std::getline(ss, tok, ',')) rho_list.push_back(std::stod(tok));
        EstimateOptions opt;
        if (a.burnin > 0) opt.initial_burn_in = static_cast<int>(a.burnin);
        auto reports =
            strip_decay_profile(r, rho_list, a.bc, beta_to_p(a.beta), a.samples, RandomSource(a.seed), opt);
        std::ostringstream csv;
        csv << "r,rho,bc,p,samples,estimate,stderr\n";
        for (const auto& rep : reports)
            csv << rep.r << "," << fmt(rep.rho) << "," << rep.bc << "," << fmt(rep.p) << ","
                << rep.samples << "," << fmt(rep.estimate) << "," << fmt(rep.std_error) << "\n";
        emit(a, "strip-decay", csv.str(), t.ms());
    });

    // couple ------------------------------------------------------------------
    std::string eta_spec = "all:+";
    double rho_confine = 1.0;
    bool two_sided = false;
    auto* cmd_couple = app.add_subcommand("couple", "grand-coupling exposure runs");
    add_common(cmd_couple, a);
    cmd_couple->add_option("--eta", eta_spec, "second boundary condition");
    cmd_couple->add_option("--rho", rho_confine, "confinement aspect parameter");
    cmd_couple->add_flag("--two-sided", two_sided, "grow from the top boundary as well");
    cmd_couple->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box bx = build_box(r, rp, a.bc);
        Box be = build_box(r, rp, eta_spec);
        RandomSource rng(a.seed);
        std::ostringstream csv;
        csv << "seed,T,xi_size,max_height,confined,dominated,agreed_on_tail\n";
        int y0 = static_cast<int>(std::ceil(rho_confine * r - 1e-9));
        std::string mode;
        try {
            ExposureOptions eopt;
            eopt.two_sided = two_sided;
            ExposureRunner runner(bx.lat, bx.bc, be.bc, eopt);
            mode = runner.conditioned_legs_enabled() ? "coupled" : "wired-only";
            // agreement region: rows >= y0 one-sided, the symmetric middle
            // band for two-sided runs
            const int y_hi = two_sided ? rp + 1 - y0 : rp;
            for (long s = 0; s < a.samples; ++s) {
                GrandCoupling gc = runner.run(rng, static_cast<std::uint64_t>(s));
                long xi_size = 0;
                for (auto v : gc.exposure.in_xi) xi_size += v;
                bool conf = xi_confined(bx.lat, gc, rho_confine);
                if (two_sided) conf = conf && gc.exposure.min_height_from_top > y_hi;
                bool dom = check_domination(gc);
                int agreed = -1;
                if (gc.conditioned_legs && y0 <= y_hi) {
                    auto [sx, se] = couple_remainder(bx.lat, gc, runner.wiring_xi(),
                                                     runner.wiring_eta(), rng,
                                                     static_cast<std::uint64_t>(s));
                    agreed = 1;
                    for (int y = y0; y <= y_hi && agreed; ++y)
                        for (int x = 1; x <= r; ++x)
                            if (sx.s[bx.lat.interior_id(x, y)] != se.s[bx.lat.interior_id(x, y)]) {
                                agreed = 0;
                                break;
                            }
                }
                csv << s << "," << gc.exposure.T << "," << xi_size << "," << gc.exposure.max_height
                    << "," << conf << "," << dom << "," << agreed << "\n";
            }
        } catch (const std::invalid_argument&) {
            // Too wide for exact sequential conditionals: sample omega^1 at
            // equilibrium and report the cluster statistics of Xi only.
            mode = "equilibrium-xi";
            WiringPartition wired = WiringPartition::wired(bx.lat);
            FkSampler sampler(bx.lat, wired, beta_to_p(a.beta));
            BondConfig omega = BondConfig::all_open(bx.lat);
            std::uint64_t idx = 0;
            long burn = a.burnin > 0 ? a.burnin : 200;
            for (long b = 0; b < burn; ++b) sampler.sweep(omega, rng, idx++);
            std::vector<std::uint8_t> in_xi(bx.lat.n_sites);
            std::vector<int> stack;
            for (long s = 0; s < a.samples; ++s) {
                sampler.sweep(omega, rng, idx++);
                sampler.sweep(omega, rng, idx++);
                std::fill(in_xi.begin(), in_xi.end(), 0);
                stack.clear();
                int max_h = 0;
                for (int x = 1; x <= r; ++x)
                    if (bx.lat.bottom_id[x - 1] >= 0) {
                        in_xi[bx.lat.bottom_id[x - 1]] = 1;
                        stack.push_back(bx.lat.bottom_id[x - 1]);
                    }
                while (!stack.empty()) {
                    int site = stack.back();
                    stack.pop_back();
                    max_h = std::max(max_h, bx.lat.coords[site].y);
                    for (int k = bx.lat.incident_offset[site]; k < bx.lat.incident_offset[site + 1];
                         ++k) {
                        if (!omega.open[bx.lat.incident_edge[k]]) continue;
                        int o = bx.lat.incident_other[k];
                        if (!in_xi[o]) {
                            in_xi[o] = 1;
                            stack.push_back(o);
                        }
                    }
                }
                long xi_size = 0;
                for (auto v : in_xi) xi_size += v;
                bool conf = max_h < rho_confine * r;
                csv << s << ",-1," << xi_size << "," << max_h << "," << conf << ",-1,-1\n";
            }
        }
        emit(a, "couple", csv.str(), t.ms(), {{"eta", eta_spec}, {"mode", mode}});
    });

    // block-gap -----------------------------------------------------------------
    int ell = 1;
    auto* cmd_block = app.add_subcommand("block-gap", "two-block coalescence probability");
    add_common(cmd_block, a);
    cmd_block->add_option("--ell", ell, "block shift parameter");
    cmd_block->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        BlockCouplingEstimate est =
            block_coupling_probability(box.lat, box.bc, a.beta, ell, a.samples, RandomSource(a.seed));
        std::ostringstream csv;
        csv << "r,rprime,ell,samples,coalesce_prob,stderr\n";
        csv << r << "," << rp << "," << ell << "," << est.samples << "," << fmt(est.probability) << ","
            << fmt(est.std_error) << "\n";
        emit(a, "block-gap", csv.str(), t.ms());
    });

    // autocorr ---------------------------------------------------------------------
    auto* cmd_auto = app.add_subcommand("autocorr", "critical spin autocorrelation exponent (torus)");
    add_common(cmd_auto, a);
    cmd_auto->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        (void)rp;
        AutocorrResult res = autocorr_exponent(r, a.samples, RandomSource(a.seed), a.beta);
        std::ostringstream csv;
        csv << "lag_sweeps,corr\n";
        for (std::size_t i = 0; i < res.corr.size(); ++i)
            csv << fmt(res.lag_sweeps[i]) << "," << fmt(res.corr[i]) << "\n";
        emit(a, "autocorr", csv.str(), t.ms(),
             {{"exponent", fmt(res.exponent)},
              {"exponent_se", fmt(res.se)},
              {"power_law_preferred", res.power_law_preferred ? "1" : "0"}});
    });

    // var-scale / gap-lb --------------------------------------------------------------
    std::string sizes = "8,16,32";
    for (const char* name : {"var-scale", "gap-lb"}) {
        auto* cmd = app.add_subcommand(
            name, std::string(name) == "var-scale"
                      ? "variance of the central magnetization vs n (target slope 15/4)"
                      : "Var(f)/E(f) scaling, a lower-bound exponent for gap^-1 (target 7/4)");
        add_common(cmd, a);
        cmd->add_option("--sizes", sizes, "comma-separated n list");
        bool is_var = std::string(name) == "var-scale";
        cmd->callback([&, is_var]() {
            Timer t;
            std::vector<int> ns;
            std::stringstream ss(sizes);
            std::string tok;
            while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
            VarianceScalingResult res =
                variance_scaling(ns, a.bc, a.samples, RandomSource(a.seed), a.beta);
            std::ostringstream csv;
            csv << "n,samples,var_f,var_se,dirichlet,dirichlet_se,mean_f,mean_f_se,max_dirichlet\n";
            for (const auto& row : res.rows)
                csv << row.n << "," << row.samples << "," << fmt(row.var_f) << "," << fmt(row.var_se)
                    << "," << fmt(row.dirichlet) << "," << fmt(row.dirichlet_se) << ","
                    << fmt(row.mean_f) << "," << fmt(row.mean_f_se) << ","
                    << fmt(row.max_dirichlet_sample) << "\n";
            const ScalingFit& fit = is_var ? res.var_fit : res.ratio_fit;
            emit(a, is_var ? "var-scale" : "gap-lb", csv.str(), t.ms(),
                 {{"slope", fmt(fit.slope)}, {"slope_se", fmt(fit.slope_se)}});
        });
    }

    // antiferro-check ---------------------------------------------------------------------
    auto* cmd_af = app.add_subcommand("antiferro-check", "exact anti-ferromagnetic measure transport");
    add_common(cmd_af, a);
    cmd_af->callback([&]() {
        Timer t;
        auto [r, rp] = parse_size(a.size);
        Box box = build_box(r, rp, a.bc);
        if (box.lat.n_interior > 16) throw CLI::ValidationError("antiferro-check needs <= 16 sites");
        ExactDistribution mu_plus = gibbs_exact(box.lat, box.bc, a.beta);
        auto [sigma0, bc_m] = antiferro_map(box.lat, box.bc, SpinConfig::constant(box.lat, 1));
        (void)sigma0;
        ExactDistribution mu_minus = gibbs_exact(box.lat, bc_m, -a.beta);
        double max_err = 0.0;
        for (std::uint32_t m = 0; m < mu_plus.p.size(); ++m) {
            SpinConfig s = spins_from_mask(box.lat, m);
            auto [sm, bc2] = antiferro_map(box.lat, box.bc, s);
            (void)bc2;
            max_err = std::max(max_err, std::fabs(mu_plus.p[m] - mu_minus.p[mask_of(sm)]));
        }
        std::ostringstream csv;
        csv << "check,value,threshold,pass\n";
        csv << "measure_transport_linf," << fmt(max_err) << ",1e-12," << (max_err < 1e-12) << "\n";
        emit(a, "antiferro-check", csv.str(), t.ms());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
