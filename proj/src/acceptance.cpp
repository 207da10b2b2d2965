#include "chaotherm/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include <unsupported/Eigen/MatrixFunctions>

#include "chaotherm/error.hpp"
#include "chaotherm/evolve.hpp"
#include "chaotherm/parallel.hpp"
#include "chaotherm/run.hpp"
#include "chaotherm/spectra.hpp"

namespace chaotherm {

namespace {

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Tr(A exp(-iHt) Pi exp(iHt)) by dense matrix exponential.
double brute_force(const CMatrix& H, const CMatrix& A, const CMatrix& P, double t) {
    CMatrix U = (cplx(0.0, -t) * H).exp();
    return (A * U * P * U.adjoint()).trace().real();
}

CriterionResult exactness(const AcceptanceOptions& opt) {
    CriterionResult r{1, "exactness and reality", false, "", "", "", 0.0};
    double worst_oracle = 0.0, worst_identity = 0.0, worst_t0 = 0.0;
    const std::vector<double> times{0.0, 0.1, 0.7, 1.3, 2.9, 6.0};
    for (Symmetry sym : {Symmetry::orthogonal, Symmetry::unitary}) {
        for (std::size_t n : {2u, 5u, 8u}) {
            DensityModel d;
            d.rho0 = 1.5;
            HFSpectrum sp = build_hf_spectrum(d, n, opt.seed + n);
            ResidualSpec rs;
            rs.band_halfwidth = n - 1;
            rs.rms_strength = 0.8;
            rs.symmetry = sym;
            rs.diagonal_fluctuations = true;
            CMatrix V = sample_residual(sp, rs, opt.seed + 10 * n);
            Realization real = diagonalize(sp, V);
            ObservableParams ap;
            ap.band_halfwidth = n - 1;
            ap.complex_entries = sym == Symmetry::unitary;
            Observable A = build_observable(Observable::Kind::banded_random, ap, sp, opt.seed + 3);
            StatParams pp;
            pp.windows = {IndexRange{0, n - 1}};
            pp.complex_entries = sym == Symmetry::unitary;
            StatOperator P = build_stat_operator(StatOperator::Kind::random_psd_window, pp, sp, opt.seed + 4);
            TimeGrid g;
            g.unit = TimeGrid::Unit::absolute;
            g.times = times;
            Trajectory tr = evolve_expectation(real, A, P, g);
            CMatrix H = V;
            for (std::size_t m = 0; m < n; ++m) H(m, m) += sp.levels[m];
            for (std::size_t i = 0; i < times.size(); ++i)
                worst_oracle = std::max(worst_oracle, std::abs(tr.mean[i] - brute_force(H, A.matrix, P.matrix, times[i])));
            worst_t0 = std::max(worst_t0, std::abs(tr.mean[0] - (A.matrix * P.matrix).trace().real()));
        }
        // Identity observable on a synthetic realization of moderate size.
        DensityModel d;
        d.rho0 = 10.0;
        HFSpectrum sp = build_hf_spectrum(d, 120, opt.seed);
        EnvelopeF env;
        Realization real = sample_synthetic(sp, env, sym, opt.seed + 7);
        Observable I = build_observable(Observable::Kind::identity, {}, sp, 0);
        StatParams pp;
        pp.windows = {IndexRange{40, 79}};
        pp.complex_entries = sym == Symmetry::unitary;
        StatOperator P = build_stat_operator(StatOperator::Kind::random_psd_window, pp, sp, opt.seed + 8);
        Trajectory tr = evolve_expectation(real, I, P, TimeGrid::uniform(10.0, 51, 1.0));
        for (double v : tr.mean) worst_identity = std::max(worst_identity, std::abs(v - 1.0));
    }
    r.pass = worst_oracle <= 1e-9 && worst_identity <= 1e-10 && worst_t0 <= 1e-10;
    r.measured = fmt("max |MC - expm oracle| %.2e; max |identity - 1| %.2e; max |t=0 - Tr(A Pi)| %.2e",
                     worst_oracle, worst_identity, worst_t0);
    r.expected = "<= 1e-9; <= 1e-10; <= 1e-10";
    return r;
}

CriterionResult bgs(const AcceptanceOptions& opt) {
    CriterionResult r{2, "BGS emergence", false, "", "", "", 0.0};
    RunConfig c = preset("bgs");
    c.seed = opt.seed;
    Scenario s = build_scenario(c);
    const std::size_t R = c.diagnostic_realizations;
    auto reals = parallel_map(R, opt.workers, [&](std::size_t i) { return s.ensemble.draw(c.seed, i); });
    std::vector<std::vector<double>> unfolded;
    for (const auto& x : reals) unfolded.push_back(unfold_center(x, s.ensemble.spectrum));
    NnsResult nns = nns_ks_multi(unfolded);

    DensityModel unit;
    std::vector<std::vector<double>> poisson;
    for (std::size_t i = 0; i < 6; ++i) poisson.push_back(unfold(build_hf_spectrum(unit, 1000, opt.seed + 100 + i).levels, unit));
    NnsResult pn = nns_ks_multi(poisson);

    r.pass = nns.spacings >= 5000 && nns.ks_wigner < 0.05 && pn.ks_poisson < 0.03;
    r.measured = fmt("banded N=1000: KS vs Wigner %.4f over %zu spacings; Poisson scaffold: KS vs Poisson %.4f over %zu",
                     nns.ks_wigner, nns.spacings, pn.ks_poisson, pn.spacings);
    r.expected = "KS < 0.05 over >= 5000 spacings; KS < 0.03";
    return r;
}

CriterionResult rigidity(const AcceptanceOptions& opt) {
    CriterionResult r{3, "rigidity and upbend", false, "", "", "", 0.0};
    std::vector<double> Ls;
    for (int L = 1; L <= 60; ++L) Ls.push_back(L);
    const Delta3Curve& ref = goe_delta3_reference();
    const double nd = 20.0;

    auto synthetic_curve = [&](EigenvalueModel model, std::optional<double>& upbend) {
        DensityModel d;
        d.rho0 = nd;
        const std::size_t R = 8;
        auto seqs = parallel_map(R, opt.workers, [&](std::size_t i) {
            HFSpectrum sp = build_hf_spectrum(d, 1000, opt.seed + 200 + i);
            SyntheticOptions so;
            so.eigenvalues = model;
            EnvelopeF env;
            Realization x = sample_synthetic(sp, env, Symmetry::orthogonal, realization_seed(opt.seed, i), so);
            std::vector<double> ev(x.eigenvalues.data(), x.eigenvalues.data() + x.size());
            std::vector<double> mp(x.mean_eigenvalues.data(), x.mean_eigenvalues.data() + x.size());
            return unfold_by_positions(ev, mp);
        });
        Delta3Curve c = delta3_curve(seqs, Ls);
        return compare_delta3(c, ref, 3.0, upbend);
    };

    std::optional<double> goe_up, st_up;
    auto goe = synthetic_curve(EigenvalueModel::full, goe_up);
    double goe_worst = 0.0;
    for (const auto& p : goe)
        if (p.L >= 5 && p.L <= 30) goe_worst = std::max(goe_worst, std::abs(p.value / p.reference - 1.0));
    synthetic_curve(EigenvalueModel::stitched, st_up);

    DensityModel unit;
    std::vector<std::vector<double>> poisson;
    for (std::size_t i = 0; i < 4; ++i) poisson.push_back(unfold(build_hf_spectrum(unit, 5000, opt.seed + 300 + i).levels, unit));
    Delta3Curve pc = delta3_curve(poisson, Ls);
    double p_worst = 0.0;
    for (std::size_t i = 0; i < pc.L.size(); ++i)
        if (pc.L[i] >= 5 && pc.L[i] <= 30) p_worst = std::max(p_worst, std::abs(pc.value[i] / (pc.L[i] / 15.0) - 1.0));

    const bool st_ok = st_up && *st_up >= nd / 2.0 && *st_up <= 2.0 * nd;
    r.pass = goe_worst <= 0.15 && !goe_up && st_ok && p_worst <= 0.15;
    r.measured = fmt("GOE synthetic worst rel dev (L 5..30) %.3f, upbend %s; stitched N_D=20 upbend_L %s; "
                     "Poisson worst rel dev from L/15 %.3f",
                     goe_worst, goe_up ? fmt("%.0f", *goe_up).c_str() : "none",
                     st_up ? fmt("%.0f", *st_up).c_str() : "none", p_worst);
    r.expected = "<= 0.15, none; within [10, 40]; <= 0.15";
    return r;
}

CriterionResult strength(const AcceptanceOptions& opt) {
    CriterionResult r{4, "strength function", false, "", "", "", 0.0};
    // Synthetic Gaussian envelope.
    DensityModel d;
    d.rho0 = 100.0;
    HFSpectrum sp = build_hf_spectrum(d, 1000, opt.seed + 400);
    EnvelopeF env;
    auto reals = parallel_map(50, opt.workers, [&](std::size_t i) {
        return sample_synthetic(sp, env, Symmetry::orthogonal, realization_seed(opt.seed, i));
    });
    StrengthFit sf = strength_function(reals, sp, 1.0);
    reals.clear();
    const bool synth_ok = std::abs(sf.gaussian_width - 1.0) <= 0.10 && sf.gaussian_residual < sf.lorentzian_residual;

    // Microscopic full coupling.
    RunConfig c = preset("full_coupling");
    c.seed = opt.seed;
    Scenario s = build_scenario(c);
    const double gr = s.ensemble.delta();
    auto micro = parallel_map(4, opt.workers, [&](std::size_t i) { return s.ensemble.draw(c.seed, i); });
    StrengthFit mf = strength_function(micro, s.ensemble.spectrum, gr);
    micro.clear();
    const double ratio = mf.lorentzian_width / gr;
    const bool micro_ok = mf.lorentzian_residual < mf.gaussian_residual && ratio >= 0.5 && ratio <= 1.5;

    // Alpha scaling: rho x2, fill /2.
    auto gr_mean = [&](double rho, double fill) {
        double sum = 0.0;
        for (std::uint64_t k = 0; k < 3; ++k) {
            DensityModel dm;
            dm.rho0 = rho;
            HFSpectrum h = build_hf_spectrum(dm, 1000, opt.seed + 500 + k);
            ResidualSpec rs = c.residual;
            rs.fill_probability = fill;
            sum += golden_rule_width(h, sample_residual(h, rs, opt.seed + 600 + k));
        }
        return sum / 3.0;
    };
    const double g1 = gr_mean(c.density.rho0, c.residual.fill_probability);
    const double g2 = gr_mean(2.0 * c.density.rho0, 0.5 * c.residual.fill_probability);
    const bool alpha_ok = std::abs(g2 / g1 - 1.0) <= 0.25;

    r.pass = synth_ok && micro_ok && alpha_ok;
    r.measured = fmt("synthetic: width %.3f, res G %.2e < L %.2e; full coupling: res L %.2e vs G %.2e, "
                     "L width / golden rule %.3f; alpha scaling ratio %.3f",
                     sf.gaussian_width, sf.gaussian_residual, sf.lorentzian_residual, mf.lorentzian_residual,
                     mf.gaussian_residual, ratio, g2 / g1);
    r.expected = "width 1 +- 10%, G < L; L < G, ratio in [0.5, 1.5]; ratio 1 +- 25%";
    return r;
}

struct EnvelopeCheck {
    double worst_z = 0.0, worst_z_at = 0.0, corrected_z = 0.0, tau = 0.0;
    bool pointwise = false, timescale = false;
};

// Pointwise comparison on [0.5, 5]/delta plus the fitted timescale.
EnvelopeCheck envelope_check(const RunReport& rep) {
    EnvelopeCheck e;
    const TimeGrid& g = rep.mc.grid;
    auto prop = averaged_propagator(rep.scenario.ensemble.envelope, g);
    const double asym = rep.analytic.asymptote_exact;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g.scaled(i);
        if (t < 0.5 - 1e-9 || t > 5.0 + 1e-9) continue;
        const double se = rep.mc.stderr_[i];
        const double z = std::abs(rep.mc.mean[i] - rep.analytic.total.mean[i]) / se;
        if (z > e.worst_z) {
            e.worst_z = z;
            e.worst_z_at = t;
        }
        // Asymptote counted once: it is reached only as the first term decays.
        const double corrected = rep.analytic.first_term[i] + asym * (1.0 - prop[i] * prop[i]);
        e.corrected_z = std::max(e.corrected_z, std::abs(rep.mc.mean[i] - corrected) / se);
    }
    e.pointwise = e.worst_z <= 3.0;
    e.tau = rep.verdict ? rep.verdict->relaxation_time * rep.scenario.ensemble.delta() : 0.0;
    e.timescale = std::abs(e.tau - 1.0) <= 0.2;
    return e;
}

RunConfig scenario_config(const std::string& name, Symmetry sym, const AcceptanceOptions& opt) {
    RunConfig c = preset(name);
    c.symmetry = sym;
    c.seed = opt.seed;
    c.threads = opt.workers;
    c.diagnostic_realizations = 1;
    return c;
}

// Criteria 5, 6 and 9 share scenario runs; each is executed once per process.
const RunReport& scenario_run(const std::string& name, Symmetry sym, const AcceptanceOptions& opt) {
    static std::map<std::tuple<std::string, Symmetry, std::uint64_t>, RunReport> cache;
    static std::mutex m;
    std::lock_guard lock(m);
    auto key = std::make_tuple(name, sym, opt.seed);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, execute(scenario_config(name, sym, opt))).first;
    return it->second;
}

CriterionResult relaxation(int id, Symmetry sym, const AcceptanceOptions& opt, std::string& detail) {
    CriterionResult r{id, "relaxation envelope", false, "", "", "", 0.0};
    const RunReport& g = scenario_run("thermalizing", sym, opt);
    const RunReport& l = scenario_run("lorentzian", sym, opt);
    EnvelopeCheck e = envelope_check(g);
    const Verdict& lv = *l.verdict;
    const bool lor_ok = lv.exponential_residual < lv.gaussian_residual;
    r.pass = e.pointwise && e.timescale && lor_ok;
    detail = fmt("max |z| %.1f at t=%.2f/delta; tau*delta %.3f (%s); Lorentzian variant res exp %.2e vs gauss %.2e",
                 e.worst_z, e.worst_z_at, e.tau, g.verdict->envelope_shape.c_str(), lv.exponential_residual,
                 lv.gaussian_residual);
    r.measured = detail;
    r.expected = "|z| <= 3 on [0.5, 5]/delta; tau*delta in [0.8, 1.2]; exp < gauss";
    r.note = fmt("with the asymptote counted once, (Tr(A Pi) - a) e^{-D^2 t^2} + a, max |z| = %.1f", e.corrected_z);
    return r;
}

CriterionResult thermalization(int id, Symmetry sym, const AcceptanceOptions& opt, std::string& detail) {
    CriterionResult r{id, "thermalization", false, "", "", "", 0.0};
    const RunReport& t = scenario_run("thermalizing", sym, opt);
    const Verdict& tv = *t.verdict;
    const double tol = std::max(3.0 * tv.plateau_stderr, 0.05 * std::abs(tv.equilibrium));
    const bool thermal_ok = std::abs(tv.plateau - tv.equilibrium) <= tol && tv.outcome == Verdict::Outcome::thermalizes;

    const RunReport& n = scenario_run("nonthermalizing", sym, opt);
    const Verdict& nv = *n.verdict;
    const Scenario& s = n.scenario;
    double mixture = 0.0;
    for (std::size_t k = 0; k < s.windows.windows(); ++k)
        if (s.windows.weight[k] > 0.0)
            mixture += s.windows.weight[k] * equilibrium_value(s.ensemble.spectrum, s.A, s.windows.indices(k));
    const bool mix_ok = std::abs(nv.plateau - mixture) <= 3.0 * nv.plateau_stderr &&
                        nv.outcome == Verdict::Outcome::does_not_thermalize;
    r.pass = thermal_ok && mix_ok;
    detail = fmt("single window: plateau %.4f vs Tr_k0(A)/N_k0 %.4f (tol %.4f), verdict %s; two windows: plateau "
                 "%.4f vs mixture %.4f (3 se %.4f), verdict %s",
                 tv.plateau, tv.equilibrium, tol, to_string(tv.outcome), nv.plateau, mixture,
                 3.0 * nv.plateau_stderr, to_string(nv.outcome));
    r.measured = detail;
    r.expected = "|dev| <= max(3 se, 5%), thermalizes; |dev| <= 3 se, does_not_thermalize";
    // The scaffold is fixed per run, so smoothing A over the spreading width
    // leaves a bias that more realizations do not remove.
    r.note = fmt("two-window relative deviation %.2f%% (single-window floor 5%%)",
                 100.0 * (nv.plateau - mixture) / mixture);
    return r;
}

CriterionResult scaling(const AcceptanceOptions& opt) {
    CriterionResult r{7, "fluctuation suppression and scaling", false, "", "", "", 0.0};
    std::vector<double> stds;
    for (double nd : {25.0, 50.0, 100.0}) {
        EnsembleSpec e;
        DensityModel d;
        d.rho0 = nd;
        e.spectrum = build_hf_spectrum(d, static_cast<std::size_t>(10 * nd), opt.seed + 700);
        StatOperator none;
        none.matrix = CMatrix(0, 0);
        WindowPartition w = partition_windows(e.spectrum, none, 1.0);
        const std::size_t k0 = w.window_of(e.spectrum.center());
        const double ec = 0.5 * (w.boundaries[k0] + w.boundaries[k0 + 1]);
        StatParams sp;
        sp.windows = {w.indices(k0)};
        StatOperator P = build_stat_operator(StatOperator::Kind::window_uniform, sp, e.spectrum, 0);
        ObservableParams ap;
        ap.profile = [ec](double en) { return 1.0 + 0.25 * (en - ec); };
        Observable A = build_observable(Observable::Kind::diagonal_profile, ap, e.spectrum, 0);
        TimeGrid g = TimeGrid::uniform(8.0, 41, 1.0);
        CorrelationEstimate ce = correlation_fn(e, A, P, g, 40, opt.seed, opt.workers);
        stds.push_back(ce.plateau_mean_std);
    }
    const double r1 = stds[1] / stds[0], r2 = stds[2] / stds[1];
    const bool halves = std::abs(r1 - 0.5) <= 0.15 && std::abs(r2 - 0.5) <= 0.15;

    // Coherent cross-window Pi; A carries the same cross-window coherence
    // (A = Pi), so the window-block sums of A_mn Pi_mn do not cancel.
    EnsembleSpec e;
    DensityModel d;
    d.rho0 = 50.0;
    e.spectrum = build_hf_spectrum(d, 500, opt.seed + 710);
    StatOperator none;
    none.matrix = CMatrix(0, 0);
    WindowPartition w = partition_windows(e.spectrum, none, 1.0);
    const std::size_t k0 = w.window_of(e.spectrum.center());
    StatParams sp;
    sp.windows = {w.indices(k0 - 1), w.indices(k0 + 1)};
    StatOperator P = build_stat_operator(StatOperator::Kind::cross_window_pure, sp, e.spectrum, opt.seed + 711);
    ObservableParams ap;
    ap.matrix = P.matrix;
    for (const auto& blk : sp.windows) {
        const auto k = static_cast<Eigen::Index>(blk.count());
        ap.matrix.block(blk.first, blk.first, k, k).setZero();
    }
    Observable A = build_observable(Observable::Kind::matrix, ap, e.spectrum, 0);
    CorrelationEstimate ce = correlation_fn(e, A, P, TimeGrid::uniform(40.0, 201, 1.0), 200, opt.seed, opt.workers);
    const double ratio = ce.c8 != 0.0 ? ce.plateau_covariance / ce.c8 : 0.0;
    const bool c8_ok = ratio >= 1.0 / 3.0 && ratio <= 3.0;

    r.pass = halves && c8_ok;
    r.measured = fmt("plateau std %.4g, %.4g, %.4g for N_D 25, 50, 100 (ratios %.3f, %.3f); off-diagonal: "
                     "time-independent plateau covariance %.3e +- %.1e vs c8 %.3e (ratio %.2f)",
                     stds[0], stds[1], stds[2], r1, r2, ce.plateau_covariance, ce.plateau_covariance_stderr, ce.c8,
                     ratio);
    r.note = fmt("equal-time plateau variance %.3e includes temporal fluctuations (%.1f x c8)", ce.plateau_variance,
                 ce.plateau_variance / ce.c8);
    r.expected = "ratios 0.5 +- 0.15; ratio in [1/3, 3]";
    return r;
}

CriterionResult moments(const AcceptanceOptions& opt) {
    CriterionResult r{8, "energy moments", false, "", "", "", 0.0};
    DensityModel d;
    d.rho0 = 50.0;
    HFSpectrum sp = build_hf_spectrum(d, 500, opt.seed + 800);
    const std::size_t m0 = sp.size() / 2;
    EnvelopeF env;
    auto vars = parallel_map(50, opt.workers, [&](std::size_t i) {
        Realization x = sample_synthetic(sp, env, Symmetry::orthogonal, realization_seed(opt.seed, i));
        RMatrix w = x.weights();
        double m1 = 0.0, m2 = 0.0;
        for (Eigen::Index a = 0; a < w.cols(); ++a) {
            m1 += w(m0, a) * x.eigenvalues(a);
            m2 += w(m0, a) * x.eigenvalues(a) * x.eigenvalues(a);
        }
        return m2 - m1 * m1;
    });
    double mean = 0.0;
    for (double v : vars) mean += v;
    mean /= double(vars.size());
    const bool mc_ok = std::abs(mean - 1.0) <= 0.10;

    // delta E >= delta for every operator kind.
    StatOperator none;
    none.matrix = CMatrix(0, 0);
    WindowPartition w = partition_windows(sp, none, 1.0);
    const std::size_t k0 = w.window_of(sp.center());
    double worst = 1e300;
    for (auto kind : {StatOperator::Kind::pure_hf, StatOperator::Kind::window_uniform,
                      StatOperator::Kind::boltzmann_diagonal, StatOperator::Kind::random_psd_window,
                      StatOperator::Kind::cross_window_pure}) {
        StatParams p;
        p.m0 = m0;
        p.windows = {w.indices(k0)};
        if (kind == StatOperator::Kind::cross_window_pure) p.windows = {w.indices(k0 - 2), w.indices(k0 + 2)};
        if (kind == StatOperator::Kind::boltzmann_diagonal) p.windows.clear();
        p.temperature = 0.7;
        StatOperator P = build_stat_operator(kind, p, sp, opt.seed + 801);
        MomentsReport m = energy_moments(sp, P, 1.0);
        worst = std::min(worst, std::sqrt(m.deltaE_sq) - 1.0);
    }
    r.pass = mc_ok && worst >= 0.0;
    r.measured = fmt("MC energy variance, pure state, 50 realizations: %.4f; min(deltaE - delta) over 5 operators %.3e",
                     mean, worst);
    r.expected = "1 +- 10%; >= 0";
    return r;
}

CriterionResult gue_parity(const AcceptanceOptions& opt) {
    CriterionResult r{9, "unitary-class parity", false, "", "", "", 0.0};
    std::string d5, d6;
    CriterionResult c5 = relaxation(9, Symmetry::unitary, opt, d5);
    CriterionResult c6 = thermalization(9, Symmetry::unitary, opt, d6);

    EnsembleSpec e;
    e.symmetry = Symmetry::unitary;
    DensityModel d;
    d.rho0 = 50.0;
    e.spectrum = build_hf_spectrum(d, 500, opt.seed + 900);
    PairCumulant pc = pair_cumulant(e, 0.5, 1.0, 100, opt.seed, opt.workers);
    e.symmetry = Symmetry::orthogonal;
    PairCumulant po = pair_cumulant(e, 0.5, 1.0, 100, opt.seed, opt.workers);
    const bool uu_ok = std::abs(pc.value) <= 3.0 * pc.stderr_;

    r.pass = c5.pass && c6.pass && uu_ok;
    r.measured = "relaxation [" + std::string(c5.pass ? "pass" : "FAIL") + "] " + d5 + "; thermalization [" +
                 (c6.pass ? "pass" : "FAIL") + "] " + d6 +
                 fmt("; <UU> cumulant GUE %.2e +- %.1e over %zu pairs", pc.value, pc.stderr_, pc.pairs);
    r.expected = "criteria 5 and 6 tolerances; |<UU>| <= 3 se";
    r.note = fmt("%s; %s; orthogonal contrast <UU> %.2e +- %.1e", c5.note.c_str(), c6.note.c_str(), po.value,
                 po.stderr_);
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CriterionResult determinism(const AcceptanceOptions& opt) {
    CriterionResult r{10, "determinism", false, "", "", "", 0.0};
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / fmt("chaotherm-determinism-%llu", (unsigned long long)opt.seed);
    std::size_t compared = 0, differing = 0;
    std::string which;
    for (const char* name : {"thermalizing", "full_coupling"}) {
        RunConfig c = preset(name);
        c.seed = opt.seed;
        c.R = std::string(name) == "thermalizing" ? 12 : 2;
        c.diagnostic_realizations = 2;
        std::vector<fs::path> dirs;
        for (int threads : {1, 4}) {
            c.threads = threads;
            c.output = root / fmt("%s-%d", name, threads);
            run(c);
            dirs.push_back(c.output);
        }
        for (const char* file : {"trajectory.csv", "correlation.csv", "spectra.csv", "strength.csv", "report.json"}) {
            std::string a = slurp(dirs[0] / file), b = slurp(dirs[1] / file);
            if (std::string(file) == "report.json") {
                auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
                ja.erase("execution");
                jb.erase("execution");
                jb["config"]["output"] = ja["config"]["output"];
                a = ja.dump();
                b = jb.dump();
            }
            ++compared;
            if (a != b || a.empty()) {
                ++differing;
                which += std::string(" ") + name + "/" + file;
            }
        }
    }
    fs::remove_all(root);
    r.pass = differing == 0;
    r.measured = fmt("%zu of %zu artifacts identical across 1 vs 4 workers", compared - differing, compared) + which;
    r.expected = "all identical (report.json compared without its execution block)";
    return r;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
    if (suite == "fast") return {1, 8, 10};
    if (suite == "full") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    fail(ErrorKind::parameter, "unknown suite '" + suite + "' (expected fast or full)");
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    std::string detail;
    try {
        switch (id) {
            case 1: r = exactness(opt); break;
            case 2: r = bgs(opt); break;
            case 3: r = rigidity(opt); break;
            case 4: r = strength(opt); break;
            case 5: r = relaxation(5, Symmetry::orthogonal, opt, detail); break;
            case 6: r = thermalization(6, Symmetry::orthogonal, opt, detail); break;
            case 7: r = scaling(opt); break;
            case 8: r = moments(opt); break;
            case 9: r = gue_parity(opt); break;
            case 10: r = determinism(opt); break;
            default: fail(ErrorKind::parameter, "no criterion " + std::to_string(id));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parameter && (id < 1 || id > 10)) throw;
        r.id = id;
        r.title = "error";
        r.pass = false;
        r.measured = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string format_result(const CriterionResult& r) {
    std::string s = fmt("criterion %2d [%s] %s: %s | expected %s (%.1f s)", r.id, r.pass ? "PASS" : "FAIL",
                        r.title.c_str(), r.measured.c_str(), r.expected.c_str(), r.seconds);
    if (!r.note.empty()) s += " | note: " + r.note;
    return s;
}

}  // namespace chaotherm
