#include "chaotherm/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include "chaotherm/error.hpp"
#include "chaotherm/io.hpp"
#include "chaotherm/parallel.hpp"
#include "chaotherm/rng.hpp"

namespace chaotherm {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

template <class E>
struct Names {
    std::vector<std::pair<E, const char*>> items;

    const char* name(E e) const {
        for (const auto& [k, v] : items)
            if (k == e) return v;
        return "?";
    }
    E parse(const std::string& s, const std::string& field) const {
        for (const auto& [k, v] : items)
            if (s == v) return k;
        std::string allowed;
        for (const auto& it : items) allowed += std::string(allowed.empty() ? "" : ", ") + it.second;
        fail(ErrorKind::config, field + ": unknown value '" + s + "' (expected one of " + allowed + ")");
    }
};

const Names<Symmetry> symmetry_names{{{Symmetry::orthogonal, "orthogonal"}, {Symmetry::unitary, "unitary"}}};
const Names<DensityModel::Kind> density_names{
    {{DensityModel::Kind::constant, "constant"}, {DensityModel::Kind::exponential, "exponential"}}};
const Names<EnsembleSpec::Origin> origin_names{
    {{EnsembleSpec::Origin::synthetic, "synthetic"}, {EnsembleSpec::Origin::microscopic, "microscopic"}}};
const Names<EnvelopeF::Kind> envelope_names{
    {{EnvelopeF::Kind::gaussian, "gaussian"}, {EnvelopeF::Kind::lorentzian, "lorentzian"}}};
const Names<EigenvalueModel> eigen_names{{{EigenvalueModel::full, "full"}, {EigenvalueModel::stitched, "stitched"}}};
const Names<StatOperator::Kind> pi_names{{{StatOperator::Kind::pure_hf, "pure_hf"},
                                          {StatOperator::Kind::window_uniform, "window_uniform"},
                                          {StatOperator::Kind::boltzmann_diagonal, "boltzmann_diagonal"},
                                          {StatOperator::Kind::random_psd_window, "random_psd_window"},
                                          {StatOperator::Kind::cross_window_pure, "cross_window_pure"}}};
const Names<Observable::Kind> a_names{{{Observable::Kind::identity, "identity"},
                                       {Observable::Kind::diagonal_profile, "diagonal_profile"},
                                       {Observable::Kind::window_projector, "window_projector"},
                                       {Observable::Kind::banded_random, "banded_random"}}};
const Names<ObservableSpec::Profile> profile_names{{{ObservableSpec::Profile::constant, "constant"},
                                                    {ObservableSpec::Profile::linear, "linear"},
                                                    {ObservableSpec::Profile::clamped_linear, "clamped_linear"},
                                                    {ObservableSpec::Profile::cosine, "cosine"}}};
const Names<Verdict::Outcome> outcome_names{{{Verdict::Outcome::thermalizes, "thermalizes"},
                                             {Verdict::Outcome::does_not_thermalize, "does_not_thermalize"},
                                             {Verdict::Outcome::inconclusive, "inconclusive"}}};

// Walks one JSON object; leftover keys are reported as errors.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(ErrorKind::config, where() + " must be an object");
    }
    ~Reader() = default;

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(ErrorKind::config, where(key) + " has the wrong type");
        }
    }

    double number(const std::string& key, double def) {
        double v = def;
        get(key, v);
        if (!std::isfinite(v)) fail(ErrorKind::config, where(key) + " must be finite");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t def) {
        seen_.insert(key);
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            fail(ErrorKind::config, where(key) + " must be a nonnegative integer");
        return v.get<std::size_t>();
    }

    template <class E>
    E choice(const std::string& key, E def, const Names<E>& names) {
        std::string s = names.name(def);
        get(key, s);
        return names.parse(s, where(key));
    }

    json child(const std::string& key) {
        seen_.insert(key);
        return has(key) ? j_.at(key) : json::object();
    }

    bool present(const std::string& key) {
        seen_.insert(key);
        return has(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(ErrorKind::config, where(k) + " is not a recognized key");
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? std::string("config") : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::config, what);
}

double profile_value(const ObservableSpec& s, double x, double phase_x) {
    switch (s.profile) {
        case ObservableSpec::Profile::constant: return 1.0;
        case ObservableSpec::Profile::linear: return 1.0 + s.slope * x;
        case ObservableSpec::Profile::clamped_linear: return 1.0 + s.slope * std::max(x, s.clamp);
        case ObservableSpec::Profile::cosine: return 1.0 + s.amplitude * std::cos(2.0 * std::numbers::pi * phase_x);
    }
    return 1.0;
}

std::uint64_t salted(std::uint64_t seed, std::uint64_t salt) { return mix64(seed ^ mix64(salt)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ojson number_or_null(std::optional<double> v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader r(j, "");
    r.get("name", c.name);
    c.symmetry = r.choice("symmetry", c.symmetry, symmetry_names);
    check(r.present("N"), "N is required");
    check(r.present("realizations"), "realizations is required");
    check(r.present("seed"), "seed is required");
    c.N = r.count("N", 0);
    c.R = r.count("realizations", 0);
    {
        const json& s = j.at("seed");
        check(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0),
              "seed must be a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.threads = static_cast<int>(r.count("threads", 0));
    std::string out = c.output.string();
    r.get("output", out);
    c.output = out;
    c.origin = r.choice("origin", c.origin, origin_names);
    if (r.present("delta")) c.delta = r.number("delta", 1.0);
    r.get("dump_realizations", c.dump_realizations);
    c.diagnostic_realizations = r.count("diagnostic_realizations", c.diagnostic_realizations);
    if (r.present("expect_verdict")) {
        std::string s;
        r.get("expect_verdict", s);
        c.expect = outcome_names.parse(s, "expect_verdict");
    }
    {
        json d = r.child("density");
        Reader rd(d, "density");
        c.density.kind = rd.choice("kind", c.density.kind, density_names);
        c.density.rho0 = rd.number("rho0", c.density.rho0);
        c.density.T = rd.number("T", c.density.T);
        rd.finish();
    }
    {
        json e = r.child("envelope");
        Reader re(e, "envelope");
        c.envelope = re.choice("kind", c.envelope, envelope_names);
        re.finish();
    }
    {
        json s = r.child("synthetic");
        Reader rs(s, "synthetic");
        c.synthetic.eigenvalues = rs.choice("eigenvalues", c.synthetic.eigenvalues, eigen_names);
        c.synthetic.stitch_levels = rs.number("stitch_levels", c.synthetic.stitch_levels);
        c.synthetic.step = rs.number("step", c.synthetic.step);
        rs.finish();
    }
    {
        json v = r.child("residual");
        Reader rv(v, "residual");
        c.residual.band_halfwidth = rv.count("band_halfwidth", c.residual.band_halfwidth);
        c.residual.fill_probability = rv.number("fill_probability", c.residual.fill_probability);
        c.residual.rms_strength = rv.number("rms_strength", c.residual.rms_strength);
        rv.get("diagonal_fluctuations", c.residual.diagonal_fluctuations);
        rv.finish();
    }
    {
        json p = r.child("pi");
        Reader rp(p, "pi");
        c.pi.kind = rp.choice("kind", c.pi.kind, pi_names);
        rp.get("windows", c.pi.windows);
        rp.get("weights", c.pi.weights);
        c.pi.offset = rp.number("offset", c.pi.offset);
        c.pi.temperature = rp.number("temperature", c.pi.temperature);
        rp.get("complex_entries", c.pi.complex_entries);
        rp.finish();
    }
    {
        json a = r.child("observable");
        Reader ra(a, "observable");
        c.observable.kind = ra.choice("kind", c.observable.kind, a_names);
        c.observable.profile = ra.choice("profile", c.observable.profile, profile_names);
        c.observable.amplitude = ra.number("amplitude", c.observable.amplitude);
        c.observable.slope = ra.number("slope", c.observable.slope);
        c.observable.clamp = ra.number("clamp", c.observable.clamp);
        ra.get("window", c.observable.window);
        c.observable.band_halfwidth = ra.count("band_halfwidth", c.observable.band_halfwidth);
        c.observable.rms = ra.number("rms", c.observable.rms);
        ra.get("complex_entries", c.observable.complex_entries);
        ra.finish();
    }
    {
        json t = r.child("time");
        Reader rt(t, "time");
        c.t_max = rt.number("t_max", c.t_max);
        c.time_points = rt.count("points", c.time_points);
        rt.finish();
    }
    {
        json t = r.child("thresholds");
        Reader rt(t, "thresholds");
        c.thresholds.plateau_start = rt.number("plateau_start", c.thresholds.plateau_start);
        c.thresholds.tol_rel = rt.number("tol_rel", c.thresholds.tol_rel);
        c.thresholds.fluct_sigmas = rt.number("fluct_sigmas", c.thresholds.fluct_sigmas);
        rt.finish();
    }
    r.finish();

    check(c.N >= 2, "N must be at least 2");
    check(c.R >= 1, "realizations must be at least 1");
    check(!c.delta || *c.delta > 0.0, "delta must be positive");
    check(c.time_points >= 2 && c.t_max > 0.0, "time grid needs t_max > 0 and at least two points");
    check(c.thresholds.tol_rel > 0.0 && c.thresholds.fluct_sigmas > 0.0 && c.thresholds.plateau_start >= 0.0,
          "thresholds must be positive");
    check(!c.pi.windows.empty(), "pi.windows must name at least one window");
    try {
        c.density.validate();
        c.residual.validate();
    } catch (const Error& e) {
        fail(ErrorKind::config, e.what());
    }
    return c;
}

ojson config_to_json(const RunConfig& c) {
    ojson j;
    j["name"] = c.name;
    j["symmetry"] = symmetry_names.name(c.symmetry);
    j["N"] = c.N;
    j["realizations"] = c.R;
    j["seed"] = c.seed;
    j["output"] = c.output.string();
    j["origin"] = origin_names.name(c.origin);
    j["delta"] = number_or_null(c.delta);
    j["density"] = {{"kind", density_names.name(c.density.kind)}, {"rho0", c.density.rho0}, {"T", c.density.T}};
    j["envelope"] = {{"kind", envelope_names.name(c.envelope)}};
    j["synthetic"] = {{"eigenvalues", eigen_names.name(c.synthetic.eigenvalues)},
                      {"stitch_levels", c.synthetic.stitch_levels},
                      {"step", c.synthetic.step}};
    j["residual"] = {{"band_halfwidth", c.residual.band_halfwidth},
                     {"fill_probability", c.residual.fill_probability},
                     {"rms_strength", c.residual.rms_strength},
                     {"diagonal_fluctuations", c.residual.diagonal_fluctuations}};
    j["pi"] = {{"kind", pi_names.name(c.pi.kind)},   {"windows", c.pi.windows},
               {"weights", c.pi.weights},            {"offset", c.pi.offset},
               {"temperature", c.pi.temperature},    {"complex_entries", c.pi.complex_entries}};
    j["observable"] = {{"kind", a_names.name(c.observable.kind)},
                       {"profile", profile_names.name(c.observable.profile)},
                       {"amplitude", c.observable.amplitude},
                       {"slope", c.observable.slope},
                       {"clamp", c.observable.clamp},
                       {"window", c.observable.window},
                       {"band_halfwidth", c.observable.band_halfwidth},
                       {"rms", c.observable.rms},
                       {"complex_entries", c.observable.complex_entries}};
    j["time"] = {{"t_max", c.t_max}, {"points", c.time_points}};
    j["thresholds"] = {{"plateau_start", c.thresholds.plateau_start},
                       {"tol_rel", c.thresholds.tol_rel},
                       {"fluct_sigmas", c.thresholds.fluct_sigmas}};
    j["diagnostic_realizations"] = c.diagnostic_realizations;
    j["expect_verdict"] = c.expect ? ojson(outcome_names.name(*c.expect)) : ojson(nullptr);
    j["dump_realizations"] = c.dump_realizations;
    return j;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"thermalizing", "nonthermalizing", "lorentzian", "unitary",
                                                "stitched",     "bgs",             "full_coupling"};
    return names;
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.name = name;
    c.seed = 20240611;
    c.delta = 1.0;
    if (name == "thermalizing" || name == "lorentzian" || name == "unitary") {
        c.N = 800;
        c.density.rho0 = 80.0;
        c.R = 100;
        if (name == "lorentzian") c.envelope = EnvelopeF::Kind::lorentzian;
        if (name == "unitary") c.symmetry = Symmetry::unitary;
    } else if (name == "nonthermalizing") {
        // Two windows 6 delta either side of the center, both well clear of the
        // kink at x = 0 and of the spectrum edges; the kink makes the mixture
        // differ from the center-window average.
        c.N = 1200;
        c.density.rho0 = 50.0;
        c.R = 100;
        c.pi.kind = StatOperator::Kind::window_uniform;
        c.pi.windows = {-6, 6};
        c.observable.profile = ObservableSpec::Profile::clamped_linear;
    } else if (name == "stitched") {
        c.N = 1000;
        c.density.rho0 = 20.0;
        c.R = 20;
        c.synthetic.eigenvalues = EigenvalueModel::stitched;
    } else if (name == "bgs") {
        // Banded strong mixing; the spreading 2 pi v^2 rho ~ 6 sets delta.
        c.N = 1000;
        c.origin = EnsembleSpec::Origin::microscopic;
        c.density.rho0 = 1.0;
        c.residual.band_halfwidth = 40;
        c.residual.rms_strength = 1.0;
        c.delta = 6.0;
        c.R = 11;
        c.diagnostic_realizations = 11;  // central halves give > 5000 spacings
    } else if (name == "full_coupling") {
        c.N = 1000;
        c.origin = EnsembleSpec::Origin::microscopic;
        c.envelope = EnvelopeF::Kind::lorentzian;
        c.density.rho0 = 4.0;
        c.residual.band_halfwidth = 999;  // N - 1: full coupling
        c.residual.fill_probability = 0.2;
        c.residual.rms_strength = 0.5;
        c.delta.reset();
        c.R = 10;
        c.diagnostic_realizations = 4;
    } else {
        fail(ErrorKind::config, "unknown preset '" + name + "'");
    }
    return c;
}

Scenario build_scenario(const RunConfig& config) {
    Scenario s;
    s.config = config;
    const RunConfig& c = config;
    s.spectrum_seed = salted(c.seed, 0x5bec);
    s.observable_seed = salted(c.seed, 0x0b5e);
    s.operator_seed = salted(c.seed, 0x5a7e);

    EnsembleSpec& e = s.ensemble;
    e.origin = c.origin;
    e.symmetry = c.symmetry;
    e.spectrum = build_hf_spectrum(c.density, c.N, s.spectrum_seed);
    e.synthetic = c.synthetic;
    e.residual = c.residual;
    e.residual.symmetry = c.symmetry;
    e.envelope.kind = c.envelope;
    if (c.delta) {
        e.envelope.delta = *c.delta;
        s.delta_source = "config";
    } else {
        require(c.origin == EnsembleSpec::Origin::microscopic, ErrorKind::config,
                "synthetic runs need an explicit delta");
        // Same V as realization 0 of the ensemble.
        double gr = golden_rule_width(e.spectrum, sample_residual(e.spectrum, e.residual, realization_seed(c.seed, 0)));
        require(gr > 0.0, ErrorKind::config, "golden-rule width is zero; set delta explicitly");
        e.envelope.delta = gr;
        s.delta_source = "golden_rule";
    }
    const double delta = e.envelope.delta;
    const HFSpectrum& sp = e.spectrum;

    StatOperator none;
    none.matrix = CMatrix(0, 0);
    WindowPartition grid = partition_windows(sp, none, delta);
    s.reference_window = grid.window_of(sp.center());
    auto window_at = [&](int off) {
        long k = static_cast<long>(s.reference_window) + off;
        require(k >= 0 && k < static_cast<long>(grid.windows()), ErrorKind::config,
                "window offset " + std::to_string(off) + " lies outside the spectrum");
        return static_cast<std::size_t>(k);
    };
    auto window_center = [&](std::size_t k) { return 0.5 * (grid.boundaries[k] + grid.boundaries[k + 1]); };

    StatParams sparams;
    sparams.weights = c.pi.weights;
    sparams.temperature = c.pi.temperature;
    sparams.complex_entries = c.pi.complex_entries;
    for (int off : c.pi.windows) sparams.windows.push_back(grid.indices(window_at(off)));
    if (c.pi.kind == StatOperator::Kind::pure_hf) {
        double target = window_center(window_at(c.pi.windows.front())) + c.pi.offset * delta;
        auto it = std::lower_bound(sp.levels.begin(), sp.levels.end(), target);
        std::size_t m = static_cast<std::size_t>(it - sp.levels.begin());
        if (m == sp.size() || (m > 0 && target - sp.levels[m - 1] < sp.levels[m] - target)) --m;
        sparams.m0 = m;
    }
    s.pi = build_stat_operator(c.pi.kind, sparams, sp, s.operator_seed);
    s.windows = partition_windows(sp, s.pi, delta);

    double mean_energy = 0.0;
    for (std::size_t m = 0; m < sp.size(); ++m) mean_energy += s.pi.matrix(m, m).real() * sp.levels[m];
    s.equilibrium_window = s.windows.indices(s.windows.window_of(mean_energy));

    ObservableParams ap;
    const std::size_t aw = window_at(c.observable.window);
    const double ec = window_center(aw);
    ap.window = grid.indices(aw);
    ap.band_halfwidth = c.observable.band_halfwidth;
    ap.rms = c.observable.rms;
    ap.complex_entries = c.observable.complex_entries;
    const ObservableSpec os = c.observable;
    ap.profile = [os, ec, mean_energy, delta](double en) {
        return profile_value(os, (en - ec) / delta, (en - mean_energy) / delta);
    };
    s.A = build_observable(c.observable.kind, ap, sp, s.observable_seed);

    s.grid = TimeGrid::uniform(c.t_max, c.time_points, delta);
    return s;
}

namespace {

ojson verdict_json(const Verdict& v) {
    return {{"outcome", outcome_names.name(v.outcome)},
            {"plateau", v.plateau},
            {"plateau_stderr", v.plateau_stderr},
            {"equilibrium", v.equilibrium},
            {"relative_deviation", v.relative_deviation},
            {"fluctuation_level", v.fluctuation_level},
            {"fluctuation_tolerance", v.fluctuation_tolerance},
            {"relaxation_time", v.relaxation_time},
            {"envelope_shape", v.envelope_shape},
            {"gaussian_residual", v.gaussian_residual},
            {"exponential_residual", v.exponential_residual},
            {"analytic_plateau", v.analytic_plateau}};
}

}  // namespace

RunReport execute(const RunConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    ojson timings;
    RunReport out;
    const int workers = resolve_workers(config.threads);

    auto t0 = clock::now();
    out.scenario = build_scenario(config);
    const Scenario& s = out.scenario;
    const HFSpectrum& sp = s.ensemble.spectrum;
    const double delta = s.ensemble.delta();
    timings["setup"] = seconds_since(t0);

    t0 = clock::now();
    out.moments = energy_moments(sp, s.pi, delta);
    timings["moments"] = seconds_since(t0);

    // Diagnostic draws reuse the ensemble's first realizations.
    t0 = clock::now();
    const std::size_t nd = std::max<std::size_t>(1, std::min(config.diagnostic_realizations, config.R));
    std::vector<Realization> diag = parallel_map(nd, workers, [&](std::size_t i) {
        return s.ensemble.draw(config.seed, i);
    });
    timings["diagnostic_draws"] = seconds_since(t0);

    t0 = clock::now();
    std::vector<std::vector<double>> unfolded;
    for (const auto& r : diag) unfolded.push_back(unfold_center(r, sp));
    ojson spectral;
    try {
        out.spectral.nns = nns_ks_multi(unfolded);
        spectral["nns"] = {{"spacings", out.spectral.nns.spacings},
                           {"ks_wigner", out.spectral.nns.ks_wigner},
                           {"ks_poisson", out.spectral.nns.ks_poisson}};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::insufficient_data) throw;
        spectral["nns"] = nullptr;
    }
    std::size_t shortest = unfolded.front().size();
    for (const auto& u : unfolded) shortest = std::min(shortest, u.size());
    std::vector<double> Ls;
    for (int L = 1; L <= 60 && double(L) <= double(shortest) / 4.0; ++L) Ls.push_back(L);
    if (!Ls.empty()) {
        Delta3Curve curve = delta3_curve(unfolded, Ls);
        out.spectral.delta3 = compare_delta3(curve, goe_delta3_reference(), 3.0, out.spectral.upbend_L);
    }
    ojson d3 = ojson::array();
    for (const auto& p : out.spectral.delta3)
        d3.push_back({{"L", p.L}, {"value", p.value}, {"stderr", p.stderr_}, {"reference", p.reference},
                      {"reference_stderr", p.reference_stderr}});
    spectral["delta3"] = d3;
    spectral["upbend_L"] = number_or_null(out.spectral.upbend_L);
    timings["spectra"] = seconds_since(t0);

    t0 = clock::now();
    ojson strength;
    try {
        out.strength = strength_function(diag, sp, delta);
        strength = {{"gaussian_width", out.strength.gaussian_width},
                    {"gaussian_amplitude", out.strength.gaussian_amplitude},
                    {"gaussian_residual", out.strength.gaussian_residual},
                    {"lorentzian_width", out.strength.lorentzian_width},
                    {"lorentzian_amplitude", out.strength.lorentzian_amplitude},
                    {"lorentzian_residual", out.strength.lorentzian_residual},
                    {"sum_rule_defect", out.strength.sum_rule_defect},
                    {"density", out.strength.density}};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_input && e.kind() != ErrorKind::insufficient_data) throw;
        strength = nullptr;
    }
    timings["strength"] = seconds_since(t0);

    t0 = clock::now();
    TrajectorySamples samples = sample_trajectories(s.ensemble, s.A, s.pi, s.grid, config.R, config.seed, workers);
    Trajectory mc = summarize(samples);
    timings["evolution"] = seconds_since(t0);

    t0 = clock::now();
    AnalyticPrediction an = analytic_prediction(sp, s.A, s.pi, s.ensemble.envelope, s.grid);
    const double eq = equilibrium_value(sp, s.A, s.equilibrium_window);
    timings["analytic"] = seconds_since(t0);

    t0 = clock::now();
    std::optional<CorrelationEstimate> corr;
    if (config.R >= 10) corr = correlation_fn(samples, sp, s.A, s.pi, delta, config.thresholds.plateau_start);
    timings["correlation"] = seconds_since(t0);

    ojson verdict = nullptr;
    std::string verdict_note;
    bool grid_ok = s.grid.scaled(s.grid.size() - 1) >= 5.0 - 1e-9;
    if (corr && grid_ok) {
        out.verdict = thermalization_verdict(mc, an.total, eq, *corr, config.thresholds);
        verdict = verdict_json(*out.verdict);
    } else {
        verdict_note = corr ? "time grid ends before 5/delta" : "verdict needs at least 10 realizations";
    }

    // Artifacts.
    CsvTable traj{{"t", "t_in_units_of_inv_delta", "mc_mean", "mc_stderr", "analytic_first_term",
                   "analytic_asymptote_exact", "analytic_asymptote_window", "equilibrium"},
                  {}};
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        traj.add({format_double(s.grid.absolute(i)), format_double(s.grid.scaled(i)), format_double(mc.mean[i]),
                  format_double(mc.stderr_[i]), format_double(an.first_term[i]), format_double(an.asymptote_exact),
                  format_double(an.asymptote_window), format_double(eq)});
    out.artifacts["trajectory.csv"] = traj.str();

    CsvTable cor{{"t1", "t2", "cov", "stderr", "c5_pred", "c8_pred"}, {}};
    if (corr) {
        for (std::size_t i = 0; i < s.grid.size(); ++i)
            for (std::size_t k = 0; k < s.grid.size(); ++k)
                cor.add({format_double(s.grid.absolute(i)), format_double(s.grid.absolute(k)),
                         format_double(corr->covariance(i, k)), format_double(corr->stderr_(i, k)),
                         format_double(corr->c5(i, k)), format_double(corr->c8)});
    }
    out.artifacts["correlation.csv"] = cor.str();

    CsvTable spc{{"statistic", "L_or_s_or_offset", "value", "stderr"}, {}};
    if (!spectral["nns"].is_null()) {
        const auto& h = out.spectral.nns.histogram;
        double total = 0.0;
        for (double x : h.counts) total += x;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            double w = h.edges[b + 1] - h.edges[b];
            spc.add({"nns_density", format_double(0.5 * (h.edges[b] + h.edges[b + 1])),
                     format_double(h.counts[b] / (total * w)), format_double(std::sqrt(h.counts[b]) / (total * w))});
        }
    }
    for (const auto& p : out.spectral.delta3)
        spc.add({"delta3", format_double(p.L), format_double(p.value), format_double(p.stderr_)});
    for (const auto& p : out.spectral.delta3)
        spc.add({"delta3_goe_reference", format_double(p.L), format_double(p.reference),
                 format_double(p.reference_stderr)});
    out.artifacts["spectra.csv"] = spc.str();

    CsvTable str{{"offset", "offset_in_units_of_delta", "mean_weight", "entries", "gaussian_fit", "lorentzian_fit"}, {}};
    if (!strength.is_null()) {
        const auto& f = out.strength;
        for (std::size_t b = 0; b < f.offsets.size(); ++b)
            str.add({format_double(f.offsets[b]), format_double(f.offsets[b] / delta), format_double(f.mean[b]),
                     format_double(f.count[b]), format_double(f.gaussian_at(f.offsets[b])),
                     format_double(f.lorentzian_at(f.offsets[b]))});
    }
    out.artifacts["strength.csv"] = str.str();

    // Report.
    ojson& rep = out.report;
    rep["software"] = {{"name", "chaotherm"}, {"version", version}};
    ojson cfg = config_to_json(config);
    cfg["delta"] = delta;
    rep["config"] = cfg;
    rep["derived"] = {{"delta", delta},
                      {"delta_source", s.delta_source},
                      {"levels_per_window_at_center", sp.density.rho(sp.center()) * delta},
                      {"reference_window", s.reference_window},
                      {"equilibrium_window", {s.equilibrium_window.first, s.equilibrium_window.last}},
                      {"window_weights", s.windows.weight}};
    rep["seeds"] = {{"master", config.seed},
                    {"spectrum", s.spectrum_seed},
                    {"observable", s.observable_seed},
                    {"stat_operator", s.operator_seed},
                    {"realizations", "mix64(master ^ mix64(0x5851f42d4c957f2d * (index + 1)))"}};
    rep["moments"] = {{"E", out.moments.E},
                      {"hf_variance", out.moments.hf_variance},
                      {"delta_sq", out.moments.delta_sq},
                      {"deltaE_sq", out.moments.deltaE_sq}};
    rep["spectral"] = spectral;
    rep["strength"] = strength;
    rep["analytic"] = {{"tr_a_pi", an.first_term.front()},
                       {"asymptote_exact", an.asymptote_exact},
                       {"asymptote_window", an.asymptote_window},
                       {"equilibrium", eq}};
    ojson ev = {{"realizations", config.R}, {"max_imaginary", mc.max_imaginary}};
    if (corr) {
        ev["plateau_variance"] = corr->plateau_variance;
        ev["plateau_variance_stderr"] = corr->plateau_variance_stderr;
        ev["plateau_mean_std"] = corr->plateau_mean_std;
        ev["c5_magnitude"] = corr->c5_magnitude;
        ev["c8"] = corr->c8;
    }
    rep["evolution"] = ev;
    rep["verdict"] = verdict;
    if (!verdict_note.empty()) rep["verdict_note"] = verdict_note;
    if (config.dump_realizations) {
        ojson dump = ojson::array();
        for (std::size_t i = 0; i < diag.size(); ++i) {
            std::vector<double> ev_i(diag[i].eigenvalues.data(), diag[i].eigenvalues.data() + diag[i].size());
            dump.push_back({{"index", i}, {"encoding", "base64-f64-le"}, {"eigenvalues", encode_doubles(ev_i)}});
        }
        rep["realizations"] = dump;
    }
    out.mc = mc;
    out.analytic = an;
    out.correlation = corr;
    out.equilibrium = eq;
    timings["total"] = seconds_since(t_start);
    // Everything that may differ between otherwise identical runs lives here.
    rep["execution"] = {{"threads", workers}, {"timings_seconds", timings}};
    return out;
}

RunReport run(const RunConfig& config) {
    RunReport r = execute(config);
    for (const auto& [name, content] : r.artifacts) write_atomic(config.output / name, content);
    write_atomic(config.output / "report.json", r.report.dump(2) + "\n");
    return r;
}

}  // namespace chaotherm
