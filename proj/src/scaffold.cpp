#include "chaotherm/scaffold.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include "chaotherm/error.hpp"
#include "chaotherm/rng.hpp"

namespace chaotherm {

void DensityModel::validate() const {
    require(rho0 > 0.0 && std::isfinite(rho0), ErrorKind::parameter, "density rho0 must be positive");
    if (kind == Kind::exponential)
        require(T > 0.0 && std::isfinite(T), ErrorKind::parameter, "density T must be positive");
}

double DensityModel::rho(double e) const {
    return kind == Kind::constant ? rho0 : rho0 * std::exp(e / T);
}

double DensityModel::count_between(double from, double e) const {
    if (kind == Kind::constant) return rho0 * (e - from);
    return rho0 * T * (std::exp(e / T) - std::exp(from / T));
}

double DensityModel::energy_after(double from, double n) const {
    if (kind == Kind::constant) return from + n / rho0;
    return T * std::log(std::exp(from / T) + n / (rho0 * T));
}

HFSpectrum build_hf_spectrum(const DensityModel& density, std::size_t count, std::uint64_t seed, double emin) {
    require(count > 0, ErrorKind::empty_spectrum, "level count is zero");
    density.validate();
    // Unit-rate Poisson process in the integrated density, mapped back to energy.
    Rng rng = stream(seed, 0, 11);
    std::exponential_distribution<double> gap(1.0);
    HFSpectrum s;
    s.density = density;
    s.emin = emin;
    s.levels.reserve(count);
    double u = 0.0;
    double prev = emin;
    for (std::size_t i = 0; i < count; ++i) {
        u += gap(rng);
        double e = density.energy_after(emin, u);
        if (!(e > prev)) e = std::nextafter(prev, INFINITY);
        s.levels.push_back(e);
        prev = e;
    }
    s.emax = std::max(s.levels.back(), density.energy_after(emin, static_cast<double>(count)));
    return s;
}

HFSpectrum make_spectrum(std::vector<double> levels, const DensityModel& density, double emin, double emax) {
    require(!levels.empty(), ErrorKind::empty_spectrum, "no levels supplied");
    density.validate();
    for (double e : levels) require(std::isfinite(e), ErrorKind::parameter, "non-finite level");
    std::sort(levels.begin(), levels.end());
    double spacing = levels.size() > 1 ? (levels.back() - levels.front()) / double(levels.size() - 1) : 1.0;
    if (spacing <= 0.0) spacing = 1.0;
    std::size_t ties = 0;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) {
            levels[i] = levels[i - 1] + 1e-12 * spacing;
            ++ties;
        }
    }
    if (ties) std::cerr << "warning: split " << ties << " degenerate level(s)\n";
    HFSpectrum s;
    s.levels = std::move(levels);
    s.density = density;
    s.emin = std::min(emin, s.levels.front());
    s.emax = std::max(emax, s.levels.back());
    return s;
}

IndexRange levels_in(const HFSpectrum& spectrum, double lo, double hi) {
    auto a = std::lower_bound(spectrum.levels.begin(), spectrum.levels.end(), lo);
    auto b = std::lower_bound(spectrum.levels.begin(), spectrum.levels.end(), hi);
    require(b > a, ErrorKind::range, "no levels in requested energy interval");
    return {static_cast<std::size_t>(a - spectrum.levels.begin()),
            static_cast<std::size_t>(b - spectrum.levels.begin()) - 1};
}

namespace {

void check_range(const IndexRange& r, std::size_t n) {
    require(r.first <= r.last, ErrorKind::range, "empty window");
    require(r.last < n, ErrorKind::range, "window outside spectrum");
}

cplx random_amplitude(Rng& rng, bool complex_entries) {
    std::normal_distribution<double> g(0.0, 1.0);
    if (!complex_entries) return {g(rng), 0.0};
    double re = g(rng);
    return {re, g(rng)};
}

}  // namespace

Observable build_observable(Observable::Kind kind, const ObservableParams& params, const HFSpectrum& spectrum,
                            std::uint64_t seed) {
    const std::size_t n = spectrum.size();
    require(n > 0, ErrorKind::empty_spectrum, "empty spectrum");
    Observable a;
    a.kind = kind;
    a.matrix = CMatrix::Zero(n, n);
    switch (kind) {
        case Observable::Kind::identity:
            a.matrix.diagonal().setOnes();
            break;
        case Observable::Kind::diagonal_profile:
            require(static_cast<bool>(params.profile), ErrorKind::parameter, "diagonal_profile needs a profile");
            for (std::size_t m = 0; m < n; ++m) a.matrix(m, m) = params.profile(spectrum.levels[m]);
            break;
        case Observable::Kind::window_projector:
            check_range(params.window, n);
            for (std::size_t m = params.window.first; m <= params.window.last; ++m) a.matrix(m, m) = 1.0;
            break;
        case Observable::Kind::banded_random: {
            require(params.band_halfwidth >= 1, ErrorKind::parameter, "band halfwidth must be >= 1");
            Rng rng = stream(seed, 0, 21);
            std::normal_distribution<double> g(0.0, 1.0);
            const double s = params.rms / (params.complex_entries ? std::sqrt(2.0) : 1.0);
            for (std::size_t m = 0; m < n; ++m) {
                a.matrix(m, m) = params.rms * g(rng);
                std::size_t hi = std::min(n - 1, m + params.band_halfwidth);
                for (std::size_t k = m + 1; k <= hi; ++k) {
                    cplx v = s * random_amplitude(rng, params.complex_entries);
                    a.matrix(m, k) = v;
                    a.matrix(k, m) = std::conj(v);
                }
            }
            break;
        }
        case Observable::Kind::matrix: {
            const CMatrix& m = params.matrix;
            require(m.rows() == static_cast<Eigen::Index>(n) && m.cols() == static_cast<Eigen::Index>(n),
                    ErrorKind::shape, "observable matrix must be N x N");
            require((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::parameter,
                    "observable matrix must be Hermitian");
            a.matrix = 0.5 * (m + m.adjoint());
            break;
        }
    }
    return a;
}

StatOperator build_stat_operator(StatOperator::Kind kind, const StatParams& params, const HFSpectrum& spectrum,
                                 std::uint64_t seed) {
    const std::size_t n = spectrum.size();
    require(n > 0, ErrorKind::empty_spectrum, "empty spectrum");
    StatOperator pi;
    pi.kind = kind;
    pi.matrix = CMatrix::Zero(n, n);
    Rng rng = stream(seed, 0, 31);
    switch (kind) {
        case StatOperator::Kind::pure_hf:
            require(params.m0 < n, ErrorKind::range, "pure state index outside spectrum");
            pi.matrix(params.m0, params.m0) = 1.0;
            break;
        case StatOperator::Kind::window_uniform: {
            require(!params.windows.empty(), ErrorKind::range, "window_uniform needs a window");
            std::vector<double> w = params.weights;
            if (w.empty()) w.assign(params.windows.size(), 1.0);
            require(w.size() == params.windows.size(), ErrorKind::parameter, "one weight per window expected");
            double total = 0.0;
            for (double x : w) {
                require(x >= 0.0 && std::isfinite(x), ErrorKind::parameter, "window weights must be nonnegative");
                total += x;
            }
            require(total > 0.0, ErrorKind::parameter, "window weights sum to zero");
            for (std::size_t j = 0; j < params.windows.size(); ++j) {
                const auto& r = params.windows[j];
                check_range(r, n);
                double each = w[j] / total / double(r.count());
                for (std::size_t m = r.first; m <= r.last; ++m) pi.matrix(m, m) += each;
            }
            break;
        }
        case StatOperator::Kind::boltzmann_diagonal: {
            require(params.temperature > 0.0, ErrorKind::parameter, "temperature must be positive");
            IndexRange r = params.windows.empty() ? IndexRange{0, n - 1} : params.windows.front();
            check_range(r, n);
            double e0 = spectrum.levels[r.first];
            double total = 0.0;
            for (std::size_t m = r.first; m <= r.last; ++m)
                total += std::exp(-(spectrum.levels[m] - e0) / params.temperature);
            for (std::size_t m = r.first; m <= r.last; ++m)
                pi.matrix(m, m) = std::exp(-(spectrum.levels[m] - e0) / params.temperature) / total;
            break;
        }
        case StatOperator::Kind::random_psd_window: {
            require(!params.windows.empty(), ErrorKind::range, "random_psd_window needs a window");
            const auto& r = params.windows.front();
            check_range(r, n);
            const auto k = static_cast<Eigen::Index>(r.count());
            CMatrix x(k, k);
            for (Eigen::Index i = 0; i < k; ++i)
                for (Eigen::Index j = 0; j < k; ++j) x(i, j) = random_amplitude(rng, params.complex_entries);
            CMatrix p = x * x.adjoint();
            p = 0.5 * (p + p.adjoint()).eval();
            p /= p.trace().real();
            pi.matrix.block(r.first, r.first, k, k) = p;
            break;
        }
        case StatOperator::Kind::cross_window_pure: {
            require(params.windows.size() == 2, ErrorKind::parameter, "cross_window_pure needs two windows");
            Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
            for (const auto& r : params.windows) {
                check_range(r, n);
                // Equal weight per window, random signs or phases within.
                double amp = 1.0 / std::sqrt(2.0 * double(r.count()));
                for (std::size_t m = r.first; m <= r.last; ++m) {
                    cplx z = random_amplitude(rng, params.complex_entries);
                    psi(m) += amp * z / std::abs(z);
                }
            }
            psi.normalize();
            pi.matrix = psi * psi.adjoint();
            break;
        }
    }
    return pi;
}

std::size_t WindowPartition::window_of(double e) const {
    if (count.empty()) return 0;
    double x = (e - boundaries.front()) / delta;
    if (x < 0.0) return 0;
    auto k = static_cast<std::size_t>(std::floor(x));
    return std::min(k, count.size() - 1);
}

IndexRange WindowPartition::indices(std::size_t k) const {
    require(k < count.size() && count[k] > 0, ErrorKind::range, "empty window");
    return {first[k], first[k] + count[k] - 1};
}

WindowPartition partition_windows(const HFSpectrum& spectrum, const StatOperator& pi, double delta) {
    require(delta > 0.0 && std::isfinite(delta), ErrorKind::parameter, "window width must be positive");
    require(spectrum.size() > 0, ErrorKind::empty_spectrum, "empty spectrum");
    require(pi.matrix.rows() == static_cast<Eigen::Index>(spectrum.size()) || pi.matrix.size() == 0,
            ErrorKind::shape, "statistical operator dimension mismatch");
    WindowPartition w;
    w.delta = delta;
    auto windows = static_cast<std::size_t>(std::ceil((spectrum.emax - spectrum.emin) / delta));
    windows = std::max<std::size_t>(windows, 1);
    w.boundaries.resize(windows + 1);
    for (std::size_t k = 0; k <= windows; ++k) w.boundaries[k] = spectrum.emin + double(k) * delta;
    w.count.assign(windows, 0);
    w.weight.assign(windows, 0.0);
    w.first.assign(windows, 0);
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
        std::size_t k = w.window_of(spectrum.levels[m]);
        if (w.count[k] == 0) w.first[k] = m;
        ++w.count[k];
        if (pi.matrix.size()) w.weight[k] += pi.matrix(m, m).real();
    }
    w.density.resize(windows);
    for (std::size_t k = 0; k < windows; ++k) w.density[k] = double(w.count[k]) / delta;
    return w;
}

MomentsReport energy_moments(const HFSpectrum& spectrum, const StatOperator& pi, double delta) {
    require(delta >= 0.0, ErrorKind::parameter, "delta must be nonnegative");
    require(pi.matrix.rows() == static_cast<Eigen::Index>(spectrum.size()), ErrorKind::shape,
            "statistical operator dimension mismatch");
    MomentsReport r;
    double e1 = 0.0;
    for (std::size_t m = 0; m < spectrum.size(); ++m) e1 += pi.matrix(m, m).real() * spectrum.levels[m];
    // Two-pass form avoids cancellation at large excitation energy.
    double var = 0.0;
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
        double d = spectrum.levels[m] - e1;
        var += pi.matrix(m, m).real() * d * d;
    }
    r.E = e1;
    r.hf_variance = var;
    r.delta_sq = delta * delta;
    r.deltaE_sq = r.hf_variance + r.delta_sq;
    return r;
}

const char* to_string(Observable::Kind kind) {
    switch (kind) {
        case Observable::Kind::identity: return "identity";
        case Observable::Kind::diagonal_profile: return "diagonal_profile";
        case Observable::Kind::window_projector: return "window_projector";
        case Observable::Kind::banded_random: return "banded_random";
        case Observable::Kind::matrix: return "matrix";
    }
    return "unknown";
}

const char* to_string(StatOperator::Kind kind) {
    switch (kind) {
        case StatOperator::Kind::pure_hf: return "pure_hf";
        case StatOperator::Kind::window_uniform: return "window_uniform";
        case StatOperator::Kind::boltzmann_diagonal: return "boltzmann_diagonal";
        case StatOperator::Kind::random_psd_window: return "random_psd_window";
        case StatOperator::Kind::cross_window_pure: return "cross_window_pure";
    }
    return "unknown";
}

}  // namespace chaotherm
