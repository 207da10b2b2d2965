#include <doctest.h>

#include <cmath>
#include <numeric>

#include "chaotherm/error.hpp"
#include "chaotherm/scaffold.hpp"

using namespace chaotherm;

namespace {

HFSpectrum flat(std::vector<double> levels) {
    DensityModel d;
    const double lo = levels.front() - 0.5, hi = levels.back() + 0.5;
    return make_spectrum(std::move(levels), d, lo, hi);
}

double min_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("hf spectrum is strictly increasing and reproducible") {
    DensityModel d;
    HFSpectrum a = build_hf_spectrum(d, 5, 7);
    HFSpectrum b = build_hf_spectrum(d, 5, 7);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.levels[i] > a.levels[i - 1]);
    CHECK(a.levels == b.levels);
    CHECK(a.levels.front() >= a.emin);
    CHECK(a.levels.back() <= a.emax);
}

TEST_CASE("constant density sets the mean spacing") {
    DensityModel d;
    d.rho0 = 2.0;
    HFSpectrum s = build_hf_spectrum(d, 10000, 11);
    const double mean = (s.levels.back() - s.levels.front()) / double(s.size() - 1);
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("exponential density grows by e over one T") {
    DensityModel d;
    d.kind = DensityModel::Kind::exponential;
    d.rho0 = 1.0;
    d.T = 10.0;
    HFSpectrum s = build_hf_spectrum(d, 10000, 3);
    // Count levels in unit windows at E and E + T, both well inside the spectrum.
    const double e = 0.4 * s.emax;
    const double lo = levels_in(s, e, e + 2.0).count();
    const double hi = levels_in(s, e + 10.0, e + 12.0).count();
    CHECK(hi / lo == doctest::Approx(std::exp(1.0)).epsilon(0.10));
}

TEST_CASE("spectrum errors") {
    DensityModel d;
    CHECK_THROWS_AS(build_hf_spectrum(d, 0, 1), Error);
    d.rho0 = -1.0;
    CHECK_THROWS_AS(build_hf_spectrum(d, 5, 1), Error);
    DensityModel e;
    e.kind = DensityModel::Kind::exponential;
    e.T = 0.0;
    CHECK_THROWS_AS(build_hf_spectrum(e, 5, 1), Error);
}

TEST_CASE("user levels with ties are split") {
    HFSpectrum s = flat({1.0, 2.0, 2.0, 3.0});
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.levels[i] > s.levels[i - 1]);
    CHECK(s.levels[2] - s.levels[1] < 1e-9);
}

TEST_CASE("observables") {
    HFSpectrum s7 = flat({1, 2, 3, 4, 5, 6, 7});
    Observable id = build_observable(Observable::Kind::identity, {}, s7, 0);
    CHECK(id.matrix.isApprox(CMatrix::Identity(7, 7)));

    ObservableParams w;
    w.window = {3, 5};
    Observable p = build_observable(Observable::Kind::window_projector, w, s7, 0);
    CHECK(p.matrix.trace().real() == doctest::Approx(3.0));

    HFSpectrum s3 = flat({1, 2, 4});
    ObservableParams ramp;
    ramp.profile = [](double e) { return e; };
    Observable r = build_observable(Observable::Kind::diagonal_profile, ramp, s3, 0);
    CMatrix expect = CMatrix::Zero(3, 3);
    expect.diagonal() << 1.0, 2.0, 4.0;
    CHECK((r.matrix - expect).cwiseAbs().maxCoeff() < 1e-12);

    ObservableParams out;
    out.window = {5, 9};
    CHECK_THROWS_AS(build_observable(Observable::Kind::window_projector, out, s7, 0), Error);

    ObservableParams band;
    band.band_halfwidth = 2;
    band.complex_entries = true;
    Observable b = build_observable(Observable::Kind::banded_random, band, s7, 5);
    CHECK((b.matrix - b.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(b.matrix(0, 4)) == 0.0);
}

TEST_CASE("user matrix observables must be Hermitian") {
    HFSpectrum s = flat({1, 2});
    ObservableParams m;
    m.matrix = CMatrix::Zero(2, 2);
    m.matrix(0, 1) = 1.0;
    CHECK_THROWS_AS(build_observable(Observable::Kind::matrix, m, s, 0), Error);
    m.matrix(1, 0) = 1.0;
    CHECK(build_observable(Observable::Kind::matrix, m, s, 0).matrix.isApprox(m.matrix));
}

TEST_CASE("statistical operators satisfy trace and positivity") {
    DensityModel d;
    d.rho0 = 10.0;
    HFSpectrum s = build_hf_spectrum(d, 60, 2);

    StatParams pure;
    pure.m0 = 4;
    StatOperator p = build_stat_operator(StatOperator::Kind::pure_hf, pure, s, 0);
    CHECK(std::abs(p.matrix(4, 4) - 1.0) < 1e-15);
    CHECK(p.matrix.cwiseAbs().sum() == doctest::Approx(1.0));

    StatParams win;
    win.windows = {{10, 17}};
    StatOperator u = build_stat_operator(StatOperator::Kind::window_uniform, win, s, 0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(u.matrix);
    int eighths = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - 0.125) < 1e-12) ++eighths;
    CHECK(eighths == 8);
    CHECK(std::abs(u.matrix.trace().real() - 1.0) < 1e-12);

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        StatOperator r = build_stat_operator(StatOperator::Kind::random_psd_window, win, s, seed);
        CHECK(std::abs(r.matrix.trace().real() - 1.0) < 1e-12);
        CHECK(min_eigenvalue(r.matrix) >= -1e-12);
    }

    StatParams cross;
    cross.windows = {{10, 17}, {30, 37}};
    StatOperator c = build_stat_operator(StatOperator::Kind::cross_window_pure, cross, s, 9);
    CHECK((c.matrix * c.matrix - c.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(c.matrix(10, 30)) > 0.0);

    StatParams boltz;
    boltz.windows = {{10, 17}};
    StatOperator b = build_stat_operator(StatOperator::Kind::boltzmann_diagonal, boltz, s, 0);
    CHECK(std::abs(b.matrix.trace().real() - 1.0) < 1e-12);

    StatParams empty;
    CHECK_THROWS_AS(build_stat_operator(StatOperator::Kind::window_uniform, empty, s, 0), Error);
}

TEST_CASE("window partition weights") {
    HFSpectrum s = flat({0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5});
    s.emin = 0.0;
    s.emax = 8.0;
    StatParams pure;
    pure.m0 = 3;  // level 3.5 lies in window [3, 4)
    WindowPartition w = partition_windows(s, build_stat_operator(StatOperator::Kind::pure_hf, pure, s, 0), 1.0);
    CHECK(w.windows() == 8);
    CHECK(w.weight[3] == doctest::Approx(1.0));
    CHECK(std::accumulate(w.weight.begin(), w.weight.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));

    // Two windows of width 2, two levels each.
    StatParams two;
    two.windows = {{2, 5}};
    WindowPartition w2 = partition_windows(s, build_stat_operator(StatOperator::Kind::window_uniform, two, s, 0), 2.0);
    CHECK(w2.weight[1] == doctest::Approx(0.5));
    CHECK(w2.weight[2] == doctest::Approx(0.5));
    CHECK(w2.count[1] == 2);

    // Changing off-diagonal structure leaves p_k alone.
    StatOperator r = build_stat_operator(StatOperator::Kind::random_psd_window, two, s, 4);
    StatOperator diag = r;
    diag.matrix = CMatrix(r.matrix.diagonal().asDiagonal());
    WindowPartition a = partition_windows(s, r, 2.0), b = partition_windows(s, diag, 2.0);
    for (std::size_t k = 0; k < a.windows(); ++k) CHECK(a.weight[k] == doctest::Approx(b.weight[k]));

    CHECK_THROWS_AS(partition_windows(s, r, 0.0), Error);
}

TEST_CASE("energy moments") {
    HFSpectrum s = flat({1.0, 3.2, 5.0});
    StatParams pure;
    pure.m0 = 1;
    MomentsReport m = energy_moments(s, build_stat_operator(StatOperator::Kind::pure_hf, pure, s, 0), 0.5);
    CHECK(m.E == doctest::Approx(3.2));
    CHECK(m.deltaE_sq == doctest::Approx(0.25));

    HFSpectrum two = flat({1.0, 3.0});
    StatParams both;
    both.windows = {{0, 1}};
    MomentsReport u = energy_moments(two, build_stat_operator(StatOperator::Kind::window_uniform, both, two, 0), 0.0);
    CHECK(u.E == doctest::Approx(2.0));
    CHECK(u.deltaE_sq == doctest::Approx(1.0));
}

TEST_CASE("moments with zero width reduce to diagonal mean and variance") {
    HFSpectrum s = flat({0.3, 1.1, 1.9, 2.2, 4.0, 5.5, 6.1, 7.7, 8.0, 9.4});
    StatParams win;
    win.windows = {{0, 9}};
    StatOperator p = build_stat_operator(StatOperator::Kind::random_psd_window, win, s, 21);
    double mean = 0.0, sq = 0.0;
    for (std::size_t m = 0; m < s.size(); ++m) {
        const double w = p.matrix(m, m).real();
        mean += w * s.levels[m];
        sq += w * s.levels[m] * s.levels[m];
    }
    MomentsReport r = energy_moments(s, p, 0.0);
    CHECK(r.E == doctest::Approx(mean).epsilon(1e-12));
    CHECK(r.hf_variance == doctest::Approx(sq - mean * mean).epsilon(1e-10));
    CHECK(r.deltaE_sq >= r.delta_sq);
}

TEST_CASE("identity observable has unit expectation") {
    DensityModel d;
    d.rho0 = 5.0;
    HFSpectrum s = build_hf_spectrum(d, 40, 8);
    Observable id = build_observable(Observable::Kind::identity, {}, s, 0);
    StatParams win;
    win.windows = {{5, 20}};
    StatOperator p = build_stat_operator(StatOperator::Kind::random_psd_window, win, s, 1);
    CHECK(std::abs((id.matrix * p.matrix).trace() - cplx(1.0)) < 1e-12);
}
