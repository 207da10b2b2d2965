#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chaotherm/error.hpp"
#include "chaotherm/fit.hpp"
#include "chaotherm/spectra.hpp"

using namespace chaotherm;

namespace {

std::vector<double> poisson_levels(std::size_t n, std::uint64_t seed) {
    DensityModel d;
    return build_hf_spectrum(d, n, seed).levels;
}

std::vector<double> goe_center(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    auto v = wigner_dyson_unfolded(n, Symmetry::orthogonal, rng);
    return {v.begin() + long(n / 4), v.end() - long(n / 4)};
}

std::vector<double> range(double lo, double hi) {
    std::vector<double> v;
    for (double x = lo; x <= hi; x += 1.0) v.push_back(x);
    return v;
}

}  // namespace

TEST_CASE("unfolding with a constant density") {
    DensityModel one;
    std::vector<double> x{0.5, 1.25, 3.0};
    CHECK(unfold(x, one) == x);
    DensityModel two;
    two.rho0 = 2.0;
    auto y = unfold(x, two);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(2.0 * x[i]));
    CHECK_THROWS_AS(unfold({2.0, 1.0}, one), Error);
}

TEST_CASE("unfolding an exponential spectrum gives unit spacing") {
    DensityModel d;
    d.kind = DensityModel::Kind::exponential;
    d.rho0 = 1.0;
    d.T = 20.0;
    HFSpectrum s = build_hf_spectrum(d, 10000, 4);
    auto u = unfold(s.levels, d, s.emin);
    CHECK((u.back() - u.front()) / double(u.size() - 1) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unfolding through mean positions") {
    std::vector<double> mean{0.0, 1.0, 3.0, 6.0};
    auto u = unfold_by_positions({0.0, 2.0, 6.0, 7.5}, mean);
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == doctest::Approx(2.0));
    CHECK(u[2] == doctest::Approx(3.5));
    CHECK(u[3] == doctest::Approx(4.0));  // extrapolated with the last slope
}

TEST_CASE("nearest-neighbor spacing tests") {
    NnsResult p = nns_ks(poisson_levels(10001, 5));
    CHECK(p.spacings == 10000);
    CHECK(p.ks_poisson < 0.03);
    CHECK(p.ks_wigner > 0.15);

    std::vector<std::vector<double>> goe;
    for (std::uint64_t s = 0; s < 10; ++s) goe.push_back(goe_center(2000, 40 + s));
    CHECK(nns_ks_multi(goe).ks_wigner < 0.03);

    NnsResult lattice = nns_ks(range(0.0, 1000.0));
    CHECK(lattice.ks_wigner > 0.3);
    CHECK(lattice.ks_poisson > 0.3);
    for (double c : lattice.histogram.counts) CHECK(c >= 0.0);

    CHECK_THROWS_AS(nns_ks(range(0.0, 100.0)), Error);
    CHECK(wigner_cdf(50.0) == doctest::Approx(1.0));
    CHECK(poisson_cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("Poisson rigidity grows as L/15") {
    std::vector<std::vector<double>> seqs;
    for (std::uint64_t s = 0; s < 6; ++s) seqs.push_back(poisson_levels(5000, 100 + s));
    Delta3Curve c = delta3_curve(seqs, {5, 10, 20, 30});
    for (std::size_t i = 0; i < c.L.size(); ++i) CHECK(c.value[i] == doctest::Approx(c.L[i] / 15.0).epsilon(0.15));
}

TEST_CASE("GOE rigidity matches the shipped reference without upbend") {
    const auto& ref = goe_delta3_reference();
    std::vector<double> L{5, 10, 15, 20, 25, 30};
    std::vector<std::vector<double>> seqs;
    for (std::uint64_t s = 0; s < 8; ++s) seqs.push_back(goe_center(1600, 200 + s));
    Delta3Curve c = delta3_curve(seqs, L);
    std::optional<double> upbend;
    auto points = compare_delta3(c, ref, 3.0, upbend);
    for (const auto& p : points) CHECK(p.value == doctest::Approx(p.reference).epsilon(0.15));
    CHECK(!upbend.has_value());
}

TEST_CASE("shipped GOE reference follows the large-L asymptote") {
    // (1/pi^2)(ln(2 pi L) + gamma - 5/4 - pi^2/8)
    const auto& ref = goe_delta3_reference();
    const double pi = std::numbers::pi;
    for (double L : {20.0, 30.0, 45.0, 60.0}) {
        const double asym = (std::log(2.0 * pi * L) + std::numbers::egamma - 1.25 - pi * pi / 8.0) / (pi * pi);
        CHECK(ref.at(L) == doctest::Approx(asym).epsilon(0.05));
    }
    CHECK(ref.at(1.0) > 0.0);
    for (std::size_t i = 1; i < ref.L.size(); ++i) CHECK(ref.value[i] >= ref.value[i - 1] - 3.0 * ref.stderr_[i]);
}

TEST_CASE("rigidity window must fit the sequence") {
    CHECK_THROWS_AS(delta3_curve({range(0.0, 99.0)}, {30.0}), Error);
}

TEST_CASE("spacing and rigidity statistics are affine invariant") {
    auto raw = poisson_levels(3000, 7);
    DensityModel d;
    auto u = unfold(raw, d, 0.0);

    const double scale = 3.7, shift = -12.5;
    std::vector<double> moved(raw);
    for (double& e : moved) e = scale * e + shift;
    DensityModel d2;
    d2.rho0 = 1.0 / scale;
    auto u2 = unfold(moved, d2, shift);

    std::vector<double> L{5, 10, 20};
    Delta3Curve a = delta3_curve({u}, L), b = delta3_curve({u2}, L);
    for (std::size_t i = 0; i < L.size(); ++i) CHECK(a.value[i] == doctest::Approx(b.value[i]).epsilon(1e-9));
    CHECK(nns_ks(u).ks_wigner == doctest::Approx(nns_ks(moved).ks_wigner).epsilon(1e-9));

    std::vector<double> shifted(u);
    for (double& e : shifted) e += 1000.0;
    CHECK(delta3_curve({shifted}, L).value[2] == doctest::Approx(a.value[2]).epsilon(1e-9));
}

TEST_CASE("strength function of an unmixed spectrum is a delta") {
    DensityModel d;
    d.rho0 = 20.0;
    HFSpectrum s = build_hf_spectrum(d, 300, 8);
    Realization r = diagonalize(s, CMatrix::Zero(300, 300));
    StrengthFit f = strength_function({r}, s, 1.0);
    const std::size_t mid = f.mean.size() / 2;
    for (std::size_t i = 0; i < f.mean.size(); ++i) {
        if (i == mid)
            CHECK(f.mean[i] > 0.0);
        else
            CHECK(f.mean[i] == 0.0);
    }
    CHECK(f.gaussian_width < 0.1);
}

TEST_CASE("strength function recovers the synthetic envelope") {
    DensityModel d;
    d.rho0 = 50.0;
    HFSpectrum s = build_hf_spectrum(d, 500, 9);
    EnvelopeF f;
    f.delta = 1.0;
    std::vector<Realization> rs;
    for (std::uint64_t i = 0; i < 10; ++i) rs.push_back(sample_synthetic(s, f, Symmetry::orthogonal, 300 + i));
    StrengthFit fit = strength_function(rs, s, 1.0);
    CHECK(fit.gaussian_width == doctest::Approx(1.0).epsilon(0.10));
    CHECK(fit.gaussian_residual < fit.lorentzian_residual);
    CHECK(std::abs(fit.sum_rule_defect) < 0.05);
    for (double m : fit.mean) CHECK(m >= 0.0);
}

TEST_CASE("shape fit recovers exact parameters") {
    std::vector<double> x, y;
    auto gauss = [](double t, double w) { return std::exp(-t * t / (2.0 * w * w)); };
    for (double t = -4.0; t <= 4.0; t += 0.1) {
        x.push_back(t);
        y.push_back(2.5 * gauss(t, 0.8));
    }
    ShapeFit s = fit_shape(x, y, gauss, 0.05, 10.0);
    CHECK(s.amplitude == doctest::Approx(2.5).epsilon(1e-4));
    CHECK(s.width == doctest::Approx(0.8).epsilon(1e-4));
    CHECK(s.residual < 1e-8);
}
