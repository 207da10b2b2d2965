#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chaotherm/ensemble.hpp"
#include "chaotherm/error.hpp"
#include "chaotherm/evolve.hpp"

using namespace chaotherm;

namespace {

HFSpectrum poisson(double rho, std::size_t n, std::uint64_t seed) {
    DensityModel d;
    d.rho0 = rho;
    return build_hf_spectrum(d, n, seed);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("residual interaction") {
    HFSpectrum s = poisson(1.0, 100, 1);
    ResidualSpec zero;
    zero.rms_strength = 0.0;
    zero.band_halfwidth = 10;
    CHECK(sample_residual(s, zero, 2).cwiseAbs().maxCoeff() == 0.0);

    ResidualSpec full;
    full.band_halfwidth = 99;
    full.rms_strength = 0.7;
    CMatrix V = sample_residual(s, full, 3);
    std::size_t nonzero = 0, off = 0;
    double sq = 0.0;
    for (int m = 0; m < 100; ++m)
        for (int n = 0; n < 100; ++n) {
            if (m == n) continue;
            ++off;
            if (V(m, n) != 0.0) ++nonzero;
            sq += std::norm(V(m, n));
        }
    CHECK(nonzero == off);
    CHECK(std::sqrt(sq / double(off)) == doctest::Approx(0.7).epsilon(0.15));
    CHECK(V.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(V.diagonal().cwiseAbs().maxCoeff() == 0.0);

    ResidualSpec band;
    band.band_halfwidth = 3;
    band.symmetry = Symmetry::unitary;
    CMatrix B = sample_residual(s, band, 4);
    CHECK(std::abs(B(0, 4)) == 0.0);
    CHECK(B.imag().cwiseAbs().maxCoeff() > 0.0);
    CHECK((B - B.adjoint()).cwiseAbs().maxCoeff() == 0.0);

    ResidualSpec bad;
    bad.fill_probability = 0.0;
    CHECK_THROWS_AS(sample_residual(s, bad, 1), Error);
}

TEST_CASE("diagonalize without coupling returns the scaffold") {
    HFSpectrum s = poisson(1.0, 20, 5);
    Realization r = diagonalize(s, CMatrix::Zero(20, 20));
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(r.eigenvalues(Eigen::Index(i)) == doctest::Approx(s.levels[i]));
    CHECK((r.transform() - CMatrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.origin == Realization::Origin::microscopic);
}

TEST_CASE("two-level closed form") {
    DensityModel d;
    HFSpectrum s = make_spectrum({0.0, 2.0}, d, -1.0, 3.0);
    CMatrix V = CMatrix::Zero(2, 2);
    V(0, 1) = V(1, 0) = 1.0;
    Realization r = diagonalize(s, V);
    CHECK(r.eigenvalues(0) == doctest::Approx(1.0 - std::sqrt(2.0)));
    CHECK(r.eigenvalues(1) == doctest::Approx(1.0 + std::sqrt(2.0)));
}

TEST_CASE("microscopic reconstruction and phase convention") {
    HFSpectrum s = poisson(1.0, 60, 6);
    for (Symmetry sym : {Symmetry::orthogonal, Symmetry::unitary}) {
        ResidualSpec spec;
        spec.band_halfwidth = 8;
        spec.symmetry = sym;
        CMatrix V = sample_residual(s, spec, 7);
        Realization r = diagonalize(s, V);
        CMatrix H = V;
        for (int i = 0; i < 60; ++i) H(i, i) += s.levels[std::size_t(i)];
        const CMatrix O = r.transform();
        CHECK((O * r.eigenvalues.cast<cplx>().asDiagonal() * O.adjoint() - H).cwiseAbs().maxCoeff() <=
              1e-9 * H.norm());
        CHECK(r.orthogonality_residual() <= 1e-10);
        for (int a = 0; a < 60; ++a) {
            Eigen::Index k;
            O.col(a).cwiseAbs().maxCoeff(&k);
            CHECK(std::abs(O(k, a).imag()) < 1e-12);
            CHECK(O(k, a).real() > 0.0);
        }
    }
}

TEST_CASE("synthetic realizations are orthonormal and reproducible") {
    HFSpectrum s = poisson(20.0, 200, 8);
    EnvelopeF f;
    f.delta = 1.0;
    for (Symmetry sym : {Symmetry::orthogonal, Symmetry::unitary}) {
        Realization a = sample_synthetic(s, f, sym, 11);
        Realization b = sample_synthetic(s, f, sym, 11);
        CHECK(a.orthogonality_residual() <= 1e-10);
        CHECK(a.is_real() == (sym == Symmetry::orthogonal));
        CHECK(a.eigenvalues == b.eigenvalues);
        CHECK(a.transform() == b.transform());
        for (Eigen::Index i = 1; i < a.eigenvalues.size(); ++i) CHECK(a.eigenvalues(i) > a.eigenvalues(i - 1));
        CHECK(a.mean_eigenvalues.size() == a.eigenvalues.size());
    }
    EnvelopeF narrow;
    narrow.delta = 0.1;  // two spacings
    CHECK_THROWS_AS(sample_synthetic(s, narrow, Symmetry::orthogonal, 1), Error);
}

TEST_CASE("spectrum-spanning envelope gives GOE eigenvector statistics") {
    const std::size_t n = 120;
    HFSpectrum s = poisson(1.0, n, 9);
    EnvelopeF f;
    f.delta = 1e6;
    double m2 = 0.0, m4 = 0.0, count = 0.0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Realization r = sample_synthetic(s, f, Symmetry::orthogonal, seed);
        // Corner block: far-apart m and alpha, where a narrow envelope would vanish.
        for (std::size_t m = 0; m < 30; ++m)
            for (std::size_t a = n - 30; a < n; ++a) {
                const double x = std::sqrt(double(n)) * r.real_transform(Eigen::Index(m), Eigen::Index(a));
                m2 += x * x;
                m4 += x * x * x * x;
                count += 1.0;
            }
    }
    CHECK(m2 / count == doctest::Approx(1.0).epsilon(0.10));
    CHECK(m4 / count == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("synthetic sum rules away from the edges") {
    HFSpectrum s = poisson(50.0, 600, 10);
    EnvelopeF f;
    f.delta = 1.0;
    RMatrix w = RMatrix::Zero(600, 600);
    const int R = 8;
    for (int i = 0; i < R; ++i) w += sample_synthetic(s, f, Symmetry::orthogonal, 100 + i).weights() / R;
    // Rows and columns of an orthogonal matrix sum exactly to one; check the
    // ensemble mean as well as its local envelope shape.
    for (int m = 200; m < 400; m += 20) {
        CHECK(w.row(m).sum() == doctest::Approx(1.0).epsilon(0.05));
        CHECK(w.col(m).sum() == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("eigenvalues and eigenvector localization are uncorrelated") {
    HFSpectrum s = poisson(30.0, 400, 12);
    EnvelopeF f;
    f.delta = 1.0;
    std::vector<double> gaps, ipr;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        Realization r = sample_synthetic(s, f, Symmetry::orthogonal, seed);
        RMatrix w = r.weights();
        for (Eigen::Index a = 50; a < 349; ++a) {
            gaps.push_back(r.eigenvalues(a + 1) - r.eigenvalues(a));
            ipr.push_back(w.col(a).squaredNorm());
        }
    }
    REQUIRE(gaps.size() >= 1000);
    CHECK(std::abs(pearson(gaps, ipr)) < 0.1);
}

TEST_CASE("unitary transforms have vanishing pair averages") {
    HFSpectrum s = poisson(30.0, 300, 13);
    EnvelopeF f;
    f.delta = 1.0;
    double sum = 0.0, sq = 0.0, count = 0.0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        Realization r = sample_synthetic(s, f, Symmetry::unitary, seed);
        for (Eigen::Index m = 100; m < 200; ++m)
            for (Eigen::Index a = m - 10; a <= m + 10; ++a) {
                const double v = (r.complex_transform(m, a) * r.complex_transform(m, a)).real() * 300.0;
                sum += v;
                sq += v * v;
                count += 1.0;
            }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sq / count - mean * mean) / count);
    CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("golden-rule width") {
    HFSpectrum s = poisson(100.0, 200, 14);
    CHECK(golden_rule_width(s, CMatrix::Zero(200, 200)) == 0.0);
    CMatrix V = CMatrix::Constant(200, 200, 0.1);
    V.diagonal().setZero();
    CHECK(golden_rule_width(s, V) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
    CHECK_THROWS_AS(golden_rule_width(poisson(1.0, 9, 1), CMatrix::Zero(9, 9)), Error);
}

TEST_CASE("golden-rule width is invariant under density scaling with thinning") {
    ResidualSpec spec;
    spec.band_halfwidth = 40;
    spec.fill_probability = 0.5;
    HFSpectrum s1 = poisson(1.0, 400, 15);
    const double g1 = golden_rule_width(s1, sample_residual(s1, spec, 16));
    spec.fill_probability = 0.25;
    HFSpectrum s2 = poisson(2.0, 400, 15);
    const double g2 = golden_rule_width(s2, sample_residual(s2, spec, 17));
    CHECK(g2 / g1 == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("ensemble draws depend only on seed and index") {
    EnsembleSpec e;
    e.spectrum = poisson(10.0, 80, 18);
    Realization a = e.draw(5, 3), b = e.draw(5, 3), c = e.draw(5, 4);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.eigenvalues != c.eigenvalues);
    CHECK(realization_seed(5, 3) != realization_seed(5, 4));
}

TEST_CASE("envelope shapes have unit integral") {
    for (auto kind : {EnvelopeF::Kind::gaussian, EnvelopeF::Kind::lorentzian}) {
        EnvelopeF f;
        f.kind = kind;
        f.delta = 1.3;
        double sum = 0.0;
        const double h = 1e-3;
        for (double x = -2000.0; x <= 2000.0; x += h) sum += f.shape(x) * h;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
    }
    EnvelopeF bad;
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}
