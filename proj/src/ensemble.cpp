#include "chaotherm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "chaotherm/error.hpp"

namespace chaotherm {

namespace {

constexpr double pi = std::numbers::pi;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowCMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_real_matrix(const CMatrix& m) { return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0; }

// Largest-magnitude component of each column made real positive.
template <class Mat>
void fix_phases(Mat& vecs) {
    for (Eigen::Index a = 0; a < vecs.cols(); ++a) {
        Eigen::Index arg = 0;
        vecs.col(a).cwiseAbs().maxCoeff(&arg);
        auto z = vecs(arg, a);
        if constexpr (std::is_same_v<typename Mat::Scalar, double>) {
            if (z < 0.0) vecs.col(a) *= -1.0;
        } else {
            vecs.col(a) *= std::conj(z) / std::abs(z);
        }
    }
}

}  // namespace

void ResidualSpec::validate() const {
    require(band_halfwidth >= 1, ErrorKind::parameter, "band halfwidth must be >= 1");
    require(fill_probability > 0.0 && fill_probability <= 1.0, ErrorKind::parameter,
            "fill probability must lie in (0, 1]");
    require(rms_strength >= 0.0 && std::isfinite(rms_strength), ErrorKind::parameter,
            "rms strength must be nonnegative");
}

void EnvelopeF::validate() const {
    require(delta > 0.0 && std::isfinite(delta), ErrorKind::parameter, "envelope width must be positive");
}

double EnvelopeF::shape(double offset) const {
    if (kind == Kind::gaussian)
        return std::exp(-0.5 * offset * offset / (delta * delta)) / (std::sqrt(2.0 * pi) * delta);
    return (0.5 * delta / pi) / (offset * offset + 0.25 * delta * delta);
}

RMatrix Realization::weights() const {
    if (is_real()) return real_transform.array().square().matrix();
    return complex_transform.cwiseAbs2();
}

CMatrix Realization::transform() const {
    if (is_real()) return real_transform.cast<cplx>();
    return complex_transform;
}

double Realization::orthogonality_residual() const {
    const auto n = static_cast<Eigen::Index>(size());
    if (is_real()) return (real_transform.transpose() * real_transform - RMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    return (complex_transform.adjoint() * complex_transform - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

CMatrix sample_residual(const HFSpectrum& spectrum, const ResidualSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spectrum.size();
    require(n > 0, ErrorKind::empty_spectrum, "empty spectrum");
    std::size_t b = spec.band_halfwidth;
    if (b >= n) {
        std::cerr << "notice: band halfwidth " << b << " >= N; using the full matrix\n";
        b = n - 1;
    }
    Rng rng = stream(seed, 0, 41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const bool complex_entries = spec.symmetry == Symmetry::unitary;
    const double v = spec.rms_strength;
    const double part = complex_entries ? v / std::sqrt(2.0) : v;

    CMatrix V = CMatrix::Zero(n, n);
    for (std::size_t m = 0; m < n; ++m) {
        if (spec.diagonal_fluctuations && u(rng) < spec.fill_probability) V(m, m) = v * g(rng);
        std::size_t hi = std::min(n - 1, m + b);
        for (std::size_t k = m + 1; k <= hi; ++k) {
            if (u(rng) >= spec.fill_probability) continue;
            double re = part * g(rng);
            double im = complex_entries ? part * g(rng) : 0.0;
            V(m, k) = {re, im};
            V(k, m) = {re, -im};
        }
    }
    return V;
}

Realization diagonalize(const HFSpectrum& spectrum, const CMatrix& V) {
    const auto n = static_cast<Eigen::Index>(spectrum.size());
    require(V.rows() == n && V.cols() == n, ErrorKind::shape, "residual dimension does not match spectrum");
    Realization r;
    r.origin = Realization::Origin::microscopic;

    auto diagnostics = [&](const auto& h) {
        std::ostringstream os;
        os << "eigensolver did not converge (N=" << n << ", |H|_F=" << h.norm()
           << ", finite=" << (h.allFinite() ? "yes" : "no") << ")";
        return os.str();
    };

    if (is_real_matrix(V)) {
        RMatrix h = V.real();
        for (Eigen::Index m = 0; m < n; ++m) h(m, m) += spectrum.levels[m];
        Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
        if (es.info() != Eigen::Success) fail(ErrorKind::numeric, diagnostics(h));
        r.symmetry = Symmetry::orthogonal;
        r.eigenvalues = es.eigenvalues();
        r.real_transform = es.eigenvectors();
        fix_phases(r.real_transform);
    } else {
        CMatrix h = V;
        for (Eigen::Index m = 0; m < n; ++m) h(m, m) += spectrum.levels[m];
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        if (es.info() != Eigen::Success) fail(ErrorKind::numeric, diagnostics(h));
        r.symmetry = Symmetry::unitary;
        r.eigenvalues = es.eigenvalues();
        r.complex_transform = es.eigenvectors();
        fix_phases(r.complex_transform);
    }
    return r;
}

std::vector<double> smooth_positions(const HFSpectrum& spectrum, double delta) {
    const std::size_t n = spectrum.size();
    const double center = spectrum.levels[n / 2];
    const auto h = static_cast<std::size_t>(std::max(1.0, std::round(0.5 * spectrum.density.rho(center) * delta)));
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + spectrum.levels[i];
    std::vector<double> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t w = std::min({h, a, n - 1 - a});
        out[a] = (prefix[a + w + 1] - prefix[a - w]) / double(2 * w + 1);
    }
    return out;
}

std::vector<double> wigner_dyson_unfolded(std::size_t n, Symmetry symmetry, Rng& rng) {
    require(n >= 1, ErrorKind::parameter, "need at least one level");
    // Tridiagonal beta-Hermite model on twice the size; the central half is
    // unfolded with the semicircle law, where it is accurate.
    const std::size_t m = 2 * n + 8;
    const double beta = symmetry == Symmetry::orthogonal ? 1.0 : 2.0;
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd diag(m), sub(m - 1);
    for (std::size_t i = 0; i < m; ++i) diag(i) = g(rng);  // N(0,2)/sqrt(2)
    for (std::size_t i = 0; i + 1 < m; ++i) {
        std::chi_squared_distribution<double> chi2(beta * double(m - 1 - i));
        sub(i) = std::sqrt(chi2(rng) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorKind::numeric, "tridiagonal eigensolver did not converge");
    const double radius = std::sqrt(2.0 * beta * double(m));
    const std::size_t start = (m - n) / 2;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::clamp(es.eigenvalues()(start + i) / radius, -1.0, 1.0);
        u[i] = double(m) * (0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / pi);
    }
    const double shift = u[0] - 0.5;
    for (double& x : u) x -= shift;
    return u;
}

std::vector<double> stitched_unfolded(std::size_t n, double segment, Symmetry symmetry, Rng& rng) {
    require(segment >= 2.0, ErrorKind::parameter, "stitch segment must hold at least two levels");
    std::uniform_real_distribution<double> len(0.5 * segment, 1.5 * segment);
    std::vector<double> out;
    out.reserve(n);
    double last = -0.5;
    while (out.size() < n) {
        auto k = static_cast<std::size_t>(std::max(2.0, std::round(len(rng))));
        k = std::min(k, n - out.size());
        auto seg = wigner_dyson_unfolded(k + 1, symmetry, rng);
        const double offset = last - seg[0];
        for (std::size_t i = 1; i <= k; ++i) out.push_back(seg[i] + offset);
        last = out.back();
    }
    return out;
}

namespace {

// Haar-distributed orthogonal/unitary matrix, for envelopes spanning the spectrum.
template <class Mat>
Mat haar(Eigen::Index n, Rng& rng, bool complex_entries) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat z(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            if constexpr (std::is_same_v<typename Mat::Scalar, cplx>) {
                double re = g(rng);
                z(i, j) = complex_entries ? cplx(re, g(rng)) : cplx(re, 0.0);
            } else {
                z(i, j) = g(rng);
            }
        }
    Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ();
    const Mat& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        auto d = r(j, j);
        if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

// Product of layers of random two-state rotations between HF states that are
// close in energy. Each column performs a random walk on the energy axis, so
// the averaged |O|^2 profile is the walk's kernel. Gaussian kind: bounded steps,
// stopped when the angle-averaged kernel of a set of probe columns reaches
// variance delta^2.
// Lorentzian kind: heavy-tailed steps whose sum converges to a Cauchy law.
template <class Row>
void rotation_circuit(Row& o, const std::vector<double>& levels, const EnvelopeF& env, double step, Rng& rng) {
    using Scalar = typename Row::Scalar;
    constexpr bool complex_entries = std::is_same_v<Scalar, cplx>;
    const std::size_t n = levels.size();
    std::vector<std::size_t> lo(n), hi(n), order(n);
    for (std::size_t i = 0; i < n; ++i) lo[i] = hi[i] = i;
    std::vector<double> key(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const double delta = env.delta;
    const double target = delta * delta;
    const bool gaussian = env.kind == EnvelopeF::Kind::gaussian;
    const double w = step * delta;
    // Pairing noise u*s/v has tail s/(2y); either partner may carry it, so jumps
    // have tail s/y, i.e. Cauchy scale pi*s/2. Half the weight moves per layer.
    const double s = step * delta / 10.0;
    // The 1.2 factor is measured: pairing within the sorted noisy keys shortens
    // the realized jumps relative to the raw noise tail.
    const auto cauchy_layers = static_cast<std::size_t>(std::ceil(1.2 * 0.5 * delta / (s * pi / 4.0)));

    // Successive layers can re-form nearby pairs, so a naive variance budget
    // drifts. Instead the angle-averaged weights of probe columns are tracked
    // exactly: each applied rotation averages the two rows.
    std::vector<std::size_t> probes;
    {
        std::vector<std::size_t> inner;
        for (std::size_t a = 0; a < n; ++a)
            if (levels[a] >= levels.front() + 4.0 * delta && levels[a] <= levels.back() - 4.0 * delta)
                inner.push_back(a);
        if (inner.empty())
            for (std::size_t a = 0; a < n; ++a) inner.push_back(a);
        const std::size_t k = std::min<std::size_t>(64, inner.size());
        for (std::size_t i = 0; i < k; ++i) probes.push_back(inner[i * inner.size() / k]);
    }
    const std::size_t K = probes.size();
    RowMatrix chain = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) chain(probes[k], k) = 1.0;
    auto chain_variance = [&] {
        double sum = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double* row = chain.row(static_cast<Eigen::Index>(m)).data();
            for (std::size_t k = 0; k < K; ++k) {
                if (row[k] == 0.0) continue;
                const double d = levels[m] - levels[probes[k]];
                sum += row[k] * d * d;
            }
        }
        return sum / double(K);
    };

    double variance = 0.0;
    double last_inc = 0.0;
    std::size_t layer = 0;
    for (;;) {
        if (!gaussian && layer >= cauchy_layers) break;
        double keep = 1.0;
        bool final_layer = false;
        if (gaussian) {
            if (variance >= target) break;
            if (last_inc > 0.0 && variance + last_inc > target) {
                keep = (target - variance) / last_inc;
                final_layer = true;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double noise = gaussian ? w * u(rng) : u(rng) * s / std::max(u(rng), 1e-12);
            key[i] = levels[i] + noise;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
        // Random pairing parity; a fixed parity re-forms the same pairs every
        // layer when the noise is only a few spacings.
        const std::size_t off = u(rng) < 0.5 ? 0 : 1;
        const std::size_t pairs = (n - off) / 2;
        if (pairs == 0) break;

        for (std::size_t p = 0; p < pairs; ++p) {
            if (keep < 1.0 && u(rng) >= keep) continue;
            const std::size_t i = order[off + 2 * p], j = order[off + 2 * p + 1];
            const double th = 2.0 * pi * u(rng);
            const double c = std::cos(th), sn = std::sin(th);
            Scalar p0 = 1.0, p1 = 1.0, p2 = 1.0;
            if constexpr (complex_entries) {
                p0 = std::polar(1.0, 2.0 * pi * u(rng));
                p1 = std::polar(1.0, 2.0 * pi * u(rng));
                p2 = std::polar(1.0, 2.0 * pi * u(rng));
            }
            const std::size_t a = std::min(lo[i], lo[j]), b = std::max(hi[i], hi[j]);
            Scalar* ri = o.row(static_cast<Eigen::Index>(i)).data();
            Scalar* rj = o.row(static_cast<Eigen::Index>(j)).data();
            if constexpr (complex_entries) {
                const Scalar a01 = p0 * sn * p1, a10 = -p2 * sn * std::conj(p1), a00 = p0 * c, a11 = p2 * c;
                for (std::size_t k = a; k <= b; ++k) {
                    const Scalar x = ri[k], y = rj[k];
                    ri[k] = a00 * x + a01 * y;
                    rj[k] = a10 * x + a11 * y;
                }
            } else {
                for (std::size_t k = a; k <= b; ++k) {
                    const double x = ri[k], y = rj[k];
                    ri[k] = c * x + sn * y;
                    rj[k] = -sn * x + c * y;
                }
            }
            lo[i] = lo[j] = a;
            hi[i] = hi[j] = b;
            if (gaussian) {
                double* ci = chain.row(static_cast<Eigen::Index>(i)).data();
                double* cj = chain.row(static_cast<Eigen::Index>(j)).data();
                for (std::size_t k = 0; k < K; ++k) ci[k] = cj[k] = 0.5 * (ci[k] + cj[k]);
            }
        }
        ++layer;
        if (gaussian) {
            const double now = chain_variance();
            last_inc = now - variance;
            variance = now;
        }
        if (final_layer) break;
    }
}

double interp_index(const std::vector<double>& ebar, double x) {
    const std::size_t n = ebar.size();
    if (n == 1) return ebar[0];
    if (x <= 0.0) return ebar[0] + x * (ebar[1] - ebar[0]);
    if (x >= double(n - 1)) return ebar[n - 1] + (x - double(n - 1)) * (ebar[n - 1] - ebar[n - 2]);
    auto i = static_cast<std::size_t>(x);
    double f = x - double(i);
    return ebar[i] + f * (ebar[i + 1] - ebar[i]);
}

}  // namespace

Realization sample_synthetic(const HFSpectrum& spectrum, const EnvelopeF& envelope, Symmetry symmetry,
                             std::uint64_t seed, const SyntheticOptions& options) {
    envelope.validate();
    const std::size_t n = spectrum.size();
    require(n > 0, ErrorKind::empty_spectrum, "empty spectrum");
    const double center = spectrum.levels[n / 2];
    const double n_delta = spectrum.density.rho(center) * envelope.delta;
    require(n_delta >= 3.0, ErrorKind::parameter, "envelope must cover at least three mean spacings");
    require(options.step > 0.0, ErrorKind::parameter, "circuit step must be positive");

    Rng eig_rng = stream(seed, 0, 51);
    Rng vec_rng = stream(seed, 0, 52);

    Realization r;
    r.origin = Realization::Origin::synthetic;
    r.symmetry = symmetry;
    auto ebar = smooth_positions(spectrum, envelope.delta);
    r.mean_eigenvalues = Eigen::Map<Eigen::VectorXd>(ebar.data(), static_cast<Eigen::Index>(n));

    std::vector<double> u;
    if (options.eigenvalues == EigenvalueModel::stitched) {
        double seg = options.stitch_levels > 0.0 ? options.stitch_levels : n_delta;
        u = stitched_unfolded(n, seg, symmetry, eig_rng);
    } else {
        u = wigner_dyson_unfolded(n, symmetry, eig_rng);
    }
    r.eigenvalues.resize(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) r.eigenvalues(a) = interp_index(ebar, u[a] - 0.5);

    const auto nn = static_cast<Eigen::Index>(n);
    const bool spanning = envelope.delta >= spectrum.emax - spectrum.emin;
    if (symmetry == Symmetry::orthogonal) {
        if (spanning) {
            r.real_transform = haar<RMatrix>(nn, vec_rng, false);
        } else {
            RowMatrix o = RowMatrix::Identity(nn, nn);
            rotation_circuit(o, spectrum.levels, envelope, options.step, vec_rng);
            r.real_transform = o;
        }
    } else {
        if (spanning) {
            r.complex_transform = haar<CMatrix>(nn, vec_rng, true);
        } else {
            RowCMatrix o = RowCMatrix::Identity(nn, nn);
            rotation_circuit(o, spectrum.levels, envelope, options.step, vec_rng);
            r.complex_transform = o;
        }
    }
    return r;
}

double golden_rule_width(const HFSpectrum& spectrum, const CMatrix& V) {
    const auto n = static_cast<Eigen::Index>(spectrum.size());
    require(V.rows() == n && V.cols() == n, ErrorKind::shape, "residual dimension does not match spectrum");
    const Eigen::Index rows = std::min<Eigen::Index>(n, std::max<Eigen::Index>(100, n / 5));
    require(rows >= 10, ErrorKind::insufficient_data, "golden-rule window needs at least 10 rows");
    const Eigen::Index first = (n - rows) / 2;
    double sum = 0.0;
    for (Eigen::Index m = first; m < first + rows; ++m)
        sum += V.row(m).squaredNorm() - std::norm(V(m, m));
    const double mean_sq = sum / (double(rows) * double(n - 1));
    const double rho = spectrum.density.rho(spectrum.levels[static_cast<std::size_t>(n / 2)]);
    return 2.0 * pi * mean_sq * rho;
}

const char* to_string(Symmetry s) { return s == Symmetry::orthogonal ? "orthogonal" : "unitary"; }
const char* to_string(EnvelopeF::Kind k) { return k == EnvelopeF::Kind::gaussian ? "gaussian" : "lorentzian"; }

}  // namespace chaotherm
