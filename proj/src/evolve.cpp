#include "chaotherm/evolve.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <cmath>
#include <numbers>
#include <numeric>

#include "chaotherm/error.hpp"
#include "chaotherm/fit.hpp"
#include "chaotherm/parallel.hpp"
#include "chaotherm/rng.hpp"

namespace chaotherm {

namespace {

constexpr double kPi = std::numbers::pi;

struct Entry {
    Eigen::Index m, n;
    cplx value;
};

std::vector<Entry> nonzeros(const CMatrix& a) {
    std::vector<Entry> out;
    for (Eigen::Index n = 0; n < a.cols(); ++n)
        for (Eigen::Index m = 0; m < a.rows(); ++m)
            if (a(m, n) != cplx(0.0, 0.0)) out.push_back({m, n, a(m, n)});
    return out;
}

bool is_real(const CMatrix& a) { return a.size() == 0 || a.imag().cwiseAbs().maxCoeff() == 0.0; }

// Indices of rows or columns that carry any nonzero entry.
std::vector<Eigen::Index> support(const CMatrix& a) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        if (a.row(i).cwiseAbs().maxCoeff() > 0.0 || a.col(i).cwiseAbs().maxCoeff() > 0.0) s.push_back(i);
    return s;
}

bool is_diagonal(const CMatrix& a) {
    for (Eigen::Index n = 0; n < a.cols(); ++n)
        for (Eigen::Index m = 0; m < a.rows(); ++m)
            if (m != n && a(m, n) != cplx(0.0, 0.0)) return false;
    return true;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cast_op(const CMatrix& op) {
    if constexpr (std::is_same_v<Scalar, double>) return op.real();
    else return op;
}

// T^dagger op T, exploiting diagonal or restricted support.
template <class Mat>
Mat rotate(const Mat& T, const CMatrix& op) {
    using Scalar = typename Mat::Scalar;
    const auto n = T.rows();
    auto s = support(op);
    const auto k = static_cast<Eigen::Index>(s.size());
    if (k == 0) return Mat::Zero(n, n);
    Mat ts(k, T.cols());
    for (Eigen::Index i = 0; i < k; ++i) ts.row(i) = T.row(s[i]);
    if (is_diagonal(op)) {
        Mat scaled = ts;
        for (Eigen::Index i = 0; i < k; ++i) scaled.row(i) *= cast_op<Scalar>(op.block(s[i], s[i], 1, 1))(0, 0);
        return ts.adjoint() * scaled;
    }
    Mat sub(k, k);
    auto full = cast_op<Scalar>(op);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i) sub(i, j) = full(s[i], s[j]);
    return ts.adjoint() * (sub * ts);
}

void check_dims(std::size_t n, const CMatrix& a, const char* what) {
    require(a.rows() == static_cast<Eigen::Index>(n) && a.cols() == static_cast<Eigen::Index>(n), ErrorKind::shape,
            std::string(what) + " dimension mismatch");
}

// Tr(A rho(t)) = z^dagger M z with M = A~ o Pi~^T and z_b = exp(-i E_b t).
void evolve_into(const Realization& r, const CMatrix& A, const CMatrix& P, const TimeGrid& grid, double* out,
                 double& max_imag) {
    const Eigen::VectorXd& E = r.eigenvalues;
    const auto n = E.size();
    if (r.is_real() && is_real(A) && is_real(P)) {
        RMatrix At = rotate(r.real_transform, A);
        RMatrix Pt = rotate(r.real_transform, P);
        RMatrix M = At.cwiseProduct(Pt.transpose());
        Eigen::VectorXd c(n), s(n);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid.absolute(i);
            for (Eigen::Index b = 0; b < n; ++b) {
                c(b) = std::cos(E(b) * t);
                s(b) = std::sin(E(b) * t);
            }
            Eigen::VectorXd mc = M * c, ms = M * s;
            out[i] = c.dot(mc) + s.dot(ms);
            max_imag = std::max(max_imag, std::abs(c.dot(ms) - s.dot(mc)));
        }
        return;
    }
    CMatrix T = r.transform();
    CMatrix At = rotate(T, A);
    CMatrix Pt = rotate(T, P);
    CMatrix M = At.cwiseProduct(Pt.transpose());
    Eigen::VectorXcd z(n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.absolute(i);
        for (Eigen::Index b = 0; b < n; ++b) z(b) = std::polar(1.0, -E(b) * t);
        cplx v = z.dot(M * z);  // dot conjugates its first argument
        out[i] = v.real();
        max_imag = std::max(max_imag, std::abs(v.imag()));
    }
}

double plateau_begin(const TimeGrid& grid, double start_over_delta, std::size_t& first) {
    first = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.scaled(i) >= start_over_delta - 1e-12) {
            first = i;
            break;
        }
    return start_over_delta;
}

}  // namespace

void TimeGrid::validate() const {
    require(delta > 0.0, ErrorKind::parameter, "time grid needs a positive delta");
    require(!times.empty(), ErrorKind::parameter, "empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(times[i] >= 0.0 && std::isfinite(times[i]), ErrorKind::parameter, "times must be nonnegative");
        if (i) require(times[i] > times[i - 1], ErrorKind::ordering, "times must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(double t_max_over_delta, std::size_t points, double delta) {
    require(points >= 2 && t_max_over_delta > 0.0, ErrorKind::parameter, "bad time grid");
    TimeGrid g;
    g.unit = Unit::inverse_delta;
    g.delta = delta;
    for (std::size_t i = 0; i < points; ++i) g.times.push_back(t_max_over_delta * double(i) / double(points - 1));
    return g;
}

Realization EnsembleSpec::draw(std::uint64_t master, std::size_t index) const {
    const std::uint64_t seed = realization_seed(master, index);
    if (origin == Origin::microscopic) {
        ResidualSpec rs = residual;
        rs.symmetry = symmetry;
        return diagonalize(spectrum, sample_residual(spectrum, rs, seed));
    }
    return sample_synthetic(spectrum, envelope, symmetry, seed, synthetic);
}

Trajectory evolve_expectation(const Realization& real, const Observable& A, const StatOperator& pi,
                              const TimeGrid& grid) {
    grid.validate();
    check_dims(real.size(), A.matrix, "observable");
    check_dims(real.size(), pi.matrix, "statistical operator");
    Trajectory tr;
    tr.grid = grid;
    tr.mean.assign(grid.size(), 0.0);
    tr.stderr_.assign(grid.size(), 0.0);
    tr.provenance = Trajectory::Provenance::single;
    evolve_into(real, A.matrix, pi.matrix, grid, tr.mean.data(), tr.max_imaginary);
    return tr;
}

TrajectorySamples sample_trajectories(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                                      const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers) {
    require(R >= 1, ErrorKind::parameter, "need at least one realization");
    grid.validate();
    check_dims(spec.spectrum.size(), A.matrix, "observable");
    check_dims(spec.spectrum.size(), pi.matrix, "statistical operator");
    struct Row {
        std::vector<double> v;
        double imag;
    };
    auto rows = parallel_map(R, workers, [&](std::size_t r) {
        Realization real = spec.draw(master, r);
        Row row{std::vector<double>(grid.size()), 0.0};
        evolve_into(real, A.matrix, pi.matrix, grid, row.v.data(), row.imag);
        return row;
    });
    TrajectorySamples s;
    s.grid = grid;
    s.values.resize(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t i = 0; i < grid.size(); ++i) s.values(r, i) = rows[r].v[i];
        s.max_imaginary = std::max(s.max_imaginary, rows[r].imag);
    }
    return s;
}

Trajectory summarize(const TrajectorySamples& samples) {
    const auto R = samples.values.rows();
    Trajectory tr;
    tr.grid = samples.grid;
    tr.provenance = R == 1 ? Trajectory::Provenance::single : Trajectory::Provenance::monte_carlo;
    tr.realizations = static_cast<std::size_t>(R);
    tr.max_imaginary = samples.max_imaginary;
    for (Eigen::Index i = 0; i < samples.values.cols(); ++i) {
        // Sequential sums in realization order keep results worker-independent.
        double sum = 0.0;
        for (Eigen::Index r = 0; r < R; ++r) sum += samples.values(r, i);
        const double mean = sum / double(R);
        double ss = 0.0;
        for (Eigen::Index r = 0; r < R; ++r) ss += (samples.values(r, i) - mean) * (samples.values(r, i) - mean);
        tr.mean.push_back(mean);
        tr.stderr_.push_back(R > 1 ? std::sqrt(ss / double(R - 1) / double(R)) : 0.0);
    }
    return tr;
}

Trajectory ensemble_mean(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                         const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers) {
    return summarize(sample_trajectories(spec, A, pi, grid, R, master, workers));
}

std::vector<double> smoothed_density(const HFSpectrum& spectrum, double delta) {
    const auto& lv = spectrum.levels;
    const double var = 2.0 * delta * delta;
    const double norm = 1.0 / std::sqrt(2.0 * kPi * var);
    std::vector<double> rho(lv.size());
    for (std::size_t m = 0; m < lv.size(); ++m) {
        auto a = std::lower_bound(lv.begin(), lv.end(), lv[m] - 10.0 * delta);
        auto b = std::upper_bound(lv.begin(), lv.end(), lv[m] + 10.0 * delta);
        double s = 0.0;
        for (auto it = a; it != b; ++it) s += std::exp(-(*it - lv[m]) * (*it - lv[m]) / (2.0 * var));
        rho[m] = norm * s;
    }
    return rho;
}

AnalyticPrediction analytic_prediction(const HFSpectrum& spectrum, const Observable& A, const StatOperator& pi,
                                       const EnvelopeF& envelope, const TimeGrid& grid) {
    envelope.validate();
    grid.validate();
    const std::size_t n = spectrum.size();
    check_dims(n, A.matrix, "observable");
    check_dims(n, pi.matrix, "statistical operator");
    const auto& lv = spectrum.levels;
    const double d = envelope.delta;
    const bool gaussian = envelope.kind == EnvelopeF::Kind::gaussian;
    auto pi_nz = nonzeros(pi.matrix);

    AnalyticPrediction out;
    // First term: sum_mn A_mn Pi_nm exp(i(E_m - E_n)t), damped.
    std::vector<std::pair<double, cplx>> terms;
    for (const auto& e : pi_nz) {  // e.m = n, e.n = m in the sum above
        cplx c = A.matrix(e.n, e.m) * e.value;
        if (c != cplx(0.0, 0.0)) terms.push_back({lv[e.n] - lv[e.m], c});
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.absolute(i);
        cplx v = 0.0;
        for (const auto& [w, c] : terms) v += c * std::polar(1.0, w * t);
        const double damp = gaussian ? std::exp(-t * t * d * d) : std::exp(-d * t);
        out.first_term.push_back(v.real() * damp);
    }

    // Exact asymptote with a smoothed density in the 1/rho(E_m) prefactor.
    auto rho = smoothed_density(spectrum, d);
    auto kernel = [&](double x) {
        if (gaussian) return std::exp(-x * x / (4.0 * d * d)) / (2.0 * std::sqrt(kPi) * d);
        return (d / kPi) / (x * x + d * d);
    };
    const double cutoff = gaussian ? 12.0 * d : std::numeric_limits<double>::infinity();
    double asym = 0.0;
    std::vector<std::size_t> diag_pi;
    for (std::size_t m = 0; m < n; ++m)
        if (pi.matrix(m, m).real() != 0.0) diag_pi.push_back(m);
    for (std::size_t m = 0; m < n; ++m) {
        const double amm = A.matrix(m, m).real();
        if (amm == 0.0) continue;
        double s = 0.0;
        for (std::size_t k : diag_pi) {
            double x = lv[m] - lv[k];
            if (std::abs(x) > cutoff) continue;
            s += kernel(x) * pi.matrix(k, k).real();
        }
        asym += amm * s / rho[m];
    }
    // Exchange term A_nm Pi_mn (equal to A_nm Pi_nm for real symmetric operators).
    for (const auto& e : pi_nz) {
        const Eigen::Index m = e.m, k = e.n;  // Pi_mk
        double x = lv[m] - lv[k];
        if (std::abs(x) > cutoff) continue;
        asym += (kernel(x) / rho[m] * A.matrix(k, m) * e.value).real();
    }
    out.asymptote_exact = asym;

    WindowPartition w = partition_windows(spectrum, pi, d);
    double coarse = 0.0;
    for (std::size_t k = 0; k < w.windows(); ++k) {
        if (w.count[k] == 0 || w.weight[k] == 0.0) continue;
        double tr = 0.0;
        for (std::size_t m = w.first[k]; m < w.first[k] + w.count[k]; ++m) tr += A.matrix(m, m).real();
        coarse += w.weight[k] * tr / (std::sqrt(2.0) * kPi * w.density[k] * d);
    }
    out.asymptote_window = coarse;

    out.total.grid = grid;
    out.total.provenance = Trajectory::Provenance::analytic;
    out.total.realizations = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.total.mean.push_back(out.first_term[i] + asym);
        out.total.stderr_.push_back(0.0);
    }
    return out;
}

std::vector<double> averaged_propagator(const EnvelopeF& envelope, const TimeGrid& grid) {
    envelope.validate();
    grid.validate();
    std::vector<double> out;
    const double d = envelope.delta;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.absolute(i);
        out.push_back(envelope.kind == EnvelopeF::Kind::gaussian ? std::exp(-0.5 * t * t * d * d)
                                                                 : std::exp(-0.5 * d * t));
    }
    return out;
}

namespace {

// HF states at least `margin` delta from both spectrum ends.
std::vector<std::size_t> central_states(const HFSpectrum& s, double delta, double margin) {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < s.size(); ++m)
        if (s.levels[m] >= s.levels.front() + margin * delta && s.levels[m] <= s.levels.back() - margin * delta)
            out.push_back(m);
    require(!out.empty(), ErrorKind::insufficient_data, "no states away from the spectrum edges");
    return out;
}

}  // namespace

Trajectory sampled_propagator(const EnsembleSpec& spec, const TimeGrid& grid, std::size_t R, std::uint64_t master,
                              int workers) {
    require(R >= 2, ErrorKind::parameter, "need at least two realizations");
    grid.validate();
    auto rows = central_states(spec.spectrum, spec.delta(), 3.0);
    const auto& lv = spec.spectrum.levels;
    auto per = parallel_map(R, workers, [&](std::size_t r) {
        Realization real = spec.draw(master, r);
        RMatrix w = real.weights();
        std::vector<double> v(grid.size(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid.absolute(i);
            double acc = 0.0;
            for (std::size_t m : rows) {
                double s = 0.0;
                for (Eigen::Index a = 0; a < w.cols(); ++a) s += w(m, a) * std::cos((lv[m] - real.eigenvalues(a)) * t);
                acc += s;
            }
            v[i] = acc / double(rows.size());
        }
        return v;
    });
    TrajectorySamples s;
    s.grid = grid;
    s.values.resize(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t i = 0; i < grid.size(); ++i) s.values(r, i) = per[r][i];
    return summarize(s);
}

PairCumulant pair_cumulant(const EnsembleSpec& spec, double t1, double t2, std::size_t R, std::uint64_t master,
                           int workers) {
    require(R >= 10, ErrorKind::insufficient_data, "need at least 10 realizations");
    const auto& lv = spec.spectrum.levels;
    const double d = spec.delta();
    auto states = central_states(spec.spectrum, d, 3.0);
    // A central block of at most 120 states; pairs within one delta.
    if (states.size() > 120) {
        std::size_t skip = (states.size() - 120) / 2;
        states = std::vector<std::size_t>(states.begin() + skip, states.begin() + skip + 120);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
            if (std::abs(lv[states[i]] - lv[states[j]]) <= d) pairs.push_back({i, j});
    require(!pairs.empty(), ErrorKind::insufficient_data, "no state pairs within delta");

    struct Sample {
        std::vector<cplx> u1, u2;
    };
    auto per = parallel_map(R, workers, [&](std::size_t r) {
        Realization real = spec.draw(master, r);
        CMatrix T = real.transform();
        const auto k = static_cast<Eigen::Index>(states.size());
        CMatrix Ts(k, T.cols());
        for (Eigen::Index i = 0; i < k; ++i) Ts.row(i) = T.row(static_cast<Eigen::Index>(states[i]));
        auto block = [&](double t) {
            Eigen::VectorXcd ph(T.cols());
            for (Eigen::Index a = 0; a < T.cols(); ++a) ph(a) = std::polar(1.0, -real.eigenvalues(a) * t);
            return CMatrix(Ts * ph.asDiagonal() * Ts.adjoint());
        };
        CMatrix U1 = block(t1), U2 = block(t2);
        Sample s;
        for (auto [i, j] : pairs) {
            s.u1.push_back(U1(i, j));
            s.u2.push_back(U2(i, j));
        }
        return s;
    });

    const std::size_t P = pairs.size();
    std::vector<cplx> m1(P, 0.0), m2(P, 0.0);
    std::vector<cplx> q(R, 0.0);  // pair-averaged product per realization
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t p = 0; p < P; ++p) {
            m1[p] += per[r].u1[p];
            m2[p] += per[r].u2[p];
            q[r] += per[r].u1[p] * per[r].u2[p];
        }
        q[r] /= double(P);
    }
    cplx mean_q = 0.0, mean_mm = 0.0;
    for (std::size_t r = 0; r < R; ++r) mean_q += q[r];
    mean_q /= double(R);
    for (std::size_t p = 0; p < P; ++p) mean_mm += (m1[p] / double(R)) * (m2[p] / double(R));
    mean_mm /= double(P);
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) ss += std::norm(q[r] - mean_q);
    PairCumulant out;
    cplx v = mean_q - mean_mm;
    out.value = v.real();
    out.imag = v.imag();
    // Complex spread; the subtracted product term is O(1/R) and ignored in the error.
    out.stderr_ = std::sqrt(ss / double(R - 1) / double(R) / 2.0);
    out.pairs = P;
    return out;
}

CorrelationEstimate correlation_fn(const TrajectorySamples& samples, const HFSpectrum& spectrum,
                                   const Observable& A, const StatOperator& pi, double delta,
                                   double plateau_start) {
    const auto R = samples.values.rows();
    const auto T = samples.values.cols();
    require(R >= 10, ErrorKind::insufficient_data, "correlation estimate needs at least 10 realizations");
    const std::size_t n = spectrum.size();
    check_dims(n, A.matrix, "observable");
    check_dims(n, pi.matrix, "statistical operator");

    CorrelationEstimate c;
    c.grid = samples.grid;
    c.realizations = static_cast<std::size_t>(R);
    c.plateau_start = plateau_start;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(T);
    for (Eigen::Index r = 0; r < R; ++r) mean += samples.values.row(r);
    mean /= double(R);
    RMatrix dev = samples.values.rowwise() - mean;
    c.covariance = dev.transpose() * dev / double(R - 1);
    c.stderr_.resize(T, T);
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < T; ++j) {
            Eigen::VectorXd prod = dev.col(i).cwiseProduct(dev.col(j));
            double m = prod.mean();
            double var = (prod.array() - m).square().sum() / double(R - 1);
            c.stderr_(i, j) = std::sqrt(var / double(R));
        }

    // Analytic companions.
    WindowPartition w = partition_windows(spectrum, pi, delta);
    std::vector<std::size_t> win(n);
    for (std::size_t m = 0; m < n; ++m) win[m] = w.window_of(spectrum.levels[m]);
    auto s = support(pi.matrix);
    const auto k = static_cast<Eigen::Index>(s.size());
    double c5 = 0.0;
    if (k > 0) {
        // (Pi A) restricted to support rows, (A Pi) restricted to support columns.
        CMatrix pis(k, static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < k; ++i) pis.row(i) = pi.matrix.row(s[i]);
        CMatrix piA = pis * A.matrix;  // rows s
        CMatrix Api(static_cast<Eigen::Index>(n), k);  // columns s
        for (Eigen::Index i = 0; i < k; ++i) Api.col(i) = A.matrix * pi.matrix.col(s[i]);
        std::vector<Eigen::Index> pos(n, -1);
        for (Eigen::Index i = 0; i < k; ++i) pos[s[i]] = i;
        for (Eigen::Index i = 0; i < k; ++i) {
            const std::size_t m = static_cast<std::size_t>(s[i]);
            const std::size_t kw = win[m];
            if (w.count[kw] == 0) continue;
            const double pref = 1.0 / (2.0 * kPi * w.density[kw] * delta);
            for (std::size_t nn = w.first[kw]; nn < w.first[kw] + w.count[kw]; ++nn) {
                cplx first = piA(i, static_cast<Eigen::Index>(nn));
                if (first == cplx(0.0, 0.0)) continue;
                cplx second = Api(static_cast<Eigen::Index>(nn), i);  // (A Pi)_{n m}
                cplx third = pos[nn] >= 0 ? Api(static_cast<Eigen::Index>(m), pos[nn]) : cplx(0.0, 0.0);  // (A Pi)_{m n}
                c5 += pref * (first * (second + third)).real();
            }
        }
    }
    c.c5_magnitude = c5;
    c.c5.resize(T, T);
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < T; ++j) {
            double t1 = samples.grid.absolute(i), t2 = samples.grid.absolute(j);
            c.c5(i, j) = c5 * std::exp(-0.5 * (t1 * t1 + t2 * t2) * delta * delta);
        }

    // c8: window-pair sums of A_mn Pi_nm.
    std::map<std::pair<std::size_t, std::size_t>, cplx> blocks;
    for (const auto& e : nonzeros(pi.matrix)) {
        cplx v = A.matrix(e.n, e.m) * e.value;
        if (v != cplx(0.0, 0.0)) blocks[{win[e.m], win[e.n]}] += v;
    }
    double c8 = 0.0;
    for (const auto& [key, v] : blocks) {
        double rk1 = w.density[key.first], rk2 = w.density[key.second];
        if (rk1 <= 0.0 || rk2 <= 0.0) continue;
        c8 += (v * v).real() / (4.0 * kPi * kPi * rk1 * rk2 * delta * delta);
    }
    c.c8 = c8;

    // Plateau summaries.
    std::size_t first = 0;
    plateau_begin(samples.grid, plateau_start, first);
    if (first < static_cast<std::size_t>(T)) {
        double v = 0.0, se = 0.0;
        std::size_t cnt = 0;
        for (auto i = static_cast<Eigen::Index>(first); i < T; ++i, ++cnt) {
            v += c.covariance(i, i);
            se += c.stderr_(i, i);
        }
        c.plateau_variance = v / double(cnt);
        c.plateau_variance_stderr = se / double(cnt);
        Eigen::VectorXd avg = samples.values.rightCols(T - static_cast<Eigen::Index>(first)).rowwise().mean();
        double m = avg.mean();
        c.plateau_mean_std = std::sqrt((avg.array() - m).square().sum() / double(R - 1));

        // Time-independent part: pairs far enough apart that the temporal
        // fluctuations have decorrelated.
        const TimeGrid& g = samples.grid;
        Eigen::MatrixXd dev = samples.values.rowwise() - samples.values.colwise().mean();
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R));
        std::size_t pairs = 0;
        for (auto i = static_cast<Eigen::Index>(first); i < T; ++i)
            for (auto k = static_cast<Eigen::Index>(first); k < T; ++k)
                if (std::abs(g.scaled(i) - g.scaled(k)) >= decorrelation_time - 1e-9) {
                    q += dev.col(i).cwiseProduct(dev.col(k));
                    ++pairs;
                }
        if (pairs > 0) {
            q /= double(pairs);
            const double rr = double(R);
            c.plateau_covariance = q.sum() / (rr - 1.0);
            const double qm = q.mean();
            c.plateau_covariance_stderr =
                std::sqrt((q.array() - qm).square().sum() / (rr - 1.0)) * rr / (rr - 1.0) / std::sqrt(rr);
            c.plateau_pairs = pairs;
        }
    }
    return c;
}

CorrelationEstimate correlation_fn(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                                   const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers,
                                   double plateau_start) {
    require(R >= 10, ErrorKind::insufficient_data, "correlation estimate needs at least 10 realizations");
    auto samples = sample_trajectories(spec, A, pi, grid, R, master, workers);
    return correlation_fn(samples, spec.spectrum, A, pi, spec.delta(), plateau_start);
}

double equilibrium_value(const HFSpectrum& spectrum, const Observable& A, const IndexRange& window) {
    require(window.first <= window.last && window.last < spectrum.size(), ErrorKind::range, "empty window");
    check_dims(spectrum.size(), A.matrix, "observable");
    double tr = 0.0;
    for (std::size_t m = window.first; m <= window.last; ++m) tr += A.matrix(m, m).real();
    return tr / double(window.count());
}

Verdict thermalization_verdict(const Trajectory& mc, const Trajectory& analytic, double eq,
                               const CorrelationEstimate& corr, const VerdictThresholds& th) {
    const TimeGrid& g = mc.grid;
    require(analytic.mean.empty() || analytic.mean.size() == mc.mean.size(), ErrorKind::shape,
            "trajectories must share a grid");
    require(!g.times.empty() && g.scaled(g.size() - 1) >= 5.0 - 1e-9, ErrorKind::parameter,
            "time grid must extend to at least 5/delta");
    std::size_t first = 0;
    plateau_begin(g, th.plateau_start, first);
    require(first + 1 < g.size(), ErrorKind::parameter, "plateau window holds fewer than two points");

    Verdict v;
    v.equilibrium = eq;
    double sum = 0.0, se_sum = 0.0, an = 0.0;
    const std::size_t cnt = g.size() - first;
    for (std::size_t i = first; i < g.size(); ++i) {
        sum += mc.mean[i];
        se_sum += mc.stderr_[i];
        if (!analytic.mean.empty()) an += analytic.mean[i];
    }
    v.plateau = sum / double(cnt);
    v.analytic_plateau = analytic.mean.empty() ? 0.0 : an / double(cnt);
    const double mean_se = se_sum / double(cnt);
    v.plateau_stderr = corr.realizations > 1 ? corr.plateau_mean_std / std::sqrt(double(corr.realizations)) : mean_se;
    double ss = 0.0;
    for (std::size_t i = first; i < g.size(); ++i) ss += (mc.mean[i] - v.plateau) * (mc.mean[i] - v.plateau);
    v.fluctuation_level = std::sqrt(ss / double(cnt));
    v.fluctuation_tolerance = th.fluct_sigmas * mean_se;
    v.relative_deviation = eq != 0.0 ? (v.plateau - eq) / std::abs(eq) : v.plateau - eq;

    const bool level_ok = std::abs(v.plateau - eq) <= std::max(3.0 * v.plateau_stderr, th.tol_rel * std::abs(eq));
    const bool flat = v.fluctuation_level <= v.fluctuation_tolerance || mc.realizations <= 1;
    if (!flat) v.outcome = Verdict::Outcome::inconclusive;
    else v.outcome = level_ok ? Verdict::Outcome::thermalizes : Verdict::Outcome::does_not_thermalize;

    // Relaxation envelope on t < plateau start.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < first; ++i) {
        x.push_back(g.absolute(i));
        y.push_back(mc.mean[i] - v.plateau);
    }
    bool has_signal = false;
    for (double e : y) has_signal = has_signal || e != 0.0;
    if (x.size() >= 3 && has_signal) {
        const double d = g.delta;
        auto gauss = [](double t, double tau) { return std::exp(-(t / tau) * (t / tau)); };
        auto expo = [](double t, double tau) { return std::exp(-t / tau); };
        ShapeFit fg = fit_shape(x, y, gauss, 0.02 / d, 20.0 / d);
        ShapeFit fe = fit_shape(x, y, expo, 0.02 / d, 20.0 / d);
        v.gaussian_residual = fg.residual;
        v.exponential_residual = fe.residual;
        if (fg.residual <= fe.residual) {
            v.envelope_shape = "gaussian";
            v.relaxation_time = fg.width;
        } else {
            v.envelope_shape = "exponential";
            v.relaxation_time = fe.width;
        }
    } else {
        v.envelope_shape = "none";
    }
    return v;
}

const char* to_string(Verdict::Outcome o) {
    switch (o) {
        case Verdict::Outcome::thermalizes: return "thermalizes";
        case Verdict::Outcome::does_not_thermalize: return "does_not_thermalize";
        case Verdict::Outcome::inconclusive: return "inconclusive";
    }
    return "unknown";
}

}  // namespace chaotherm
