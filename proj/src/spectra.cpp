#include "chaotherm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "chaotherm/error.hpp"
#include "chaotherm/fit.hpp"
#include "chaotherm/rng.hpp"

namespace chaotherm {

namespace detail {
extern const std::size_t goe_reference_size;
extern const double goe_reference_L[];
extern const double goe_reference_value[];
extern const double goe_reference_stderr[];
}  // namespace detail

namespace {

constexpr double pi = std::numbers::pi;

void require_sorted(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        require(v[i] >= v[i - 1], ErrorKind::ordering, "levels must be sorted ascending");
}

double ks_distance(std::vector<double> s, double (*cdf)(double)) {
    std::sort(s.begin(), s.end());
    const double n = double(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double f = cdf(s[i]);
        d = std::max({d, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    return d;
}

double interp_curve(const std::vector<double>& x, const std::vector<double>& y, double at) {
    require(!x.empty(), ErrorKind::insufficient_data, "empty reference curve");
    if (at <= x.front()) return y.front();
    if (at >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    double f = (at - x[j - 1]) / (x[j] - x[j - 1]);
    return y[j - 1] + f * (y[j] - y[j - 1]);
}

// Least-squares deviation of the staircase from a line on [a, a+L].
double window_delta3(const std::vector<double>& x, double a, double L) {
    auto lo = std::lower_bound(x.begin(), x.end(), a);
    auto hi = std::upper_bound(x.begin(), x.end(), a + L);
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    double k = 0.0;
    for (auto it = lo; it != hi; ++it) {
        double y0 = *it - a;
        double y1 = (it + 1 != hi) ? *(it + 1) - a : L;
        k += 1.0;
        i0 += k * (y1 - y0);
        i1 += k * 0.5 * (y1 * y1 - y0 * y0);
        i2 += k * k * (y1 - y0);
    }
    // Normal equations for N(y) ~ A y + B.
    const double s11 = L * L * L / 3.0, s12 = L * L / 2.0, s22 = L;
    const double det = s11 * s22 - s12 * s12;
    const double A = (i1 * s22 - i0 * s12) / det;
    const double B = (s11 * i0 - s12 * i1) / det;
    return std::max(0.0, (i2 - A * i1 - B * i0) / L);
}

}  // namespace

std::vector<double> unfold(const std::vector<double>& levels, const DensityModel& density, double origin) {
    require_sorted(levels);
    density.validate();
    std::vector<double> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) out[i] = density.count_between(origin, levels[i]);
    return out;
}

std::vector<double> unfold_by_positions(const std::vector<double>& levels, const std::vector<double>& mean_positions) {
    require_sorted(levels);
    require_sorted(mean_positions);
    require(mean_positions.size() >= 2, ErrorKind::insufficient_data, "need at least two mean positions");
    const auto& x = mean_positions;
    const std::size_t n = x.size();
    std::vector<double> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        // Linear extrapolation past the ends with the end slopes.
        auto it = std::upper_bound(x.begin(), x.end(), levels[i]);
        std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, n - 1);
        const double gap = x[j] - x[j - 1];
        require(gap > 0.0, ErrorKind::degenerate_input, "mean positions must be strictly increasing");
        out[i] = double(j - 1) + 0.5 + (levels[i] - x[j - 1]) / gap;
    }
    return out;
}

std::vector<double> unfold_center(const Realization& r, const HFSpectrum& spectrum) {
    const std::size_t n = r.size();
    std::vector<double> ev(r.eigenvalues.data(), r.eigenvalues.data() + n);
    auto half = [n](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<long>(n / 4), v.begin() + static_cast<long>(n - n / 4));
    };
    if (r.origin == Realization::Origin::synthetic && r.mean_eigenvalues.size() == r.eigenvalues.size()) {
        std::vector<double> mp(r.mean_eigenvalues.data(), r.mean_eigenvalues.data() + n);
        return half(unfold_by_positions(ev, mp));
    }
    return unfold(half(ev), spectrum.density);
}

double wigner_cdf(double s) { return s <= 0.0 ? 0.0 : 1.0 - std::exp(-pi * s * s / 4.0); }
double poisson_cdf(double s) { return s <= 0.0 ? 0.0 : 1.0 - std::exp(-s); }

NnsResult nns_ks_multi(const std::vector<std::vector<double>>& unfolded) {
    std::vector<double> s;
    for (const auto& seq : unfolded) {
        require_sorted(seq);
        for (std::size_t i = 1; i < seq.size(); ++i) s.push_back(seq[i] - seq[i - 1]);
    }
    require(s.size() >= 200, ErrorKind::insufficient_data, "need at least 200 spacings");
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
    require(mean > 0.0, ErrorKind::degenerate_input, "all spacings are zero");
    for (double& v : s) v /= mean;

    NnsResult r;
    r.spacings = s.size();
    const int bins = 40;
    const double width = 0.1;
    r.histogram.edges.resize(bins + 1);
    r.histogram.counts.assign(bins, 0.0);
    for (int b = 0; b <= bins; ++b) r.histogram.edges[b] = b * width;
    for (double v : s) {
        auto b = static_cast<int>(v / width);
        if (b >= 0 && b < bins) r.histogram.counts[b] += 1.0;
    }
    r.ks_wigner = ks_distance(s, wigner_cdf);
    r.ks_poisson = ks_distance(s, poisson_cdf);
    return r;
}

NnsResult nns_ks(const std::vector<double>& unfolded) { return nns_ks_multi({unfolded}); }

double Delta3Curve::at(double l) const { return interp_curve(L, value, l); }
double Delta3Curve::stderr_at(double l) const { return interp_curve(L, stderr_, l); }

Delta3Curve delta3_curve(const std::vector<std::vector<double>>& unfolded, const std::vector<double>& L_values) {
    require(!unfolded.empty(), ErrorKind::insufficient_data, "no sequences");
    std::size_t shortest = unfolded.front().size();
    for (const auto& seq : unfolded) {
        require_sorted(seq);
        shortest = std::min(shortest, seq.size());
    }
    Delta3Curve c;
    for (double L : L_values) {
        require(L > 0.0 && L <= double(shortest) / 4.0, ErrorKind::parameter,
                "Delta3 window longer than a quarter of the sequence");
        // Blocks of four consecutive windows absorb the overlap correlation.
        std::vector<double> block_sum, block_count;
        for (const auto& seq : unfolded) {
            const double step = 0.5 * L;
            std::size_t w = 0;
            for (double a = seq.front(); a + L <= seq.back(); a += step, ++w) {
                if (w % 4 == 0) {
                    block_sum.push_back(0.0);
                    block_count.push_back(0.0);
                }
                block_sum.back() += window_delta3(seq, a, L);
                block_count.back() += 1.0;
            }
        }
        const double total = std::accumulate(block_sum.begin(), block_sum.end(), 0.0);
        const double count = std::accumulate(block_count.begin(), block_count.end(), 0.0);
        require(count > 0.0, ErrorKind::insufficient_data, "no Delta3 windows");
        const double mean = total / count;
        const std::size_t nb = block_sum.size();
        double var = 0.0;
        if (nb > 1) {
            std::vector<double> loo(nb);
            double loo_mean = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                loo[b] = (total - block_sum[b]) / (count - block_count[b]);
                loo_mean += loo[b];
            }
            loo_mean /= double(nb);
            for (double v : loo) var += (v - loo_mean) * (v - loo_mean);
            var *= double(nb - 1) / double(nb);
        }
        c.L.push_back(L);
        c.value.push_back(mean);
        c.stderr_.push_back(std::sqrt(var));
    }
    return c;
}

std::vector<Delta3Point> compare_delta3(const Delta3Curve& curve, const Delta3Curve& reference, double sigmas,
                                        std::optional<double>& upbend) {
    std::vector<Delta3Point> out;
    upbend.reset();
    for (std::size_t i = 0; i < curve.L.size(); ++i) {
        Delta3Point p{curve.L[i], curve.value[i], curve.stderr_[i], 0.0, 0.0};
        if (!reference.empty()) {
            p.reference = reference.at(p.L);
            p.reference_stderr = reference.stderr_at(p.L);
            double se = std::hypot(p.stderr_, p.reference_stderr);
            if (!upbend && p.value > p.reference + sigmas * se) upbend = p.L;
        }
        out.push_back(p);
    }
    return out;
}

SpectralReport delta3(const std::vector<double>& unfolded, const std::vector<double>& L_values,
                      const Delta3Curve& reference, double sigmas) {
    SpectralReport r;
    r.delta3 = compare_delta3(delta3_curve({unfolded}, L_values), reference, sigmas, r.upbend_L);
    return r;
}

const Delta3Curve& goe_delta3_reference() {
    static const Delta3Curve curve = [] {
        Delta3Curve c;
        for (std::size_t i = 0; i < detail::goe_reference_size; ++i) {
            c.L.push_back(detail::goe_reference_L[i]);
            c.value.push_back(detail::goe_reference_value[i]);
            c.stderr_.push_back(detail::goe_reference_stderr[i]);
        }
        return c;
    }();
    return curve;
}

Delta3Curve sample_goe_delta3_reference(std::size_t levels, std::size_t sequences, std::uint64_t seed,
                                        const std::vector<double>& L_values) {
    std::vector<std::vector<double>> seqs;
    for (std::size_t s = 0; s < sequences; ++s) {
        Rng rng = stream(seed, s, 61);
        seqs.push_back(wigner_dyson_unfolded(levels, Symmetry::orthogonal, rng));
    }
    return delta3_curve(seqs, L_values);
}

namespace {
double gauss_shape(double x, double w) { return std::exp(-0.5 * x * x / (w * w)); }
double lorentz_shape(double x, double w) { return 1.0 / (x * x + 0.25 * w * w); }
}  // namespace

double StrengthFit::gaussian_at(double x) const {
    return gaussian_width > 0.0 ? gaussian_amplitude * gauss_shape(x, gaussian_width) : 0.0;
}
double StrengthFit::lorentzian_at(double x) const {
    return lorentzian_width > 0.0 ? lorentzian_amplitude * lorentz_shape(x, lorentzian_width) : 0.0;
}

StrengthFit strength_function(const std::vector<Realization>& realizations, const HFSpectrum& spectrum,
                              double delta) {
    require(!realizations.empty(), ErrorKind::insufficient_data, "no realizations");
    require(delta > 0.0, ErrorKind::parameter, "strength-function width must be positive");
    const std::size_t n = spectrum.size();
    const auto& lv = spectrum.levels;
    const double lo_edge = lv.front() + strength_edge * delta;
    const double hi_edge = lv.back() - strength_edge * delta;
    const double binw = 2.0 * strength_range * delta / strength_bins;

    std::vector<double> sum(strength_bins, 0.0), cnt(strength_bins, 0.0);
    bool any_weight = false;
    for (const auto& r : realizations) {
        require(r.size() == n, ErrorKind::shape, "realization dimension mismatch");
        const bool synthetic = r.origin == Realization::Origin::synthetic && r.mean_eigenvalues.size() == r.eigenvalues.size();
        for (std::size_t a = 0; a < n; ++a) {
            const double c = synthetic ? r.mean_eigenvalues(a) : r.eigenvalues(a);
            if (c < lo_edge || c > hi_edge) continue;
            auto first = std::lower_bound(lv.begin(), lv.end(), c - strength_range * delta) - lv.begin();
            auto last = std::lower_bound(lv.begin(), lv.end(), c + strength_range * delta) - lv.begin();
            for (auto m = first; m < last; ++m) {
                auto b = static_cast<int>((lv[m] - c + strength_range * delta) / binw);
                if (b < 0 || b >= strength_bins) continue;
                double w = r.is_real() ? r.real_transform(m, a) * r.real_transform(m, a)
                                       : std::norm(r.complex_transform(m, a));
                if (w > 0.0) any_weight = true;
                sum[b] += w;
                cnt[b] += 1.0;
            }
        }
    }
    require(any_weight, ErrorKind::degenerate_input, "transforms carry no weight in the interior");

    StrengthFit f;
    f.delta = delta;
    std::vector<double> x, y;
    for (int b = 0; b < strength_bins; ++b) {
        double center = -strength_range * delta + (b + 0.5) * binw;
        double m = cnt[b] > 0.0 ? sum[b] / cnt[b] : 0.0;
        f.offsets.push_back(center);
        f.mean.push_back(m);
        f.count.push_back(cnt[b]);
        if (cnt[b] > 0.0) {
            x.push_back(center);
            y.push_back(m);
        }
    }

    auto interior = std::count_if(lv.begin(), lv.end(), [&](double e) { return e >= lo_edge && e <= hi_edge; });
    f.density = hi_edge > lo_edge ? double(interior) / (hi_edge - lo_edge) : spectrum.density.rho(spectrum.center());
    double total = 0.0;
    for (double m : f.mean) total += m * f.density * binw;
    f.sum_rule_defect = std::abs(total - 1.0);

    const double wmin = binw / 20.0, wmax = 8.0 * delta;
    ShapeFit g = fit_shape(x, y, gauss_shape, wmin, wmax);
    ShapeFit l = fit_shape(x, y, lorentz_shape, wmin, wmax);
    f.gaussian_width = g.width;
    f.gaussian_amplitude = g.amplitude;
    f.gaussian_residual = g.residual;
    f.lorentzian_width = l.width;
    f.lorentzian_amplitude = l.amplitude;
    f.lorentzian_residual = l.residual;
    return f;
}

}  // namespace chaotherm
