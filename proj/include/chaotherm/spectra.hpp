#pragma once

#include <optional>
#include <vector>

#include "chaotherm/ensemble.hpp"
#include "chaotherm/scaffold.hpp"

namespace chaotherm {

struct Histogram {
    std::vector<double> edges;
    std::vector<double> counts;
};

struct NnsResult {
    Histogram histogram;  // spacings in units of their mean
    double ks_wigner = 0.0;
    double ks_poisson = 0.0;
    std::size_t spacings = 0;
};

struct Delta3Point {
    double L = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    double reference = 0.0;
    double reference_stderr = 0.0;
};

struct Delta3Curve {
    std::vector<double> L;
    std::vector<double> value;
    std::vector<double> stderr_;

    bool empty() const { return L.empty(); }
    double at(double l) const;
    double stderr_at(double l) const;
};

struct SpectralReport {
    NnsResult nns;
    std::vector<Delta3Point> delta3;
    std::optional<double> upbend_L;
};

struct StrengthFit {
    double delta = 0.0;
    std::vector<double> offsets;  // bin centers
    std::vector<double> mean;     // mean |O|^2 per bin
    std::vector<double> count;    // entries per bin
    double gaussian_width = 0.0, gaussian_amplitude = 0.0, gaussian_residual = 0.0;
    double lorentzian_width = 0.0, lorentzian_amplitude = 0.0, lorentzian_residual = 0.0;
    double sum_rule_defect = 0.0;
    double density = 0.0;  // interior level density used for the sum rule

    double gaussian_at(double x) const;
    double lorentzian_at(double x) const;
};

std::vector<double> unfold(const std::vector<double>& levels, const DensityModel& density, double origin = 0.0);

// Unfolds through a level-by-level mean position curve: level i of the mean
// sits at i + 0.5. Used for synthetic spectra built on smooth positions.
std::vector<double> unfold_by_positions(const std::vector<double>& levels, const std::vector<double>& mean_positions);

// Central half of a realization's levels, unfolded: synthetic realizations
// through their mean positions, microscopic ones through the scaffold density.
std::vector<double> unfold_center(const Realization& r, const HFSpectrum& spectrum);

double wigner_cdf(double s);
double poisson_cdf(double s);

NnsResult nns_ks(const std::vector<double>& unfolded);
// Aggregated over several sequences; each contributes its own spacings.
NnsResult nns_ks_multi(const std::vector<std::vector<double>>& unfolded);

// Mean Delta3 over sliding windows of length L (start step L/2), with block
// jackknife errors. Several sequences may be pooled.
Delta3Curve delta3_curve(const std::vector<std::vector<double>>& unfolded, const std::vector<double>& L_values);

// Curve plus upbend detection against `reference`: first L where the curve
// exceeds the reference by `sigmas` combined standard errors.
SpectralReport delta3(const std::vector<double>& unfolded, const std::vector<double>& L_values,
                      const Delta3Curve& reference, double sigmas = 3.0);
std::vector<Delta3Point> compare_delta3(const Delta3Curve& curve, const Delta3Curve& reference, double sigmas,
                                        std::optional<double>& upbend);

// Cached GOE reference curve shipped with the library.
const Delta3Curve& goe_delta3_reference();
// Regenerates the reference by sampling (seeded).
Delta3Curve sample_goe_delta3_reference(std::size_t levels, std::size_t sequences, std::uint64_t seed,
                                        const std::vector<double>& L_values);

constexpr int strength_bins = 61;
constexpr double strength_range = 4.0;  // bins span +-range*delta
constexpr double strength_edge = 3.0;   // columns this close to the spectrum ends are skipped

StrengthFit strength_function(const std::vector<Realization>& realizations, const HFSpectrum& spectrum,
                              double delta);

}  // namespace chaotherm
