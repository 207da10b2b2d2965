#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chaotherm/ensemble.hpp"
#include "chaotherm/scaffold.hpp"

namespace chaotherm {

struct TimeGrid {
    enum class Unit { absolute, inverse_delta };
    std::vector<double> times;  // in `unit`
    Unit unit = Unit::inverse_delta;
    double delta = 1.0;         // converts between the two units

    void validate() const;
    std::size_t size() const { return times.size(); }
    double absolute(std::size_t i) const { return unit == Unit::absolute ? times[i] : times[i] / delta; }
    double scaled(std::size_t i) const { return unit == Unit::absolute ? times[i] * delta : times[i]; }

    // `points` equally spaced times on [0, t_max/delta].
    static TimeGrid uniform(double t_max_over_delta, std::size_t points, double delta);
};

struct Trajectory {
    enum class Provenance { single, monte_carlo, analytic };
    TimeGrid grid;
    std::vector<double> mean;
    std::vector<double> stderr_;
    Provenance provenance = Provenance::single;
    std::size_t realizations = 1;
    double max_imaginary = 0.0;
};

struct AnalyticPrediction {
    Trajectory total;               // first term + exact asymptote
    std::vector<double> first_term;
    double asymptote_exact = 0.0;
    double asymptote_window = 0.0;  // coarse window-sum form, for comparison only
};

// Recipe for drawing realization `index` under a master seed.
struct EnsembleSpec {
    enum class Origin { microscopic, synthetic };
    Origin origin = Origin::synthetic;
    HFSpectrum spectrum;
    Symmetry symmetry = Symmetry::orthogonal;
    EnvelopeF envelope;
    SyntheticOptions synthetic;
    ResidualSpec residual;

    double delta() const { return envelope.delta; }
    Realization draw(std::uint64_t master, std::size_t index) const;
};

// Per-realization values, rows in realization order.
struct TrajectorySamples {
    TimeGrid grid;
    Eigen::MatrixXd values;  // R x T
    double max_imaginary = 0.0;
};

struct CorrelationEstimate {
    TimeGrid grid;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd stderr_;
    Eigen::MatrixXd c5;          // predicted (with its time factor)
    double c5_magnitude = 0.0;   // prefactor without the time factor
    double c8 = 0.0;
    std::size_t realizations = 0;
    double plateau_start = 4.0;  // in units of 1/delta
    // Equal-time covariance averaged over plateau times.
    double plateau_variance = 0.0;
    double plateau_variance_stderr = 0.0;
    // Spread across realizations of each realization's plateau time average.
    double plateau_mean_std = 0.0;
    // Covariance between plateau times at least `decorrelation_time`/delta
    // apart: the time-independent part, free of temporal fluctuations.
    double plateau_covariance = 0.0;
    double plateau_covariance_stderr = 0.0;
    std::size_t plateau_pairs = 0;  // zero when the grid is too short
};

inline constexpr double decorrelation_time = 2.0;  // units of 1/delta

struct VerdictThresholds {
    double plateau_start = 4.0;   // in units of 1/delta
    double tol_rel = 0.05;
    double fluct_sigmas = 3.0;
};

struct Verdict {
    enum class Outcome { thermalizes, does_not_thermalize, inconclusive };
    double plateau = 0.0;
    double plateau_stderr = 0.0;
    double equilibrium = 0.0;
    double relative_deviation = 0.0;
    double fluctuation_level = 0.0;
    double fluctuation_tolerance = 0.0;
    Outcome outcome = Outcome::inconclusive;
    double relaxation_time = 0.0;  // absolute units
    std::string envelope_shape;    // "gaussian" or "exponential"
    double gaussian_residual = 0.0;
    double exponential_residual = 0.0;
    double analytic_plateau = 0.0;
};

Trajectory evolve_expectation(const Realization& real, const Observable& A, const StatOperator& pi,
                              const TimeGrid& grid);

TrajectorySamples sample_trajectories(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                                      const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers = 0);

Trajectory summarize(const TrajectorySamples& samples);

Trajectory ensemble_mean(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                         const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers = 0);

// Kernel-smoothed level density at each level (Gaussian kernel, variance 2 delta^2).
std::vector<double> smoothed_density(const HFSpectrum& spectrum, double delta);

AnalyticPrediction analytic_prediction(const HFSpectrum& spectrum, const Observable& A, const StatOperator& pi,
                                       const EnvelopeF& envelope, const TimeGrid& grid);

std::vector<double> averaged_propagator(const EnvelopeF& envelope, const TimeGrid& grid);

// Monte Carlo of Re <U(t)_mm exp(i E_m t)> over central HF states.
Trajectory sampled_propagator(const EnsembleSpec& spec, const TimeGrid& grid, std::size_t R, std::uint64_t master,
                              int workers = 0);

// <U_mn(t1) U_mn(t2)> - <U_mn(t1)><U_mn(t2)> for m != n in the central band,
// averaged over pairs; one value per realization pair statistic.
struct PairCumulant {
    double value = 0.0;   // real part, pair-averaged
    double stderr_ = 0.0;
    double imag = 0.0;
    std::size_t pairs = 0;
};
PairCumulant pair_cumulant(const EnsembleSpec& spec, double t1, double t2, std::size_t R, std::uint64_t master,
                           int workers = 0);

CorrelationEstimate correlation_fn(const TrajectorySamples& samples, const HFSpectrum& spectrum,
                                   const Observable& A, const StatOperator& pi, double delta,
                                   double plateau_start = 4.0);

CorrelationEstimate correlation_fn(const EnsembleSpec& spec, const Observable& A, const StatOperator& pi,
                                   const TimeGrid& grid, std::size_t R, std::uint64_t master, int workers = 0,
                                   double plateau_start = 4.0);

double equilibrium_value(const HFSpectrum& spectrum, const Observable& A, const IndexRange& window);

Verdict thermalization_verdict(const Trajectory& mc, const Trajectory& analytic, double eq,
                               const CorrelationEstimate& corr, const VerdictThresholds& thresholds);

const char* to_string(Verdict::Outcome o);

}  // namespace chaotherm
