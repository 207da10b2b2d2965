#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace chaotherm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

struct DensityModel {
    enum class Kind { constant, exponential };
    Kind kind = Kind::constant;
    double rho0 = 1.0;
    double T = 0.0;  // exponential kind only

    void validate() const;
    double rho(double e) const;
    // Integrated density from `from` to `e`.
    double count_between(double from, double e) const;
    // Inverse of count_between: the energy reached after `n` levels above `from`.
    double energy_after(double from, double n) const;
};

struct HFSpectrum {
    std::vector<double> levels;
    DensityModel density;
    double emin = 0.0;
    double emax = 0.0;

    std::size_t size() const { return levels.size(); }
    double center() const { return 0.5 * (emin + emax); }
};

// Inclusive index range [first, last].
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t count() const { return last - first + 1; }
    bool contains(std::size_t i) const { return i >= first && i <= last; }
};

struct Observable {
    enum class Kind { identity, diagonal_profile, window_projector, banded_random, matrix };
    CMatrix matrix;
    Kind kind = Kind::identity;
};

struct ObservableParams {
    std::function<double(double)> profile;  // diagonal_profile
    IndexRange window;                      // window_projector
    std::size_t band_halfwidth = 1;         // banded_random
    double rms = 1.0;                       // banded_random
    bool complex_entries = false;           // banded_random, unitary class
    CMatrix matrix;                         // matrix: user-supplied, must be Hermitian
};

struct StatOperator {
    enum class Kind { pure_hf, window_uniform, boltzmann_diagonal, random_psd_window, cross_window_pure };
    CMatrix matrix;
    Kind kind = Kind::pure_hf;
};

struct StatParams {
    std::size_t m0 = 0;                 // pure_hf
    std::vector<IndexRange> windows;    // window kinds; two entries for cross_window_pure
    std::vector<double> weights;        // optional per-window weights (window_uniform)
    double temperature = 1.0;           // boltzmann_diagonal
    bool complex_entries = false;       // random phases for random_psd_window / cross_window_pure
};

struct WindowPartition {
    double delta = 0.0;
    std::vector<double> boundaries;  // size windows+1
    std::vector<std::size_t> count;  // N_k
    std::vector<double> density;     // rho_k = N_k / delta
    std::vector<double> weight;      // p_k
    std::vector<std::size_t> first;  // first level index in window k (valid when count>0)

    std::size_t windows() const { return count.size(); }
    std::size_t window_of(double e) const;
    IndexRange indices(std::size_t k) const;
};

struct MomentsReport {
    double E = 0.0;
    double hf_variance = 0.0;
    double delta_sq = 0.0;
    double deltaE_sq = 0.0;
};

HFSpectrum build_hf_spectrum(const DensityModel& density, std::size_t count, std::uint64_t seed, double emin = 0.0);

// Wraps user-supplied levels; exact ties are split by 1e-12 of the mean spacing.
HFSpectrum make_spectrum(std::vector<double> levels, const DensityModel& density, double emin, double emax);

Observable build_observable(Observable::Kind kind, const ObservableParams& params, const HFSpectrum& spectrum,
                            std::uint64_t seed);

StatOperator build_stat_operator(StatOperator::Kind kind, const StatParams& params, const HFSpectrum& spectrum,
                                 std::uint64_t seed);

WindowPartition partition_windows(const HFSpectrum& spectrum, const StatOperator& pi, double delta);

MomentsReport energy_moments(const HFSpectrum& spectrum, const StatOperator& pi, double delta);

// Levels whose energy lies in [lo, hi).
IndexRange levels_in(const HFSpectrum& spectrum, double lo, double hi);

const char* to_string(Observable::Kind kind);
const char* to_string(StatOperator::Kind kind);

}  // namespace chaotherm
