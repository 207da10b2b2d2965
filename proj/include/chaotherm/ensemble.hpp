#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chaotherm/rng.hpp"
#include "chaotherm/scaffold.hpp"

namespace chaotherm {

enum class Symmetry { orthogonal, unitary };

struct ResidualSpec {
    std::size_t band_halfwidth = 1;
    double fill_probability = 1.0;
    double rms_strength = 1.0;
    Symmetry symmetry = Symmetry::orthogonal;
    bool diagonal_fluctuations = false;

    void validate() const;
};

struct EnvelopeF {
    enum class Kind { gaussian, lorentzian };
    Kind kind = Kind::gaussian;
    double delta = 1.0;  // Gaussian: standard deviation; Lorentzian: full width at half maximum

    void validate() const;
    // Normalized line shape g(E) with unit integral; F = g / rho.
    double shape(double offset) const;
    double F(double offset, double rho) const { return shape(offset) / rho; }
};

struct Realization {
    enum class Origin { microscopic, synthetic };
    Eigen::VectorXd eigenvalues;
    // Exactly one of these is populated, by symmetry class.
    RMatrix real_transform;
    CMatrix complex_transform;
    Origin origin = Origin::synthetic;
    Symmetry symmetry = Symmetry::orthogonal;
    Eigen::VectorXd mean_eigenvalues;  // synthetic origin only

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    bool is_real() const { return symmetry == Symmetry::orthogonal; }
    // |O_{m alpha}|^2 for all entries.
    RMatrix weights() const;
    CMatrix transform() const;
    double orthogonality_residual() const;
};

// How synthetic eigenvalues are generated.
enum class EigenvalueModel { full, stitched };

struct SyntheticOptions {
    EigenvalueModel eigenvalues = EigenvalueModel::full;
    double stitch_levels = 0.0;  // mean segment length; 0 selects rho*delta at the center
    double step = 0.25;          // pairing noise of one circuit layer, in units of delta
};

std::vector<double> smooth_positions(const HFSpectrum& spectrum, double delta);

// Hermitian residual interaction; dense storage, real entries in the orthogonal class.
CMatrix sample_residual(const HFSpectrum& spectrum, const ResidualSpec& spec, std::uint64_t seed);

Realization diagonalize(const HFSpectrum& spectrum, const CMatrix& V);

Realization sample_synthetic(const HFSpectrum& spectrum, const EnvelopeF& envelope, Symmetry symmetry,
                             std::uint64_t seed, const SyntheticOptions& options = {});

double golden_rule_width(const HFSpectrum& spectrum, const CMatrix& V);

// Unfolded Wigner-Dyson levels (unit mean spacing, index-like positions 0.5..n-0.5 in the bulk).
std::vector<double> wigner_dyson_unfolded(std::size_t n, Symmetry symmetry, Rng& rng);

// Chain of independent Wigner-Dyson segments with random lengths around `segment`.
std::vector<double> stitched_unfolded(std::size_t n, double segment, Symmetry symmetry, Rng& rng);

const char* to_string(Symmetry s);
const char* to_string(EnvelopeF::Kind k);

}  // namespace chaotherm
