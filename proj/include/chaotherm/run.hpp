#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaotherm/evolve.hpp"
#include "chaotherm/spectra.hpp"

namespace chaotherm {

inline constexpr const char* version = "0.3.0";

// Statistical operator recipe. Window positions are offsets, in windows,
// from the window holding the spectrum center.
struct PiSpec {
    StatOperator::Kind kind = StatOperator::Kind::pure_hf;
    std::vector<int> windows{0};
    std::vector<double> weights;
    double offset = 0.0;  // pure_hf: energy offset from the window center, units of delta
    double temperature = 1.0;
    bool complex_entries = false;
};

// Observable recipe. Profiles use x = (E - E_c)/delta with E_c the center of
// the reference window; the cosine profile is phased at the mean energy of pi.
struct ObservableSpec {
    enum class Profile { constant, linear, clamped_linear, cosine };
    Observable::Kind kind = Observable::Kind::diagonal_profile;
    Profile profile = Profile::cosine;
    double amplitude = 0.25;
    double slope = 0.25;
    double clamp = 0.0;
    int window = 0;
    std::size_t band_halfwidth = 1;
    double rms = 1.0;
    bool complex_entries = false;
};

struct RunConfig {
    std::string name = "custom";
    Symmetry symmetry = Symmetry::orthogonal;
    std::size_t N = 0;
    DensityModel density;
    EnsembleSpec::Origin origin = EnsembleSpec::Origin::synthetic;
    EnvelopeF::Kind envelope = EnvelopeF::Kind::gaussian;
    std::optional<double> delta;  // microscopic default: golden-rule estimate
    SyntheticOptions synthetic;
    ResidualSpec residual;
    PiSpec pi;
    ObservableSpec observable;
    double t_max = 8.0;  // units of 1/delta
    std::size_t time_points = 41;
    std::size_t R = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::filesystem::path output = "chaotherm-out";
    VerdictThresholds thresholds;
    std::size_t diagnostic_realizations = 8;
    std::optional<Verdict::Outcome> expect;
    bool dump_realizations = false;
};

// Parses and validates; unknown keys and out-of-range values raise config errors.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& c);

const std::vector<std::string>& preset_names();
RunConfig preset(const std::string& name);

// Everything the pipeline resolves from a config.
struct Scenario {
    RunConfig config;
    EnsembleSpec ensemble;
    Observable A;
    StatOperator pi;
    TimeGrid grid;
    WindowPartition windows;
    std::size_t reference_window = 0;
    IndexRange equilibrium_window;
    std::string delta_source;  // "config" or "golden_rule"
    std::uint64_t spectrum_seed = 0, observable_seed = 0, operator_seed = 0;
};

Scenario build_scenario(const RunConfig& config);

struct RunReport {
    nlohmann::ordered_json report;
    std::map<std::string, std::string> artifacts;  // file name -> content
    Scenario scenario;
    Trajectory mc;
    AnalyticPrediction analytic;
    std::optional<CorrelationEstimate> correlation;
    double equilibrium = 0.0;
    std::optional<Verdict> verdict;
    SpectralReport spectral;
    StrengthFit strength;
    MomentsReport moments;
};

// Runs the pipeline without touching the filesystem.
RunReport execute(const RunConfig& config);

// Runs and writes artifacts atomically into config.output.
RunReport run(const RunConfig& config);

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_numeric = 3,
    exit_verdict = 4,
    exit_acceptance = 5,
};

}  // namespace chaotherm
