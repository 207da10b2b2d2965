// chaotherm: run presets or JSON configs, regenerate reference data, and
// check the acceptance criteria.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaotherm/acceptance.hpp"
#include "chaotherm/error.hpp"
#include "chaotherm/io.hpp"
#include "chaotherm/run.hpp"
#include "chaotherm/spectra.hpp"

using namespace chaotherm;

namespace {

struct Overrides {
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> realizations;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> expect;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--realizations,-R", o.realizations, "Ensemble size");
    cmd->add_option("--threads,-j", o.threads, "Worker threads (default: CHAOTHERM_THREADS or all cores)");
    cmd->add_option("--out,-o", o.out, "Output directory");
    cmd->add_option("--preset", o.preset, "Named scenario")
        ->check(CLI::IsMember(preset_names()));
}

RunConfig resolve(const Overrides& o) {
    RunConfig c;
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) fail(ErrorKind::config, "cannot read " + o.config);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::config, std::string("malformed JSON: ") + e.what());
        }
        if (!o.preset.empty()) {
            // Preset first, file values on top.
            nlohmann::json base = nlohmann::json::parse(config_to_json(preset(o.preset)).dump());
            base.merge_patch(j);
            j = base;
        }
        c = config_from_json(j);
    } else if (!o.preset.empty()) {
        c = preset(o.preset);
    } else {
        fail(ErrorKind::config, "give --preset or --config");
    }
    if (o.seed) c.seed = *o.seed;
    if (o.realizations) c.R = *o.realizations;
    if (o.threads) c.threads = *o.threads;
    if (o.out) c.output = *o.out;
    if (o.expect) {
        nlohmann::json j = nlohmann::json::parse(config_to_json(c).dump());
        j["expect_verdict"] = *o.expect;
        c = config_from_json(j);
    }
    return c;
}

int cmd_run(const Overrides& o) {
    RunConfig c = resolve(o);
    RunReport r = run(c);
    const auto& rep = r.report;
    std::printf("%s: N=%zu R=%zu delta=%.6g (%s)\n", c.name.c_str(), c.N, c.R, rep["derived"]["delta"].get<double>(),
                rep["derived"]["delta_source"].get<std::string>().c_str());
    if (r.verdict) {
        const Verdict& v = *r.verdict;
        std::printf("verdict: %s  plateau %.6g +- %.2g  equilibrium %.6g  relaxation time %.4g (%s)\n",
                    to_string(v.outcome), v.plateau, v.plateau_stderr, v.equilibrium, v.relaxation_time,
                    v.envelope_shape.c_str());
    } else {
        std::printf("verdict: not computed (%s)\n", rep["verdict_note"].get<std::string>().c_str());
    }
    std::printf("artifacts written to %s\n", c.output.string().c_str());
    if (c.expect) {
        if (!r.verdict || r.verdict->outcome != *c.expect) {
            std::fprintf(stderr, "expected verdict %s\n", to_string(*c.expect));
            return exit_verdict;
        }
    }
    return exit_ok;
}

int cmd_verify(const std::string& suite, int threads) {
    AcceptanceOptions opt;
    opt.workers = threads;
    auto ids = suite_criteria(suite);
    bool all = true;
    for (int id : ids) {
        CriterionResult r = run_criterion(id, opt);
        std::cout << format_result(r) << std::endl;
        all = all && r.pass;
    }
    return all ? exit_ok : exit_acceptance;
}

int cmd_reference(std::size_t levels, std::size_t sequences, std::uint64_t seed, const std::string& source,
                  const std::string& csv) {
    std::vector<double> Ls;
    for (int L = 1; L <= 60; ++L) Ls.push_back(L);
    Delta3Curve c = sample_goe_delta3_reference(levels, sequences, seed, Ls);
    std::ostringstream src;
    src << "// GOE Delta3 reference: " << sequences << " sequences of " << levels << " levels, seed " << seed
        << ".\n// Generated by `chaotherm reference`; do not edit.\n#include <cstddef>\n\n"
        << "namespace chaotherm::detail {\n\nextern const std::size_t goe_reference_size = " << c.L.size() << ";\n";
    auto arr = [&](const char* name, const std::vector<double>& v) {
        src << "extern const double " << name << "[] = {\n";
        for (std::size_t i = 0; i < v.size(); ++i) src << "    " << format_double(v[i]) << ",\n";
        src << "};\n";
    };
    arr("goe_reference_L", c.L);
    arr("goe_reference_value", c.value);
    arr("goe_reference_stderr", c.stderr_);
    src << "\n}  // namespace chaotherm::detail\n";
    write_atomic(source, src.str());
    CsvTable t{{"L", "delta3", "stderr"}, {}};
    for (std::size_t i = 0; i < c.L.size(); ++i)
        t.add({format_double(c.L[i]), format_double(c.value[i]), format_double(c.stderr_[i])});
    write_atomic(csv, t.str());
    std::printf("wrote %s and %s\n", source.c_str(), csv.c_str());
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum chaos and thermalization ensemble toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Overrides run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run a preset or config file and write artifacts");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--config,-c", run_opts.config, "JSON config (values override the preset)");
    run_cmd->add_option("--assert-verdict", run_opts.expect, "Exit nonzero unless the verdict matches")
        ->check(CLI::IsMember({"thermalizes", "does_not_thermalize", "inconclusive"}));

    std::string suite = "fast";
    int verify_threads = 0;
    auto* verify_cmd = app.add_subcommand("verify", "Check acceptance criteria and print a pass/fail table");
    verify_cmd->add_option("suite", suite, "fast or full");
    verify_cmd->add_option("--threads,-j", verify_threads, "Worker threads");

    std::size_t ref_levels = 2000, ref_sequences = 40;
    std::uint64_t ref_seed = 2024;
    std::string ref_source = "src/reference_data.cpp", ref_csv = "data/goe_delta3.csv";
    auto* ref_cmd = app.add_subcommand("reference", "Regenerate the GOE Delta3 reference fixture");
    ref_cmd->add_option("--levels", ref_levels);
    ref_cmd->add_option("--sequences", ref_sequences);
    ref_cmd->add_option("--seed", ref_seed);
    ref_cmd->add_option("--source", ref_source);
    ref_cmd->add_option("--csv", ref_csv);

    auto* presets_cmd = app.add_subcommand("presets", "List presets, or print one as JSON");
    std::string show;
    presets_cmd->add_option("name", show)->check(CLI::IsMember(preset_names()));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run_opts);
        if (*verify_cmd) return cmd_verify(suite, verify_threads);
        if (*ref_cmd) return cmd_reference(ref_levels, ref_sequences, ref_seed, ref_source, ref_csv);
        if (*presets_cmd) {
            if (show.empty()) {
                for (const auto& n : preset_names()) std::cout << n << "\n";
            } else {
                std::cout << config_to_json(preset(show)).dump(2) << "\n";
            }
            return exit_ok;
        }
    } catch (const Error& e) {
        std::cerr << "chaotherm: " << e.what() << "\n";
        if (e.kind() == ErrorKind::config) return exit_config;
        if (e.kind() == ErrorKind::numeric) return exit_numeric;
        return e.kind() == ErrorKind::parameter ? exit_config : exit_failure;
    } catch (const std::exception& e) {
        std::cerr << "chaotherm: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_failure;
}
