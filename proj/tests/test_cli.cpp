#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "chaotherm/acceptance.hpp"
#include "chaotherm/error.hpp"
#include "chaotherm/io.hpp"
#include "chaotherm/run.hpp"

using namespace chaotherm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("chaotherm-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json minimal() { return {{"N", 300}, {"realizations", 10}, {"seed", 99}}; }

// Small synthetic run: 15 levels per window, 20 windows.
json small_config() {
    json j = minimal();
    j["density"] = {{"rho0", 15.0}};
    j["delta"] = 1.0;
    j["time"] = {{"t_max", 6.0}, {"points", 13}};
    j["diagnostic_realizations"] = 2;
    return j;
}

json strip_execution(json j) {
    j.erase("execution");
    j["config"].erase("output");
    return j;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CHAOTHERM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void keys_match(const json& schema, const json& value, const std::string& path) {
    REQUIRE(schema.contains("properties"));
    const json& props = schema["properties"];
    for (auto it = value.begin(); it != value.end(); ++it) {
        INFO("key " << path << it.key());
        CHECK(props.contains(it.key()));
        if (it->is_object() && props.contains(it.key())) keys_match(props[it.key()], *it, path + it.key() + ".");
    }
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-17}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv tables") {
    CsvTable t{{"a", "b"}, {}};
    t.add({"1", "2"});
    t.add({"3", "4"});
    CHECK(t.str() == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(t.add({"5"}), Error);
}

TEST_CASE("atomic writes leave no temporaries") {
    fs::path dir = scratch("atomic");
    fs::path target = dir / "nested" / "out.csv";
    write_atomic(target, "x\n1\n");
    CHECK(slurp(target) == "x\n1\n");
    write_atomic(target, "x\n2\n");
    CHECK(slurp(target) == "x\n2\n");
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) ++files;
    CHECK(files == 1);
}

TEST_CASE("base64 doubles") {
    CHECK(encode_doubles({1.0}) == "AAAAAAAA8D8=");
    std::vector<double> v{0.0, -0.0, 1.5, -3.25e-300, std::numeric_limits<double>::infinity(), 1e308};
    auto back = decode_doubles(encode_doubles(v));
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(back[i] == v[i]);
        CHECK(std::signbit(back[i]) == std::signbit(v[i]));
    }
    CHECK(decode_doubles(encode_doubles({})).empty());
    CHECK_THROWS(decode_doubles("AAAA"));
}

TEST_CASE("config parsing") {
    RunConfig c = config_from_json(minimal());
    CHECK(c.N == 300);
    CHECK(c.R == 10);
    CHECK(c.seed == 99);
    CHECK(!c.delta);

    for (const char* key : {"N", "realizations", "seed"}) {
        json j = minimal();
        j.erase(key);
        CHECK_THROWS_AS(config_from_json(j), Error);
    }
    auto config_error = [](const json& j) {
        try {
            config_from_json(j);
        } catch (const Error& e) {
            return e.kind() == ErrorKind::config;
        }
        return false;
    };
    json unknown = minimal();
    unknown["realisations"] = 5;
    CHECK(config_error(unknown));
    json nested = minimal();
    nested["pi"] = {{"kind", "window_uniform"}, {"widows", {0}}};
    CHECK(config_error(nested));
    json badkind = minimal();
    badkind["symmetry"] = "symplectic";
    CHECK(config_error(badkind));
    json badtype = minimal();
    badtype["N"] = "many";
    CHECK(config_error(badtype));
    json negative = minimal();
    negative["seed"] = -1;
    CHECK(config_error(negative));
    json badfill = minimal();
    badfill["residual"] = {{"fill_probability", 1.5}};
    CHECK(config_error(badfill));
}

TEST_CASE("presets round-trip through json") {
    for (const auto& name : preset_names()) {
        INFO(name);
        RunConfig p = preset(name);
        json j = json::parse(config_to_json(p).dump());
        CHECK(json::parse(config_to_json(config_from_json(j)).dump()) == j);
    }
    CHECK_THROWS_AS(preset("nonexistent"), Error);
}

TEST_CASE("published schema matches the config writer") {
    json schema = json::parse(slurp(fs::path(CHAOTHERM_SOURCE_DIR) / "schema" / "run_config.schema.json"));
    json defaults = json::parse(config_to_json(config_from_json(minimal())).dump());
    keys_match(schema, defaults, "");
    // Every schema property is written back except the worker count.
    for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
        if (it.key() != "threads") CHECK(defaults.contains(it.key()));
    // Documented defaults agree with the parser's.
    for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
        if (it->contains("default")) CHECK((*it)["default"] == defaults[it.key()]);
        if (!it->contains("properties")) continue;
        for (auto jt = (*it)["properties"].begin(); jt != (*it)["properties"].end(); ++jt)
            if (jt->contains("default")) {
                INFO(it.key() << "." << jt.key());
                CHECK((*jt)["default"] == defaults[it.key()][jt.key()]);
            }
    }
    std::vector<std::string> required = schema["required"];
    CHECK(required == std::vector<std::string>{"N", "realizations", "seed"});
}

TEST_CASE("runs are deterministic across repeats and worker counts") {
    RunConfig c = config_from_json(small_config());
    c.threads = 1;
    RunReport a = execute(c);
    RunReport b = execute(c);
    c.threads = 3;
    RunReport d = execute(c);
    CHECK(strip_execution(json::parse(a.report.dump())) == strip_execution(json::parse(b.report.dump())));
    CHECK(strip_execution(json::parse(a.report.dump())) == strip_execution(json::parse(d.report.dump())));
    CHECK(a.artifacts == d.artifacts);

    json one = small_config();
    one["realizations"] = 1;
    RunConfig c1 = config_from_json(one);
    CHECK(strip_execution(json::parse(execute(c1).report.dump())) ==
          strip_execution(json::parse(execute(c1).report.dump())));
}

TEST_CASE("run writes the artifact set") {
    RunConfig c = config_from_json(small_config());
    c.output = scratch("artifacts");
    RunReport r = run(c);
    for (const char* f : {"report.json", "trajectory.csv", "correlation.csv", "spectra.csv", "strength.csv"}) {
        INFO(f);
        CHECK(fs::exists(c.output / f));
    }
    for (const auto& e : fs::directory_iterator(c.output)) CHECK(e.path().extension() != ".tmp");
    const std::string traj = slurp(c.output / "trajectory.csv");
    CHECK(traj.rfind("t,t_in_units_of_inv_delta,mc_mean,mc_stderr,analytic_first_term,analytic_asymptote_exact,"
                     "analytic_asymptote_window,equilibrium\n",
                     0) == 0);
    CHECK(traj.find('\r') == std::string::npos);
    CHECK(slurp(c.output / "correlation.csv").rfind("t1,t2,cov,stderr,c5_pred,c8_pred\n", 0) == 0);
    CHECK(slurp(c.output / "spectra.csv").rfind("statistic,L_or_s_or_offset,value,stderr\n", 0) == 0);

    json report = json::parse(slurp(c.output / "report.json"));
    for (const char* k : {"software", "config", "derived", "seeds", "moments", "spectral", "strength", "analytic",
                          "evolution", "execution"})
        CHECK(report.contains(k));
    CHECK(report["derived"]["delta"] == 1.0);
}

TEST_CASE("microscopic runs record the golden-rule width") {
    json j = small_config();
    j["origin"] = "microscopic";
    j.erase("delta");
    j["density"] = {{"rho0", 4.0}};
    j["residual"] = {{"band_halfwidth", 20}, {"rms_strength", 0.3}};
    RunReport r = execute(config_from_json(j));
    CHECK(r.report["derived"]["delta_source"] == "golden_rule");
    CHECK(r.report["derived"]["delta"].get<double>() > 0.0);
}

TEST_CASE("verify suites") {
    CHECK(suite_criteria("fast") == std::vector<int>{1, 8, 10});
    CHECK(suite_criteria("full").size() == 10);
    CHECK_THROWS_AS(suite_criteria("medium"), Error);
}

TEST_CASE("command-line exit codes") {
    fs::path dir = scratch("cli");
    auto write = [&](const std::string& name, const json& j) {
        write_atomic(dir / name, j.dump());
        return (dir / name).string();
    };
    json id = small_config();
    id["observable"] = {{"kind", "identity"}};
    const std::string good = write("identity.json", id);
    const std::string out = " -o " + (dir / "out").string();

    CHECK(run_cli("run -c " + good + out) == exit_ok);
    CHECK(run_cli("run -c " + good + out + " --assert-verdict thermalizes") == exit_ok);
    CHECK(run_cli("run -c " + good + out + " --assert-verdict does_not_thermalize") == exit_verdict);

    json bad = minimal();
    bad["unknown"] = 1;
    CHECK(run_cli("run -c " + write("bad.json", bad) + out) == exit_config);
    write_atomic(dir / "broken.json", "{\"N\": ");
    CHECK(run_cli("run -c " + (dir / "broken.json").string() + out) == exit_config);
    CHECK(run_cli("run -c " + (dir / "missing.json").string() + out) == exit_config);
    CHECK(run_cli("verify medium") == exit_config);
    CHECK(run_cli("presets thermalizing") == exit_ok);
}
