#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "invlab/noise.hpp"
#include "invlab/pipelines.hpp"

using namespace invlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("config parsing: sections, comments, errors") {
    auto cfgs = parse_config_text("# comment\n[identity-suite]\nn = 32 # inline\n\n[passive-cone]\nres=64\n");
    REQUIRE(cfgs.size() == 2);
    CHECK(cfgs[0].pipeline == "identity-suite");
    CHECK(cfgs[0].kv.at("n") == "32");
    CHECK(cfgs[1].kv.at("res") == "64");

    CHECK_THROWS_AS((void)parse_config_text(""), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("n = 3\n"), ConfigError);               // key before section
    CHECK_THROWS_AS((void)parse_config_text("[a]\nbroken line\n"), ConfigError);    // not key = value
    CHECK_THROWS_AS((void)parse_config_text("[a]\nk = 1\nk = 2\n"), ConfigError);   // duplicate
    CHECK_THROWS_AS((void)parse_config_text("[unterminated\n"), ConfigError);
}

TEST_CASE("validation: unknown pipelines and keys, noise needs a seed") {
    ExperimentConfig ok;
    ok.pipeline = "wave-fig4";
    ok.kv = {{"nx", "64"}, {"snr_db", "12"}, {"seed", "1"}};
    validate_experiment(ok);

    ExperimentConfig bad_pipeline;
    bad_pipeline.pipeline = "does-not-exist";
    CHECK_THROWS_AS(validate_experiment(bad_pipeline), ConfigError);

    ExperimentConfig bad_key;
    bad_key.pipeline = "identity-suite";
    bad_key.kv = {{"resolution", "64"}};
    CHECK_THROWS_AS(validate_experiment(bad_key), ConfigError);

    ExperimentConfig no_seed;
    no_seed.pipeline = "wave-fig4";
    no_seed.kv = {{"snr_db", "12"}};
    CHECK_THROWS_AS(validate_experiment(no_seed), ConfigError);
}

TEST_CASE("unknown keys are rejected at run time too") {
    ExperimentConfig cfg;
    cfg.pipeline = "identity-suite";
    cfg.kv = {{"n", "16"}, {"typo_key", "1"}};
    CHECK_THROWS_AS((void)run_experiment(cfg, "test_cli_out_typo"), ConfigError);
    fs::remove_all("test_cli_out_typo");
}

TEST_CASE("exact-SNR noise: value, sentinel, seeding") {
    SpaceTimeGrid g = make_st_grid(64, 128, 2.0);
    BoundaryTimeData sig = make_control(g, 0, [](double t) { return std::sin(3 * t) + 0.2; });

    BoundaryTimeData noisy = add_noise(sig, 12.0, 77);
    long double s2 = 0.0L, n2 = 0.0L;
    for (std::size_t k = 0; k < sig.v.size(); ++k) {
        s2 += static_cast<long double>(sig.v[k]) * sig.v[k];
        double d = noisy.v[k] - sig.v[k];
        n2 += static_cast<long double>(d) * d;
    }
    double snr = 10.0 * std::log10(static_cast<double>(s2 / n2));
    CHECK(std::abs(snr - 12.0) < 1e-9); // post-hoc scaling makes the realized ratio exact

    BoundaryTimeData off = add_noise(sig, snr_off(), 77);
    for (std::size_t k = 0; k < sig.v.size(); ++k) CHECK(off.v[k] == sig.v[k]);

    BoundaryTimeData again = add_noise(sig, 12.0, 77);
    for (std::size_t k = 0; k < sig.v.size(); ++k) CHECK(again.v[k] == noisy.v[k]);
    BoundaryTimeData other = add_noise(sig, 12.0, 78);
    bool differs = false;
    for (std::size_t k = 0; k < sig.v.size(); ++k) differs = differs || other.v[k] != noisy.v[k];
    CHECK(differs);

    BoundaryTimeData zero(g);
    CHECK_THROWS_AS((void)add_noise(zero, 12.0, 1), Error);
}

TEST_CASE("pipeline reruns are manifest-identical") {
    ExperimentConfig cfg;
    cfg.pipeline = "passive-cone";
    cfg.kv = {{"res", "64"},          {"observers", "6"},  {"sources", "8"},
              {"cone_observers", "32"}, {"cone_points", "2"}, {"seed", "5"}};
    RunResult a = run_experiment(cfg, "test_cli_out_a");
    RunResult b = run_experiment(cfg, "test_cli_out_b");
    CHECK(a.ok);
    CHECK(b.ok);
    CHECK(slurp("test_cli_out_a/manifest") == slurp("test_cli_out_b/manifest"));
    fs::remove_all("test_cli_out_a");
    fs::remove_all("test_cli_out_b");
}

TEST_CASE("identity-suite runs clean on a reduced config and lists its table") {
    ExperimentConfig cfg;
    cfg.pipeline = "identity-suite";
    cfg.kv = {{"n", "32"}, {"eps_sweep", "0.32,0.16"}, {"n_sweep", "8,16"}};
    RunResult r = run_experiment(cfg, "test_cli_out_c");
    CHECK(r.ok);
    bool has_table = false;
    for (const std::string& f : r.files) has_table = has_table || f == "identity_table.csv";
    CHECK(has_table);
    std::string manifest = slurp("test_cli_out_c/manifest");
    CHECK(manifest.find("identity_table.csv\t") != std::string::npos);
    fs::remove_all("test_cli_out_c");
}
