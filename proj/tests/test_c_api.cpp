#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "itrop/itrop.h"

namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("version and errors")
{
    CHECK(std::string(itrop_version()).size() > 0);
    itrop_mdp* m = nullptr;
    CHECK(itrop_mdp_random(1, 1, 0.9, 0, &m) == ITROP_ERR_CONFIG);
    CHECK(m == nullptr);
    CHECK(std::string(itrop_last_error()).find("random_mdp") != std::string::npos);
    CHECK(itrop_mdp_random(3, 1, 0.9, 0, nullptr) == ITROP_ERR_ARGUMENT);
    CHECK(itrop_mdp_load("/nonexistent/model.json", &m) == ITROP_ERR_IO);
    CHECK(itrop_run_experiment(nullptr, nullptr) == ITROP_ERR_ARGUMENT);
}

TEST_CASE("mdp handle: reference model")
{
    const double p[] = {1.0, 0.0, 0.0, 1.0};
    const double c[] = {1.0, 2.0};
    itrop_mdp* m = nullptr;
    REQUIRE(itrop_mdp_create(2, 1, p, c, 0.5, &m) == ITROP_OK);
    size_t s = 0, a = 0;
    double alpha = 0.0;
    CHECK(itrop_mdp_dims(m, &s, &a, &alpha) == ITROP_OK);
    CHECK(s == 2);
    CHECK(a == 1);
    CHECK(alpha == 0.5);

    const double zero[] = {0.0, 0.0};
    double out[2];
    CHECK(itrop_mdp_bellman(m, zero, out) == ITROP_OK);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 2.0);
    CHECK(itrop_mdp_empirical_bellman(m, zero, 5, 1, 0, 0, out) == ITROP_OK);
    CHECK(out[0] == 1.0);
    CHECK(itrop_mdp_empirical_bellman(m, zero, 0, 1, 0, 0, out) == ITROP_ERR_CONFIG);

    double v[2];
    CHECK(itrop_mdp_solve(m, 0, 1e-10, v) == ITROP_OK);
    CHECK(std::abs(v[0] - 2.0) <= 1e-10);
    CHECK(std::abs(v[1] - 4.0) <= 1e-10);
    CHECK(itrop_mdp_solve(m, 7, 1e-10, v) == ITROP_ERR_ARGUMENT);
    itrop_mdp_free(m);

    const double bad[] = {0.7, 0.0, 0.0, 1.0};
    CHECK(itrop_mdp_create(2, 1, bad, c, 0.5, &m) == ITROP_ERR_VALIDATION);
}

TEST_CASE("mdp handle: save and load")
{
    const auto path = fs::temp_directory_path() / "itrop_capi_model.json";
    itrop_mdp* m = nullptr;
    REQUIRE(itrop_mdp_random(6, 2, 0.8, 4, &m) == ITROP_OK);
    REQUIRE(itrop_mdp_save(m, path.string().c_str()) == ITROP_OK);
    itrop_mdp* back = nullptr;
    REQUIRE(itrop_mdp_load(path.string().c_str(), &back) == ITROP_OK);
    std::vector<double> v{1, 2, 3, 4, 5, 6}, o1(6), o2(6);
    itrop_mdp_bellman(m, v.data(), o1.data());
    itrop_mdp_bellman(back, v.data(), o2.data());
    CHECK(o1 == o2);
    itrop_mdp_free(m);
    itrop_mdp_free(back);
    itrop_mdp_free(nullptr);
    fs::remove(path);
}

TEST_CASE("dataset handle")
{
    itrop_dataset* d = nullptr;
    REQUIRE(itrop_dataset_synth("logistic", 30, 3, 1, &d) == ITROP_OK);
    size_t n = 0, m = 0;
    itrop_dataset_dims(d, &n, &m);
    CHECK(n == 30);
    CHECK(m == 3);
    const double x[] = {0.0, 0.0, 0.0};
    double l = 0.0;
    CHECK(itrop_dataset_loss(d, 0.0, x, &l) == ITROP_OK);
    CHECK(std::abs(l - std::log(2.0)) < 1e-15);
    double g[3];
    CHECK(itrop_dataset_gradient(d, 1.0, x, g) == ITROP_OK);
    CHECK(itrop_dataset_synth("gaussian", 30, 3, 1, &d) == ITROP_ERR_CONFIG);
    itrop_dataset_free(d);
}

TEST_CASE("experiments and generators through the C API")
{
    const auto dir = fs::temp_directory_path() / "itrop_capi_run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"experiment":"evi","runs":3,"horizon":10,"sample_sizes":[2],
                             "mdp":{"num_states":4,"num_actions":2}})";
    const std::string out1 = (dir / "o1").string(), out2 = (dir / "o2").string();
    itrop_overrides ov{};
    ov.output_dir = out1.c_str();
    ov.has_seed = 1;
    ov.seed = 99;
    CHECK(itrop_run_experiment(cfg.string().c_str(), &ov) == ITROP_OK);
    ov.output_dir = out2.c_str();
    ov.jobs = 2;
    CHECK(itrop_run_experiment(cfg.string().c_str(), &ov) == ITROP_OK);
    CHECK(read_all(dir / "o1" / "distance_n2.csv") == read_all(dir / "o2" / "distance_n2.csv"));
    CHECK(read_all(dir / "o1" / "meta.json").find("\"master_seed\": 99") != std::string::npos);

    const auto chk = dir / "chk.json";
    std::ofstream(chk) << R"({"experiment":"assumptions","family":"identity-noise","horizon":5,"sample_sizes":[1],
                             "check":{"trials":100,"grid_size":2}})";
    const std::string out3 = (dir / "o3").string();
    ov.output_dir = out3.c_str();
    const auto status = itrop_run_checks(chk.string().c_str(), &ov);
    CHECK((status == ITROP_OK || status == ITROP_ASSUMPTION_VIOLATED));
    CHECK(fs::exists(dir / "o3" / "A5-contraction-log.json"));

    CHECK(itrop_gen_mdp(4, 2, 0.9, 1, (dir / "m.json").string().c_str()) == ITROP_OK);
    CHECK(itrop_gen_dataset("poisson", 10, 3, 1, (dir / "d.csv").string().c_str()) == ITROP_OK);
    CHECK(itrop_gen_dataset("nope", 10, 3, 1, (dir / "d.csv").string().c_str()) == ITROP_ERR_CONFIG);

    std::ofstream(dir / "bad.json") << R"({"experiment":"evi","bogus":1})";
    CHECK(itrop_run_experiment((dir / "bad.json").string().c_str(), nullptr) == ITROP_ERR_CONFIG);
    fs::remove_all(dir);
}

TEST_CASE("hoeffding bound")
{
    CHECK(itrop_hoeffding_bound(20, 5, 0.5, 4000, 2.0) == doctest::Approx(200.0 * std::exp(-25.0)));
    CHECK(itrop_hoeffding_bound(20, 5, -1.0, 4000, 2.0) < 0.0);
}
