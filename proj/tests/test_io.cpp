#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mobelcov/csv.hpp"
#include "mobelcov/errors.hpp"
#include "mobelcov/nn/checkpoint.hpp"
#include "mobelcov/params_io.hpp"
#include "mobelcov/rng.hpp"
#include "support.hpp"

using namespace mobelcov;
using namespace test_support;
namespace fs = std::filesystem;

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
    Rng rng(3);
    CHECK(binomial(rng, 0, 0.5) == 0);
    CHECK(binomial(rng, 10, 0.0) == 0);
    CHECK(binomial(rng, 10, 1.0) == 10);
}

TEST_CASE("default parameter file") {
    const ModelParameters& p = default_params();
    CHECK(p.ages.groups() == 10);
    CHECK(p.ages.labels.size() == 10);
    CHECK(p.epi.beta0_star == -5.0);
    CHECK(p.epi.h == doctest::Approx(1.0 / 24.0));
    CHECK(p.contacts.home.rows() == 10);
    const ModelParameters back = parse_model_parameters(to_json(p));
    CHECK(back.contacts.sym == p.contacts.sym);
    CHECK(back.epi.q_a == p.epi.q_a);
    CHECK(back.epi.psi == p.epi.psi);
}

TEST_CASE("parameter file errors") {
    nlohmann::json doc = to_json(default_params());
    doc["epi"].erase("beta1_star");
    CHECK_THROWS_AS(parse_model_parameters(doc), ConfigError);
    doc = to_json(default_params());
    doc["contact_matrices"]["work"] = std::vector<std::vector<double>>{{1.0}};
    CHECK_THROWS_AS(parse_model_parameters(doc), ConfigError);
    CHECK_THROWS_AS(load_model_parameters("/nonexistent/params.json"), ConfigError);
}

TEST_CASE("CSV writing and reading") {
    CsvWriter w({"a", "b"});
    w.row({"1", format_double(0.1)});
    w.row({"x", format_double(-2.5e-300)});
    CHECK(w.str() == "schema_version,a,b\n1,1,0.1\n1,x,-2.5e-300\n");
    CHECK_THROWS(w.row({"only one"}));
    const CsvTable t = parse_csv(w.str());
    CHECK(t.column("b") == 2);
    CHECK(t.column("zzz") == -1);
    CHECK(t.number(0, "b") == 0.1);
    CHECK(t.number(1, "b") == -2.5e-300);

    const fs::path dir = fs::temp_directory_path() / "mobelcov_io_test";
    fs::create_directories(dir);
    w.save(dir / "t.csv");
    CHECK(read_csv(dir / "t.csv").rows.size() == 2);
    CHECK_FALSE(fs::exists(dir / "t.csv.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip is bit exact") {
    for (nn::Architecture arch : {nn::Architecture::dense_big, nn::Architecture::conv1d_big}) {
        const nn::PolicyNetwork net = nn::PolicyNetwork::create(arch, 77);
        std::stringstream buf;
        nn::write_checkpoint(buf, net);
        const nn::PolicyNetwork back = nn::read_checkpoint(buf);
        CHECK(back.architecture() == arch);
        CHECK(back.seed() == 77);
        const auto a = net.parameters();
        const auto b = back.parameters();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i]->name == b[i]->name);
            CHECK(a[i]->value == b[i]->value);
        }
        std::stringstream again;
        nn::write_checkpoint(again, back);
        CHECK(again.str() == buf.str());
    }
    std::stringstream junk("not a checkpoint");
    CHECK_THROWS(nn::read_checkpoint(junk));
}
