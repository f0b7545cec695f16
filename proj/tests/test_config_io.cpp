#include "mather/config.hpp"
#include "mather/errors.hpp"
#include "mather/io.hpp"
#include "mather/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mather;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal()
{
    return json::parse(R"({"hull": {"d": 1, "n": 1, "A": [[1.0]]},
                           "lagrangian": {"m": 1.0, "b": [0.0],
                                          "potential": {"c0": 1.0, "modes": [{"k": [1], "a": -1.0, "b": 0.0}]}}})");
}

std::string pointer_of(const json& doc)
{
    try {
        cfg::parse_config(doc);
    } catch (const InputError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("mather_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config defaults are filled in")
{
    auto c = cfg::parse_config(minimal());
    CHECK(c.solver.N == 128);
    CHECK(c.solver.M == 33);
    CHECK(c.lp.basis_K == 2);
    CHECK(c.solver.tol == 1e-8);
    CHECK(c.lp.slack == 1e-6);
    CHECK(c.lp.nu == "occupation");
    CHECK(c.sweep.alphas.size() == 6);
    CHECK(c.sweep.alphas.back() == 1.0 / 64);
    CHECK_FALSE(c.solver.v_max.has_value());
}

TEST_CASE("config errors carry the pointer of the bad value")
{
    auto doc = minimal();
    doc["lagrangian"]["m"] = -1.0;
    CHECK(pointer_of(doc) == "/lagrangian/m");

    doc = minimal();
    doc["lp"] = {{"basis_K", 0}};
    CHECK(pointer_of(doc) == "/lp/basis_K");

    doc = minimal();
    doc["sweep"] = {{"alphas", json::array()}};
    CHECK(pointer_of(doc) == "/sweep/alphas");

    doc = minimal();
    doc["solver"] = {{"M", 32}};
    CHECK(pointer_of(doc) == "/solver/M");

    doc = minimal();
    doc["solver"] = {{"N", 64.5}};
    CHECK(pointer_of(doc) == "/solver/N");

    doc = minimal();
    doc["hull"]["A"] = json::array({json::array({1.0}), json::array({2.0})});
    CHECK(pointer_of(doc) == "/hull/A");

    doc = minimal();
    doc.erase("hull");
    CHECK(pointer_of(doc) == "/hull");
}

TEST_CASE("unknown keys are rejected, typos included")
{
    auto doc = minimal();
    doc["solver"] = {{"alpah", 0.5}};
    CHECK(pointer_of(doc) == "/solver/alpah");
    doc = minimal();
    doc["extra"] = 1;
    CHECK(pointer_of(doc) == "/extra");
}

TEST_CASE("normalized config round-trips")
{
    auto doc = minimal();
    doc["solver"] = {{"N", 32}, {"M", 9}, {"v_max", 3.0}};
    doc["flow"] = {{"seeds", json::array({json::array({0.1}), json::array({0.7})})}};
    auto c1 = cfg::parse_config(doc);
    auto j1 = cfg::to_json(c1);
    auto c2 = cfg::parse_config(j1);
    CHECK(cfg::to_json(c2) == j1);
    CHECK(c2.solver.v_max.value() == 3.0);
    auto seeds = cfg::seed_points(c2);
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[1].coords()[0] == doctest::Approx(0.7));
}

TEST_CASE("default seeds sit at bin midpoints of the diagonal")
{
    auto doc = minimal();
    doc["flow"] = {{"seeds", 4}};
    auto seeds = cfg::seed_points(cfg::parse_config(doc));
    REQUIRE(seeds.size() == 4);
    CHECK(seeds[0].coords()[0] == doctest::Approx(0.125));
    CHECK(seeds[3].coords()[0] == doctest::Approx(0.875));
}

TEST_CASE("auto shift moves the potential minimum to zero")
{
    auto doc = minimal();
    doc["lagrangian"]["potential"]["c0"] = 5.0;
    auto lag = cfg::make_lagrangian(cfg::parse_config(doc));
    CHECK(lag.potential().value(Vec::Zero(1)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("numbers print in shortest round-trip form")
{
    CHECK(io::num(0.1) == "0.1");
    CHECK(io::num(1.0 / 3) == "0.3333333333333333");
    CHECK(std::stod(io::num(2.0 / 7)) == 2.0 / 7);
}

TEST_CASE("sha256 of a known string")
{
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("atomic write leaves no temporary behind and creates directories")
{
    auto dir = scratch("atomic");
    auto path = dir / "a" / "b.txt";
    io::atomic_write(path.string(), "first");
    io::atomic_write(path.string(), "second");
    CHECK(slurp(path) == "second");
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    fs::remove_all(dir);
}

TEST_CASE("manifest verification detects edits and deletions")
{
    auto dir = scratch("manifest");
    io::ArtifactWriter w(dir.string(), "solve");
    w.write("x.csv", "a,b\n1,2\n");
    w.write_json("y.json", json{{"k", 1}});
    auto text = w.finish();
    CHECK(json::parse(text)["files"].size() == 2);
    CHECK(io::verify_manifest(dir.string()).ok);

    std::ofstream(dir / "x.csv") << "a,b\n1,3\n";
    auto chk = io::verify_manifest(dir.string());
    CHECK_FALSE(chk.ok);
    CHECK(chk.mismatched == std::vector<std::string>{"x.csv"});

    fs::remove(dir / "y.json");
    chk = io::verify_manifest(dir.string());
    CHECK(chk.missing == std::vector<std::string>{"y.json"});
    fs::remove_all(dir);
}

TEST_CASE("measure table lists velocity, hull point and weight")
{
    hj::ControlGrid vg(1, 2.0, 5);
    hj::OmegaGrid wg(2, 4);
    DiscreteMeasure mu(vg, wg);
    mu.add(2, 5, 1.0);
    auto csv = io::measure_csv(mu);
    CHECK(csv.rfind("v1,theta1,theta2,weight\n", 0) == 0);
    CHECK(csv.find("0,0.25,0.25,1\n") != std::string::npos);
}

TEST_CASE("Richardson estimate picks the smallest alpha with a successful double")
{
    std::vector<pipeline::SweepRow> rows(4);
    const double alphas[] = {0.5, 0.25, 0.125, 0.0625};
    for (int i = 0; i < 4; ++i) {
        rows[i].alpha = alphas[i];
        rows[i].ok = i != 2;
        rows[i].pde_value = 1.0 + alphas[i];
    }
    auto est = pipeline::estimate_hbar(rows);
    REQUIRE(est.available);
    CHECK(est.alpha == 0.25);
    CHECK(est.value == doctest::Approx(1.0));
    rows[0].ok = false;
    CHECK_FALSE(pipeline::estimate_hbar(rows).available);
}

TEST_CASE("free-particle sweep gives zeros at every alpha")
{
    auto doc = minimal();
    doc["lagrangian"]["potential"] = {{"c0", 0.0}, {"modes", json::array()}};
    doc["solver"] = {{"N", 16}, {"M", 5}, {"alpha", 0.5}};
    doc["lp"] = {{"basis_K", 1}, {"nu", "uniform"}};
    doc["flow"] = {{"T", 2.0}, {"seeds", 1}};
    doc["sweep"] = {{"alphas", {0.5, 0.25, 0.125}}};
    auto c = cfg::parse_config(doc);
    auto s = pipeline::make_setup(c);
    auto res = pipeline::alpha_sweep(c, s);
    REQUIRE(res.rows.size() == 3);
    for (const auto& r : res.rows) {
        CHECK(r.ok);
        CHECK(r.lp_value == doctest::Approx(0.0));
        CHECK(r.pde_value == 0.0);
        CHECK(r.osc == 0.0);
    }
    CHECK(res.hbar.available);
    CHECK(res.hbar.value == 0.0);
    CHECK(pipeline::sweep_csv(res).rfind("alpha,lp_value,pde_value,osc,graphC\n", 0) == 0);
}

TEST_CASE("a failing alpha is recorded and the sweep goes on")
{
    auto doc = minimal();
    doc["solver"] = {{"N", 16}, {"M", 5}, {"v_max", 3.0}, {"max_iter", 1}};
    doc["lp"] = {{"basis_K", 1}, {"nu", "uniform"}};
    doc["sweep"] = {{"alphas", {0.5, 0.25}}};
    auto c = cfg::parse_config(doc);
    auto res = pipeline::alpha_sweep(c, pipeline::make_setup(c));
    REQUIRE(res.rows.size() == 2);
    for (const auto& r : res.rows) {
        CHECK_FALSE(r.ok);
        CHECK(r.error.find("did not converge") != std::string::npos);
    }
    CHECK_FALSE(res.hbar.available);
    CHECK(pipeline::sweep_csv(res).find("0.5,nan,nan,nan,nan\n") != std::string::npos);
}
