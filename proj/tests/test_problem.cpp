#include "support.hpp"

#include "glaeser/problem.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace glaeser;
using nlohmann::json;

namespace {

json linearJson() {
    return json::parse(R"({
        "vars": ["x", "y"],
        "domain": {"box": [[-1, 1], [-1, 1]], "constraints": ["x^2 + y^2 <= 1"]},
        "A": [["x", "y"]],
        "gamma": ["x"],
        "params": {"level": 3, "theta": 0.5, "eps_fit": 1e-7, "threads": 2, "shell_count": 3}
    })");
}

} // namespace

TEST_SUITE("problem") {

TEST_CASE("problem files") {
    const Problem pb = parseProblem(linearJson());
    CHECK(pb.vars == VarList{"x", "y"});
    CHECK(pb.domain.box.size() == 2);
    CHECK(pb.domain.constraints.size() == 1);
    CHECK(pb.system.rows == 1);
    CHECK(pb.system.cols == 2);
    CHECK(pb.params.level == 3);
    CHECK(pb.params.section.theta == 0.5);
    CHECK(pb.params.refine.epsFit == 1e-7);
    CHECK(pb.params.refine.threads == 2);
    CHECK(pb.params.section.threads == 2);
    CHECK(pb.params.refine.shellCount == 3);
    CHECK(pb.params.tol == 1e-6);

    for (const char *name : {"linear.json", "cone.json", "quartic_root.json", "abs_1d.json", "constant.json",
                             "inconsistent.json", "disk.json"})
        CHECK_NOTHROW(loadProblem(testing::problemPath(name)));
    CHECK(loadProblem(testing::problemPath("abs_1d.json")).params.level == 8);
}

TEST_CASE("malformed problem files") {
    auto broken = [](auto edit) {
        json j = linearJson();
        edit(j);
        return j;
    };
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j.erase("vars"); })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j.erase("domain"); })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["domain"]["box"] = {{-1, 1}}; })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["domain"]["box"][0] = {1}; })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["params"]["colour"] = 1; })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["params"]["level"] = "high"; })), FormatError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["A"] = json::array({json::array({"x", "y +"})}); })), SyntaxError);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["A"] = json::array({json::array({"x", "z"})}); })), UnknownVariable);
    CHECK_THROWS_AS(parseProblem(broken([](json &j) { j["gamma"] = {"x", "y"}; })), DimensionMismatch);
    CHECK_THROWS_AS(parseProblem(json::array()), FormatError);
    CHECK_THROWS_AS(loadProblem(testing::problemPath("no_such_file.json")), FormatError);
}

TEST_CASE("section CSV round trip") {
    const Problem pb = loadProblem(testing::problemPath("linear.json"));
    const Bundle b = testing::stableOn(pb.system, pb.domain, 3).bundle;
    SectionParams sp;
    sp.theta = 0.5;
    const Section sec = buildSection(b, sp);
    const ResidualReport res = residual(pb.system, sec);
    std::stringstream out;
    writeSectionCsv(out, sec, b, res);

    std::string header;
    std::getline(std::stringstream(out.str()), header);
    CHECK(header == "x1,x2,phi1,phi2,residual,fiber_dim");

    std::stringstream in(out.str());
    const SectionTable t = readSectionCsv(in);
    CHECK(t.n == 2);
    CHECK(t.s == 2);
    REQUIRE(t.points.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(t.fiberDim[i] == b.fibers[i].dim());
        CHECK((t.values[i] - sec.values[i]).norm() <= 1e-11 * (1 + sec.values[i].norm()));
    }
    const Section back = sectionFromTable(t, b.samples);
    CHECK(residual(pb.system, back).maxResidual <= res.maxResidual + 1e-11);

    // byte-identical output for identical input
    std::stringstream again;
    writeSectionCsv(again, sec, b, res);
    CHECK(again.str() == out.str());

    CHECK_THROWS_AS(sectionFromTable(t, makeSamples(pb.domain, 4)), FormatError);
}

TEST_CASE("broken section files") {
    std::ifstream truncated(std::string(GLAESER_TEST_DATA_DIR) + "/truncated.csv");
    REQUIRE(truncated);
    try {
        readSectionCsv(truncated);
        FAIL("no throw");
    } catch (const FormatError &e) {
        CHECK(std::string(e.what()).find("fields") != std::string::npos);
    }
    std::stringstream empty;
    CHECK_THROWS_AS(readSectionCsv(empty), FormatError);
    std::stringstream headerOnly("x1,phi1,residual,fiber_dim\n");
    CHECK_THROWS_AS(readSectionCsv(headerOnly), FormatError);
    std::stringstream badHeader("x1,y1,residual,fiber_dim\n0,0,0,0\n");
    CHECK_THROWS_AS(readSectionCsv(badHeader), FormatError);
    std::stringstream text("x1,phi1,residual,fiber_dim\n0,abc,0,0\n");
    CHECK_THROWS_AS(readSectionCsv(text), FormatError);
}

TEST_CASE("JSON records") {
    const auto b = testing::initialOn(testing::planar("x"), testing::square(), 1);
    const json r = fiberRecord(b, testing::indexOf(b, Eigen::Vector2d(1, 0)));
    CHECK(r["dim"] == 1);
    CHECK(r["point"] == json{1.0, 0.0});
    CHECK(r["iteration"] == 0);
    CHECK(r["fit_error"] == 0.0);
    CHECK(r["basis"].size() == 1);
    CHECK(toJson(Affine::empty(2))["dim"] == -1);
    CHECK(toJson(Affine::empty(2))["base"].is_null());

    Bundle e = b;
    e.fibers[0] = Affine::empty(2);
    e.fitError[0] = std::numeric_limits<double>::infinity();
    CHECK(fiberRecord(e, 0)["fit_error"].is_null());

    const json p = toJson(b.params);
    CHECK(p["shell_radius"] == 8.0);
    CHECK(p["max_iterations"] == 6);
    ProblemParams back;
    applyParams(p, back);
    CHECK(back.refine.shellBaseRadius == 8.0);
    CHECK(back.refine.decayExponent == b.params.decayExponent);

    ContinuityReport c{{0.2, 0.1}, {0.5, 0.25}, true};
    CHECK(toJson(c)["decreasing"] == true);
    ResidualReport rr{1.0, 0.5, Eigen::Vector2d(1, 0), {1.0, 0.0}};
    CHECK(!toJson(rr).contains("per_point"));
    CHECK(toJson(rr, true)["per_point"].size() == 2);
}

} // TEST_SUITE
