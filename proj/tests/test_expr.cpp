#include "support.hpp"

#include "glaeser/errors.hpp"

#include <doctest.h>

#include <functional>
#include <map>
#include <thread>

using namespace glaeser;
using testing::Random;

namespace {

double at(const SemialgFn &f, std::vector<double> x) { return f(std::span<const double>(x)); }

bool kindsAreListed(const Node &n) {
    const int k = static_cast<int>(n.kind);
    if (k < 0 || k >= kNodeKindCount) return false;
    for (const auto &c : n.children)
        if (!kindsAreListed(*c)) return false;
    return true;
}

} // namespace

TEST_SUITE("expr") {

TEST_CASE("polynomial terms are normalised") {
    const VarList xy = {"x", "y"};
    const auto p = parsePolynomial("x^2 + 2*x*y - 3", xy);
    const auto t = p.terms();
    REQUIRE(t.size() == 3);
    std::map<Exponents, double> got;
    for (const auto &m : t) got[m.exponents] = m.coefficient;
    CHECK(got.at({2, 0}) == 1.0);
    CHECK(got.at({1, 1}) == 2.0);
    CHECK(got.at({0, 0}) == -3.0);

    CHECK(parsePolynomial("0", {"x"}).terms().empty());
    CHECK(parsePolynomial("x - x", {"x"}).terms().empty());
    CHECK(parsePolynomial("(x + 1)^2 - x^2 - 2*x", {"x"}).terms().size() == 1);
    CHECK(parsePolynomial("x*y/2", xy).terms().front().coefficient == 0.5);
}

TEST_CASE("polynomial parse errors") {
    CHECK_THROWS_AS(parsePolynomial("x + z", {"x"}), UnknownVariable);
    CHECK_THROWS_AS(parsePolynomial("x +", {"x"}), SyntaxError);
    CHECK_THROWS_AS(parsePolynomial("x / x", {"x"}), Error);
    CHECK_THROWS_AS(parsePolynomial("sqrt(x)", {"x"}), Error);
    try {
        parsePolynomial("x * * 2", {"x"});
        FAIL("no throw");
    } catch (const SyntaxError &e) {
        CHECK(e.position == 4);
    }
}

TEST_CASE("polynomial evaluation matches term-by-term pow") {
    Random rnd(11);
    const VarList v = {"a", "b", "c"};
    for (int k = 0; k < 200; ++k) {
        const auto p = parsePolynomial(rnd.polynomial(v, 4) + " + (" + rnd.polynomial(v, 3) + ")*(" +
                                           rnd.polynomial(v, 2) + ")",
                                       v);
        std::vector<double> x = {rnd.uniform(-2, 2), rnd.uniform(-2, 2), rnd.uniform(-2, 2)};
        const double want = testing::naivePolynomial(p, x);
        CHECK(p.eval(x) == doctest::Approx(want).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("semialgebraic parsing builds the expected nodes") {
    const VarList xy = {"x", "y"};
    const auto f = parseSemialg("sqrt(x^2+y^2)", xy);
    CHECK(f.root().kind == NodeKind::Sqrt);
    const auto g = parseSemialg("piecewise(x<=0: 0, x>0: x)", {"x"});
    CHECK(g.root().kind == NodeKind::Piecewise);
    CHECK(g.root().children.size() == 2);
    CHECK(g.root().guards.size() == 2);
    const auto h = parseSemialg("abs(x)*y", xy);
    REQUIRE(h.root().kind == NodeKind::Mul);
    CHECK(h.root().children[0]->kind == NodeKind::Abs);
    CHECK(h.root().children[1]->kind == NodeKind::Variable);

    CHECK_THROWS_AS(parseSemialg("min(x)", {"x"}), ArityError);
    CHECK_THROWS_AS(parseSemialg("sqrt(x, y)", xy), ArityError);
    CHECK_THROWS_AS(parseSemialg("w + 1", xy), UnknownVariable);
    CHECK_THROWS_AS(parseSemialg("x^-1", {"x"}), SyntaxError);
    CHECK_THROWS_AS(parseSemialg("piecewise(x < 0 0)", {"x"}), SyntaxError);
}

TEST_CASE("semialgebraic evaluation") {
    const VarList xy = {"x", "y"};
    CHECK(at(parseSemialg("sqrt(x^2+y^2)", xy), {3, 4}) == 5.0);
    CHECK(at(parseSemialg("piecewise(x<=0: 0, x>0: x)", {"x"}), {-2}) == 0.0);
    CHECK(at(parseSemialg("piecewise(x<=0: 0, x>0: x)", {"x"}), {1.5}) == 1.5);
    CHECK(at(parseSemialg("abs(x)*y", xy), {-2, 3}) == 6.0);
    CHECK(at(parseSemialg("min(x, y) - max(x, y)", xy), {1, 4}) == -3.0);
    CHECK(at(parseSemialg("-x^2", {"x"}), {3}) == -9.0);
    CHECK(at(parseSemialg("1.5e1 / (x + 1)", {"x"}), {2}) == 5.0);
    // first satisfied guard wins
    CHECK(at(parseSemialg("piecewise(x>=0: 1, x<=0: 2)", {"x"}), {0}) == 1.0);
    CHECK(at(parseSemialg("piecewise(x>=0; y>=0: 1, x<0: 2, y<0: 3)", xy), {1, -1}) == 3.0);
}

TEST_CASE("evaluation errors carry the point") {
    CHECK_THROWS_AS(at(parseSemialg("1/x", {"x"}), {0}), DivisionByZero);
    CHECK_THROWS_AS(at(parseSemialg("sqrt(x)", {"x"}), {-1}), SqrtOfNegative);
    CHECK_THROWS_AS(at(parseSemialg("piecewise(x>0: 1)", {"x"}), {-1}), NoBranchApplies);
    try {
        at(parseSemialg("sqrt(x - 2)", {"x"}), {1});
        FAIL("no throw");
    } catch (const EvalError &e) {
        CHECK(e.point == std::vector<double>{1.0});
    }
    CHECK_THROWS_AS(at(parseSemialg("x + y", {"x", "y"}), {1}), DimensionMismatch);
}

TEST_CASE("branch conflicts are measured") {
    const auto f = parseSemialg("piecewise(x>=0: 1, x<=0: 2)", {"x"});
    CHECK(f.branchConflict(std::vector<double>{0.0}) == 1.0);
    CHECK(f.branchConflict(std::vector<double>{1.0}) == 0.0);
    const auto g = parseSemialg("piecewise(x>=0: x, x<=0: -x)", {"x"});
    CHECK(g.branchConflict(std::vector<double>{0.0}) == 0.0);
}

TEST_CASE("system evaluation") {
    const auto sys = testing::planar("x");
    auto [A, g] = sys.evaluate(Eigen::Vector2d(1, 0));
    CHECK(A.rows() == 1);
    CHECK(A(0, 0) == 1.0);
    CHECK(A(0, 1) == 0.0);
    CHECK(g(0) == 1.0);
    std::tie(A, g) = sys.evaluate(Eigen::Vector2d(0, 0));
    CHECK(A.norm() == 0.0);
    CHECK(g(0) == 0.0);
    const auto cone = testing::planar("sqrt(x^2+y^2)");
    std::tie(A, g) = cone.evaluate(Eigen::Vector2d(0.6, 0.8));
    CHECK(A(0, 0) == 0.6);
    CHECK(A(0, 1) == 0.8);
    CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-15));

    const auto bad = parseSystem({"x"}, {{"1/x"}}, {"1"});
    try {
        bad.evaluate(Eigen::VectorXd::Zero(1));
        FAIL("no throw");
    } catch (const EvalError &e) {
        CHECK(std::string(e.what()).find("A[0][0]") != std::string::npos);
    }
    CHECK_THROWS_AS(parseSystem({"x"}, {{"1", "2"}, {"1"}}, {"1", "2"}), DimensionMismatch);
    CHECK_THROWS_AS(parseSystem({"x"}, {{"1"}}, {"1", "2"}), DimensionMismatch);
}

TEST_CASE("printed trees re-parse to the same function") {
    Random rnd(2024);
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(1, 3));
        const VarList vars = testing::varNames(n);
        const SemialgFn f(vars, rnd.tree(n, 5));
        const SemialgFn g = parseSemialg(f.str(), vars);
        CHECK(kindsAreListed(g.root()));
        for (int p = 0; p < 20; ++p) {
            std::vector<double> x(n);
            for (auto &c : x) c = rnd.uniform(-2, 2);
            const double a = at(f, x), b = at(g, x);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("expressions are reentrant across threads") {
    const auto f = parseSemialg("piecewise(x^2 + y^2 <= 1: sqrt(1 - x^2 - y^2), x^2 + y^2 > 1: 0)", {"x", "y"});
    std::vector<double> out(4000);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < 4000; i += 4) out[i] = at(f, {std::cos(i * 0.01), std::sin(i * 0.013)});
        });
    for (auto &th : pool) th.join();
    for (int i = 0; i < 4000; ++i) CHECK(out[i] == at(f, {std::cos(i * 0.01), std::sin(i * 0.013)}));
}

} // TEST_SUITE
