#ifndef GLAESER_TESTS_SUPPORT_HPP
#define GLAESER_TESTS_SUPPORT_HPP

// Shared fixtures: the analytic instances, random generators for expression
// trees, systems and subspaces, and small oracles that avoid library code paths.

#include "glaeser/affine.hpp"
#include "glaeser/bundle.hpp"
#include "glaeser/expr.hpp"
#include "glaeser/problem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace testing {

using namespace glaeser;

inline std::string problemPath(const std::string &name) { return std::string(GLAESER_PROBLEM_DIR) + "/" + name; }

inline DomainSpec square(double lo = -1.0, double hi = 1.0) {
    DomainSpec d;
    d.box = {{lo, hi}, {lo, hi}};
    return d;
}

inline DomainSpec interval(double lo = -1.0, double hi = 1.0) {
    DomainSpec d;
    d.box = {{lo, hi}};
    return d;
}

/// x phi1 + y phi2 = gamma on the plane.
inline SystemSpec planar(const std::string &gamma) { return parseSystem({"x", "y"}, {{"x", "y"}}, {gamma}); }

inline Bundle initialOn(const SystemSpec &sys, const DomainSpec &dom, int level, RefineParams p = {}) {
    return initialBundle(sys, makeSamples(dom, level), p);
}

inline StabilizeResult stableOn(const SystemSpec &sys, const DomainSpec &dom, int level, RefineParams p = {}) {
    return stabilize(initialOn(sys, dom, level, p));
}

inline std::size_t indexOf(const Bundle &b, const Eigen::VectorXd &x) {
    auto i = b.samples->find(x);
    if (!i) throw std::runtime_error("point is not a sample");
    return *i;
}

// ---- oracles -----------------------------------------------------------------

/// Term-by-term std::pow evaluation.
inline double naivePolynomial(const Polynomial &p, const std::vector<double> &x) {
    double sum = 0.0;
    for (const auto &m : p.terms()) {
        double t = m.coefficient;
        for (std::size_t i = 0; i < x.size(); ++i) t *= std::pow(x[i], static_cast<double>(m.exponents[i]));
        sum += t;
    }
    return sum;
}

/// Pseudoinverse through the normal equations' eigen decomposition; independent
/// of the SVD in solveFiber.
inline Eigen::MatrixXd pinvOracle(const Eigen::MatrixXd &A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(A.cols(), A.cols());
    for (Eigen::Index i = 0; i < A.cols(); ++i)
        if (es.eigenvalues()(i) > 1e-14 * top)
            inv += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() / es.eigenvalues()(i);
    return inv * A.transpose();
}

// ---- random generators ---------------------------------------------------------

class Random {
public:
    explicit Random(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double gauss() { return std::normal_distribution<double>()(rng_); }
    std::mt19937_64 &engine() { return rng_; }

    Eigen::VectorXd vector(Eigen::Index n, double scale = 1.0) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * gauss();
        return v;
    }

    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = gauss();
        return m;
    }

    /// Nonempty subspace of R^s of random dimension, base and direction span.
    Affine subspace(Eigen::Index s) {
        const Eigen::Index k = integer(0, static_cast<int>(s));
        return Affine::through(vector(s, 3.0), matrix(s, k));
    }

    /// Polynomial text of degree <= deg in the variables, small integer coefficients.
    std::string polynomial(const VarList &vars, int deg) {
        std::string s;
        int terms = 0;
        auto add = [&](int c, const std::string &mono) {
            if (c == 0) return;
            s += (c < 0 ? " - " : (terms ? " + " : "")) + std::to_string(std::abs(c)) + mono;
            ++terms;
        };
        add(integer(-2, 2), "");
        for (std::size_t i = 0; i < vars.size(); ++i)
            for (int e = 1; e <= deg; ++e)
                if (integer(0, 2) == 0) add(integer(-2, 2), "*" + vars[i] + "^" + std::to_string(e));
        if (deg >= 2 && vars.size() >= 2 && integer(0, 2) == 0) add(integer(-2, 2), "*" + vars[0] + "*" + vars[1]);
        return terms ? s : "0";
    }

    /// Random tree over the full node vocabulary; every evaluation is defined.
    NodePtr tree(std::size_t nvars, int depth) {
        auto leaf = [&]() -> NodePtr {
            auto n = std::make_shared<Node>();
            if (integer(0, 1) == 0) {
                n->kind = NodeKind::Constant;
                n->value = uniform(-3.0, 3.0);
            } else {
                n->kind = NodeKind::Variable;
                n->variable = static_cast<std::size_t>(integer(0, static_cast<int>(nvars) - 1));
            }
            return n;
        };
        if (depth <= 0) return leaf();
        auto node = [](NodeKind k, std::vector<NodePtr> ch) {
            auto n = std::make_shared<Node>();
            n->kind = k;
            n->children = std::move(ch);
            return n;
        };
        auto constant = [](double c) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Constant;
            n->value = c;
            return NodePtr(n);
        };
        switch (integer(0, 11)) {
        case 0: return leaf();
        case 1: return node(NodeKind::Add, {tree(nvars, depth - 1), tree(nvars, depth - 1)});
        case 2: return node(NodeKind::Sub, {tree(nvars, depth - 1), tree(nvars, depth - 1)});
        case 3: return node(NodeKind::Mul, {tree(nvars, depth - 1), tree(nvars, depth - 1)});
        case 4: {  // denominator 1 + d^2 never vanishes
            const NodePtr d = tree(nvars, depth - 1);
            return node(NodeKind::Div,
                        {tree(nvars, depth - 1), node(NodeKind::Add, {constant(1.0), node(NodeKind::Mul, {d, d})})});
        }
        case 5: {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::IntPow;
            n->exponent = static_cast<unsigned>(integer(0, 3));
            n->children = {tree(nvars, depth - 1)};
            return n;
        }
        case 6: return node(NodeKind::Sqrt, {node(NodeKind::Abs, {tree(nvars, depth - 1)})});
        case 7: return node(NodeKind::Abs, {tree(nvars, depth - 1)});
        case 8: return node(NodeKind::Min, {tree(nvars, depth - 1), tree(nvars, depth - 1)});
        case 9: return node(NodeKind::Max, {tree(nvars, depth - 1), tree(nvars, depth - 1)});
        default: {  // g <= 0 and g > 0 cover everything
            VarList vars;
            for (std::size_t i = 0; i < nvars; ++i) vars.push_back("v" + std::to_string(i));
            const std::string g = polynomial(vars, 2);
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Piecewise;
            n->guards = {parseGuard(g + " <= 0", vars), parseGuard(g + " > 0", vars)};
            n->children = {tree(nvars, depth - 1), tree(nvars, depth - 1)};
            return n;
        }
        }
    }

private:
    std::mt19937_64 rng_;
};

inline VarList varNames(std::size_t n) {
    VarList v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("v" + std::to_string(i));
    return v;
}

/// Random polynomial system on the plane (s <= 4 unknowns, r <= 3 rows, degree
/// <= 2). Half of them are made consistent through a constant solution.
inline SystemSpec randomSystem(Random &rnd) {
    const VarList vars = {"x", "y"};
    const int s = rnd.integer(1, 4), r = rnd.integer(1, 3);
    std::vector<std::vector<std::string>> A(r, std::vector<std::string>(s));
    for (auto &row : A)
        for (auto &e : row) e = rnd.integer(0, 3) == 0 ? "0" : rnd.polynomial(vars, 2);
    std::vector<std::string> gamma(r);
    if (rnd.integer(0, 1) == 0) {
        std::vector<std::string> lambda(s);
        for (auto &l : lambda) l = rnd.polynomial(vars, 0);
        for (int i = 0; i < r; ++i) {
            std::string g;
            for (int j = 0; j < s; ++j) g += (j ? " + " : "") + ("(" + A[i][j] + ")*(" + lambda[j] + ")");
            gamma[i] = g;
        }
    } else {
        for (auto &g : gamma) g = rnd.polynomial(vars, 2);
    }
    return parseSystem(vars, A, gamma);
}

} // namespace testing

#endif
