#ifndef GLAESER_EXPR_HPP
#define GLAESER_EXPR_HPP

// Semialgebraic coefficient functions: polynomials, comparisons between
// polynomials, and expression trees closed under + - * / ^n sqrt abs min max
// and polynomial-guarded piecewise definitions.

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glaeser {

using VarList = std::vector<std::string>;
using Exponents = std::vector<unsigned>;

struct Monomial {
    double coefficient;
    Exponents exponents;
};

/// Real polynomial in a fixed ordered list of variables. Terms are kept in
/// normal form: sorted by exponent vector, no duplicates, no zero coefficients.
class Polynomial {
public:
    explicit Polynomial(VarList vars);

    static Polynomial constant(VarList vars, double c);
    static Polynomial variable(VarList vars, std::size_t index);

    const VarList &variables() const { return vars_; }
    std::vector<Monomial> terms() const;
    std::size_t termCount() const { return terms_.size(); }
    unsigned degree() const;
    bool isZero() const { return terms_.empty(); }
    bool isConstant() const;
    /// Constant term (0 if absent).
    double constantTerm() const;

    double eval(std::span<const double> x) const;

    Polynomial operator+(const Polynomial &o) const;
    Polynomial operator-(const Polynomial &o) const;
    Polynomial operator*(const Polynomial &o) const;
    Polynomial scaled(double c) const;
    Polynomial pow(unsigned e) const;

    void addTerm(double coefficient, const Exponents &exponents);

    /// Text in the input grammar; parsePolynomial(str()) reproduces the polynomial.
    std::string str() const;

private:
    void checkCompatible(const Polynomial &o) const;

    VarList vars_;
    std::map<Exponents, double> terms_;
};

Polynomial parsePolynomial(std::string_view text, const VarList &vars);

enum class Cmp { Less, LessEqual, Equal, GreaterEqual, Greater };

/// Inclusive comparisons and equality accept this much slack so that lattice
/// points on a constraint boundary are not lost to rounding.
inline constexpr double kComparisonSlack = 1e-12;

/// `lhs cmp rhs`, stored as `lhs - rhs cmp 0`.
struct Comparison {
    Polynomial difference;
    Cmp cmp;

    bool holds(std::span<const double> x) const;
    std::string str() const;
};

/// Conjunction of comparisons.
using Guard = std::vector<Comparison>;

bool guardHolds(const Guard &g, std::span<const double> x);
std::string guardStr(const Guard &g);

/// Parses `poly cmp poly (';' poly cmp poly)*`.
Guard parseGuard(std::string_view text, const VarList &vars);

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, IntPow, Sqrt, Abs, Min, Max, Piecewise };
inline constexpr int kNodeKindCount = 12;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double value = 0.0;          // Constant
    std::size_t variable = 0;    // Variable
    unsigned exponent = 0;       // IntPow
    std::vector<NodePtr> children;
    std::vector<Guard> guards;   // Piecewise: guards[i] selects children[i]
};

/// Immutable semialgebraic function of the listed variables. Copies share the tree.
class SemialgFn {
public:
    SemialgFn(VarList vars, NodePtr root);

    static SemialgFn constant(VarList vars, double c);
    static SemialgFn variable(VarList vars, std::size_t index);

    const VarList &variables() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    const Node &root() const { return *root_; }
    NodePtr rootPtr() const { return root_; }

    /// Throws DivisionByZero, SqrtOfNegative or NoBranchApplies.
    double operator()(std::span<const double> x) const;
    double operator()(const Eigen::VectorXd &x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

    /// Largest disagreement between the values of all piecewise branches whose
    /// guards hold at x (0 when at most one branch applies anywhere in the tree).
    double branchConflict(std::span<const double> x) const;

    std::string str() const;

private:
    VarList vars_;
    NodePtr root_;
};

SemialgFn parseSemialg(std::string_view text, const VarList &vars);

/// Number of nodes; used by tests to bound randomly generated trees.
std::size_t nodeCount(const Node &n);

/// A(x) phi(x) = gamma(x) with semialgebraic entries.
struct SystemSpec {
    VarList vars;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<SemialgFn> A;      // row-major, rows*cols entries
    std::vector<SemialgFn> gamma;  // rows entries

    SystemSpec(VarList vars, std::size_t rows, std::size_t cols, std::vector<SemialgFn> A,
               std::vector<SemialgFn> gamma);

    std::size_t dimension() const { return vars.size(); }
    const SemialgFn &entry(std::size_t i, std::size_t j) const { return A[i * cols + j]; }

    /// Entrywise evaluation; eval errors are rethrown naming the entry.
    std::pair<Eigen::MatrixXd, Eigen::VectorXd> evaluate(std::span<const double> x) const;
    std::pair<Eigen::MatrixXd, Eigen::VectorXd> evaluate(const Eigen::VectorXd &x) const {
        return evaluate(std::span<const double>(x.data(), x.size()));
    }
};

/// Parses a system from a grid of expression strings.
SystemSpec parseSystem(const VarList &vars, const std::vector<std::vector<std::string>> &A,
                       const std::vector<std::string> &gamma);

} // namespace glaeser

#endif
