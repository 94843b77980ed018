#include "glaeser/expr.hpp"
#include "glaeser/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace glaeser {

std::string formatPoint(const std::vector<double> &x) {
    std::string s = "(";
    char buf[32];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", x[i]);
        s += (i ? ", " : "") + std::string(buf);
    }
    return s + ")";
}

namespace {

std::string formatNumber(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> toVector(std::span<const double> x) { return {x.begin(), x.end()}; }

// ---- lexer ---------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Colon, Semicolon, Cmp, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
    double number = 0.0;
    Cmp cmp = Cmp::Equal;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t{Tok::End, i, ""};
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string buf(s.substr(i));
            char *end = nullptr;
            t.number = std::strtod(buf.c_str(), &end);
            const std::size_t len = static_cast<std::size_t>(end - buf.c_str());
            if (len == 0) throw SyntaxError(i, "number");
            t.kind = Tok::Number;
            t.text = buf.substr(0, len);
            i += len;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else {
            auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
            switch (c) {
            case '+': t.kind = Tok::Plus; break;
            case '-': t.kind = Tok::Minus; break;
            case '*': t.kind = Tok::Star; break;
            case '/': t.kind = Tok::Slash; break;
            case '^': t.kind = Tok::Caret; break;
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case ',': t.kind = Tok::Comma; break;
            case ':': t.kind = Tok::Colon; break;
            case ';': t.kind = Tok::Semicolon; break;
            case '=': t.kind = Tok::Cmp; t.cmp = Cmp::Equal; break;
            case '<':
                t.kind = Tok::Cmp;
                t.cmp = two('=') ? Cmp::LessEqual : Cmp::Less;
                break;
            case '>':
                t.kind = Tok::Cmp;
                t.cmp = two('=') ? Cmp::GreaterEqual : Cmp::Greater;
                break;
            default: throw SyntaxError(i, "a token");
            }
            const bool wide = t.kind == Tok::Cmp && (t.cmp == Cmp::LessEqual || t.cmp == Cmp::GreaterEqual);
            t.text = std::string(s.substr(i, wide ? 2 : 1));
            i += wide ? 2 : 1;
        }
        out.push_back(std::move(t));
    }
    out.push_back(Token{Tok::End, s.size(), ""});
    return out;
}

bool isFunctionName(const std::string &name) {
    return name == "sqrt" || name == "abs" || name == "min" || name == "max" || name == "piecewise";
}

// ---- parser --------------------------------------------------------------

class Parser {
public:
    Parser(std::string_view text, const VarList &vars) : toks_(lex(text)), vars_(vars) {}

    Polynomial polynomialExpr() {
        Polynomial acc = polynomialTerm();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const bool minus = next().kind == Tok::Minus;
            Polynomial rhs = polynomialTerm();
            acc = minus ? acc - rhs : acc + rhs;
        }
        return acc;
    }

    Guard guard() {
        Guard g;
        g.push_back(comparison());
        while (peek().kind == Tok::Semicolon) {
            next();
            g.push_back(comparison());
        }
        return g;
    }

    NodePtr expr() {
        NodePtr acc = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const NodeKind k = next().kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
            acc = binary(k, acc, term());
        }
        return acc;
    }

    void expectEnd() {
        if (peek().kind != Tok::End) throw SyntaxError(peek().pos, "end of input");
    }

private:
    const Token &peek() const { return toks_[pos_]; }
    const Token &next() { return toks_[pos_++]; }

    const Token &expect(Tok kind, const char *what) {
        if (peek().kind != kind) throw SyntaxError(peek().pos, what);
        return next();
    }

    std::size_t variableIndex(const Token &t) const {
        auto it = std::find(vars_.begin(), vars_.end(), t.text);
        if (it == vars_.end()) throw UnknownVariable(t.text);
        return static_cast<std::size_t>(it - vars_.begin());
    }

    unsigned exponent() {
        const Token &t = expect(Tok::Number, "nonnegative integer exponent");
        if (t.number < 0 || t.number != std::floor(t.number) || t.number > 1e6 ||
            t.text.find_first_of(".eE") != std::string::npos)
            throw SyntaxError(t.pos, "nonnegative integer exponent");
        return static_cast<unsigned>(t.number);
    }

    Polynomial polynomialTerm() {
        Polynomial acc = polynomialFactor();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const bool divide = next().kind == Tok::Slash;
            const std::size_t at = peek().pos;
            Polynomial rhs = polynomialFactor();
            if (divide) {
                if (!rhs.isConstant() || rhs.constantTerm() == 0.0) throw SyntaxError(at, "nonzero constant divisor");
                acc = acc.scaled(1.0 / rhs.constantTerm());
            } else {
                acc = acc * rhs;
            }
        }
        return acc;
    }

    Polynomial polynomialFactor() {
        if (peek().kind == Tok::Minus) {
            next();
            return polynomialFactor().scaled(-1.0);
        }
        Polynomial base = polynomialAtom();
        if (peek().kind == Tok::Caret) {
            next();
            base = base.pow(exponent());
        }
        return base;
    }

    Polynomial polynomialAtom() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Number: next(); return Polynomial::constant(vars_, t.number);
        case Tok::Ident:
            if (isFunctionName(t.text)) throw SyntaxError(t.pos, "polynomial atom");
            next();
            return Polynomial::variable(vars_, variableIndex(t));
        case Tok::LParen: {
            next();
            Polynomial p = polynomialExpr();
            expect(Tok::RParen, "')'");
            return p;
        }
        default: throw SyntaxError(t.pos, "number, variable or '('");
        }
    }

    Comparison comparison() {
        Polynomial lhs = polynomialExpr();
        const Token &op = expect(Tok::Cmp, "comparison operator");
        const Cmp cmp = op.cmp;
        Polynomial rhs = polynomialExpr();
        return Comparison{lhs - rhs, cmp};
    }

    static NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->children = {std::move(a), std::move(b)};
        return n;
    }

    static NodePtr unary(NodeKind k, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->children = {std::move(a)};
        return n;
    }

    static NodePtr constantNode(double v) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Constant;
        n->value = v;
        return n;
    }

    NodePtr term() {
        NodePtr acc = factor();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const NodeKind k = next().kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
            acc = binary(k, acc, factor());
        }
        return acc;
    }

    NodePtr factor() {
        if (peek().kind == Tok::Minus) {
            next();
            return binary(NodeKind::Sub, constantNode(0.0), factor());
        }
        NodePtr base = atom();
        if (peek().kind == Tok::Caret) {
            next();
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::IntPow;
            n->exponent = exponent();
            n->children = {std::move(base)};
            return n;
        }
        return base;
    }

    std::vector<NodePtr> arguments() {
        std::vector<NodePtr> args;
        expect(Tok::LParen, "'('");
        args.push_back(expr());
        while (peek().kind == Tok::Comma) {
            next();
            args.push_back(expr());
        }
        expect(Tok::RParen, "')'");
        return args;
    }

    NodePtr piecewise() {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Piecewise;
        expect(Tok::LParen, "'('");
        for (;;) {
            n->guards.push_back(guard());
            expect(Tok::Colon, "':'");
            n->children.push_back(expr());
            if (peek().kind != Tok::Comma) break;
            next();
        }
        expect(Tok::RParen, "')'");
        return n;
    }

    NodePtr atom() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Number: next(); return constantNode(t.number);
        case Tok::LParen: {
            next();
            NodePtr e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident: {
            next();
            if (t.text == "piecewise") return piecewise();
            if (t.text == "sqrt" || t.text == "abs") {
                auto args = arguments();
                if (args.size() != 1) throw ArityError(t.text, 1, args.size());
                return unary(t.text == "sqrt" ? NodeKind::Sqrt : NodeKind::Abs, args[0]);
            }
            if (t.text == "min" || t.text == "max") {
                auto args = arguments();
                if (args.size() != 2) throw ArityError(t.text, 2, args.size());
                return binary(t.text == "min" ? NodeKind::Min : NodeKind::Max, args[0], args[1]);
            }
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Variable;
            n->variable = variableIndex(t);
            return n;
        }
        default: throw SyntaxError(t.pos, "number, variable, function or '('");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const VarList &vars_;
};

// ---- evaluation ----------------------------------------------------------

constexpr double kSqrtRoundingSlack = 1e-14;

double evalNode(const Node &n, std::span<const double> x) {
    switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Variable: return x[n.variable];
    case NodeKind::Add: return evalNode(*n.children[0], x) + evalNode(*n.children[1], x);
    case NodeKind::Sub: return evalNode(*n.children[0], x) - evalNode(*n.children[1], x);
    case NodeKind::Mul: return evalNode(*n.children[0], x) * evalNode(*n.children[1], x);
    case NodeKind::Div: {
        const double den = evalNode(*n.children[1], x);
        if (den == 0.0) throw DivisionByZero(toVector(x));
        return evalNode(*n.children[0], x) / den;
    }
    case NodeKind::IntPow: {
        const double b = evalNode(*n.children[0], x);
        double r = 1.0;
        for (unsigned i = 0; i < n.exponent; ++i) r *= b;
        return r;
    }
    case NodeKind::Sqrt: {
        const double a = evalNode(*n.children[0], x);
        if (a < 0.0) {
            if (a < -kSqrtRoundingSlack) throw SqrtOfNegative(toVector(x));
            return 0.0;
        }
        return std::sqrt(a);
    }
    case NodeKind::Abs: return std::abs(evalNode(*n.children[0], x));
    case NodeKind::Min: return std::min(evalNode(*n.children[0], x), evalNode(*n.children[1], x));
    case NodeKind::Max: return std::max(evalNode(*n.children[0], x), evalNode(*n.children[1], x));
    case NodeKind::Piecewise:
        for (std::size_t i = 0; i < n.guards.size(); ++i)
            if (guardHolds(n.guards[i], x)) return evalNode(*n.children[i], x);
        throw NoBranchApplies(toVector(x));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double conflictNode(const Node &n, std::span<const double> x) {
    double worst = 0.0;
    for (const auto &c : n.children) worst = std::max(worst, conflictNode(*c, x));
    if (n.kind == NodeKind::Piecewise) {
        bool have = false;
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < n.guards.size(); ++i) {
            if (!guardHolds(n.guards[i], x)) continue;
            double v;
            try {
                v = evalNode(*n.children[i], x);
            } catch (const EvalError &) {
                continue;
            }
            lo = have ? std::min(lo, v) : v;
            hi = have ? std::max(hi, v) : v;
            have = true;
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

std::string nodeStr(const Node &n, const VarList &vars) {
    auto child = [&](std::size_t i) { return nodeStr(*n.children[i], vars); };
    switch (n.kind) {
    case NodeKind::Constant: return n.value < 0 ? "(" + formatNumber(n.value) + ")" : formatNumber(n.value);
    case NodeKind::Variable: return vars[n.variable];
    case NodeKind::Add: return "(" + child(0) + " + " + child(1) + ")";
    case NodeKind::Sub: return "(" + child(0) + " - " + child(1) + ")";
    case NodeKind::Mul: return "(" + child(0) + " * " + child(1) + ")";
    case NodeKind::Div: return "(" + child(0) + " / " + child(1) + ")";
    case NodeKind::IntPow: return "(" + child(0) + ")^" + std::to_string(n.exponent);
    case NodeKind::Sqrt: return "sqrt(" + child(0) + ")";
    case NodeKind::Abs: return "abs(" + child(0) + ")";
    case NodeKind::Min: return "min(" + child(0) + ", " + child(1) + ")";
    case NodeKind::Max: return "max(" + child(0) + ", " + child(1) + ")";
    case NodeKind::Piecewise: {
        std::string s = "piecewise(";
        for (std::size_t i = 0; i < n.guards.size(); ++i)
            s += (i ? ", " : "") + guardStr(n.guards[i]) + ": " + child(i);
        return s + ")";
    }
    }
    return "?";
}

} // namespace

// ---- Polynomial ------------------------------------------------------------

Polynomial::Polynomial(VarList vars) : vars_(std::move(vars)) {}

Polynomial Polynomial::constant(VarList vars, double c) {
    Polynomial p(std::move(vars));
    p.addTerm(c, Exponents(p.vars_.size(), 0u));
    return p;
}

Polynomial Polynomial::variable(VarList vars, std::size_t index) {
    Polynomial p(std::move(vars));
    Exponents e(p.vars_.size(), 0u);
    e.at(index) = 1;
    p.addTerm(1.0, e);
    return p;
}

std::vector<Monomial> Polynomial::terms() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto &[e, c] : terms_) out.push_back({c, e});
    return out;
}

unsigned Polynomial::degree() const {
    unsigned d = 0;
    for (const auto &[e, c] : terms_) {
        unsigned s = 0;
        for (unsigned k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

bool Polynomial::isConstant() const {
    return terms_.empty() || (terms_.size() == 1 && degree() == 0);
}

double Polynomial::constantTerm() const {
    auto it = terms_.find(Exponents(vars_.size(), 0u));
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::addTerm(double coefficient, const Exponents &exponents) {
    if (exponents.size() != vars_.size()) throw DimensionMismatch("exponent vector length differs from variable count");
    if (coefficient == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(exponents, coefficient);
    if (!inserted) {
        it->second += coefficient;
        if (it->second == 0.0) terms_.erase(it);
    }
}

double Polynomial::eval(std::span<const double> x) const {
    if (x.size() != vars_.size()) throw DimensionMismatch("point dimension differs from variable count");
    const unsigned d = degree();
    // powers[i][k] = x_i^k
    std::vector<std::vector<double>> powers(x.size(), std::vector<double>(d + 1, 1.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (unsigned k = 1; k <= d; ++k) powers[i][k] = powers[i][k - 1] * x[i];
    double sum = 0.0;
    for (const auto &[e, c] : terms_) {
        double t = c;
        for (std::size_t i = 0; i < e.size(); ++i) t *= powers[i][e[i]];
        sum += t;
    }
    return sum;
}

void Polynomial::checkCompatible(const Polynomial &o) const {
    if (vars_ != o.vars_) throw DimensionMismatch("polynomials over different variable lists");
}

Polynomial Polynomial::operator+(const Polynomial &o) const {
    checkCompatible(o);
    Polynomial r = *this;
    for (const auto &[e, c] : o.terms_) r.addTerm(c, e);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial &o) const { return *this + o.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial &o) const {
    checkCompatible(o);
    Polynomial r(vars_);
    for (const auto &[ea, ca] : terms_)
        for (const auto &[eb, cb] : o.terms_) {
            Exponents e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            r.addTerm(ca * cb, e);
        }
    return r;
}

Polynomial Polynomial::scaled(double c) const {
    Polynomial r(vars_);
    for (const auto &[e, v] : terms_) r.addTerm(v * c, e);
    return r;
}

Polynomial Polynomial::pow(unsigned e) const {
    Polynomial r = constant(vars_, 1.0);
    for (unsigned i = 0; i < e; ++i) r = r * *this;
    return r;
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto &[e, c] : terms_) {
        std::string t = formatNumber(c);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            t += "*" + vars_[i];
            if (e[i] > 1) t += "^" + std::to_string(e[i]);
        }
        s += (first ? "" : " + ") + t;
        first = false;
    }
    return s;
}

Polynomial parsePolynomial(std::string_view text, const VarList &vars) {
    Parser p(text, vars);
    Polynomial poly = p.polynomialExpr();
    p.expectEnd();
    return poly;
}

// ---- comparisons -----------------------------------------------------------

bool Comparison::holds(std::span<const double> x) const {
    const double v = difference.eval(x);
    switch (cmp) {
    case Cmp::Less: return v < 0.0;
    case Cmp::LessEqual: return v <= kComparisonSlack;
    case Cmp::Equal: return std::abs(v) <= kComparisonSlack;
    case Cmp::GreaterEqual: return v >= -kComparisonSlack;
    case Cmp::Greater: return v > 0.0;
    }
    return false;
}

std::string Comparison::str() const {
    static const char *ops[] = {"<", "<=", "=", ">=", ">"};
    return difference.str() + " " + ops[static_cast<int>(cmp)] + " 0";
}

bool guardHolds(const Guard &g, std::span<const double> x) {
    return std::all_of(g.begin(), g.end(), [&](const Comparison &c) { return c.holds(x); });
}

std::string guardStr(const Guard &g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "; " : "") + g[i].str();
    return s;
}

Guard parseGuard(std::string_view text, const VarList &vars) {
    Parser p(text, vars);
    Guard g = p.guard();
    p.expectEnd();
    return g;
}

// ---- SemialgFn -------------------------------------------------------------

SemialgFn::SemialgFn(VarList vars, NodePtr root) : vars_(std::move(vars)), root_(std::move(root)) {}

SemialgFn SemialgFn::constant(VarList vars, double c) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = c;
    return SemialgFn(std::move(vars), n);
}

SemialgFn SemialgFn::variable(VarList vars, std::size_t index) {
    if (index >= vars.size()) throw DimensionMismatch("variable index out of range");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    n->variable = index;
    return SemialgFn(std::move(vars), n);
}

double SemialgFn::operator()(std::span<const double> x) const {
    if (x.size() != vars_.size()) throw DimensionMismatch("point dimension differs from variable count");
    return evalNode(*root_, x);
}

double SemialgFn::branchConflict(std::span<const double> x) const { return conflictNode(*root_, x); }

std::string SemialgFn::str() const { return nodeStr(*root_, vars_); }

SemialgFn parseSemialg(std::string_view text, const VarList &vars) {
    Parser p(text, vars);
    NodePtr root = p.expr();
    p.expectEnd();
    return SemialgFn(vars, root);
}

std::size_t nodeCount(const Node &n) {
    std::size_t c = 1;
    for (const auto &ch : n.children) c += nodeCount(*ch);
    return c;
}

// ---- SystemSpec ------------------------------------------------------------

SystemSpec::SystemSpec(VarList vars_, std::size_t rows_, std::size_t cols_, std::vector<SemialgFn> A_,
                       std::vector<SemialgFn> gamma_)
    : vars(std::move(vars_)), rows(rows_), cols(cols_), A(std::move(A_)), gamma(std::move(gamma_)) {
    if (rows == 0 || cols == 0) throw DimensionMismatch("system needs at least one row and one unknown");
    if (A.size() != rows * cols) throw DimensionMismatch("matrix entry count differs from rows*cols");
    if (gamma.size() != rows) throw DimensionMismatch("right-hand side length differs from row count");
    for (const auto &f : A)
        if (f.variables() != vars) throw DimensionMismatch("matrix entry over a different variable list");
    for (const auto &f : gamma)
        if (f.variables() != vars) throw DimensionMismatch("right-hand side over a different variable list");
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> SystemSpec::evaluate(std::span<const double> x) const {
    if (x.size() != vars.size()) throw DimensionMismatch("point dimension differs from system dimension");
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd g(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            try {
                a(i, j) = entry(i, j)(x);
            } catch (const EvalError &e) {
                throw EvalError("A[" + std::to_string(i) + "][" + std::to_string(j) + "]: " + e.reason, e.point);
            }
        }
        try {
            g(i) = gamma[i](x);
        } catch (const EvalError &e) {
            throw EvalError("gamma[" + std::to_string(i) + "]: " + e.reason, e.point);
        }
    }
    return {a, g};
}

SystemSpec parseSystem(const VarList &vars, const std::vector<std::vector<std::string>> &A,
                       const std::vector<std::string> &gamma) {
    if (A.empty()) throw DimensionMismatch("system needs at least one row");
    const std::size_t cols = A.front().size();
    std::vector<SemialgFn> entries;
    for (const auto &row : A) {
        if (row.size() != cols) throw DimensionMismatch("ragged coefficient matrix");
        for (const auto &e : row) entries.push_back(parseSemialg(e, vars));
    }
    std::vector<SemialgFn> rhs;
    for (const auto &e : gamma) rhs.push_back(parseSemialg(e, vars));
    return SystemSpec(vars, A.size(), cols, std::move(entries), std::move(rhs));
}

} // namespace glaeser
