#include "glaeser/problem.hpp"
#include "glaeser/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace glaeser {

namespace {

using nlohmann::json;

json vec(const Eigen::VectorXd &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <typename T>
T field(const json &j, const char *key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw FormatError(std::string("problem field '") + key + "': " + e.what());
    }
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return buf;
}

std::vector<std::string> splitCsv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

void applyParams(const json &j, ProblemParams &p) {
    if (!j.is_object()) throw FormatError("params must be an object");
    for (const auto &[key, v] : j.items()) {
        if (!v.is_number()) throw FormatError("param '" + key + "' must be a number");
        const double x = v.get<double>();
        const int k = static_cast<int>(std::lround(x));
        if (key == "level") p.level = k;
        else if (key == "tol") p.tol = x;
        else if (key == "threads") p.refine.threads = p.section.threads = k;
        else if (key == "sigma_tol") p.refine.sigmaTol = x;
        else if (key == "eps_fit") p.refine.epsFit = x;
        else if (key == "eps_dir") p.refine.epsDir = x;
        else if (key == "shell_radius") p.refine.shellBaseRadius = x;
        else if (key == "shell_count") p.refine.shellCount = k;
        else if (key == "shell_ratio") p.refine.shellRatio = x;
        else if (key == "decay_exponent") p.refine.decayExponent = x;
        else if (key == "min_shell_samples") p.refine.minShellSamples = k;
        else if (key == "max_iterations") p.refine.maxIterations = k;
        else if (key == "stabilization_gap") p.refine.stabilizationGap = x;
        else if (key == "theta") p.section.theta = x;
        else if (key == "rho") p.section.rho = x;
        else if (key == "p") p.section.blendPower = k;
        else if (key == "anchor_tol") p.section.anchorTol = x;
        else throw FormatError("unknown param '" + key + "'");
    }
}

Problem parseProblem(const json &j) {
    if (!j.is_object()) throw FormatError("problem file must hold a JSON object");
    const auto vars = field<VarList>(j, "vars");
    if (vars.empty()) throw FormatError("problem needs at least one variable");
    const json &dom = j.contains("domain") ? j.at("domain") : throw FormatError("problem field 'domain' missing");

    DomainSpec domain;
    for (const auto &side : field<std::vector<std::vector<double>>>(dom, "box")) {
        if (side.size() != 2) throw FormatError("box entries must be [lo, hi]");
        domain.box.emplace_back(side[0], side[1]);
    }
    if (domain.box.size() != vars.size()) throw FormatError("box has " + std::to_string(domain.box.size()) +
                                                            " axes for " + std::to_string(vars.size()) + " variables");
    if (dom.contains("constraints"))
        for (const auto &text : field<std::vector<std::string>>(dom, "constraints"))
            for (auto &c : parseGuard(text, vars)) domain.constraints.push_back(std::move(c));

    SystemSpec sys = parseSystem(vars, field<std::vector<std::vector<std::string>>>(j, "A"),
                                 field<std::vector<std::string>>(j, "gamma"));
    ProblemParams params;
    if (j.contains("params")) applyParams(j.at("params"), params);
    return Problem{vars, std::move(domain), std::move(sys), params};
}

Problem loadProblem(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open problem file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw FormatError(path + ": " + e.what());
    }
    return parseProblem(j);
}

json toJson(const Affine &V) {
    if (V.isEmpty()) return {{"dim", -1}, {"base", nullptr}, {"basis", nullptr}};
    json basis = json::array();
    for (Eigen::Index c = 0; c < V.basis().cols(); ++c) basis.push_back(vec(V.basis().col(c)));
    return {{"dim", V.dim()}, {"base", vec(V.base())}, {"basis", basis}};
}

json toJson(const ResidualReport &r, bool perPoint) {
    json j = {{"max_residual", r.maxResidual}, {"mean_residual", r.meanResidual}, {"worst_point", vec(r.worstPoint)}};
    if (perPoint) j["per_point"] = r.perPoint;
    return j;
}

json toJson(const ContinuityReport &r) {
    return {{"radii", r.radii}, {"max_oscillation", r.maxOscillation}, {"decreasing", r.decreasing}};
}

json toJson(const SectionStats &s) {
    return {{"recursion_depth", s.depth}, {"locus_sizes", s.locusSizes}, {"cover_balls", s.coverBalls}};
}

json toJson(const RefineParams &p) {
    return {{"sigma_tol", p.sigmaTol},          {"eps_fit", p.epsFit},
            {"eps_dir", p.epsDir},              {"shell_radius", p.shellBaseRadius},
            {"shell_count", p.shellCount},      {"shell_ratio", p.shellRatio},
            {"decay_exponent", p.decayExponent}, {"min_shell_samples", p.minShellSamples},
            {"max_iterations", p.maxIterations}, {"stabilization_gap", p.stabilizationGap}};
}

json fiberRecord(const Bundle &b, std::size_t i) {
    json j = toJson(b.fibers[i]);
    j["point"] = vec(b.point(i));
    j["iteration"] = b.iteration;
    j["fit_error"] = num(b.fitError[i]);
    return j;
}

void writeSectionCsv(std::ostream &out, const Section &sec, const Bundle &b, const ResidualReport &res) {
    const std::size_t n = sec.samples->dimension();
    const std::size_t s = sec.values.empty() ? 0 : static_cast<std::size_t>(sec.values.front().size());
    for (std::size_t i = 0; i < n; ++i) out << 'x' << i + 1 << ',';
    for (std::size_t i = 0; i < s; ++i) out << "phi" << i + 1 << ',';
    out << "residual,fiber_dim\n";
    for (std::size_t y = 0; y < sec.size(); ++y) {
        const Eigen::VectorXd &x = sec.samples->point(y);
        for (Eigen::Index i = 0; i < x.size(); ++i) out << fmt(x[i]) << ',';
        for (Eigen::Index i = 0; i < sec.values[y].size(); ++i) out << fmt(sec.values[y][i]) << ',';
        out << fmt(res.perPoint[y]) << ',' << b.fibers[y].dim() << '\n';
    }
}

SectionTable readSectionCsv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("section file is empty");
    const auto header = splitCsv(line);
    SectionTable t;
    std::size_t c = 0;
    for (; c < header.size() && header[c] == "x" + std::to_string(t.n + 1); ++c) ++t.n;
    for (; c < header.size() && header[c] == "phi" + std::to_string(t.s + 1); ++c) ++t.s;
    if (t.n == 0 || t.s == 0 || c + 2 != header.size() || header[c] != "residual" || header[c + 1] != "fiber_dim")
        throw FormatError("section header must be x1..xn,phi1..phis,residual,fiber_dim");

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = splitCsv(line);
        if (cells.size() != header.size())
            throw FormatError("section row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(header.size()));
        Eigen::VectorXd x(static_cast<Eigen::Index>(t.n)), v(static_cast<Eigen::Index>(t.s));
        try {
            for (std::size_t i = 0; i < t.n; ++i) x[static_cast<Eigen::Index>(i)] = std::stod(cells[i]);
            for (std::size_t i = 0; i < t.s; ++i) v[static_cast<Eigen::Index>(i)] = std::stod(cells[t.n + i]);
            t.residual.push_back(std::stod(cells[t.n + t.s]));
            t.fiberDim.push_back(std::stoi(cells[t.n + t.s + 1]));
        } catch (const std::logic_error &) {
            throw FormatError("section row " + std::to_string(row) + " holds a non-numeric field");
        }
        t.points.push_back(std::move(x));
        t.values.push_back(std::move(v));
    }
    if (t.points.empty()) throw FormatError("section file has no rows");
    return t;
}

Section sectionFromTable(const SectionTable &table, std::shared_ptr<const SampleSet> samples) {
    if (table.n != samples->dimension()) throw FormatError("section variables differ from the problem's");
    if (table.points.size() != samples->size())
        throw FormatError("section has " + std::to_string(table.points.size()) + " rows for " +
                          std::to_string(samples->size()) + " samples");
    const double tol = 1e-9 * (1.0 + samples->domain().diameter());
    for (std::size_t i = 0; i < table.points.size(); ++i)
        if ((table.points[i] - samples->point(i)).norm() > tol)
            throw FormatError("section row " + std::to_string(i + 2) + " is not sample " + std::to_string(i));
    Section s;
    s.samples = std::move(samples);
    s.values = table.values;
    s.blendPower = static_cast<int>(table.n) + 2;
    return s;
}

} // namespace glaeser
