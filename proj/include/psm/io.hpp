#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psm/engine.hpp"
#include "psm/errors.hpp"
#include "psm/experiments.hpp"
#include "psm/program.hpp"
#include "psm/reductions.hpp"

/**
 * File formats: programs (JSON or COO text), solution paths (CSV + JSON
 * summary), dense matrices (CSV) and benchmark records.
 */
namespace psm::io {

using json = nlohmann::json;

inline std::string fmt(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path + "'");
    return out;
}

inline ConstraintKind parse_kind(const std::string& s)
{
    if (s == "equality" || s == "eq")
        return ConstraintKind::Equality;
    if (s == "less_equal" || s == "le" || s == "leq")
        return ConstraintKind::LessEqual;
    throw ParseError("unknown constraint kind '" + s + "'");
}

// ---------------------------------------------------------------- programs

/**
 * {"m", "n", "kind", "A", "b", "b_bar", "c", "c_bar", "free"}. A is either a
 * dense array of rows or {"i": [...], "j": [...], "v": [...]}; b_bar and
 * c_bar default to zero, "free" lists free column indices.
 */
inline ParametricProgram program_from_json(const json& j)
{
    try {
        const Index m = j.at("m").get<Index>();
        const Index n = j.at("n").get<Index>();
        if (m < 1 || n < 1)
            throw ParseError("m and n must be positive");
        ParametricProgram p;
        p.kind = parse_kind(j.value("kind", std::string("equality")));
        std::vector<Eigen::Triplet<double>> trip;
        const json& A = j.at("A");
        if (A.is_array()) {
            if (static_cast<Index>(A.size()) != m)
                throw ParseError("A must have m rows");
            for (Index r = 0; r < m; ++r) {
                const json& row = A[static_cast<std::size_t>(r)];
                if (static_cast<Index>(row.size()) != n)
                    throw ParseError("row " + std::to_string(r) + " of A must have n entries");
                for (Index c = 0; c < n; ++c) {
                    const double v = row[static_cast<std::size_t>(c)].get<double>();
                    if (v != 0.0)
                        trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
                }
            }
        } else {
            const auto I = A.at("i").get<std::vector<Index>>();
            const auto J = A.at("j").get<std::vector<Index>>();
            const auto V = A.at("v").get<std::vector<double>>();
            if (I.size() != J.size() || I.size() != V.size())
                throw ParseError("A triplet arrays differ in length");
            for (std::size_t k = 0; k < I.size(); ++k) {
                if (I[k] < 0 || I[k] >= m || J[k] < 0 || J[k] >= n)
                    throw ParseError("A entry out of range");
                trip.emplace_back(static_cast<int>(I[k]), static_cast<int>(J[k]), V[k]);
            }
        }
        p.A.resize(m, n);
        p.A.setFromTriplets(trip.begin(), trip.end());
        p.A.makeCompressed();
        auto vec = [&](const char* key, Index len, bool required) {
            if (!j.contains(key)) {
                if (required)
                    throw ParseError(std::string("missing '") + key + "'");
                return Vector(Vector::Zero(len));
            }
            const auto v = j.at(key).get<std::vector<double>>();
            if (static_cast<Index>(v.size()) != len)
                throw ParseError(std::string("'") + key + "' has wrong length");
            return Vector(Eigen::Map<const Vector>(v.data(), len));
        };
        p.b = vec("b", m, true);
        p.b_bar = vec("b_bar", m, false);
        p.c = vec("c", n, true);
        p.c_bar = vec("c_bar", n, false);
        if (j.contains("free")) {
            p.free_mask.assign(static_cast<std::size_t>(n), 0);
            for (Index c : j.at("free").get<std::vector<Index>>()) {
                if (c < 0 || c >= n)
                    throw ParseError("free column out of range");
                p.free_mask[static_cast<std::size_t>(c)] = 1;
            }
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad program JSON: ") + e.what());
    }
}

inline json program_to_json(const ParametricProgram& p)
{
    json j;
    j["m"] = p.rows();
    j["n"] = p.cols();
    j["kind"] = to_string(p.kind);
    std::vector<Index> I, J;
    std::vector<double> V;
    for (Index c = 0; c < p.A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(p.A, c); it; ++it) {
            I.push_back(it.row());
            J.push_back(c);
            V.push_back(it.value());
        }
    j["A"] = {{"i", I}, {"j", J}, {"v", V}};
    auto arr = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["b"] = arr(p.b);
    j["b_bar"] = arr(p.b_bar);
    j["c"] = arr(p.c);
    j["c_bar"] = arr(p.c_bar);
    if (!p.free_mask.empty()) {
        std::vector<Index> f;
        for (Index c = 0; c < p.cols(); ++c)
            if (p.is_free(c))
                f.push_back(c);
        j["free"] = f;
    }
    return j;
}

/**
 * COO text: a header line `m n kind`, then `i j value` for entries of A and
 * tagged lines `b i v`, `b_bar i v`, `c j v`, `c_bar j v`, `free j`.
 * Indices are 0-based; `#` starts a comment.
 */
inline ParametricProgram program_from_coo(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    bool have_header = false;
    ParametricProgram p;
    Index m = 0, n = 0;
    std::vector<Eigen::Triplet<double>> trip;
    auto fail = [&](const std::string& why) { throw ParseError("line " + std::to_string(lineno) + ": " + why); };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (!have_header) {
            std::string kind;
            try {
                m = std::stol(first);
            } catch (const std::exception&) {
                fail("expected header 'm n kind'");
            }
            if (!(ls >> n >> kind) || m < 1 || n < 1)
                fail("expected header 'm n kind'");
            p.kind = parse_kind(kind);
            p.b = Vector::Zero(m);
            p.b_bar = Vector::Zero(m);
            p.c = Vector::Zero(n);
            p.c_bar = Vector::Zero(n);
            have_header = true;
            continue;
        }
        auto read_iv = [&](Index limit) {
            Index i;
            double v;
            if (!(ls >> i >> v) || i < 0 || i >= limit)
                fail("expected '<index> <value>' in range");
            return std::pair<Index, double>{i, v};
        };
        if (first == "b") {
            auto [i, v] = read_iv(m);
            p.b(i) = v;
        } else if (first == "b_bar") {
            auto [i, v] = read_iv(m);
            p.b_bar(i) = v;
        } else if (first == "c") {
            auto [i, v] = read_iv(n);
            p.c(i) = v;
        } else if (first == "c_bar") {
            auto [i, v] = read_iv(n);
            p.c_bar(i) = v;
        } else if (first == "free") {
            Index j;
            if (!(ls >> j) || j < 0 || j >= n)
                fail("expected 'free <column>'");
            p.free_mask.resize(static_cast<std::size_t>(n), 0);
            p.free_mask[static_cast<std::size_t>(j)] = 1;
        } else {
            Index i, j;
            double v;
            try {
                i = std::stol(first);
            } catch (const std::exception&) {
                fail("unknown tag '" + first + "'");
            }
            if (!(ls >> j >> v) || i < 0 || i >= m || j < 0 || j >= n)
                fail("expected 'i j value' in range");
            trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        }
    }
    if (!have_header)
        throw ParseError("empty program file");
    p.A.resize(m, n);
    p.A.setFromTriplets(trip.begin(), trip.end());
    p.A.makeCompressed();
    p.validate();
    return p;
}

inline void write_program_coo(std::ostream& os, const ParametricProgram& p)
{
    os << p.rows() << ' ' << p.cols() << ' ' << to_string(p.kind) << '\n';
    for (Index c = 0; c < p.A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(p.A, c); it; ++it)
            os << it.row() << ' ' << c << ' ' << fmt(it.value()) << '\n';
    auto dump = [&](const char* tag, const Vector& v) {
        for (Index i = 0; i < v.size(); ++i)
            if (v(i) != 0.0)
                os << tag << ' ' << i << ' ' << fmt(v(i)) << '\n';
    };
    dump("b", p.b);
    dump("b_bar", p.b_bar);
    dump("c", p.c);
    dump("c_bar", p.c_bar);
    for (Index c = 0; c < p.cols(); ++c)
        if (p.is_free(c))
            os << "free " << c << '\n';
}

/** JSON if the file starts with '{', COO text otherwise. */
inline ParametricProgram read_program(const std::string& path)
{
    const std::string text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError("'" + path + "': " + e.what());
        }
        return program_from_json(j);
    }
    return program_from_coo(text);
}

// ---------------------------------------------------------------- paths

inline const char* kPathCsvHeader = "segment_id,lambda_lo,lambda_hi,var_index,base,slope";

/** One row per basic variable per segment. */
inline void write_path_csv(std::ostream& os, const SolutionPath& path)
{
    os << kPathCsvHeader << '\n';
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        const auto& seg = path.segments[s];
        for (const auto& e : seg.primal)
            os << s << ',' << fmt(seg.lambda_lo) << ',' << fmt(seg.lambda_hi) << ',' << e.index << ','
               << fmt(e.value.base) << ',' << fmt(e.value.slope) << '\n';
    }
}

/** Same schema, original-model coordinates (θ or vec Δ); the SVM intercept uses var_index −1. */
inline void write_original_path_csv(std::ostream& os, const PathInOriginalCoords& path, bool with_intercept = false)
{
    os << kPathCsvHeader << '\n';
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        const auto& seg = path.segments[s];
        if (with_intercept)
            os << s << ',' << fmt(seg.lambda_lo) << ',' << fmt(seg.lambda_hi) << ",-1," << fmt(seg.intercept.base)
               << ',' << fmt(seg.intercept.slope) << '\n';
        for (const auto& e : seg.coefficients)
            os << s << ',' << fmt(seg.lambda_lo) << ',' << fmt(seg.lambda_hi) << ',' << e.index << ','
               << fmt(e.value.base) << ',' << fmt(e.value.slope) << '\n';
    }
}

inline json path_summary_json(const SolutionPath& path)
{
    json j;
    j["termination"] = to_string(path.termination);
    j["pivots"] = path.pivot_count();
    j["segments"] = path.segments.size();
    j["terminal_lambda"] = std::isfinite(path.terminal_lambda) ? json(path.terminal_lambda) : json(fmt(path.terminal_lambda));
    if (!path.message.empty())
        j["message"] = path.message;
    return j;
}

// ---------------------------------------------------------------- matrices

/**
 * Comma-separated, row-major. A first line containing a non-numeric field is
 * treated as a header and skipped.
 */
inline DenseMatrix read_matrix_csv(const std::string& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string field;
        bool numeric = true;
        while (std::getline(ls, field, ',')) {
            // strtod rather than stod: subnormals set ERANGE but are valid
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || field.find_first_not_of(" \t", static_cast<std::size_t>(end - field.c_str())) != std::string::npos)
                numeric = false;
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1)
                continue;
            throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": non-numeric field");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError("'" + path + "' has no data");
    DenseMatrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j)
            M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

/** A single row or a single column, read as a vector. */
inline Vector read_vector_csv(const std::string& path)
{
    const DenseMatrix M = read_matrix_csv(path);
    if (M.cols() == 1)
        return M.col(0);
    if (M.rows() == 1)
        return M.row(0).transpose();
    throw ParseError("'" + path + "' is not a vector");
}

inline void write_matrix_csv(std::ostream& os, const DenseMatrix& M)
{
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j)
            os << (j ? "," : "") << fmt(M(i, j));
        os << '\n';
    }
}

inline void write_matrix_csv(const std::string& path, const DenseMatrix& M)
{
    auto out = open_out(path);
    write_matrix_csv(out, M);
}

// ---------------------------------------------------------------- benchmarks

inline void write_bench_csv(std::ostream& os, const std::vector<experiments::BenchRecord>& records)
{
    os << "id,d,n,pivots,seconds,max_violation,support_ok,terminal_lambda\n";
    for (const auto& r : records)
        os << r.id << ',' << r.d << ',' << r.n << ',' << r.pivots << ',' << fmt(r.seconds) << ','
           << fmt(r.max_violation) << ',' << (r.support_ok ? 1 : 0) << ',' << fmt(r.terminal_lambda) << '\n';
}

inline json summary_json(const experiments::BenchSummary& s)
{
    auto cell = [](const experiments::MeanSe& m) { return json{{"mean", m.mean}, {"se", m.se}}; };
    return json{{"count", s.count},
                {"failures", s.failures},
                {"pivots", cell(s.pivots)},
                {"seconds", cell(s.seconds)},
                {"max_violation", cell(s.violation)},
                {"median_pivots", s.median_pivots},
                {"support_rate", s.support_rate}};
}

}  // namespace psm::io
