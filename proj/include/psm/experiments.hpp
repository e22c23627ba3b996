#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "psm/engine.hpp"
#include "psm/errors.hpp"
#include "psm/reductions.hpp"

/** Synthetic data generators, metrics and benchmark runners. */
namespace psm::experiments {

inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * mt19937_64 seeded through splitmix64 from (seed, stream). Every draw is
 * derived from raw 64-bit output, so sequences are identical across
 * standard libraries.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
    {
        std::uint64_t s = seed;
        const std::uint64_t a = splitmix64(s);
        std::uint64_t t = stream ^ 0xd1b54a32d192ed03ULL;
        const std::uint64_t b = splitmix64(t);
        engine_.seed(a ^ (b * 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t bits() { return engine_(); }

    /** Uniform on [0, 1) with 53 random bits. */
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /** Standard normal via Box–Muller; the second variate is cached. */
    double normal()
    {
        if (cached_) {
            cached_ = false;
            return spare_;
        }
        double u1;
        do
            u1 = uniform();
        while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        cached_ = true;
        return r * std::cos(phi);
    }

    /** Uniform integer in [0, k). */
    Index index(Index k)
    {
        const std::uint64_t bound = static_cast<std::uint64_t>(k);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do
            x = bits();
        while (x >= limit);
        return static_cast<Index>(x % bound);
    }

    DenseMatrix normal_matrix(Index rows, Index cols)
    {
        DenseMatrix M(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i)
                M(i, j) = normal();
        return M;
    }

private:
    std::mt19937_64 engine_;
    bool cached_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------- Dantzig data

enum class AmplitudeRule {
    OnePlusGaussian,     // s_i (1 + a_i)
    OnePlusAbsGaussian,  // s_i (1 + |a_i|)
    Gaussian,            // a_i
};

inline const char* to_string(AmplitudeRule r)
{
    switch (r) {
    case AmplitudeRule::OnePlusGaussian: return "one-plus-gaussian";
    case AmplitudeRule::OnePlusAbsGaussian: return "one-plus-abs-gaussian";
    case AmplitudeRule::Gaussian: return "gaussian";
    }
    return "?";
}

inline AmplitudeRule parse_amplitude_rule(const std::string& s)
{
    if (s == "one-plus-gaussian")
        return AmplitudeRule::OnePlusGaussian;
    if (s == "one-plus-abs-gaussian")
        return AmplitudeRule::OnePlusAbsGaussian;
    if (s == "gaussian")
        return AmplitudeRule::Gaussian;
    throw ParseError("unknown amplitude rule '" + s + "'");
}

struct DantzigGenConfig
{
    Index n = 100;
    Index d = 250;
    Index s = 8;
    double sigma = 1.0;
    AmplitudeRule amplitude = AmplitudeRule::OnePlusAbsGaussian;
    double column_norm = 0.0;  // ≤ 0 means √n
    std::uint64_t seed = 1;

    void validate() const
    {
        if (n < 1 || d < 1)
            throw Error("n and d must be positive");
        if (s < 0 || s > d)
            throw Error("support size s must lie in [0, d]");
        if (!(sigma >= 0.0))
            throw Error("sigma must be nonnegative");
    }
};

struct DantzigData
{
    DenseMatrix X;
    Vector y;
    Vector theta0;

    DantzigInstance instance() const { return {X, y}; }
};

/** X Gaussian with rescaled columns, θ⁰ s-sparse, y = Xθ⁰ + σε. */
inline DantzigData gen_dantzig(const DantzigGenConfig& cfg, std::uint64_t stream = 0)
{
    cfg.validate();
    Rng rng(cfg.seed, stream);
    DantzigData out;
    out.X = rng.normal_matrix(cfg.n, cfg.d);
    const double target = cfg.column_norm > 0.0 ? cfg.column_norm : std::sqrt(static_cast<double>(cfg.n));
    for (Index j = 0; j < cfg.d; ++j) {
        const double norm = out.X.col(j).norm();
        if (norm > 0.0)
            out.X.col(j) *= target / norm;
    }

    std::vector<Index> perm(static_cast<std::size_t>(cfg.d));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index k = 0; k < cfg.s; ++k)
        std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(k + rng.index(cfg.d - k))]);
    out.theta0 = Vector::Zero(cfg.d);
    for (Index k = 0; k < cfg.s; ++k) {
        const double sign = (rng.bits() >> 63) ? 1.0 : -1.0;
        const double a = rng.normal();
        double value = 0.0;
        switch (cfg.amplitude) {
        case AmplitudeRule::OnePlusGaussian: value = sign * (1.0 + a); break;
        case AmplitudeRule::OnePlusAbsGaussian: value = sign * (1.0 + std::abs(a)); break;
        case AmplitudeRule::Gaussian: value = a; break;
        }
        out.theta0(perm[static_cast<std::size_t>(k)]) = value;
    }
    Vector eps(cfg.n);
    for (Index i = 0; i < cfg.n; ++i)
        eps(i) = rng.normal();
    out.y = out.X * out.theta0 + cfg.sigma * eps;
    return out;
}

/** ‖XᵀXθ − Xᵀy‖∞ − λ (raw; negative means strictly feasible). */
inline double feasibility_violation(const DenseMatrix& X, const Vector& y, const Vector& theta, double lambda)
{
    return (X.transpose() * (X * theta - y)).lpNorm<Eigen::Infinity>() - lambda;
}

enum class StopRuleKind { PathDemo, Benchmark, Value };

/**
 * Where the Dantzig path stops. For columns of norm √n:
 * path-demo λ = σ n √(log d / n); benchmark λ = 2σ n √(log d / n), i.e. the
 * normalized correlation ‖Xᵀ(y − Xθ)‖∞ / n reaches 2σ√(log d / n).
 */
struct StopRule
{
    StopRuleKind kind = StopRuleKind::PathDemo;
    double value = 0.0;

    static StopRule parse(const std::string& s)
    {
        if (s == "path-demo")
            return {StopRuleKind::PathDemo, 0.0};
        if (s == "benchmark")
            return {StopRuleKind::Benchmark, 0.0};
        if (s.rfind("value:", 0) == 0) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s.substr(6), &used);
                if (used == s.size() - 6 && v >= 0.0)
                    return {StopRuleKind::Value, v};
            } catch (const std::exception&) {
            }
        }
        throw ParseError("stop rule must be path-demo, benchmark or value:<λ ≥ 0>, got '" + s + "'");
    }

    std::string to_string() const
    {
        switch (kind) {
        case StopRuleKind::PathDemo: return "path-demo";
        case StopRuleKind::Benchmark: return "benchmark";
        case StopRuleKind::Value: return "value:" + std::to_string(value);
        }
        return "?";
    }

    double lambda(Index n, Index d, double sigma) const
    {
        const double rate = std::sqrt(std::log(static_cast<double>(d)) / static_cast<double>(n));
        switch (kind) {
        case StopRuleKind::PathDemo: return sigma * static_cast<double>(n) * rate;
        case StopRuleKind::Benchmark: return 2.0 * sigma * static_cast<double>(n) * rate;
        case StopRuleKind::Value: return value;
        }
        return 0.0;
    }
};

struct BenchRecord
{
    long id = 0;
    Index d = 0;
    Index n = 0;
    long pivots = 0;
    double seconds = 0.0;
    double max_violation = 0.0;  // raw maximum over breakpoints
    bool support_ok = false;
    double terminal_lambda = 0.0;
    // not part of the CSV
    long pivots_to_support = -1;  // pivots before the true support first appeared; -1 if never
    Index terminal_nnz = 0;
    Index true_nnz = 0;
    std::string termination;
    std::string error;
};

inline bool contains_all(const std::vector<Index>& haystack, const std::vector<Index>& needles)
{
    return std::all_of(needles.begin(), needles.end(), [&](Index j) {
        return std::binary_search(haystack.begin(), haystack.end(), j);
    });
}

/** Solve one generated Dantzig instance and measure it. */
inline BenchRecord run_dantzig_instance(const DantzigData& data, double lambda_stop, long id,
                                        const SolveOptions& base = {})
{
    BenchRecord rec;
    rec.id = id;
    rec.n = data.X.rows();
    rec.d = data.X.cols();
    std::vector<Index> truth;
    for (Index j = 0; j < data.theta0.size(); ++j)
        if (data.theta0(j) != 0.0)
            truth.push_back(j);
    rec.true_nnz = static_cast<Index>(truth.size());

    SolveOptions opts = base;
    opts.lambda_target = lambda_stop;
    try {
        const auto start = std::chrono::steady_clock::now();
        const SolutionPath path = solve_dantzig(data.instance(), opts);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.pivots = static_cast<long>(path.pivot_count());
        rec.terminal_lambda = path.terminal_lambda;
        rec.termination = to_string(path.termination);
        const PathInOriginalCoords theta = recover_dantzig(path, rec.d);

        rec.max_violation = -kInf;
        for (std::size_t s = 0; s < theta.segments.size(); ++s) {
            const auto& seg = theta.segments[s];
            for (double lambda : {seg.lambda_lo, seg.lambda_hi}) {
                if (!std::isfinite(lambda))
                    continue;
                Vector t = Vector::Zero(rec.d);
                for (const auto& e : seg.coefficients)
                    t(e.index) = e.value.at(lambda);
                rec.max_violation = std::max(rec.max_violation, feasibility_violation(data.X, data.y, t, lambda));
            }
            if (rec.pivots_to_support < 0 && contains_all(seg.support, truth))
                rec.pivots_to_support = static_cast<long>(s);
        }
        const auto& last = theta.terminal();
        rec.terminal_nnz = static_cast<Index>(last.support.size());
        rec.support_ok = contains_all(last.support, truth);
    } catch (const Error& e) {
        rec.error = e.what();
        rec.termination = "Error";
    }
    return rec;
}

inline std::vector<BenchRecord> run_dantzig_bench(const DantzigGenConfig& cfg, const StopRule& rule, long repetitions,
                                                  const SolveOptions& opts = {})
{
    std::vector<BenchRecord> out;
    for (long r = 0; r < repetitions; ++r) {
        const DantzigData data = gen_dantzig(cfg, static_cast<std::uint64_t>(r));
        out.push_back(run_dantzig_instance(data, rule.lambda(cfg.n, cfg.d, cfg.sigma), r, opts));
    }
    return out;
}

// ---------------------------------------------------------------- differential network data

struct DiffNetGenConfig
{
    Index d = 25;
    Index n = 100;
    double sparsity = 0.02;
    std::uint64_t seed = 1;
    int max_retries = 20;

    void validate() const
    {
        if (d < 1 || n < 2)
            throw Error("diffnet generator needs d ≥ 1 and n ≥ 2");
        if (!(sparsity >= 0.0 && sparsity < 1.0))
            throw Error("sparsity must lie in [0, 1)");
    }
};

struct DiffNetData
{
    DenseMatrix S_X;
    DenseMatrix S_Y;
    DenseMatrix Delta0;  // Ω_x − Ω_y = −D
    DenseMatrix Omega_x;
    DenseMatrix Omega_y;
};

namespace detail {

inline double min_eigenvalue(const DenseMatrix& M)
{
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/** (1/n) Σ (x_j − x̄)(x_j − x̄)ᵀ over n draws from N(0, Σ). */
inline DenseMatrix sample_covariance(Rng& rng, const DenseMatrix& Sigma, Index n)
{
    Eigen::LLT<DenseMatrix> llt(Sigma);
    if (llt.info() != Eigen::Success)
        throw Error("covariance is not positive definite");
    const DenseMatrix samples = DenseMatrix(llt.matrixL()) * rng.normal_matrix(Sigma.rows(), n);
    const Vector mean = samples.rowwise().mean();
    const DenseMatrix centered = samples.colwise() - mean;
    DenseMatrix S = centered * centered.transpose() / static_cast<double>(n);
    return (S + S.transpose()) / 2.0;
}

}  // namespace detail

/**
 * Σ_x = UᵀΛU, D = D₁ + 2|λ_min(D₁)|I with D₁ sparse symmetric, Ω_y = Ω_x + D,
 * then n samples from each model. Draws with non-positive-definite
 * intermediates are discarded and regenerated.
 */
inline DiffNetData gen_diffnet(const DiffNetGenConfig& cfg, std::uint64_t stream = 0)
{
    cfg.validate();
    Rng rng(cfg.seed, stream);
    const Index d = cfg.d;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        const DenseMatrix U = rng.normal_matrix(d, d);
        Vector lam(d);
        for (Index i = 0; i < d; ++i)
            lam(i) = rng.uniform(1.0, 2.0);
        DenseMatrix Sigma_x = U.transpose() * lam.asDiagonal() * U;
        Sigma_x = (Sigma_x + Sigma_x.transpose()) / 2.0;

        DenseMatrix D1 = DenseMatrix::Zero(d, d);
        for (Index j = 0; j < d; ++j)
            for (Index i = 0; i <= j; ++i)
                if (rng.uniform() < cfg.sparsity) {
                    D1(i, j) = rng.normal();
                    D1(j, i) = D1(i, j);
                }
        DenseMatrix D = D1;
        D.diagonal().array() += 2.0 * std::abs(detail::min_eigenvalue(D1));

        if (!(detail::min_eigenvalue(Sigma_x) > 0.0))
            continue;
        DiffNetData out;
        out.Omega_x = Sigma_x.inverse();
        out.Omega_x = (out.Omega_x + out.Omega_x.transpose()) / 2.0;
        out.Omega_y = out.Omega_x + D;
        DenseMatrix Sigma_y = out.Omega_y.inverse();
        Sigma_y = (Sigma_y + Sigma_y.transpose()) / 2.0;
        if (!(detail::min_eigenvalue(out.Omega_x) > 0.0) || !(detail::min_eigenvalue(Sigma_y) > 0.0))
            continue;
        try {
            out.S_X = detail::sample_covariance(rng, Sigma_x, cfg.n);
            out.S_Y = detail::sample_covariance(rng, Sigma_y, cfg.n);
        } catch (const Error&) {
            continue;
        }
        out.Delta0 = -D;
        return out;
    }
    throw Error("diffnet generator failed to produce positive definite matrices");
}

/** ‖S_XΔS_Y − S_X + S_Y‖∞ − λ (entrywise max norm). */
inline double diffnet_violation(const DenseMatrix& S_X, const DenseMatrix& S_Y, const DenseMatrix& Delta, double lambda)
{
    return (S_X * Delta * S_Y - S_X + S_Y).cwiseAbs().maxCoeff() - lambda;
}

/** Nonzero entries Δ̂ should reach: the generator's sparsity level applied to all d² entries. */
inline Index diffnet_target_nonzeros(const DiffNetGenConfig& cfg)
{
    return std::max<Index>(1, static_cast<Index>(std::ceil(cfg.sparsity * static_cast<double>(cfg.d * cfg.d))));
}

/** Solve one diff-net instance until Δ̂ has at least `target_nnz` nonzeros. */
inline BenchRecord run_diffnet_instance(const DiffNetData& data, Index target_nnz, long id, Index n,
                                        const SolveOptions& base = {})
{
    BenchRecord rec;
    rec.id = id;
    rec.d = data.S_X.rows();
    rec.n = n;
    rec.true_nnz = static_cast<Index>((data.Delta0.array() != 0.0).count());
    try {
        const DiffNetProgram net = build_diffnet(DiffNetInstance::from_covariances(data.S_X, data.S_Y));
        SolveOptions opts = base;
        const DiffNetLayout L = net.layout;
        opts.stop_when = [L, target_nnz](const PathSegment& seg) { return diffnet_nonzeros(seg, L) >= target_nnz; };
        const auto start = std::chrono::steady_clock::now();
        const SolutionPath path = solve_diffnet(net, opts);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.pivots = static_cast<long>(path.pivot_count());
        rec.terminal_lambda = path.terminal_lambda;
        rec.termination = to_string(path.termination);

        const PathInOriginalCoords delta = recover_diffnet(path, L);
        const Index d = rec.d;
        rec.max_violation = -kInf;
        for (const auto& seg : delta.segments)
            for (double lambda : {seg.lambda_lo, seg.lambda_hi}) {
                if (!std::isfinite(lambda))
                    continue;
                DenseMatrix D = DenseMatrix::Zero(d, d);
                for (const auto& e : seg.coefficients)
                    D(e.index % d, e.index / d) = e.value.at(lambda);
                rec.max_violation = std::max(rec.max_violation, diffnet_violation(data.S_X, data.S_Y, D, lambda));
            }
        rec.terminal_nnz = static_cast<Index>(delta.terminal().support.size());
        rec.support_ok = rec.terminal_nnz >= target_nnz;
    } catch (const Error& e) {
        rec.error = e.what();
        rec.termination = "Error";
    }
    return rec;
}

inline std::vector<BenchRecord> run_diffnet_bench(const DiffNetGenConfig& cfg, std::optional<Index> target_nnz,
                                                  long repetitions, const SolveOptions& opts = {})
{
    const Index target = target_nnz.value_or(diffnet_target_nonzeros(cfg));
    std::vector<BenchRecord> out;
    for (long r = 0; r < repetitions; ++r) {
        const DiffNetData data = gen_diffnet(cfg, static_cast<std::uint64_t>(r));
        out.push_back(run_diffnet_instance(data, target, r, cfg.n, opts));
    }
    return out;
}

// ---------------------------------------------------------------- aggregation

struct MeanSe
{
    double mean = 0.0;
    double se = 0.0;  // sample standard deviation / √count
};

inline MeanSe mean_se(const std::vector<double>& v)
{
    MeanSe r;
    if (v.empty())
        return r;
    const double n = static_cast<double>(v.size());
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return r;
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

struct BenchSummary
{
    long count = 0;
    long failures = 0;
    MeanSe pivots;
    MeanSe seconds;
    MeanSe violation;  // max(0, max_violation)
    double median_pivots = 0.0;
    double support_rate = 0.0;
};

inline BenchSummary summarize(const std::vector<BenchRecord>& records)
{
    BenchSummary s;
    std::vector<double> piv, sec, vio;
    long ok = 0;
    for (const auto& r : records) {
        ++s.count;
        if (!r.error.empty()) {
            ++s.failures;
            continue;
        }
        piv.push_back(static_cast<double>(r.pivots));
        sec.push_back(r.seconds);
        vio.push_back(std::max(0.0, r.max_violation));
        ok += r.support_ok ? 1 : 0;
    }
    s.pivots = mean_se(piv);
    s.seconds = mean_se(sec);
    s.violation = mean_se(vio);
    s.median_pivots = median(piv);
    s.support_rate = s.count ? static_cast<double>(ok) / static_cast<double>(s.count) : 0.0;
    return s;
}

}  // namespace psm::experiments
