// psm: command-line front end for the parametric simplex solver.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "psm/psm.hpp"

namespace {

using namespace psm;
using io::json;

enum Exit : int { kOk = 0, kInfeasible = 2, kNumerical = 3, kIterationCap = 4, kUsage = 64 };

enum class LogLevel { Off, Info, Trace };

LogLevel log_level()
{
    const char* env = std::getenv("PSM_LOG");
    const std::string v = env ? env : "off";
    if (v == "info")
        return LogLevel::Info;
    if (v == "trace")
        return LogLevel::Trace;
    return LogLevel::Off;
}

int exit_code(Termination t)
{
    switch (t) {
    case Termination::ReachedTarget:
    case Termination::LambdaNonpositive: return kOk;
    case Termination::Unbounded:
    case Termination::Infeasible: return kInfeasible;
    case Termination::NumericalFailure: return kNumerical;
    case Termination::IterationCap: return kIterationCap;
    }
    return kNumerical;
}

/** Where a command writes its pivot trace: --trace file, or stderr under PSM_LOG=trace. */
struct TraceSink
{
    std::unique_ptr<std::ofstream> file;

    std::ostream* attach(const std::string& path)
    {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(io::open_out(path));
            return file.get();
        }
        return log_level() == LogLevel::Trace ? &std::cerr : nullptr;
    }
};

void emit_json(const json& j, const std::string& path)
{
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = io::open_out(path);
        out << j.dump(2) << '\n';
    }
}

void info(const SolutionPath& path)
{
    if (log_level() != LogLevel::Off)
        std::cerr << "psm: " << to_string(path.termination) << " after " << path.pivot_count()
                  << " pivots, terminal lambda " << path.terminal_lambda << '\n';
}

template <class Write>
void write_to(const std::string& path, Write&& write)
{
    if (path.empty()) {
        write(std::cout);
    } else {
        auto out = io::open_out(path);
        write(out);
    }
}

// ---------------------------------------------------------------- solve

struct SolveArgs
{
    std::string program;
    double lambda_target = 0.0;
    long max_pivots = 0;
    std::string out;
    std::string summary;
    std::string trace;
};

int cmd_solve(const SolveArgs& a)
{
    const ParametricProgram p = io::read_program(a.program);
    SolveOptions opts;
    opts.lambda_target = a.lambda_target;
    if (a.max_pivots > 0)
        opts.max_pivots = a.max_pivots;
    TraceSink sink;
    opts.trace = sink.attach(a.trace);

    SolutionPath path;
    try {
        path = solve_path(p, opts);
    } catch (const InfeasibleAtLargeLambda& e) {
        path.termination = Termination::Infeasible;
        path.message = e.what();
    }
    info(path);
    write_to(a.out, [&](std::ostream& os) { io::write_path_csv(os, path); });
    emit_json(io::path_summary_json(path), a.summary);
    return exit_code(path.termination);
}

// ---------------------------------------------------------------- dantzig

struct DantzigArgs
{
    std::string X, y, theta0;
    std::string stop_rule = "path-demo";
    double sigma = 1.0;
    std::string out, breakpoints, summary, trace;
};

int cmd_dantzig(const DantzigArgs& a)
{
    const experiments::DantzigData data{io::read_matrix_csv(a.X), io::read_vector_csv(a.y),
                           a.theta0.empty() ? Vector() : io::read_vector_csv(a.theta0)};
    data.instance().validate();
    const auto rule = experiments::StopRule::parse(a.stop_rule);
    const double lambda_stop = rule.lambda(data.X.rows(), data.X.cols(), a.sigma);

    SolveOptions opts;
    opts.lambda_target = lambda_stop;
    TraceSink sink;
    opts.trace = sink.attach(a.trace);
    const SolutionPath path = solve_dantzig(data.instance(), opts);
    info(path);
    const PathInOriginalCoords theta = recover_dantzig(path, data.X.cols());

    write_to(a.out, [&](std::ostream& os) { io::write_original_path_csv(os, theta); });
    double max_violation = -kInf;
    std::ostringstream bp;
    bp << "segment_id,lambda,violation,nnz\n";
    for (std::size_t s = 0; s < theta.segments.size(); ++s) {
        const auto& seg = theta.segments[s];
        for (double lambda : {seg.lambda_hi, seg.lambda_lo}) {
            if (!std::isfinite(lambda))
                continue;
            const Vector t = theta.coefficients_at(lambda);
            const double v = experiments::feasibility_violation(data.X, data.y, t, lambda);
            max_violation = std::max(max_violation, v);
            bp << s << ',' << io::fmt(lambda) << ',' << io::fmt(v) << ',' << (t.array() != 0.0).count() << '\n';
        }
    }
    if (!a.breakpoints.empty()) {
        auto out = io::open_out(a.breakpoints);
        out << bp.str();
    }

    json j = io::path_summary_json(path);
    j["lambda_stop"] = lambda_stop;
    j["stop_rule"] = rule.to_string();
    j["max_violation"] = max_violation;
    j["support"] = theta.terminal().support;
    if (data.theta0.size()) {
        std::vector<Index> truth;
        for (Index k = 0; k < data.theta0.size(); ++k)
            if (data.theta0(k) != 0.0)
                truth.push_back(k);
        j["support_ok"] = experiments::contains_all(theta.terminal().support, truth);
    }
    emit_json(j, a.summary);
    return exit_code(path.termination);
}

// ---------------------------------------------------------------- svm

struct SvmArgs
{
    std::string X, labels;
    std::string stop_rule = "value:0";
    double anchor = 100.0;
    std::string out, summary, trace;
};

int cmd_svm(const SvmArgs& a)
{
    const SvmInstance inst{io::read_matrix_csv(a.X), io::read_vector_csv(a.labels)};
    const auto rule = experiments::StopRule::parse(a.stop_rule);
    if (rule.kind != experiments::StopRuleKind::Value)
        throw ParseError("svm accepts only value:<λ> stop rules");
    const SvmProgram svm = build_svm(inst);
    SolveOptions opts;
    opts.lambda_target = rule.value;
    TraceSink sink;
    opts.trace = sink.attach(a.trace);
    const SolutionPath path = solve_svm(svm, opts, a.anchor);
    info(path);
    const PathInOriginalCoords model = recover_svm(path, svm.layout);
    write_to(a.out, [&](std::ostream& os) { io::write_original_path_csv(os, model, true); });

    json j = io::path_summary_json(path);
    const double lambda = path.terminal_lambda;
    const Vector theta = model.coefficients_at(lambda);
    const double theta0 = model.intercept_at(lambda);
    long errors = 0;
    for (Index i = 0; i < inst.X.rows(); ++i)
        errors += svm_predict(theta, theta0, inst.X.row(i).transpose()) != inst.labels(i);
    j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    j["theta0"] = theta0;
    j["training_errors"] = errors;
    emit_json(j, a.summary);
    return exit_code(path.termination);
}

// ---------------------------------------------------------------- diffnet

struct DiffNetArgs
{
    std::string SX, SY;
    std::string stop_rule = "value:0";
    std::string out, summary, trace;
};

int cmd_diffnet(const DiffNetArgs& a)
{
    const DiffNetProgram net =
        build_diffnet(DiffNetInstance::from_covariances(io::read_matrix_csv(a.SX), io::read_matrix_csv(a.SY)));
    SolveOptions opts;
    if (a.stop_rule.rfind("sparsity:", 0) == 0) {
        Index k = 0;
        try {
            k = std::stol(a.stop_rule.substr(9));
        } catch (const std::exception&) {
            throw ParseError("sparsity stop rule needs an integer count");
        }
        if (k < 1)
            throw ParseError("sparsity stop rule needs a positive count");
        const DiffNetLayout L = net.layout;
        opts.stop_when = [L, k](const PathSegment& seg) { return diffnet_nonzeros(seg, L) >= k; };
    } else {
        const auto rule = experiments::StopRule::parse(a.stop_rule);
        if (rule.kind != experiments::StopRuleKind::Value)
            throw ParseError("diffnet accepts sparsity:<k> or value:<λ>");
        opts.lambda_target = rule.value;
    }
    TraceSink sink;
    opts.trace = sink.attach(a.trace);
    const SolutionPath path = solve_diffnet(net, opts);
    info(path);
    const PathInOriginalCoords delta = recover_diffnet(path, net.layout);
    write_to(a.out, [&](std::ostream& os) { io::write_original_path_csv(os, delta); });
    json j = io::path_summary_json(path);
    j["nonzeros"] = delta.terminal().support.size();
    emit_json(j, a.summary);
    return exit_code(path.termination);
}

// ---------------------------------------------------------------- gen / bench

struct GenArgs
{
    experiments::DantzigGenConfig dantzig;
    experiments::DiffNetGenConfig diffnet;
    std::string amplitude = "one-plus-abs-gaussian";
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    long reps = 10;
    std::string stop_rule;
    std::string out, summary;
};

void finish_config(GenArgs& a, const std::string& model)
{
    a.dantzig.amplitude = experiments::parse_amplitude_rule(a.amplitude);
    a.dantzig.seed = a.seed;
    a.diffnet.seed = a.seed;
    try {
        if (model == "dantzig")
            a.dantzig.validate();
        else
            a.diffnet.validate();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

int cmd_gen(GenArgs a, const std::string& model)
{
    finish_config(a, model);
    const std::string dir = a.out_dir.empty() ? "." : a.out_dir;
    if (model == "dantzig") {
        const auto data = experiments::gen_dantzig(a.dantzig);
        io::write_matrix_csv(dir + "/X.csv", data.X);
        io::write_matrix_csv(dir + "/y.csv", data.y);
        io::write_matrix_csv(dir + "/theta0.csv", data.theta0);
    } else {
        const auto data = experiments::gen_diffnet(a.diffnet);
        io::write_matrix_csv(dir + "/SX.csv", data.S_X);
        io::write_matrix_csv(dir + "/SY.csv", data.S_Y);
        io::write_matrix_csv(dir + "/Delta0.csv", data.Delta0);
    }
    return kOk;
}

int cmd_bench(GenArgs a, const std::string& model)
{
    finish_config(a, model);
    std::vector<experiments::BenchRecord> records;
    if (model == "dantzig") {
        const auto rule = experiments::StopRule::parse(a.stop_rule.empty() ? "benchmark" : a.stop_rule);
        records = experiments::run_dantzig_bench(a.dantzig, rule, a.reps);
    } else {
        std::optional<Index> target;
        if (!a.stop_rule.empty()) {
            if (a.stop_rule.rfind("sparsity:", 0) != 0)
                throw ParseError("diffnet bench accepts only sparsity:<k>");
            try {
                target = std::stol(a.stop_rule.substr(9));
            } catch (const std::exception&) {
                throw ParseError("sparsity stop rule needs an integer count");
            }
        }
        records = experiments::run_diffnet_bench(a.diffnet, target, a.reps);
    }
    if (!a.out.empty()) {
        auto out = io::open_out(a.out);
        io::write_bench_csv(out, records);
    }
    json j = io::summary_json(experiments::summarize(records));
    j["model"] = model;
    j["reps"] = a.reps;
    emit_json(j, a.summary);
    for (const auto& r : records)
        if (!r.error.empty() && log_level() != LogLevel::Off)
            std::cerr << "psm: instance " << r.id << ": " << r.error << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Parametric simplex solution paths for parametric linear programs"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve a program file (JSON or COO) along λ");
    s->add_option("program", solve.program, "Program file")->required()->check(CLI::ExistingFile);
    s->add_option("--lambda-target", solve.lambda_target, "Stop once λ reaches this value")->check(CLI::NonNegativeNumber);
    s->add_option("--max-pivots", solve.max_pivots, "Pivot cap (default 10·n)")->check(CLI::PositiveNumber);
    s->add_option("--out", solve.out, "Path CSV (default stdout)");
    s->add_option("--summary", solve.summary, "Summary JSON (default stdout)");
    s->add_option("--trace", solve.trace, "Pivot trace file");

    DantzigArgs dz;
    auto* d = app.add_subcommand("dantzig", "Dantzig selector path from X.csv and y.csv");
    d->add_option("X", dz.X, "Design matrix CSV")->required()->check(CLI::ExistingFile);
    d->add_option("y", dz.y, "Response CSV")->required()->check(CLI::ExistingFile);
    d->add_option("--stop-rule", dz.stop_rule, "path-demo | benchmark | value:<λ>");
    d->add_option("--sigma", dz.sigma, "Noise level used by the stop rules")->check(CLI::NonNegativeNumber);
    d->add_option("--theta0", dz.theta0, "True coefficients, for support recovery")->check(CLI::ExistingFile);
    d->add_option("--out", dz.out, "θ path CSV (default stdout)");
    d->add_option("--breakpoints", dz.breakpoints, "Per-breakpoint feasibility violation CSV");
    d->add_option("--summary", dz.summary, "Summary JSON (default stdout)");
    d->add_option("--trace", dz.trace, "Pivot trace file");

    SvmArgs sv;
    auto* v = app.add_subcommand("svm", "ℓ1-constrained SVM path from X.csv and labels.csv");
    v->add_option("X", sv.X, "Feature matrix CSV, one sample per row")->required()->check(CLI::ExistingFile);
    v->add_option("labels", sv.labels, "Labels CSV (±1)")->required()->check(CLI::ExistingFile);
    v->add_option("--stop-rule", sv.stop_rule, "value:<λ>");
    v->add_option("--anchor", sv.anchor, "λ at which the path starts when the default basis is not optimal")
        ->check(CLI::PositiveNumber);
    v->add_option("--out", sv.out, "θ path CSV (default stdout)");
    v->add_option("--summary", sv.summary, "Summary JSON (default stdout)");
    v->add_option("--trace", sv.trace, "Pivot trace file");

    DiffNetArgs dn;
    auto* n = app.add_subcommand("diffnet", "Differential network path from SX.csv and SY.csv");
    n->add_option("SX", dn.SX, "First covariance CSV")->required()->check(CLI::ExistingFile);
    n->add_option("SY", dn.SY, "Second covariance CSV")->required()->check(CLI::ExistingFile);
    n->add_option("--stop-rule", dn.stop_rule, "sparsity:<k> | value:<λ>");
    n->add_option("--out", dn.out, "vec(Δ) path CSV (default stdout)");
    n->add_option("--summary", dn.summary, "Summary JSON (default stdout)");
    n->add_option("--trace", dn.trace, "Pivot trace file");

    GenArgs gen, bench;
    std::string gen_model, bench_model;
    auto add_config = [](CLI::App* c, GenArgs& g) {
        c->add_option("--n", g.dantzig.n, "Samples")->check(CLI::PositiveNumber)->each([&g](const std::string& x) {
            g.diffnet.n = std::stol(x);
        });
        c->add_option("--d", g.dantzig.d, "Dimension")->check(CLI::PositiveNumber)->each([&g](const std::string& x) {
            g.diffnet.d = std::stol(x);
        });
        c->add_option("--s", g.dantzig.s, "Dantzig: true support size")->check(CLI::NonNegativeNumber);
        c->add_option("--sigma", g.dantzig.sigma, "Dantzig: noise level")->check(CLI::NonNegativeNumber);
        c->add_option("--amplitude", g.amplitude, "Dantzig: one-plus-abs-gaussian | one-plus-gaussian | gaussian");
        c->add_option("--sparsity", g.diffnet.sparsity, "Diffnet: density of D1")->check(CLI::Range(0.0, 0.999));
        c->add_option("--seed", g.seed, "RNG seed");
    };
    gen.diffnet.n = 100;
    bench.diffnet.n = 100;
    auto* g = app.add_subcommand("gen", "Generate a synthetic instance");
    g->add_option("model", gen_model, "dantzig | diffnet")->required()->check(CLI::IsMember({"dantzig", "diffnet"}));
    add_config(g, gen);
    g->add_option("--out-dir", gen.out_dir, "Output directory")->check(CLI::ExistingDirectory);

    auto* b = app.add_subcommand("bench", "Run a seeded benchmark batch");
    b->add_option("model", bench_model, "dantzig | diffnet")->required()->check(CLI::IsMember({"dantzig", "diffnet"}));
    add_config(b, bench);
    b->add_option("--reps", bench.reps, "Repetitions")->check(CLI::PositiveNumber);
    b->add_option("--stop-rule", bench.stop_rule, "dantzig: path-demo | benchmark | value:<λ>; diffnet: sparsity:<k>");
    b->add_option("--out", bench.out, "Per-instance records CSV");
    b->add_option("--summary", bench.summary, "Summary JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*s)
            return cmd_solve(solve);
        if (*d)
            return cmd_dantzig(dz);
        if (*v)
            return cmd_svm(sv);
        if (*n)
            return cmd_diffnet(dn);
        if (*g)
            return cmd_gen(gen, gen_model);
        if (*b)
            return cmd_bench(bench, bench_model);
    } catch (const ParseError& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kUsage;
    } catch (const InfeasibleAtLargeLambda& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kInfeasible;
    } catch (const UnboundedDirection& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kInfeasible;
    } catch (const InfeasibleProblem& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kInfeasible;
    } catch (const DimensionMismatch& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
