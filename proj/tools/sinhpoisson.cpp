// Batch front end: mu1, region, bubble-scan, solve, sweep, analyze.

#include <CLI11.hpp>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sinhpoisson/blowup.hpp"
#include "sinhpoisson/bubbles.hpp"
#include "sinhpoisson/config.hpp"
#include "sinhpoisson/minimax.hpp"
#include "sinhpoisson/region.hpp"

namespace fs = std::filesystem;
using namespace sinhp;

namespace {

enum Exit { ok = 0, precondition = 1, solver = 2, usage = 64, data = 65, io = 74 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    std::string command;
    RunConfig cfg;
    bool timestamp = false;

    std::string header() const {
        std::ostringstream os;
        os << "# sinhpoisson " << command << '\n';
        cfg.raw.echo(os);
        if (timestamp) {
            char buf[32];
            const std::time_t now = std::time(nullptr);
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            os << "# timestamp = " << buf << '\n';
        }
        return os.str();
    }

    fs::path out_path(const std::string& name) const {
        const fs::path dir(cfg.output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
        return dir / name;
    }

    std::ofstream open(const std::string& name) const {
        const fs::path p = out_path(name);
        std::ofstream os(p);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        os << header();
        return os;
    }
};

std::string fmt(double v) { return format_double(v); }
const char* flag(bool b) { return b ? "true" : "false"; }

std::string record_row(const SolveRecord& r) {
    std::ostringstream os;
    os << fmt(r.parameters.lambda1) << ',' << fmt(r.parameters.lambda2) << ',' << fmt(r.parameters.gamma) << ','
       << fmt(r.J_value) << ',' << fmt(r.residual_norm) << ',' << r.iterations << ',' << fmt(r.sup_norm) << ','
       << fmt(r.dirichlet_norm) << ',' << status_name(r.status) << ',' << fmt(r.positive_fraction);
    return os.str();
}

const char* record_columns = "lambda1,lambda2,gamma,J,residual,iters,supnorm,dirichlet_norm,status,positive_fraction";

// ---------------------------------------------------------------------------

int cmd_mu1(const Context& ctx) {
    const TorusGrid& g = *ctx.cfg.grid;
    const double m = mu1(g);
    const double gamma = ctx.cfg.raw.number("gamma");
    const double mv = m * g.volume();
    std::cout << ctx.header() << "quantity,value\n"
              << "mu1," << fmt(m) << '\n'
              << "mu1_volume," << fmt(mv) << '\n'
              << "window_holds," << flag(mv > eight_pi && mv < 16.0 * pi * (1.0 + gamma)) << '\n';
    return ok;
}

int cmd_region(const Context& ctx, const std::vector<std::string>& points) {
    const RegionSpec spec = RegionSpec::make(ctx.cfg.raw.number("gamma"), *ctx.cfg.grid);
    std::vector<Point> parsed;
    for (const std::string& s : points) {
        const auto comma = s.find(',');
        double a = 0.0, b = 0.0;
        std::size_t ua = 0, ub = 0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument(s);
            a = std::stod(s.substr(0, comma), &ua);
            b = std::stod(s.substr(comma + 1), &ub);
        } catch (const std::exception&) {
            throw ConfigError("--point expects l1,l2 but got '" + s + "'");
        }
        if (ua != comma || ub != s.size() - comma - 1) throw ConfigError("--point expects l1,l2 but got '" + s + "'");
        parsed.push_back({a, b});
    }

    std::cout << ctx.header() << "triangle,vertex,lambda1,lambda2\n";
    const auto [t1, t2] = triangles(spec);
    int ti = 1;
    for (const Triangle& t : {t1, t2}) {
        for (int k = 0; k < 3; ++k) std::cout << 'T' << ti << ',' << k << ',' << fmt(t.v[k].x) << ',' << fmt(t.v[k].y) << '\n';
        ++ti;
    }
    if (parsed.empty()) return ok;
    std::cout << "#\nlambda1,lambda2,verdict,nonnegative,supercritical,off_resonance_1,off_resonance_2,below_mu1\n";
    for (Point p : parsed) {
        const RegionClauses c = evaluate_clauses(spec, p.x, p.y);
        std::cout << fmt(p.x) << ',' << fmt(p.y) << ',' << (c.inside() ? "inside" : "outside") << ','
                  << flag(c.nonnegative) << ',' << flag(c.supercritical) << ',' << flag(c.off_resonance_1) << ','
                  << flag(c.off_resonance_2) << ',' << flag(c.below_mu1) << '\n';
    }
    return ok;
}

int cmd_bubble_scan(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const ExpansionReport rep = verify_expansions(c.scan_eps, c.p0, c.r0, c.grid, c.params());
    auto os = ctx.open("bubble_scan.csv");
    os << "eps,dirichlet,logIntExp,logIntExpNegGamma,J_v,J_negv_over_gamma\n";
    for (const ExpansionSample& s : rep.samples)
        os << fmt(s.eps) << ',' << fmt(s.dirichlet) << ',' << fmt(s.log_int_exp) << ','
           << fmt(s.log_int_exp_neg_gamma) << ',' << fmt(s.J_v) << ',' << fmt(s.J_negv_over_gamma) << '\n';
    std::ostringstream summary;
    summary << "# slope,quantity,fitted,ols,expected,intercept\n";
    for (Expansion e : all_expansions) {
        const SlopeFit& f = rep.fit(e);
        summary << "# slope," << expansion_name(e) << ',' << fmt(f.slope) << ',' << fmt(f.ols_slope) << ','
                << fmt(expected_slope(e, c.params())) << ',' << fmt(f.intercept) << '\n';
    }
    summary << "# under_resolved," << flag(rep.under_resolved) << ',' << rep.resolution_note << '\n';
    os << summary.str();
    std::cout << summary.str();
    return ok;
}

int cmd_solve(const Context& ctx) {
    const SolveRecord rec = mountain_pass(ctx.cfg.params(), ctx.cfg.grid, ctx.cfg.solver);
    {
        auto os = ctx.open("solve.csv");
        if (!rec.message.empty()) os << "# message = " << rec.message << '\n';
        os << record_columns << '\n' << record_row(rec) << '\n';
    }
    save_field(ctx.out_path("solution.field").string(), rec.field, ctx.header());
    std::cout << record_columns << '\n' << record_row(rec) << '\n';
    if (!rec.message.empty()) std::cerr << "sinhpoisson: " << rec.message << '\n';
    return rec.converged() ? ok : solver;
}

int cmd_sweep(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KeyValueConfig& kv = c.raw;
    if (!kv.has("lambda1_end") || !kv.has("lambda2_end"))
        throw PreconditionError("sweep needs lambda1_end and lambda2_end");
    const Parameters& start = c.params();
    const Parameters end = Parameters::make(kv.number("lambda1_end"), kv.number("lambda2_end"), start.gamma,
                                            c.grid->volume());
    const int steps = kv.integer("steps");
    const auto recs = continuation(start, end, steps, c.grid, c.solver);

    auto manifest = ctx.open("sweep_manifest.csv");
    manifest << "step," << record_columns << ",m1_dominant,field_file\n";
    std::vector<double> sup, m1;
    for (std::size_t s = 0; s < recs.size(); ++s) {
        const SolveRecord& r = recs[s];
        char name[32];
        std::snprintf(name, sizeof name, "step_%03zu", s);
        const MassReport mass = analyze(r.field, r.parameters, c.analysis);
        double dominant = 0.0;
        for (const Candidate& cand : mass.candidates)
            if (cand.peak.species == 1) {
                dominant = cand.m1;
                break;
            }
        const std::string field_file = std::string(name) + ".field";
        save_field(ctx.out_path(field_file).string(), r.field, ctx.header());
        {
            auto os = ctx.open(std::string(name) + ".csv");
            if (!r.message.empty()) os << "# message = " << r.message << '\n';
            os << record_columns << '\n' << record_row(r) << '\n';
        }
        manifest << s << ',' << record_row(r) << ',' << fmt(dominant) << ',' << field_file << '\n';
        if (r.converged()) {
            sup.push_back(r.sup_norm);
            m1.push_back(dominant);
        }
    }
    // trend over the final five converged steps
    auto monotone = [](const std::vector<double>& x) {
        const std::size_t from = x.size() > 5 ? x.size() - 5 : 0;
        for (std::size_t i = from + 1; i < x.size(); ++i)
            if (x[i] < x[i - 1]) return false;
        return true;
    };
    const std::size_t failed = recs.size() - sup.size();
    manifest << "# trend,supnorm_nondecreasing=" << flag(monotone(sup))
             << ",m1_nondecreasing=" << flag(monotone(m1)) << ",failed_steps=" << failed << '\n';
    std::cout << "# trend,supnorm_nondecreasing=" << flag(monotone(sup)) << ",m1_nondecreasing=" << flag(monotone(m1))
              << ",failed_steps=" << failed << '\n';
    return ok;
}

int cmd_analyze(const Context& ctx, const std::string& field_path) {
    Field v = load_field(field_path);
    const RunConfig& c = ctx.cfg;
    const Parameters& cp = c.params();
    const Parameters p = Parameters::make(cp.lambda1, cp.lambda2, cp.gamma, v.grid().volume());
    const MassReport rep = analyze(v, p, c.analysis);
    auto os = ctx.open("analysis.csv");
    os << "# field = " << field_path << '\n'
       << "px,py,species,strength,m1,m2,radius,identquad_residual,m1_ge_8pi,m2_ge_8pi_over_gamma,sum_ge_alpha\n";
    for (const Candidate& k : rep.candidates)
        os << fmt(k.peak.point.x) << ',' << fmt(k.peak.point.y) << ',' << k.peak.species << ','
           << fmt(k.peak.strength) << ',' << fmt(k.m1) << ',' << fmt(k.m2) << ',' << fmt(k.radius) << ','
           << fmt(k.identity.residual) << ',' << flag(k.identity.positive_bound) << ','
           << flag(k.identity.negative_bound) << ',' << flag(k.identity.sum_bound) << '\n';
    const std::string totals = "# totals,lambda1=" + fmt(rep.total1) + ",lambda2=" + fmt(rep.total2) + '\n';
    os << totals;
    std::cout << "candidates," << rep.candidates.size() << '\n' << totals;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymmetric sinh-Poisson solver on flat tori"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool timestamp = false;
    app.add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("-s,--set", overrides, "override a configuration key (key=value), repeatable");
    app.add_option("-o,--out", out_dir, "output directory (overrides output_dir)");
    app.add_flag("--timestamp", timestamp, "embed a UTC timestamp in output headers");

    auto* mu1_cmd = app.add_subcommand("mu1", "first nonzero Laplace eigenvalue of the torus");
    std::vector<std::string> points;
    auto* region_cmd = app.add_subcommand("region", "admissible parameter triangles and membership");
    region_cmd->add_option("-p,--point", points, "parameter point l1,l2 (repeatable)");
    auto* scan_cmd = app.add_subcommand("bubble-scan", "bubble expansion slopes");
    auto* solve_cmd = app.add_subcommand("solve", "mountain-pass solution");
    auto* sweep_cmd = app.add_subcommand("sweep", "continuation between two parameter points");
    std::string field_path;
    auto* analyze_cmd = app.add_subcommand("analyze", "concentration masses of a field file");
    analyze_cmd->add_option("-f,--field", field_path, "field file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return usage;
    }

    Context ctx;
    ctx.timestamp = timestamp;
    try {
        KeyValueConfig kv;
        if (!config_file.empty()) {
            std::ifstream is(config_file);
            kv.read(is);
        }
        for (const std::string& o : overrides) kv.set_override(o);
        if (!out_dir.empty()) kv.set("output_dir", out_dir);
        ctx.cfg = RunConfig::from(kv);
    } catch (const FormatError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return usage;
    } catch (const PreconditionError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return precondition;
    }

    try {
        ctx.command = app.get_subcommands().front()->get_name();
        if (mu1_cmd->parsed()) return cmd_mu1(ctx);
        if (region_cmd->parsed()) return cmd_region(ctx, points);
        if (scan_cmd->parsed()) return cmd_bubble_scan(ctx);
        if (solve_cmd->parsed()) return cmd_solve(ctx);
        if (sweep_cmd->parsed()) return cmd_sweep(ctx);
        if (analyze_cmd->parsed()) return cmd_analyze(ctx, field_path);
    } catch (const ConfigError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return usage;
    } catch (const FormatError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return data;
    } catch (const PreconditionError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return precondition;
    } catch (const SolverError& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return solver;
    } catch (const std::exception& e) {
        std::cerr << "sinhpoisson: " << e.what() << '\n';
        return io;
    }
    return usage;
}
