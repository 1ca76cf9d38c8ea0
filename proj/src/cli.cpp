#include "rsmkit/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rsmkit/campaign.hpp"
#include "rsmkit/format.hpp"
#include "rsmkit/json_io.hpp"
#include "rsmkit/service.hpp"

namespace rsmkit {

using json_io::Json;

int exit_code(ErrorCode code) noexcept {
    if (code == ErrorCode::PhaseIncomplete || code == ErrorCode::NoModel) return kExitData;
    switch (category(code)) {
        case ErrorCategory::Usage: return kExitUsage;
        case ErrorCategory::Validation:
        case ErrorCategory::NotFound:
        case ErrorCategory::Conflict: return kExitData;
        case ErrorCategory::Numeric: return kExitNumeric;
        case ErrorCategory::Io: return kExitIo;
    }
    return kExitIo;
}

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string project;
    std::string format = "text";
    int verbosity = 0;
    int phase = 0;  // 0: latest

    // new
    std::vector<std::string> factors;
    std::string response = "response";
    std::optional<double> target;
    std::string goal = "min";
    std::string name;
    std::uint64_t seed = 1;
    bool force = false;

    // design
    std::string type = "ccd";
    std::string alpha;
    int centers = 1;
    int replicates = 1;
    int blocks = 1;
    std::optional<std::uint64_t> design_seed;
    int fraction = 1;
    std::string out;

    // ingest
    std::string csv_path;

    // fit / path / surface
    std::string terms;
    std::string radii;
    std::string x;
    std::string y;
    std::size_t grid = 101;
    std::size_t levels = 10;

    // serve
    int port = 8765;
    std::string bind = "127.0.0.1";
    std::string static_dir;
    std::string origin;
};

bool json_mode(const Options& o) { return o.format == "json"; }

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "-"; }

std::string pad_right(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }
std::string pad_left(const std::string& s, std::size_t w) { return s.size() >= w ? " " + s : std::string(w - s.size(), ' ') + s; }

constexpr std::size_t kNumWidth = 14;

fs::path project_path(const Options& o) {
    if (o.project.empty())
        throw Error(ErrorCode::UsageError, "no project file: pass --project or set RSMKIT_PROJECT");
    return o.project;
}

Campaign load_project(const Options& o) {
    const fs::path p = project_path(o);
    if (!fs::exists(p)) throw Error(ErrorCode::IoError, "project file not found: " + p.string());
    return load(p);
}

int resolve_phase(const Campaign& c, const Options& o) {
    if (o.phase != 0) return o.phase;
    if (c.phases.empty()) throw Error(ErrorCode::UnknownPhase, "campaign has no phases yet; run `design` first");
    return static_cast<int>(c.phases.size());
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
    if (p.has_parent_path() && !fs::is_directory(p.parent_path()))
        throw Error(ErrorCode::IoError, "directory does not exist: " + p.parent_path().string());
    std::ofstream outf(p, std::ios::binary | std::ios::trunc);
    if (!outf) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    outf << data;
    if (!outf) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

FactorSpec parse_factor(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() < 3 || parts.size() > 4)
        throw Error(ErrorCode::InvalidFactor, "factor '" + text + "' must look like name:low:high[:unit]");
    const auto low = parse_double(parts[1]);
    const auto high = parse_double(parts[2]);
    if (!low || !high) throw Error(ErrorCode::InvalidFactor, "factor '" + text + "' has a malformed bound");
    return {parts[0], *low, *high, parts.size() == 4 ? parts[3] : ""};
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::string cur;
    auto flush = [&] {
        const auto v = parse_double(cur);
        if (!v) throw Error(ErrorCode::InvalidArgument, std::string("malformed ") + what + " value '" + cur + "'");
        out.push_back(*v);
        cur.clear();
    };
    for (char ch : text) {
        if (ch == ',')
            flush();
        else if (ch != ' ')
            cur += ch;
    }
    flush();
    return out;
}

void save_project(const Campaign& c, const Options& o, std::ostream& err) {
    const fs::path p = project_path(o);
    save(c, p);
    if (o.verbosity > 0) err << "saved " << p.string() << "\n";
}

// ---------------------------------------------------------------- text tables

void print_coefficients(std::ostream& out, const AnalysisResult& a) {
    const auto& m = a.model;
    std::size_t w = 12;
    for (const auto& t : m.term_names) w = std::max(w, t.size() + 2);
    out << pad_right("term", w) << pad_left("estimate", kNumWidth) << pad_left("std_error", kNumWidth)
        << pad_left("t_stat", kNumWidth) << pad_left("p_value", kNumWidth) << "\n";
    for (std::size_t i = 0; i < m.term_names.size(); ++i) {
        std::string t_stat = "-";
        std::string p_value = "-";
        for (const auto& t : a.tests)
            if (t.term == m.term_names[i]) {
                t_stat = opt_num(t.t_stat);
                p_value = num(t.p_value);
            }
        out << pad_right(m.term_names[i], w) << pad_left(num(m.coefficients[i]), kNumWidth)
            << pad_left(num(m.std_errors[i]), kNumWidth) << pad_left(t_stat, kNumWidth)
            << pad_left(p_value, kNumWidth) << "\n";
    }
    if (!a.tests_note.empty()) out << "note: " << a.tests_note << "\n";
    out << "sigma^2 = " << num(m.sigma2) << ", R^2 = " << num(m.r_squared) << ", df_residual = " << m.df_residual
        << "\n";
}

void print_anova(std::ostream& out, const AnovaTable& t) {
    const std::size_t w = 16;
    out << pad_right("source", w) << pad_left("df", 6) << pad_left("ss", kNumWidth) << pad_left("ms", kNumWidth)
        << pad_left("F", kNumWidth) << pad_left("p_value", kNumWidth) << "\n";
    for (const auto& r : t.rows)
        out << pad_right(std::string(to_string(r.source)), w) << pad_left(std::to_string(r.df), 6)
            << pad_left(num(r.ss), kNumWidth) << pad_left(num(r.ms), kNumWidth) << pad_left(opt_num(r.f_stat), kNumWidth)
            << pad_left(opt_num(r.p_value), kNumWidth) << "\n";
    out << pad_right("Total", w) << pad_left(std::to_string(t.df_total), 6) << pad_left(num(t.ss_total), kNumWidth)
        << "\n";
}

void print_stationary(std::ostream& out, const Campaign& c, const StationaryPoint& s) {
    out << "stationary point: " << to_string(s.nature);
    if (s.coded) {
        out << " at (";
        for (std::size_t i = 0; i < s.coded->size(); ++i) out << (i ? ", " : "") << num((*s.coded)[i]);
        out << ") coded, (";
        const auto nat = to_natural(c.factors, *s.coded);
        for (std::size_t i = 0; i < nat.size(); ++i) out << (i ? ", " : "") << num(nat[i]);
        out << ") natural, predicted " << opt_num(s.predicted);
    }
    out << "\neigenvalues:";
    for (double l : s.eigenvalues) out << " " << num(l);
    out << "\n";
}

void print_path(std::ostream& out, const Campaign& c, const AnalysisResult& a) {
    if (!a.path) {
        out << (a.path_note.empty() ? "no path" : a.path_note) << "\n";
        return;
    }
    const DescentPath& p = *a.path;
    out << "goal: " << to_string(p.goal) << "\n";
    out << pad_left("radius", 10);
    for (const auto& f : c.factors) out << pad_left(f.name, kNumWidth);
    for (const auto& f : c.factors) out << pad_left(f.name + "_natural", kNumWidth);
    out << pad_left("predicted", kNumWidth) << pad_left("extrapolated", kNumWidth) << "\n";
    for (const auto& s : p.steps) {
        out << pad_left(num(s.radius), 10);
        for (double v : s.coded) out << pad_left(num(v), kNumWidth);
        for (double v : to_natural(c.factors, s.coded)) out << pad_left(num(v), kNumWidth);
        out << pad_left(num(s.predicted), kNumWidth) << pad_left(s.extrapolated ? "yes" : "no", kNumWidth) << "\n";
    }
}

// ---------------------------------------------------------------- commands

int cmd_new(const Options& o, std::ostream& out, std::ostream& err) {
    const fs::path p = project_path(o);
    if (fs::exists(p) && !o.force)
        throw Error(ErrorCode::InvalidArgument, "project file already exists: " + p.string() + " (use --force)");
    std::vector<FactorSpec> factors;
    for (const auto& f : o.factors) factors.push_back(parse_factor(f));
    const Campaign c = new_campaign(o.name, std::move(factors), o.response, o.target, parse_goal(o.goal), o.seed);
    save_project(c, o, err);
    if (json_mode(o))
        out << json_io::to_json(c).dump(2) << "\n";
    else
        out << "created campaign " << c.id << " with " << c.factors.size() << " factors in " << p.string() << "\n";
    return kExitOk;
}

int cmd_design(const Options& o, std::ostream& out, std::ostream& err) {
    Campaign c = load_project(o);
    DesignRequest r;
    r.type = parse_design_type(o.type);
    if (!o.alpha.empty())
        r.alpha = AlphaRule::parse(o.alpha);
    else if (r.type == DesignType::Factorial)
        r.alpha = AlphaRule::none();
    r.centers = o.centers;
    r.replicates = o.replicates;
    r.blocks = o.blocks;
    r.seed = o.design_seed;
    r.fraction = o.fraction;
    const int n = add_phase(c, r);
    const std::string csv = export_worksheet(c, n);
    if (!o.out.empty()) write_file(o.out, csv);
    save_project(c, o, err);
    const Phase& p = c.phase(n);
    const auto warnings = design_warnings(p.design);
    if (json_mode(o)) {
        Json j{{"phase", n},
               {"runs", p.design.size()},
               {"alpha", p.design.alpha ? Json(*p.design.alpha) : Json(nullptr)},
               {"seed", p.design.seed},
               {"warnings", warnings},
               {"worksheet", o.out.empty() ? Json(csv) : Json(o.out)}};
        out << j.dump(2) << "\n";
    } else {
        for (const auto& w : warnings) err << "warning: " << w << "\n";
        if (o.out.empty())
            out << csv;
        else
            out << "phase " << n << ": " << p.design.size() << " runs written to " << o.out << "\n";
    }
    return kExitOk;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
    Campaign c = load_project(o);
    const int n = resolve_phase(c, o);
    const Phase& p = ingest_responses(c, n, read_file(o.csv_path));
    save_project(c, o, err);
    if (json_mode(o))
        out << Json{{"phase", n}, {"filled", p.filled()}, {"runs", p.design.size()},
                    {"status", std::string(to_string(p.status()))}}
                   .dump(2)
            << "\n";
    else
        out << "phase " << n << ": " << p.filled() << " of " << p.design.size() << " responses entered ("
            << to_string(p.status()) << ")\n";
    return kExitOk;
}

TermBasis pick_basis(const Campaign& c, int n, const Options& o) {
    const std::size_t k = c.factors.size();
    if (!o.terms.empty()) return TermBasis::parse(k, o.terms);
    const Phase& p = c.phase(n);
    if (p.analysis) return p.analysis->basis;
    return TermBasis::parse(k, "fo");
}

AnalysisOptions analysis_options(const Options& o) {
    AnalysisOptions a;
    if (!o.radii.empty()) a.radii = parse_list(o.radii, "radius");
    return a;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
    Campaign c = load_project(o);
    const int n = resolve_phase(c, o);
    const AnalysisResult a = run_analysis(c, n, pick_basis(c, n, o), analysis_options(o));
    save_project(c, o, err);
    if (json_mode(o)) {
        Json j = json_io::to_json(a);
        j = Json{{"phase", n}, {"analysis", j}};
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    out << "phase " << n << ", terms " << a.basis.to_string() << ", " << a.model.fitted_values.size() << " runs\n\n";
    print_coefficients(out, a);
    out << "\n";
    print_anova(out, a.anova);
    if (a.stationary) {
        out << "\n";
        print_stationary(out, c, *a.stationary);
    }
    return kExitOk;
}

int cmd_path(const Options& o, std::ostream& out, std::ostream& err) {
    Campaign c = load_project(o);
    const int n = resolve_phase(c, o);
    const AnalysisResult a = run_analysis(c, n, pick_basis(c, n, o), analysis_options(o));
    save_project(c, o, err);
    if (json_mode(o)) {
        out << Json{{"phase", n},
                    {"terms", a.basis.to_string()},
                    {"path", a.path ? json_io::to_json(*a.path) : Json(nullptr)},
                    {"note", a.path_note}}
                   .dump(2)
            << "\n";
        return kExitOk;
    }
    print_path(out, c, a);
    return kExitOk;
}

int cmd_surface(const Options& o, std::ostream& out, std::ostream&) {
    const Campaign c = load_project(o);
    const int n = resolve_phase(c, o);
    SurfaceRequest r;
    r.x_factor = o.x;
    r.y_factor = o.y;
    r.grid = o.grid;
    r.levels = o.levels;
    if (!o.terms.empty()) r.basis = TermBasis::parse(c.factors.size(), o.terms);
    const SurfaceResult s = phase_surface(c, n, r);
    const Json j{{"x_factor", s.x_factor},
                 {"y_factor", s.y_factor},
                 {"grid", json_io::to_json(s.grid)},
                 {"contours", json_io::to_json(s.contours)}};
    if (o.out.empty()) {
        out << j.dump() << "\n";
        return kExitOk;
    }
    write_file(o.out, j.dump() + "\n");
    if (json_mode(o))
        out << Json{{"phase", n}, {"out", o.out}, {"grid", s.grid.nx}, {"levels", s.contours.levels.size()}}.dump(2)
            << "\n";
    else
        out << "surface " << s.x_factor << " x " << s.y_factor << " (" << s.grid.nx << "x" << s.grid.ny << ", "
            << s.contours.levels.size() << " levels) written to " << o.out << "\n";
    return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream&) {
    CampaignStore store(project_path(o));
    ServiceOptions so;
    so.host = o.bind;
    so.port = o.port;
    if (!o.origin.empty()) so.allowed_origin = o.origin;
    if (!o.static_dir.empty()) so.static_dir = o.static_dir;
    Service service(store, so);
    out << "serving " << o.project << " on http://" << o.bind << ":" << o.port << "\n" << std::flush;
    if (!service.listen()) throw Error(ErrorCode::IoError, "cannot bind " + o.bind + ":" + std::to_string(o.port));
    return kExitOk;
}

void report(const Error& e, bool json, std::ostream& err) {
    if (json)
        err << json_io::error_to_json(e).dump() << "\n";
    else
        err << "error: " << e.what() << " [" << to_string(e.code()) << "]\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_project) {
    Options o;
    if (env_project) o.project = *env_project;

    CLI::App app{"Response surface campaigns: designs, fits, paths and surfaces", "rsmkit"};
    app.require_subcommand(1);
    app.add_option("--project", o.project, "Project file (default: $RSMKIT_PROJECT)");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("-v,--verbose", o.verbosity, "More diagnostics on stderr");
    app.fallthrough();

    auto* new_cmd = app.add_subcommand("new", "Create a project file");
    new_cmd->add_option("--factor", o.factors, "name:low:high[:unit], repeated")->required();
    new_cmd->add_option("--response", o.response, "Response name");
    new_cmd->add_option("--target", o.target, "Target value; analysis uses |response - target|");
    new_cmd->add_option("--goal", o.goal, "min or max")->check(CLI::IsMember({"min", "max"}));
    new_cmd->add_option("--name", o.name, "Campaign name");
    new_cmd->add_option("--seed", o.seed, "Default randomization seed");
    new_cmd->add_flag("--force", o.force, "Overwrite an existing project file");

    auto* design_cmd = app.add_subcommand("design", "Append a phase and write its worksheet");
    design_cmd->add_option("--type", o.type, "ccd, factorial or bbd")->check(CLI::IsMember({"ccd", "factorial", "bbd"}));
    design_cmd->add_option("--alpha", o.alpha, "rotatable, face, none or a number");
    design_cmd->add_option("--centers", o.centers, "Center runs per block");
    design_cmd->add_option("--replicates", o.replicates, "Factorial core replicates");
    design_cmd->add_option("--blocks", o.blocks, "1 or 2");
    design_cmd->add_option("--seed", o.design_seed, "Randomization seed (default: the project's)");
    design_cmd->add_option("--fraction", o.fraction, "Fraction denominator of the factorial core");
    design_cmd->add_option("--out", o.out, "Worksheet CSV path (default: stdout)");

    auto* ingest_cmd = app.add_subcommand("ingest", "Read responses from a filled worksheet");
    ingest_cmd->add_option("csv", o.csv_path, "Worksheet CSV")->required();

    auto* fit_cmd = app.add_subcommand("fit", "Fit a model and print coefficients and ANOVA");
    fit_cmd->add_option("--terms", o.terms, "fo[,twi][,pq][,block] or so");
    fit_cmd->add_option("--radii", o.radii, "Path radii, comma separated");

    auto* path_cmd = app.add_subcommand("path", "Print the steepest path for the goal");
    path_cmd->add_option("--radii", o.radii, "Comma-separated radii in coded units");
    path_cmd->add_option("--terms", o.terms, "Refit with these terms first");

    auto* surface_cmd = app.add_subcommand("surface", "Export a response grid and contours");
    surface_cmd->add_option("--x", o.x, "Horizontal factor (default: first)");
    surface_cmd->add_option("--y", o.y, "Vertical factor (default: second)");
    surface_cmd->add_option("--grid", o.grid, "Grid points per axis");
    surface_cmd->add_option("--levels", o.levels, "Number of contour levels");
    surface_cmd->add_option("--out", o.out, "Output JSON path (default: stdout)");
    surface_cmd->add_option("--terms", o.terms, "Fit with these terms instead of the stored analysis");

    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
    serve_cmd->add_option("--port", o.port, "Port");
    serve_cmd->add_option("--bind", o.bind, "Bind address");
    serve_cmd->add_option("--static", o.static_dir, "Directory of workbench assets");
    serve_cmd->add_option("--origin", o.origin, "Allowed CORS origin");

    for (auto* sub : {design_cmd, ingest_cmd, fit_cmd, path_cmd, surface_cmd})
        sub->add_option("--phase", o.phase, "Phase number (default: latest)")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        bool json = false;
        for (std::size_t i = 0; i < args.size(); ++i)
            if (args[i] == "--format=json" || (args[i] == "--format" && i + 1 < args.size() && args[i + 1] == "json"))
                json = true;
        report(Error(ErrorCode::UsageError, e.what()), json, err);
        return kExitUsage;
    }

    try {
        if (new_cmd->parsed()) return cmd_new(o, out, err);
        if (design_cmd->parsed()) return cmd_design(o, out, err);
        if (ingest_cmd->parsed()) return cmd_ingest(o, out, err);
        if (fit_cmd->parsed()) return cmd_fit(o, out, err);
        if (path_cmd->parsed()) return cmd_path(o, out, err);
        if (surface_cmd->parsed()) return cmd_surface(o, out, err);
        if (serve_cmd->parsed()) return cmd_serve(o, out, err);
    } catch (const Error& e) {
        report(e, json_mode(o), err);
        return exit_code(e.code());
    } catch (const std::exception& e) {
        report(Error(ErrorCode::Internal, e.what()), json_mode(o), err);
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace rsmkit
