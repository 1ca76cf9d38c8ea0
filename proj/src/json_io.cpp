#include "rsmkit/json_io.hpp"

#include <algorithm>
#include <initializer_list>

#include "rsmkit/error.hpp"

namespace rsmkit::json_io {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

// Field access with JSON-pointer paths for error messages.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) corrupt("expected an object");
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
        for (const auto& [key, _] : j_.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw Error(ErrorCode::SchemaVersionUnsupported,
                            "unknown field '" + path_ + "/" + key + "': this build reads project schema " +
                                std::to_string(kSchemaVersion),
                            {path_ + "/" + key});
        }
    }

    const Json& field(std::string_view key) const {
        const auto it = j_.find(std::string(key));
        if (it == j_.end()) corrupt_at(key, "missing field");
        return *it;
    }

    double number(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_number()) corrupt_at(key, "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(std::string_view key) const {
        const auto& v = field(key);
        if (v.is_null()) return std::nullopt;
        return number(key);
    }

    int integer(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_number_integer()) corrupt_at(key, "expected an integer");
        return v.get<int>();
    }

    std::uint64_t unsigned_integer(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            corrupt_at(key, "expected an unsigned integer");
        return v.get<std::uint64_t>();
    }

    std::string string(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_string()) corrupt_at(key, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_boolean()) corrupt_at(key, "expected a boolean");
        return v.get<bool>();
    }

    std::vector<double> numbers(std::string_view key) const { return numbers_of(field(key), sub(key)); }

    const Json& array(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_array()) corrupt_at(key, "expected an array");
        return v;
    }

    [[nodiscard]] std::string sub(std::string_view key) const { return path_ + "/" + std::string(key); }

    static std::vector<double> numbers_of(const Json& v, const std::string& path) {
        if (!v.is_array()) throw Error(ErrorCode::CorruptDocument, path + ": expected an array of numbers", {path});
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw Error(ErrorCode::CorruptDocument, path + "/" + std::to_string(i) + ": expected a number",
                            {path + "/" + std::to_string(i)});
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    static Matrix matrix_of(const Json& v, const std::string& path) {
        if (!v.is_array()) throw Error(ErrorCode::CorruptDocument, path + ": expected a matrix", {path});
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(numbers_of(v[i], path + "/" + std::to_string(i)));
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        Matrix m(rows.size(), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != cols)
                throw Error(ErrorCode::CorruptDocument, path + ": ragged matrix", {path});
            std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
        }
        return m;
    }

    [[noreturn]] void corrupt(const std::string& what) const {
        throw Error(ErrorCode::CorruptDocument, (path_.empty() ? "/" : path_) + ": " + what, {path_});
    }
    [[noreturn]] void corrupt_at(std::string_view key, const std::string& what) const {
        throw Error(ErrorCode::CorruptDocument, sub(key) + ": " + what, {sub(key)});
    }

private:
    const Json& j_;
    std::string path_;
};

template <class F>
auto with_domain_errors(const std::string& path, F&& f) {
    // Enum/format parse failures inside a document are document corruption.
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::InvalidAlpha)
            throw Error(ErrorCode::CorruptDocument, path + ": " + e.what(), {path});
        throw;
    }
}

Design design_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"factors", "alpha", "n_center_per_block", "replicates", "n_blocks", "seed", "points"});
    Design d;
    const auto& factors = r.array("factors");
    for (std::size_t i = 0; i < factors.size(); ++i)
        d.factors.push_back(factor_from_json(factors[i], r.sub("factors") + "/" + std::to_string(i)));
    d.alpha = r.optional_number("alpha");
    d.n_center_per_block = r.integer("n_center_per_block");
    d.replicates = r.integer("replicates");
    d.n_blocks = r.integer("n_blocks");
    d.seed = r.unsigned_integer("seed");
    const auto& points = r.array("points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string pp = r.sub("points") + "/" + std::to_string(i);
        Reader pr(points[i], pp);
        pr.allow_only({"coded", "type", "block", "std_order", "run_order"});
        DesignPoint p;
        p.coded = pr.numbers("coded");
        if (p.coded.size() != d.factors.size())
            throw Error(ErrorCode::CorruptDocument, pp + "/coded: wrong dimension", {pp + "/coded"});
        p.point_type = with_domain_errors(pp + "/type", [&] { return parse_point_type(pr.string("type")); });
        p.block = pr.integer("block");
        p.std_order = pr.integer("std_order");
        p.run_order = pr.integer("run_order");
        d.points.push_back(std::move(p));
    }
    return d;
}

TermBasis basis_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"k", "terms"});
    const int k = r.integer("k");
    return with_domain_errors(r.sub("terms"), [&] { return TermBasis::parse(k, r.string("terms")); });
}

std::vector<std::string> strings_of(const Json& v, const std::string& path) {
    if (!v.is_array()) throw Error(ErrorCode::CorruptDocument, path + ": expected an array of strings", {path});
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw Error(ErrorCode::CorruptDocument, path + ": expected strings", {path});
        out.push_back(s.get<std::string>());
    }
    return out;
}

FittedModel model_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"basis", "factor_names", "term_names", "coefficients", "std_errors", "residuals", "fitted_values",
                  "sigma2", "df_residual", "r_squared", "ss_residual", "ss_total", "unscaled_covariance",
                  "design_ref"});
    FittedModel m;
    m.basis = basis_from_json(r.field("basis"), r.sub("basis"));
    m.factor_names = strings_of(r.field("factor_names"), r.sub("factor_names"));
    m.term_names = strings_of(r.field("term_names"), r.sub("term_names"));
    m.coefficients = r.numbers("coefficients");
    m.std_errors = r.numbers("std_errors");
    m.residuals = r.numbers("residuals");
    m.fitted_values = r.numbers("fitted_values");
    m.sigma2 = r.number("sigma2");
    m.df_residual = r.integer("df_residual");
    m.r_squared = r.number("r_squared");
    m.ss_residual = r.number("ss_residual");
    m.ss_total = r.number("ss_total");
    m.unscaled_covariance = Reader::matrix_of(r.field("unscaled_covariance"), r.sub("unscaled_covariance"));
    m.design_ref = r.string("design_ref");
    if (m.coefficients.size() != m.basis.term_count() || m.std_errors.size() != m.coefficients.size())
        r.corrupt("coefficient count does not match the term basis");
    return m;
}

AnovaTable anova_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"rows", "ss_total", "df_total", "lack_of_fit_available"});
    AnovaTable t;
    const auto& rows = r.array("rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rp = r.sub("rows") + "/" + std::to_string(i);
        Reader rr(rows[i], rp);
        rr.allow_only({"source", "ss", "df", "ms", "f_stat", "p_value"});
        AnovaRow row;
        row.source = with_domain_errors(rp + "/source", [&] { return parse_anova_source(rr.string("source")); });
        row.ss = rr.number("ss");
        row.df = rr.integer("df");
        row.ms = rr.number("ms");
        row.f_stat = rr.optional_number("f_stat");
        row.p_value = rr.optional_number("p_value");
        t.rows.push_back(row);
    }
    t.ss_total = r.number("ss_total");
    t.df_total = r.integer("df_total");
    t.lack_of_fit_available = r.boolean("lack_of_fit_available");
    return t;
}

StationaryPoint stationary_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"coded", "predicted", "eigenvalues", "eigenvectors", "nature"});
    StationaryPoint s;
    if (!r.field("coded").is_null()) s.coded = r.numbers("coded");
    s.predicted = r.optional_number("predicted");
    s.eigenvalues = r.numbers("eigenvalues");
    s.eigenvectors = Reader::matrix_of(r.field("eigenvectors"), r.sub("eigenvectors"));
    s.nature = with_domain_errors(r.sub("nature"), [&] { return parse_nature(r.string("nature")); });
    return s;
}

DescentPath path_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"goal", "origin", "steps"});
    DescentPath p;
    p.goal = with_domain_errors(r.sub("goal"), [&] { return parse_goal(r.string("goal")); });
    p.origin = r.numbers("origin");
    const auto& steps = r.array("steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        Reader sr(steps[i], r.sub("steps") + "/" + std::to_string(i));
        sr.allow_only({"radius", "coded", "predicted", "extrapolated"});
        PathStep s;
        s.radius = sr.number("radius");
        s.coded = sr.numbers("coded");
        s.predicted = sr.number("predicted");
        s.extrapolated = sr.boolean("extrapolated");
        p.steps.push_back(std::move(s));
    }
    return p;
}

CoefficientTest test_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"term", "estimate", "std_error", "t_stat", "p_value"});
    CoefficientTest t;
    t.term = r.string("term");
    t.estimate = r.number("estimate");
    t.std_error = r.number("std_error");
    t.t_stat = r.optional_number("t_stat");
    t.p_value = r.number("p_value");
    return t;
}

AnalysisResult analysis_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"basis", "model", "anova", "tests", "tests_note", "stationary_point", "path", "path_note"});
    AnalysisResult a;
    a.basis = basis_from_json(r.field("basis"), r.sub("basis"));
    a.model = model_from_json(r.field("model"), r.sub("model"));
    a.anova = anova_from_json(r.field("anova"), r.sub("anova"));
    const auto& tests = r.array("tests");
    for (std::size_t i = 0; i < tests.size(); ++i)
        a.tests.push_back(test_from_json(tests[i], r.sub("tests") + "/" + std::to_string(i)));
    a.tests_note = r.string("tests_note");
    if (!r.field("stationary_point").is_null())
        a.stationary = stationary_from_json(r.field("stationary_point"), r.sub("stationary_point"));
    if (!r.field("path").is_null()) a.path = path_from_json(r.field("path"), r.sub("path"));
    a.path_note = r.string("path_note");
    return a;
}

Phase phase_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"number", "status", "request", "design", "measured", "analysis", "decision_note"});
    Phase p;
    p.request = design_request_from_json(r.field("request"), r.sub("request"));
    p.design = design_from_json(r.field("design"), r.sub("design"));
    const auto& measured = r.array("measured");
    if (measured.size() != p.design.points.size())
        r.corrupt_at("measured", "one entry per design run expected");
    for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured[i].is_null()) {
            p.measured.emplace_back();
        } else if (measured[i].is_number()) {
            p.measured.emplace_back(measured[i].get<double>());
        } else {
            r.corrupt_at("measured/" + std::to_string(i), "expected a number or null");
        }
    }
    if (!r.field("analysis").is_null()) p.analysis = analysis_from_json(r.field("analysis"), r.sub("analysis"));
    p.decision_note = r.string("decision_note");
    return p;
}

}  // namespace

Json to_json(const FactorSpec& f) {
    return Json{{"name", f.name}, {"low", f.low}, {"high", f.high}, {"unit", f.unit}};
}

Json to_json(const Design& d) {
    Json factors = Json::array();
    for (const auto& f : d.factors) factors.push_back(to_json(f));
    Json points = Json::array();
    for (const auto& p : d.points)
        points.push_back(Json{{"coded", p.coded},
                              {"type", std::string(to_string(p.point_type))},
                              {"block", p.block},
                              {"std_order", p.std_order},
                              {"run_order", p.run_order}});
    return Json{{"factors", factors},
                {"alpha", optional_number(d.alpha)},
                {"n_center_per_block", d.n_center_per_block},
                {"replicates", d.replicates},
                {"n_blocks", d.n_blocks},
                {"seed", d.seed},
                {"points", points}};
}

Json to_json(const DesignRequest& r) {
    Json alpha = r.alpha.kind == AlphaRule::Kind::Explicit ? Json(r.alpha.value) : Json(r.alpha.to_string());
    return Json{{"type", std::string(to_string(r.type))},
                {"alpha", alpha},
                {"centers", r.centers},
                {"replicates", r.replicates},
                {"blocks", r.blocks},
                {"seed", r.seed ? Json(*r.seed) : Json(nullptr)},
                {"fraction", r.fraction}};
}

Json to_json(const TermBasis& b) { return Json{{"k", b.k}, {"terms", b.to_string()}}; }

Json to_json(const FittedModel& m) {
    return Json{{"basis", to_json(m.basis)},
                {"factor_names", m.factor_names},
                {"term_names", m.term_names},
                {"coefficients", m.coefficients},
                {"std_errors", m.std_errors},
                {"residuals", m.residuals},
                {"fitted_values", m.fitted_values},
                {"sigma2", m.sigma2},
                {"df_residual", m.df_residual},
                {"r_squared", m.r_squared},
                {"ss_residual", m.ss_residual},
                {"ss_total", m.ss_total},
                {"unscaled_covariance", matrix_to_json(m.unscaled_covariance)},
                {"design_ref", m.design_ref}};
}

Json to_json(const AnovaTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows)
        rows.push_back(Json{{"source", std::string(to_string(r.source))},
                            {"ss", r.ss},
                            {"df", r.df},
                            {"ms", r.ms},
                            {"f_stat", optional_number(r.f_stat)},
                            {"p_value", optional_number(r.p_value)}});
    return Json{{"rows", rows},
                {"ss_total", t.ss_total},
                {"df_total", t.df_total},
                {"lack_of_fit_available", t.lack_of_fit_available}};
}

Json to_json(const CoefficientTest& t) {
    return Json{{"term", t.term},
                {"estimate", t.estimate},
                {"std_error", t.std_error},
                {"t_stat", optional_number(t.t_stat)},
                {"p_value", t.p_value}};
}

Json to_json(const StationaryPoint& s) {
    return Json{{"coded", s.coded ? Json(*s.coded) : Json(nullptr)},
                {"predicted", optional_number(s.predicted)},
                {"eigenvalues", s.eigenvalues},
                {"eigenvectors", matrix_to_json(s.eigenvectors)},
                {"nature", std::string(to_string(s.nature))}};
}

Json to_json(const DescentPath& p) {
    Json steps = Json::array();
    for (const auto& s : p.steps)
        steps.push_back(Json{{"radius", s.radius},
                             {"coded", s.coded},
                             {"predicted", s.predicted},
                             {"extrapolated", s.extrapolated}});
    return Json{{"goal", std::string(to_string(p.goal))}, {"origin", p.origin}, {"steps", steps}};
}

Json to_json(const AnalysisResult& a) {
    Json tests = Json::array();
    for (const auto& t : a.tests) tests.push_back(to_json(t));
    return Json{{"basis", to_json(a.basis)},
                {"model", to_json(a.model)},
                {"anova", to_json(a.anova)},
                {"tests", tests},
                {"tests_note", a.tests_note},
                {"stationary_point", a.stationary ? to_json(*a.stationary) : Json(nullptr)},
                {"path", a.path ? to_json(*a.path) : Json(nullptr)},
                {"path_note", a.path_note}};
}

Json to_json(const Phase& p, int number) {
    Json measured = Json::array();
    for (const auto& m : p.measured) measured.push_back(optional_number(m));
    return Json{{"number", number},
                {"status", std::string(to_string(p.status()))},
                {"request", to_json(p.request)},
                {"design", to_json(p.design)},
                {"measured", measured},
                {"analysis", p.analysis ? to_json(*p.analysis) : Json(nullptr)},
                {"decision_note", p.decision_note}};
}

Json to_json(const Campaign& c) {
    Json factors = Json::array();
    for (const auto& f : c.factors) factors.push_back(to_json(f));
    Json phases = Json::array();
    for (std::size_t i = 0; i < c.phases.size(); ++i) phases.push_back(to_json(c.phases[i], static_cast<int>(i) + 1));
    return Json{{"schema", kSchemaVersion},
                {"id", c.id},
                {"name", c.name},
                {"factors", factors},
                {"response_name", c.response_name},
                {"target", optional_number(c.target_value)},
                {"goal", std::string(to_string(c.goal))},
                {"default_seed", c.default_seed},
                {"created", c.created},
                {"modified", c.modified},
                {"phases", phases}};
}

Json to_json(const SurfaceGrid& g) {
    Json z = Json::array();
    for (std::size_t i = 0; i < g.ny; ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < g.nx; ++j) row.push_back(g.at(i, j));
        z.push_back(row);
    }
    Json xs = Json::array();
    for (std::size_t j = 0; j < g.nx; ++j) xs.push_back(g.x_at(j));
    Json ys = Json::array();
    for (std::size_t i = 0; i < g.ny; ++i) ys.push_back(g.y_at(i));
    return Json{{"factor_x", g.factor_x},
                {"factor_y", g.factor_y},
                {"fixed_values", g.fixed_values},
                {"nx", g.nx},
                {"ny", g.ny},
                {"x_range", Json::array({g.x_range.min, g.x_range.max})},
                {"y_range", Json::array({g.y_range.min, g.y_range.max})},
                {"x", xs},
                {"y", ys},
                {"z", z}};
}

Json to_json(const ContourSet& c) {
    Json levels = Json::array();
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
        Json lines = Json::array();
        for (const auto& pl : c.polylines[l]) {
            Json pts = Json::array();
            for (const auto& p : pl.points) pts.push_back(Json::array({p.x, p.y}));
            lines.push_back(Json{{"closed", pl.closed}, {"points", pts}});
        }
        levels.push_back(Json{{"level", c.levels[l]}, {"polylines", lines}});
    }
    return Json{{"levels", levels}};
}

Json error_to_json(const Error& e) {
    Json detail = nullptr;
    const auto& d = e.detail();
    if (!d.empty()) {
        if (e.code() == ErrorCode::RankDeficient) {
            detail = Json{{"inestimable_terms", d}};
        } else if (e.code() == ErrorCode::MalformedNumber && d.size() == 2) {
            detail = Json{{"line", std::stoi(d[0])}, {"column", d[1]}};
        } else {
            detail = Json{{"items", d}};
        }
    }
    return Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", detail}};
}

Json error_to_json(ErrorCode code, const std::string& message) {
    return Json{{"code", std::string(to_string(code))}, {"message", message}, {"detail", nullptr}};
}

FactorSpec factor_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"name", "low", "high", "unit"});
    FactorSpec f;
    f.name = r.string("name");
    f.low = r.number("low");
    f.high = r.number("high");
    if (j.contains("unit")) f.unit = r.string("unit");
    return f;
}

DesignRequest design_request_from_json(const Json& j, const std::string& path) {
    Reader r(j, path);
    r.allow_only({"type", "alpha", "centers", "replicates", "blocks", "seed", "fraction"});
    DesignRequest req;
    req.type = with_domain_errors(r.sub("type"), [&] { return parse_design_type(r.string("type")); });
    const auto& alpha = r.field("alpha");
    if (alpha.is_number()) {
        req.alpha = AlphaRule::explicit_value(alpha.get<double>());
    } else if (alpha.is_string()) {
        req.alpha = with_domain_errors(r.sub("alpha"), [&] { return AlphaRule::parse(alpha.get<std::string>()); });
    } else {
        r.corrupt_at("alpha", "expected a number or rotatable|face|none");
    }
    req.centers = r.integer("centers");
    req.replicates = r.integer("replicates");
    req.blocks = r.integer("blocks");
    if (!r.field("seed").is_null()) req.seed = r.unsigned_integer("seed");
    req.fraction = r.integer("fraction");
    return req;
}

Campaign campaign_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::CorruptDocument, "/: project document must be an object", {""});
    const auto schema = j.find("schema");
    if (schema == j.end() || !schema->is_number_integer())
        throw Error(ErrorCode::CorruptDocument, "/schema: missing or not an integer", {"/schema"});
    if (schema->get<int>() != kSchemaVersion)
        throw Error(ErrorCode::SchemaVersionUnsupported,
                    "project schema " + std::to_string(schema->get<int>()) + " is not supported (this build reads " +
                        std::to_string(kSchemaVersion) + ")");
    Reader r(j, "");
    r.allow_only({"schema", "id", "name", "factors", "response_name", "target", "goal", "default_seed", "created",
                  "modified", "phases"});
    Campaign c;
    c.id = r.string("id");
    c.name = r.string("name");
    const auto& factors = r.array("factors");
    for (std::size_t i = 0; i < factors.size(); ++i)
        c.factors.push_back(factor_from_json(factors[i], "/factors/" + std::to_string(i)));
    c.response_name = r.string("response_name");
    c.target_value = r.optional_number("target");
    c.goal = with_domain_errors("/goal", [&] { return parse_goal(r.string("goal")); });
    c.default_seed = r.unsigned_integer("default_seed");
    c.created = r.string("created");
    c.modified = r.string("modified");
    const auto& phases = r.array("phases");
    for (std::size_t i = 0; i < phases.size(); ++i)
        c.phases.push_back(phase_from_json(phases[i], "/phases/" + std::to_string(i)));
    return c;
}

Campaign campaign_from_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::CorruptDocument, std::string("project file is not valid JSON: ") + e.what(),
                    {"byte " + std::to_string(e.byte)});
    }
    return campaign_from_json(j);
}

}  // namespace rsmkit::json_io
