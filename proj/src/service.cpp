#include "rsmkit/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "rsmkit/error.hpp"
#include "rsmkit/format.hpp"
#include "rsmkit/json_io.hpp"

namespace rsmkit {

using json_io::Json;

// ---------------------------------------------------------------- store

CampaignStore::CampaignStore(std::filesystem::path root) : root_(std::move(root)) {
    namespace fs = std::filesystem;
    single_file_ = root_.extension() == ".json";
    if (single_file_) {
        if (!root_.parent_path().empty() && !fs::is_directory(root_.parent_path()))
            throw Error(ErrorCode::IoError, "directory does not exist: " + root_.parent_path().string());
        if (fs::exists(root_)) {
            auto e = std::make_shared<Entry>();
            e->path = root_;
            e->snapshot = load(root_);
            entries_.emplace(e->snapshot.id, e);
        }
        return;
    }
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (!fs::is_directory(root_)) throw Error(ErrorCode::IoError, "not a directory: " + root_.string());
    std::vector<fs::path> files;
    for (const auto& item : fs::directory_iterator(root_))
        if (item.is_regular_file() && item.path().extension() == ".json") files.push_back(item.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto e = std::make_shared<Entry>();
        e->path = f;
        e->snapshot = load(f);
        entries_.emplace(e->snapshot.id, e);
    }
}

std::vector<CampaignStore::Summary> CampaignStore::list() const {
    std::vector<std::shared_ptr<Entry>> all;
    {
        std::lock_guard lock(map_lock_);
        for (const auto& [id, e] : entries_) all.push_back(e);
    }
    std::vector<Summary> out;
    for (const auto& e : all) {
        std::lock_guard lock(map_lock_);
        out.push_back({e->snapshot.id, e->snapshot.name, e->snapshot.phases.size(), e->snapshot.modified});
    }
    return out;
}

std::shared_ptr<CampaignStore::Entry> CampaignStore::entry(const std::string& id) const {
    std::lock_guard lock(map_lock_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(ErrorCode::NotFound, "no campaign with id '" + id + "'");
    return it->second;
}

Campaign CampaignStore::get(const std::string& id) const {
    const auto e = entry(id);
    std::lock_guard lock(map_lock_);
    return e->snapshot;
}

void CampaignStore::create(const Campaign& campaign) {
    auto e = std::make_shared<Entry>();
    e->snapshot = campaign;
    {
        std::lock_guard lock(map_lock_);
        if (entries_.count(campaign.id))
            throw Error(ErrorCode::InvalidArgument, "campaign '" + campaign.id + "' already exists");
        if (single_file_ && !entries_.empty())
            throw Error(ErrorCode::InvalidArgument, "a single project file holds one campaign");
        e->path = single_file_ ? root_ : root_ / (campaign.id + ".json");
    }
    save(campaign, e->path);
    std::lock_guard lock(map_lock_);
    entries_.emplace(campaign.id, e);
}

Campaign CampaignStore::update(const std::string& id, const std::function<void(Campaign&)>& mutate) {
    const auto e = entry(id);
    std::lock_guard write(e->write_lock);
    Campaign next;
    {
        std::lock_guard lock(map_lock_);
        next = e->snapshot;
    }
    mutate(next);
    save(next, e->path);
    std::lock_guard lock(map_lock_);
    e->snapshot = next;
    return next;
}

// ---------------------------------------------------------------- service

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SchemaVersionUnsupported:
        case ErrorCode::CorruptDocument:
            return 400;
        default:
            break;
    }
    switch (category(code)) {
        case ErrorCategory::Usage:
        case ErrorCategory::Validation:
            return 400;
        case ErrorCategory::NotFound:
            return 404;
        case ErrorCategory::Conflict:
            return 409;
        case ErrorCategory::Numeric:
            return 422;
        case ErrorCategory::Io:
            return 500;
    }
    return 500;
}

namespace {

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(const Error& e) { return json_response(http_status(e.code()), json_io::error_to_json(e)); }

[[noreturn]] void bad_request(const std::string& message) { throw Error(ErrorCode::InvalidArgument, message); }

Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    try {
        return Json::parse(body);
    } catch (const Json::parse_error& e) {
        bad_request(std::string("request body is not valid JSON: ") + e.what());
    }
}

void allow_only(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
    if (!j.is_object()) bad_request(what + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            bad_request(what + ": unknown field '" + it.key() + "'");
}

int int_field(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) bad_request(std::string("'") + key + "' must be an integer");
    return v.get<int>();
}

double number_field(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) bad_request(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::string string_field(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_string()) bad_request(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const Json& v, const char* key) {
    if (!v.is_array()) bad_request(std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) bad_request(std::string("'") + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Campaign campaign_from_request(const Json& j) {
    allow_only(j, {"name", "factors", "response_name", "target", "goal", "seed"}, "campaign");
    if (!j.contains("factors") || !j["factors"].is_array()) bad_request("'factors' must be an array");
    std::vector<FactorSpec> factors;
    for (std::size_t i = 0; i < j["factors"].size(); ++i) {
        const auto& f = j["factors"][i];
        allow_only(f, {"name", "low", "high", "unit"}, "factor");
        if (!f.contains("name") || !f.contains("low") || !f.contains("high"))
            bad_request("factor needs name, low and high");
        FactorSpec spec{string_field(f, "name"), number_field(f, "low"), number_field(f, "high"), ""};
        if (f.contains("unit")) spec.unit = string_field(f, "unit");
        factors.push_back(spec);
    }
    const std::string name = j.contains("name") ? string_field(j, "name") : "";
    const std::string response = j.contains("response_name") ? string_field(j, "response_name") : "response";
    std::optional<double> target;
    if (j.contains("target") && !j["target"].is_null()) target = number_field(j, "target");
    const Goal goal = j.contains("goal") ? parse_goal(string_field(j, "goal")) : Goal::Minimize;
    std::uint64_t seed = 1;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) bad_request("'seed' must be a nonnegative integer");
        seed = j["seed"].get<std::uint64_t>();
    }
    return new_campaign(name, std::move(factors), response, target, goal, seed);
}

DesignRequest design_request(const Json& j) {
    allow_only(j, {"type", "alpha", "centers", "replicates", "blocks", "seed", "fraction"}, "design request");
    DesignRequest r;
    if (j.contains("type")) r.type = parse_design_type(string_field(j, "type"));
    if (j.contains("alpha")) {
        const auto& a = j["alpha"];
        if (a.is_string())
            r.alpha = AlphaRule::parse(a.get<std::string>());
        else if (a.is_number())
            r.alpha = AlphaRule::explicit_value(a.get<double>());
        else
            bad_request("'alpha' must be rotatable, face, none or a number");
    } else if (r.type == DesignType::Factorial) {
        r.alpha = AlphaRule::none();
    }
    if (j.contains("centers")) r.centers = int_field(j, "centers");
    if (j.contains("replicates")) r.replicates = int_field(j, "replicates");
    if (j.contains("blocks")) r.blocks = int_field(j, "blocks");
    if (j.contains("fraction")) r.fraction = int_field(j, "fraction");
    if (j.contains("seed") && !j["seed"].is_null()) {
        if (!j["seed"].is_number_unsigned()) bad_request("'seed' must be a nonnegative integer");
        r.seed = j["seed"].get<std::uint64_t>();
    }
    return r;
}

TermBasis basis_from(const Json& v, std::size_t k) {
    if (v.is_string()) return TermBasis::parse(k, v.get<std::string>());
    if (v.is_array()) {
        std::string joined;
        for (const auto& t : v) {
            if (!t.is_string()) bad_request("'terms' entries must be strings");
            if (!joined.empty()) joined += ',';
            joined += t.get<std::string>();
        }
        return TermBasis::parse(k, joined);
    }
    bad_request("'terms' must be a string or an array of strings");
}

std::vector<ResponseEntry> response_entries(const Json& j) {
    const Json* list = &j;
    if (j.is_object() && j.contains("responses")) {
        allow_only(j, {"responses"}, "responses body");
        list = &j["responses"];
    }
    if (!list->is_array()) bad_request("responses body must be an array of {std_order, block, value}");
    std::vector<ResponseEntry> out;
    for (const auto& e : *list) {
        allow_only(e, {"std_order", "block", "value"}, "response entry");
        if (!e.contains("std_order") || !e.contains("block") || !e.contains("value"))
            bad_request("response entry needs std_order, block and value");
        ResponseEntry r;
        r.std_order = int_field(e, "std_order");
        r.block = int_field(e, "block");
        if (!e["value"].is_null()) r.value = number_field(e, "value");
        out.push_back(r);
    }
    return out;
}

Json worksheet_rows(const Campaign& c, const Phase& p) {
    std::vector<std::size_t> order(p.design.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p.design.points[a].run_order < p.design.points[b].run_order; });
    Json rows = Json::array();
    for (std::size_t i : order) {
        const auto& pt = p.design.points[i];
        rows.push_back(Json{{"run_order", pt.run_order},
                            {"std_order", pt.std_order},
                            {"block", pt.block},
                            {"type", std::string(to_string(pt.point_type))},
                            {"coded", pt.coded},
                            {"natural", to_natural(c.factors, pt.coded)},
                            {"value", p.measured[i] ? Json(*p.measured[i]) : Json(nullptr)}});
    }
    return rows;
}

Json analysis_body(const AnalysisResult& a) {
    Json body = json_io::to_json(a);
    Json coefs = Json::array();
    for (std::size_t i = 0; i < a.model.term_names.size(); ++i) {
        Json c{{"term", a.model.term_names[i]},
               {"estimate", a.model.coefficients[i]},
               {"std_error", a.model.std_errors[i]},
               {"t_stat", nullptr},
               {"p_value", nullptr}};
        for (const auto& t : a.tests)
            if (t.term == a.model.term_names[i]) {
                c["t_stat"] = t.t_stat ? Json(*t.t_stat) : Json(nullptr);
                c["p_value"] = t.p_value;
            }
        coefs.push_back(c);
    }
    body["coefficients"] = coefs;
    return body;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : path) {
        if (ch == '/') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int phase_number(const std::string& text) {
    const auto v = parse_double(text);
    if (!v || std::floor(*v) != *v || *v < 1 || *v > 1e6)
        throw Error(ErrorCode::UnknownPhase, "no phase '" + text + "'");
    return static_cast<int>(*v);
}

std::size_t size_param(const std::map<std::string, std::string>& q, const char* key, std::size_t fallback) {
    const auto it = q.find(key);
    if (it == q.end() || it->second.empty()) return fallback;
    const auto v = parse_double(it->second);
    if (!v || std::floor(*v) != *v || *v < 0 || *v > 100000)
        bad_request(std::string("query parameter '") + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(*v);
}

}  // namespace

struct Service::Impl {
    httplib::Server server;
};

Service::Service(CampaignStore& store, ServiceOptions options)
    : store_(store), options_(std::move(options)), impl_(std::make_shared<Impl>()) {}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query, const std::string& body) {
    try {
        const auto seg = split_path(path);
        if (seg.empty() || seg[0] != "campaigns")
            throw Error(ErrorCode::NotFound, "no route for " + method + " " + path);

        if (seg.size() == 1) {
            if (method == "GET") {
                Json list = Json::array();
                for (const auto& s : store_.list())
                    list.push_back(Json{{"id", s.id}, {"name", s.name}, {"phases", s.phases}, {"modified", s.modified}});
                return json_response(200, Json{{"campaigns", list}});
            }
            if (method == "POST") {
                const Campaign c = campaign_from_request(parse_body(body));
                store_.create(c);
                return json_response(201, json_io::to_json(c));
            }
        }
        const std::string id = seg.size() > 1 ? seg[1] : "";
        if (seg.size() == 2 && method == "GET") return json_response(200, json_io::to_json(store_.get(id)));

        if (seg.size() == 3 && seg[2] == "phases" && method == "POST") {
            const DesignRequest request = design_request(parse_body(body));
            int number = 0;
            const Campaign c = store_.update(id, [&](Campaign& c) { number = add_phase(c, request); });
            const Phase& p = c.phase(number);
            return json_response(201, Json{{"phase", json_io::to_json(p, number)},
                                           {"worksheet", worksheet_rows(c, p)},
                                           {"warnings", design_warnings(p.design)}});
        }

        if (seg.size() >= 4 && seg[2] == "phases") {
            const int n = phase_number(seg[3]);
            if (seg.size() == 4 && method == "GET") {
                const Campaign c = store_.get(id);
                const Phase& p = c.phase(n);
                return json_response(200, Json{{"phase", json_io::to_json(p, n)}, {"worksheet", worksheet_rows(c, p)}});
            }
            if (seg.size() == 5) {
                const std::string& leaf = seg[4];
                if (leaf == "worksheet.csv" && method == "GET")
                    return {200, "text/csv; charset=utf-8", export_worksheet(store_.get(id), n)};
                if (leaf == "responses" && method == "PUT") {
                    const auto entries = response_entries(parse_body(body));
                    const Campaign c = store_.update(id, [&](Campaign& c) { set_responses(c, n, entries); });
                    const Phase& p = c.phase(n);
                    return json_response(200, Json{{"phase", json_io::to_json(p, n)}, {"worksheet", worksheet_rows(c, p)}});
                }
                if (leaf == "analysis" && method == "POST") {
                    const Json j = parse_body(body);
                    allow_only(j, {"terms", "radii", "origin"}, "analysis request");
                    const std::size_t k = store_.get(id).factors.size();
                    const TermBasis basis = j.contains("terms") ? basis_from(j["terms"], k) : TermBasis::parse(k, "fo");
                    AnalysisOptions options;
                    if (j.contains("radii")) options.radii = numbers(j["radii"], "radii");
                    if (j.contains("origin") && !j["origin"].is_null()) options.origin = numbers(j["origin"], "origin");
                    const Campaign c = store_.update(id, [&](Campaign& c) { run_analysis(c, n, basis, options); });
                    return json_response(200, analysis_body(*c.phase(n).analysis));
                }
                if (leaf == "analysis" && method == "GET") {
                    const Campaign c = store_.get(id);
                    const Phase& p = c.phase(n);
                    if (!p.analysis) throw Error(ErrorCode::NoModel, "phase " + std::to_string(n) + " has no analysis");
                    return json_response(200, analysis_body(*p.analysis));
                }
                if (leaf == "surface" && method == "GET") {
                    const Campaign c = store_.get(id);
                    SurfaceRequest req;
                    if (auto it = query.find("x"); it != query.end()) req.x_factor = it->second;
                    if (auto it = query.find("y"); it != query.end()) req.y_factor = it->second;
                    req.grid = size_param(query, "grid", req.grid);
                    req.levels = size_param(query, "levels", req.levels);
                    if (auto it = query.find("terms"); it != query.end() && !it->second.empty())
                        req.basis = TermBasis::parse(c.factors.size(), it->second);
                    const SurfaceResult s = phase_surface(c, n, req);
                    return json_response(200, Json{{"x_factor", s.x_factor},
                                                   {"y_factor", s.y_factor},
                                                   {"grid", json_io::to_json(s.grid)},
                                                   {"contours", json_io::to_json(s.contours)}});
                }
            }
        }
        throw Error(ErrorCode::NotFound, "no route for " + method + " " + path);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const std::exception& e) {
        return json_response(500, json_io::error_to_json(ErrorCode::Internal, e.what()));
    }
}

namespace {

void install_routes(httplib::Server& server, Service& service, const ServiceOptions& options) {
    auto forward = [&service, &options](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query[k] = v;
        const HttpResponse out = service.handle(req.method, req.path, query, req.body);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
        if (options.allowed_origin) {
            const auto origin = req.get_header_value("Origin");
            if (origin == *options.allowed_origin) {
                res.set_header("Access-Control-Allow-Origin", origin);
                res.set_header("Vary", "Origin");
            }
        }
    };
    const std::string pattern = R"(/campaigns(/.*)?)";
    server.Get(pattern, forward);
    server.Post(pattern, forward);
    server.Put(pattern, forward);
    server.Options(pattern, [&options](const httplib::Request& req, httplib::Response& res) {
        res.status = 204;
        if (options.allowed_origin && req.get_header_value("Origin") == *options.allowed_origin) {
            res.set_header("Access-Control-Allow-Origin", *options.allowed_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Vary", "Origin");
        }
    });
    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
}

}  // namespace

bool Service::listen() {
    install_routes(impl_->server, *this, options_);
    return impl_->server.listen(options_.host, options_.port);
}

int Service::bind_any_port() {
    install_routes(impl_->server, *this, options_);
    return impl_->server.bind_to_any_port(options_.host);
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace rsmkit
