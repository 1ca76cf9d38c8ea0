#include "rsmkit/campaign.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "rsmkit/csv.hpp"
#include "rsmkit/error.hpp"
#include "rsmkit/format.hpp"
#include "rsmkit/json_io.hpp"

namespace rsmkit {

namespace {

std::string factor_header(const FactorSpec& f) { return f.unit.empty() ? f.name : f.name + "[" + f.unit + "]"; }

std::optional<int> parse_int(std::string_view text) {
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v) || std::floor(*v) != *v || std::fabs(*v) > 1e9) return std::nullopt;
    return static_cast<int>(*v);
}

void touch(Campaign& c) { c.modified = utc_timestamp(); }

void write_all(int fd, const std::string& data, const std::filesystem::path& path) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) throw Error(ErrorCode::IoError, "write failed for " + path.string());
        off += static_cast<std::size_t>(n);
    }
}

}  // namespace

std::string_view to_string(DesignType t) noexcept {
    switch (t) {
        case DesignType::Ccd: return "ccd";
        case DesignType::Factorial: return "factorial";
        case DesignType::BoxBehnken: return "bbd";
    }
    return "ccd";
}

DesignType parse_design_type(std::string_view s) {
    if (s == "ccd") return DesignType::Ccd;
    if (s == "factorial") return DesignType::Factorial;
    if (s == "bbd") return DesignType::BoxBehnken;
    throw Error(ErrorCode::InvalidArgument, "design type must be ccd, factorial or bbd, got '" + std::string(s) + "'");
}

Design make_design(std::span<const FactorSpec> factors, const DesignRequest& request, std::uint64_t default_seed) {
    require_full_factorial(request.fraction);
    const std::uint64_t seed = request.seed.value_or(default_seed);
    switch (request.type) {
        case DesignType::Ccd:
            return ccd(factors, request.alpha, request.centers, request.replicates, request.blocks, seed);
        case DesignType::Factorial:
            return ccd(factors, AlphaRule::none(), request.centers, request.replicates, request.blocks, seed);
        case DesignType::BoxBehnken:
            if (request.replicates != 1 || request.blocks != 1)
                throw Error(ErrorCode::UnsupportedDesign, "Box-Behnken designs support one replicate and one block");
            return box_behnken(factors, request.centers, seed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown design type");
}

std::string_view to_string(WorksheetStatus s) noexcept {
    switch (s) {
        case WorksheetStatus::Issued: return "Issued";
        case WorksheetStatus::PartiallyFilled: return "PartiallyFilled";
        case WorksheetStatus::Complete: return "Complete";
    }
    return "Issued";
}

std::size_t Phase::filled() const noexcept {
    std::size_t n = 0;
    for (const auto& m : measured) n += m.has_value() ? 1 : 0;
    return n;
}

WorksheetStatus Phase::status() const noexcept {
    const std::size_t n = filled();
    if (n == 0) return WorksheetStatus::Issued;
    return n == measured.size() ? WorksheetStatus::Complete : WorksheetStatus::PartiallyFilled;
}

const Phase& Campaign::phase(int number) const {
    if (number < 1 || static_cast<std::size_t>(number) > phases.size())
        throw Error(ErrorCode::UnknownPhase, "campaign has no phase " + std::to_string(number));
    return phases[static_cast<std::size_t>(number) - 1];
}

Phase& Campaign::phase(int number) {
    return const_cast<Phase&>(static_cast<const Campaign&>(*this).phase(number));
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string generate_campaign_id() {
    std::random_device rd;
    const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Campaign new_campaign(std::string name, std::vector<FactorSpec> factors, std::string response_name,
                      std::optional<double> target_value, Goal goal, std::uint64_t default_seed) {
    if (factors.size() < 2 || factors.size() > 8)
        throw Error(ErrorCode::DimensionOutOfRange, "a campaign needs between 2 and 8 factors");
    validate_factors(factors);
    if (response_name.empty()) throw Error(ErrorCode::InvalidArgument, "response name must be nonempty");
    if (target_value && !std::isfinite(*target_value))
        throw Error(ErrorCode::NonFiniteInput, "target value must be finite");
    Campaign c;
    c.id = generate_campaign_id();
    c.name = name.empty() ? c.id : std::move(name);
    c.factors = std::move(factors);
    c.response_name = std::move(response_name);
    c.target_value = target_value;
    c.goal = goal;
    c.default_seed = default_seed;
    c.created = utc_timestamp();
    c.modified = c.created;
    return c;
}

int add_phase(Campaign& campaign, const DesignRequest& request) {
    Phase p;
    p.request = request;
    p.design = make_design(campaign.factors, request, campaign.default_seed);
    p.measured.assign(p.design.points.size(), std::nullopt);
    campaign.phases.push_back(std::move(p));
    touch(campaign);
    return static_cast<int>(campaign.phases.size());
}

std::vector<std::optional<double>> derived_responses(const Campaign& campaign, const Phase& phase) {
    std::vector<std::optional<double>> out = phase.measured;
    if (campaign.target_value)
        for (auto& v : out)
            if (v) v = std::fabs(*v - *campaign.target_value);
    return out;
}

std::string export_worksheet(const Campaign& campaign, int phase_number) {
    const Phase& phase = campaign.phase(phase_number);
    const Design& d = phase.design;

    csv::Row header{"run_order", "std_order", "block"};
    for (const auto& f : d.factors) header.push_back(factor_header(f));
    header.push_back(campaign.response_name);
    std::string out = csv::write_row(header);

    std::vector<std::size_t> order(d.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d.points[a].run_order < d.points[b].run_order; });
    for (std::size_t idx : order) {
        const auto& p = d.points[idx];
        csv::Row row{std::to_string(p.run_order), std::to_string(p.std_order), std::to_string(p.block)};
        for (double v : to_natural(d.factors, p.coded)) row.push_back(format_double(v));
        row.push_back(phase.measured[idx] ? format_double(*phase.measured[idx]) : std::string());
        out += csv::write_row(row);
    }
    return out;
}

const Phase& set_responses(Campaign& campaign, int phase_number, std::span<const ResponseEntry> entries) {
    Phase& phase = campaign.phase(phase_number);
    std::map<std::pair<int, int>, std::size_t> index;
    for (std::size_t i = 0; i < phase.design.points.size(); ++i)
        index[{phase.design.points[i].std_order, phase.design.points[i].block}] = i;

    std::vector<std::optional<double>> updated = phase.measured;
    std::map<std::pair<int, int>, bool> seen;
    for (const auto& e : entries) {
        const std::pair<int, int> key{e.std_order, e.block};
        const auto it = index.find(key);
        if (it == index.end())
            throw Error(ErrorCode::UnknownRun, "no run with std_order " + std::to_string(e.std_order) +
                                                   " in block " + std::to_string(e.block));
        if (!seen.emplace(key, true).second)
            throw Error(ErrorCode::DuplicateRun, "run std_order " + std::to_string(e.std_order) + " block " +
                                                     std::to_string(e.block) + " appears more than once");
        if (e.value && !std::isfinite(*e.value))
            throw Error(ErrorCode::ResponseOutOfRange, "response for std_order " + std::to_string(e.std_order) +
                                                           " is not finite");
        updated[it->second] = e.value;
    }

    if (phase.status() == WorksheetStatus::Complete) {
        if (updated != phase.measured)
            throw Error(ErrorCode::PhaseImmutable,
                        "phase " + std::to_string(phase_number) + " is complete; start a follow-up phase instead");
        return phase;
    }
    if (updated != phase.measured) {
        phase.measured = std::move(updated);
        phase.analysis.reset();
        touch(campaign);
    }
    return phase;
}

const Phase& ingest_responses(Campaign& campaign, int phase_number, std::string_view text) {
    const Phase& phase = campaign.phase(phase_number);
    const auto rows = csv::parse(text);
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "worksheet is empty");
    const auto& header = rows.front();
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto std_col = column("std_order");
    const auto block_col = column("block");
    if (!std_col || !block_col)
        throw Error(ErrorCode::InvalidArgument, "worksheet header needs std_order and block columns");
    const std::size_t response_col = column(campaign.response_name).value_or(header.size() - 1);
    const std::size_t expected_fields = 3 + phase.design.k() + 1;

    std::vector<ResponseEntry> entries;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        const int line = static_cast<int>(r) + 1;
        if (row.size() != header.size() || row.size() != expected_fields)
            throw Error(ErrorCode::InvalidArgument, "worksheet line " + std::to_string(line) + " has " +
                                                        std::to_string(row.size()) + " fields, expected " +
                                                        std::to_string(expected_fields));
        auto malformed = [&](std::size_t col) {
            return Error(ErrorCode::MalformedNumber,
                         "malformed number at line " + std::to_string(line) + ", column " + header[col] + ": '" +
                             row[col] + "'",
                         {std::to_string(line), header[col]});
        };
        const auto std_order = parse_int(row[*std_col]);
        if (!std_order) throw malformed(*std_col);
        const auto block = parse_int(row[*block_col]);
        if (!block) throw malformed(*block_col);
        for (std::size_t c = 3; c < 3 + phase.design.k(); ++c)
            if (!parse_double(row[c])) throw malformed(c);
        const std::string& cell = row[response_col];
        if (cell.empty()) continue;
        const auto value = parse_double(cell);
        if (!value) throw malformed(response_col);
        if (!std::isfinite(*value))
            throw Error(ErrorCode::ResponseOutOfRange, "response at line " + std::to_string(line) + " is not finite");
        entries.push_back({*std_order, *block, *value});
    }
    return set_responses(campaign, phase_number, entries);
}

const AnalysisResult& run_analysis(Campaign& campaign, int phase_number, const TermBasis& basis,
                                   const AnalysisOptions& options) {
    Phase& phase = campaign.phase(phase_number);
    if (phase.status() != WorksheetStatus::Complete)
        throw Error(ErrorCode::PhaseIncomplete, "phase incomplete: " + std::to_string(phase.filled()) + " of " +
                                                    std::to_string(phase.measured.size()) + " responses entered");
    if (static_cast<std::size_t>(basis.k) != campaign.factors.size())
        throw Error(ErrorCode::DimensionMismatch, "term basis does not match the campaign's factor count");

    std::vector<double> y;
    for (const auto& v : derived_responses(campaign, phase)) y.push_back(*v);

    AnalysisResult result;
    result.basis = basis;
    result.model = fit(phase.design, y, basis, campaign.id + "/phase/" + std::to_string(phase_number));
    result.anova = anova(phase.design, y, basis);
    if (result.model.df_residual >= 1)
        result.tests = coefficient_tests(result.model);
    else
        result.tests_note = "no residual degrees of freedom: coefficient tests unavailable";
    if (basis.include_pq) result.stationary = stationary_point(result.model);

    PathOptions path_options;
    path_options.origin = options.origin;
    path_options.region_radius = phase.design.alpha.value_or(1.0);
    try {
        result.path = steepest_path(result.model, campaign.goal, options.radii, path_options);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroGradient) throw;
        result.path_note = std::string("no direction: ") + e.what();
    }

    phase.analysis = std::move(result);
    touch(campaign);
    return *phase.analysis;
}

SurfaceResult phase_surface(const Campaign& campaign, int phase_number, const SurfaceRequest& request) {
    const Phase& phase = campaign.phase(phase_number);
    auto factor_index = [&](const std::string& name, std::size_t fallback) {
        if (name.empty()) return fallback;
        for (std::size_t i = 0; i < campaign.factors.size(); ++i)
            if (campaign.factors[i].name == name) return i;
        throw Error(ErrorCode::InvalidArgument, "unknown factor '" + name + "'");
    };
    const std::size_t xi = factor_index(request.x_factor, 0);
    const std::size_t yi = factor_index(request.y_factor, 1);

    FittedModel model;
    if (request.basis) {
        if (phase.status() != WorksheetStatus::Complete)
            throw Error(ErrorCode::PhaseIncomplete, "phase incomplete: cannot fit a surface");
        std::vector<double> y;
        for (const auto& v : derived_responses(campaign, phase)) y.push_back(*v);
        model = fit(phase.design, y, *request.basis);
    } else if (phase.analysis) {
        model = phase.analysis->model;
    } else {
        throw Error(ErrorCode::NoModel, "phase " + std::to_string(phase_number) + " has no fitted model; run an analysis first");
    }

    const Range range = default_range(phase.design.alpha);
    SurfaceResult out;
    out.x_factor = campaign.factors[xi].name;
    out.y_factor = campaign.factors[yi].name;
    const std::vector<double> fixed(campaign.factors.size(), 0.0);
    out.grid = evaluate_grid(model, xi, yi, fixed, request.grid, request.grid, range, range);
    const auto levels = default_levels(out.grid, request.levels);
    out.contours = contours(out.grid, levels);
    return out;
}

void save(const Campaign& campaign, const std::filesystem::path& path) {
    const std::string text = json_io::to_json(campaign).dump(2) + "\n";
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    if (!std::filesystem::is_directory(dir))
        throw Error(ErrorCode::IoError, "directory does not exist: " + dir.string());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    try {
        write_all(fd, text, tmp);
        if (::fsync(fd) != 0) throw Error(ErrorCode::IoError, "fsync failed for " + tmp.string());
    } catch (...) {
        ::close(fd);
        std::filesystem::remove(tmp);
        throw;
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
    }
}

Campaign load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return json_io::campaign_from_text(ss.str());
}

}  // namespace rsmkit
