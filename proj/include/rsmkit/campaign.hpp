#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsmkit/design.hpp"
#include "rsmkit/fit.hpp"
#include "rsmkit/inference.hpp"
#include "rsmkit/optimize.hpp"
#include "rsmkit/surface.hpp"

namespace rsmkit {

enum class DesignType { Ccd, Factorial, BoxBehnken };

std::string_view to_string(DesignType t) noexcept;
DesignType parse_design_type(std::string_view s);  // "ccd" | "factorial" | "bbd"

struct DesignRequest {
    DesignType type = DesignType::Ccd;
    AlphaRule alpha = AlphaRule::rotatable();
    int centers = 1;
    int replicates = 1;
    int blocks = 1;
    std::optional<std::uint64_t> seed;  // campaign default when absent
    int fraction = 1;                   // 1/fraction of the factorial core; only 1 is supported

    bool operator==(const DesignRequest&) const = default;
};

Design make_design(std::span<const FactorSpec> factors, const DesignRequest& request, std::uint64_t default_seed);

enum class WorksheetStatus { Issued, PartiallyFilled, Complete };

std::string_view to_string(WorksheetStatus s) noexcept;

struct AnalysisResult {
    TermBasis basis;
    FittedModel model;
    AnovaTable anova;
    std::vector<CoefficientTest> tests;
    std::string tests_note;  // set when tests are unavailable (saturated model)
    std::optional<StationaryPoint> stationary;
    std::optional<DescentPath> path;
    std::string path_note;  // set when no direction exists

    bool operator==(const AnalysisResult&) const = default;
};

struct Phase {
    DesignRequest request;
    Design design;
    std::vector<std::optional<double>> measured;  // raw measurements, indexed like design.points
    std::optional<AnalysisResult> analysis;
    std::string decision_note;

    [[nodiscard]] WorksheetStatus status() const noexcept;
    [[nodiscard]] std::size_t filled() const noexcept;

    bool operator==(const Phase&) const = default;
};

struct Campaign {
    std::string id;
    std::string name;
    std::vector<FactorSpec> factors;
    std::string response_name = "response";
    std::optional<double> target_value;
    Goal goal = Goal::Minimize;
    std::uint64_t default_seed = 1;
    std::string created;
    std::string modified;
    std::vector<Phase> phases;

    // Phase numbers are 1-based; UnknownPhase otherwise.
    [[nodiscard]] const Phase& phase(int number) const;
    Phase& phase(int number);

    bool operator==(const Campaign&) const = default;
};

std::string utc_timestamp();
std::string generate_campaign_id();

Campaign new_campaign(std::string name, std::vector<FactorSpec> factors, std::string response_name,
                      std::optional<double> target_value, Goal goal, std::uint64_t default_seed = 1);

// Appends a new phase; returns its number.
int add_phase(Campaign& campaign, const DesignRequest& request);

// Analysis-ready responses: |measured − target| when a target is set.
std::vector<std::optional<double>> derived_responses(const Campaign& campaign, const Phase& phase);

std::string export_worksheet(const Campaign& campaign, int phase_number);

struct ResponseEntry {
    int std_order = 0;
    int block = 0;
    std::optional<double> value;  // nullopt clears the entry
};

// Keyed by (std_order, block). Complete phases accept only an identical
// resubmission (no-op); any change is PhaseImmutable.
const Phase& set_responses(Campaign& campaign, int phase_number, std::span<const ResponseEntry> entries);

// Parses a filled worksheet and applies it through set_responses. Empty
// response cells are skipped.
const Phase& ingest_responses(Campaign& campaign, int phase_number, std::string_view csv);

struct AnalysisOptions {
    std::vector<double> radii{0.5, 1.0, 1.5, 2.0};
    std::optional<std::vector<double>> origin;
};

const AnalysisResult& run_analysis(Campaign& campaign, int phase_number, const TermBasis& basis,
                                   const AnalysisOptions& options = {});

struct SurfaceRequest {
    std::string x_factor;  // defaults: first and second factor
    std::string y_factor;
    std::size_t grid = 51;
    std::size_t levels = 10;
    std::optional<TermBasis> basis;  // refit with this basis instead of the stored analysis
};

struct SurfaceResult {
    std::string x_factor;
    std::string y_factor;
    SurfaceGrid grid;
    ContourSet contours;
};

// Grid and contours of a phase's fitted surface over the default plotting
// range, other factors held at the center. NoModel when nothing is fitted.
SurfaceResult phase_surface(const Campaign& campaign, int phase_number, const SurfaceRequest& request);

// Atomic write: temp file in the same directory, then rename.
void save(const Campaign& campaign, const std::filesystem::path& path);
Campaign load(const std::filesystem::path& path);

inline constexpr int kSchemaVersion = 1;

}  // namespace rsmkit
