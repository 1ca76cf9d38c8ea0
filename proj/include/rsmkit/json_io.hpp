#pragma once

#include <string>

#include <json.hpp>

#include "rsmkit/campaign.hpp"
#include "rsmkit/error.hpp"
#include "rsmkit/surface.hpp"

namespace rsmkit::json_io {

using Json = nlohmann::ordered_json;

Json to_json(const FactorSpec& f);
Json to_json(const Design& d);
Json to_json(const DesignRequest& r);
Json to_json(const TermBasis& b);
Json to_json(const FittedModel& m);
Json to_json(const AnovaTable& t);
Json to_json(const CoefficientTest& t);
Json to_json(const StationaryPoint& s);
Json to_json(const DescentPath& p);
Json to_json(const AnalysisResult& a);
Json to_json(const Phase& p, int number);
Json to_json(const Campaign& c);  // the full schema-versioned project document
Json to_json(const SurfaceGrid& g);
Json to_json(const ContourSet& c);

// ApiError body: {"code", "message", "detail"}; detail is null when absent.
Json error_to_json(const Error& e);
Json error_to_json(ErrorCode code, const std::string& message);

// Strict readers. Missing or mistyped fields throw CorruptDocument with the
// JSON-pointer path; unknown fields throw SchemaVersionUnsupported.
FactorSpec factor_from_json(const Json& j, const std::string& path = "");
DesignRequest design_request_from_json(const Json& j, const std::string& path = "");
Campaign campaign_from_json(const Json& j);
Campaign campaign_from_text(const std::string& text);

}  // namespace rsmkit::json_io
