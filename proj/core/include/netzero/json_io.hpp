#pragma once

// JSON encodings shared by the service, the CLI --json mode and the on-disk
// registry. Field names match the C++ member names. Energies are kWh, money
// is integer minor units, dates are ISO-8601 strings.
//
// Every *_from_json throws Error(schema) on a missing or mistyped field.

#include <nlohmann/json.hpp>

#include "netzero/datastore.hpp"
#include "netzero/finance.hpp"
#include "netzero/forecast.hpp"
#include "netzero/imputation.hpp"
#include "netzero/modelsel.hpp"
#include "netzero/offset.hpp"
#include "netzero/regress.hpp"

namespace netzero {

using json = nlohmann::json;

json to_json(const FacilityConfig& c);
FacilityConfig facility_config_from_json(const json& j);

json to_json(const IngestReport& r);
json to_json(const MeterReading& r);
json to_json(const ImputationResult& r);

json to_json(const RegressorSpec& s);
RegressorSpec regressor_spec_from_json(const json& j);

json to_json(const TrainedModel& m);
/// Throws Error(schema) on an unknown format_version.
TrainedModel trained_model_from_json(const json& j);

json to_json(const BacktestWindow& w);
json to_json(const MetricReport& m);
json to_json(const SpecEvaluation& e);
json to_json(const ModelSelectionReport& r);
ModelSelectionReport selection_report_from_json(const json& j);

json to_json(const ForecastBundle& b);
ForecastBundle forecast_bundle_from_json(const json& j);
json to_json(const HistoricComparison& h);

Rates rates_from_json(const json& j);
json to_json(const Rates& r);
json to_json(const InvoiceResult& r);
json to_json(const WhatIfPoint& p);
json to_json(const AskRecommendation& a);
json to_json(const KpiRow& k);
KpiRow kpi_row_from_json(const json& j);

json to_json(const OffsetProject& p);
json to_json(const OffsetInstance& i);
OffsetInstance offset_instance_from_json(const json& j);
json to_json(const OffsetPlan& p);
OffsetPlan offset_plan_from_json(const json& j);

/// Parses text, mapping syntax errors to Error(schema).
json parse_json(std::string_view text);

}  // namespace netzero
