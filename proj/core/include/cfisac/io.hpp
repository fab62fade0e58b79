// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

/// Everything needed to regenerate a network deterministically.
struct ScenarioSpec {
  SystemConfig system;
  PathLossModel pathloss;
  std::uint64_t seed = 1;
};

double db_to_linear(double db);
double linear_to_db(double value);

/// JSON document with keys system{...}, pathloss{ref_db,d0,exponent,min_dist},
/// seed. Threshold fields are stored in linear scale.
std::string scenario_to_json(const ScenarioSpec& spec);

/// Parses the document; missing fields keep their defaults. Throws
/// std::invalid_argument on malformed input or violated invariants.
ScenarioSpec scenario_from_json(const std::string& text);

/// FNV-1a hash of the canonical serialized form, for CSV provenance lines.
std::uint64_t config_hash(const ScenarioSpec& spec);

/// Emits "# config <hex-hash>" followed by the header row.
void write_csv_header(std::ostream& os, const std::string& columns,
                      std::uint64_t hash);

/// Flat row: seed, strategy, user rates, eavesdropping rates, MASR values,
/// secrecy values, violation count.
std::string rate_report_row(std::uint64_t seed, const std::string& strategy,
                            const RateReport& report);

}  // namespace cfisac
