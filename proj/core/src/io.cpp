// SPDX-License-Identifier: Apache-2.0
#include "cfisac/io.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfisac {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double value) { return 10.0 * std::log10(value); }

std::string scenario_to_json(const ScenarioSpec& spec) {
  json j;
  j["system"] = {{"M", spec.system.M},
                 {"N", spec.system.N},
                 {"K", spec.system.K},
                 {"L", spec.system.L},
                 {"rho", spec.system.rho},
                 {"rho_t", spec.system.rho_t},
                 {"tau", spec.system.tau},
                 {"tau_t", spec.system.tau_t},
                 {"nu", spec.system.nu},
                 {"kappa", spec.system.kappa},
                 {"varsigma", spec.system.varsigma},
                 {"area_side", spec.system.area_side},
                 {"spacing_ratio", spec.system.spacing_ratio}};
  j["pathloss"] = {{"ref_db", spec.pathloss.reference_loss_db},
                   {"d0", spec.pathloss.reference_distance},
                   {"exponent", spec.pathloss.exponent},
                   {"min_dist", spec.pathloss.min_distance}};
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json(const std::string& text) {
  ScenarioSpec spec;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario parse: ") + e.what());
  }
  try {
    if (j.contains("system")) {
      const json& s = j["system"];
      spec.system.M = s.value("M", spec.system.M);
      spec.system.N = s.value("N", spec.system.N);
      spec.system.K = s.value("K", spec.system.K);
      spec.system.L = s.value("L", spec.system.L);
      spec.system.rho = s.value("rho", spec.system.rho);
      spec.system.rho_t = s.value("rho_t", spec.system.rho_t);
      spec.system.tau = s.value("tau", spec.system.tau);
      spec.system.tau_t = s.value("tau_t", spec.system.tau_t);
      spec.system.nu = s.value("nu", spec.system.nu);
      spec.system.kappa = s.value("kappa", spec.system.kappa);
      spec.system.varsigma = s.value("varsigma", spec.system.varsigma);
      spec.system.area_side = s.value("area_side", spec.system.area_side);
      spec.system.spacing_ratio =
          s.value("spacing_ratio", spec.system.spacing_ratio);
    }
    if (j.contains("pathloss")) {
      const json& p = j["pathloss"];
      spec.pathloss.reference_loss_db =
          p.value("ref_db", spec.pathloss.reference_loss_db);
      spec.pathloss.reference_distance =
          p.value("d0", spec.pathloss.reference_distance);
      spec.pathloss.exponent = p.value("exponent", spec.pathloss.exponent);
      spec.pathloss.min_distance =
          p.value("min_dist", spec.pathloss.min_distance);
    }
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario fields: ") + e.what());
  }
  spec.system.validate();
  spec.pathloss.validate();
  return spec;
}

std::uint64_t config_hash(const ScenarioSpec& spec) {
  const std::string canon = scenario_to_json(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_csv_header(std::ostream& os, const std::string& columns,
                      std::uint64_t hash) {
  std::ostringstream hex;
  hex << std::hex << hash;
  os << "# config " << hex.str() << "\n" << columns << "\n";
}

std::string rate_report_row(std::uint64_t seed, const std::string& strategy,
                            const RateReport& report) {
  std::ostringstream os;
  os << seed << ',' << strategy;
  for (int k = 0; k < report.rate_user.size(); ++k)
    os << ',' << report.rate_user(k);
  for (int l = 0; l < report.rate_eav.size(); ++l)
    os << ',' << report.rate_eav(l);
  for (int l = 0; l < report.masr.size(); ++l) os << ',' << report.masr(l);
  for (int k = 0; k < report.secrecy.size(); ++k)
    os << ',' << report.secrecy(k);
  os << ',' << report.violations.size();
  return os.str();
}

}  // namespace cfisac
