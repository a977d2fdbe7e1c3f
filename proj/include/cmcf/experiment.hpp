#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmcf/config.hpp"

namespace cmcf {

struct ExperimentResult {
  std::string dir;
  std::vector<std::string> files;       // manifest order
  std::vector<std::string> violations;  // empty = all asserted invariants held

  bool passed() const { return violations.empty(); }
};

/// Runs the configured scenario and writes snapshots, metrics.csv,
/// extracts.csv, optional viscosity/cauchy reports and manifest.txt into the
/// output directory. Reruns with the same config are bitwise identical.
ExperimentResult run_experiment(const ScenarioConfig& cfg);

struct SeparationRow {
  double t = 0.0;
  bool contained = false;
  double separation = 0.0;  // right-gauge proxy; -1 when either set is empty
};

struct SeparationReport {
  std::vector<SeparationRow> rows;
  std::string header;  // flags the proxy as approximate
};

/// Evolves two nested initial sets on a shared grid and reports containment
/// of the zero sets plus the right-gauge separation proxy over time.
SeparationReport separation_report(const ScenarioConfig& a,
                                   const ScenarioConfig& b);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t hash_file(const std::string& path);

/// Re-hashes every manifest entry; returns the mismatched files.
std::vector<std::string> verify_manifest(const std::string& dir);

}  // namespace cmcf
