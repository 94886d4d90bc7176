#pragma once

// Batch front end. A run is `seqlr <command> <config.ini>`; every command
// writes CSV data, JSON reports and a run manifest into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqlr/maps.hpp"
#include "seqlr/noise.hpp"
#include "seqlr/sequence.hpp"

namespace seqlr::cli {

struct MapSpec {
  std::string name;
  int degree = 2;
  std::vector<FourierTerm> terms;
  std::vector<FourierTerm> dot;  ///< noisy mode drift direction
  std::optional<std::filesystem::path> base_file;
  std::optional<std::filesystem::path> dot_file;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::uint64_t hash = 0;  ///< FNV-1a of the file bytes

  std::filesystem::path output = "out";
  unsigned threads = 0;
  bool certified = false;

  int n = 256;
  SystemMode mode = SystemMode::Deterministic;
  MapSpec reference;

  ScheduleKind schedule = ScheduleKind::Constant;
  std::vector<MapSpec> maps;
  double amplitude = 0.0;
  int period = 0;
  std::uint64_t schedule_seed = 0;
  std::optional<Window> window;  ///< nullopt: sized automatically

  std::vector<FourierTerm> kick_field;
  std::vector<FourierTerm> kick_remainder;
  std::string noise_preset = "uniform";
  std::optional<std::filesystem::path> noise_file;
  std::vector<FourierTerm> drift_dot;  ///< used by maps without their own `dot`

  double eps = 0.0;
  std::vector<double> eps_list;
  bool symmetric = false;
  std::optional<int> burn_in;     ///< nullopt: from the rate certificate
  std::optional<int> truncation;  ///< nullopt: from the tail tolerance
  double tail_tolerance = 1e-7;
  double validate_tolerance = 1e-2;
  double pullback_tolerance = 1e-8;
  int report = 8;
  bool two_seed = false;
  std::optional<std::filesystem::path> seed_file;

  int memory_start = 0;
  int memory_k_max = 40;
  int memory_harmonic = 1;
  std::optional<std::filesystem::path> memory_file;

  long samples = 1'000'000;
  int steps = 8;
  int bins = 64;
  std::uint64_t sim_seed = 1;
  std::optional<double> sim_eps;
};

/// Parses and checks an INI config. Throws ConfigError naming the field.
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);

struct Invocation {
  std::string command;
  std::filesystem::path config;
  bool emit_gnuplot = false;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"certify", "equivariant", "memory", "respond", "simulate"};
  return c;
}

/// Runs one command; returns the process exit code (0 ok, 1 config, 2
/// invalid system, 3 non-convergence, 4 tolerance failure).
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace seqlr::cli
