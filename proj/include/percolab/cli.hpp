#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "percolab/integrals.hpp"

namespace percolab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;

inline constexpr int kSchemaVersion = 1;

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string build;
  std::string started;
  std::string finished;
};

// Content hash of the build (git revision when known at configure time).
std::string build_hash();

// Reads {alpha, p_c, rho, d} from a JSON file. Throws DomainError naming the
// offending field.
integrals::LimitInputs load_inputs(const std::string& path);

// Points as a JSON array of coordinate arrays, given inline or as a file path.
std::vector<std::vector<double>> parse_points(const std::string& text_or_path);

// Dispatches a full command line (argv[0] is the program name). JSON results
// go to `out`, diagnostics and usage text to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace percolab::cli
