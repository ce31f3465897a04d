#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "oscwalk/classes.hpp"
#include "oscwalk/kernel.hpp"
#include "oscwalk/measure.hpp"

namespace oscwalk {

// Configuration / input validation failure; the CLI maps it to the usage
// exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// {"type":"finite","atoms":{"2":0.3,...}} | {"type":"geometric","sign":
// "positive","r":0.5} | {"type":"power","sign":"negative","s":2.5}
nlohmann::json measure_to_json(const LatticeMeasure& m);
LatticeMeasure measure_from_json(const nlohmann::json& j);

struct RunConfig {
  LatticeMeasure mu = LatticeMeasure::finite_atoms({{1, 1.0}});
  LatticeMeasure mu_prime = LatticeMeasure::finite_atoms({{-1, 1.0}});
  double alpha = 0.0;
  long long x0 = 0;
  Window window{-40, 40};
  std::uint64_t seed = 1;
  double eps_mass = 1e-12;
  std::string output = "out";
  std::string dump_path;
  long long n_steps = 100000;
  long long n_traj = 1;
  int parallelism = 1;
  double p = 0.5;
  long long h_max = 30;
  long long n_sim = 20000;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

// "lo:hi" (also accepts "lo,hi")
Window parse_window(const std::string& text);

nlohmann::json decomposition_to_json(const ClassDecomposition& dec,
                                     Window window);
nlohmann::json crossing_to_json(const CrossingClass& cc);

// site,value rows
void write_measure_csv(const std::string& path, const ZMeasure& m);
// sidecar {window, tail_bound, normalized}
void write_measure_sidecar(const std::string& path, const ZMeasure& m,
                           bool normalized);
// x,y,prob rows over all kernel rows
void write_kernel_csv(const std::string& path, const CrossingKernel& kernel);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// JSON-safe number: infinities become the strings "inf" / "-inf"
nlohmann::json json_number(double v);

}  // namespace oscwalk
