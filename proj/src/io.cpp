#include "oscwalk/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace oscwalk {

namespace {

Sign sign_from_string(const std::string& s) {
  if (s == "positive") return Sign::positive;
  if (s == "negative") return Sign::negative;
  throw ConfigError("measure sign must be \"positive\" or \"negative\"");
}

long long parse_site(const std::string& key) {
  std::size_t used = 0;
  long long site;
  try {
    site = std::stoll(key, &used);
  } catch (const std::exception&) {
    throw ConfigError("atom site is not an integer: \"" + key + "\"");
  }
  if (used != key.size())
    throw ConfigError("atom site is not an integer: \"" + key + "\"");
  return site;
}

}  // namespace

nlohmann::json measure_to_json(const LatticeMeasure& m) {
  nlohmann::json j;
  switch (m.kind()) {
    case LatticeMeasure::Kind::finite: {
      j["type"] = "finite";
      nlohmann::json atoms = nlohmann::json::object();
      for (const Atom& a : m.atoms()) atoms[std::to_string(a.site)] = a.mass;
      j["atoms"] = std::move(atoms);
      break;
    }
    case LatticeMeasure::Kind::geometric:
      j["type"] = "geometric";
      j["sign"] = m.tail_sign() == Sign::positive ? "positive" : "negative";
      j["r"] = m.ratio();
      break;
    case LatticeMeasure::Kind::power:
      j["type"] = "power";
      j["sign"] = m.tail_sign() == Sign::positive ? "positive" : "negative";
      j["s"] = m.exponent();
      break;
  }
  return j;
}

LatticeMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ConfigError("measure config needs a \"type\" string");
  std::string type = j["type"].get<std::string>();
  try {
    if (type == "finite") {
      if (!j.contains("atoms") || !j["atoms"].is_object())
        throw ConfigError("finite measure needs an \"atoms\" object");
      std::vector<Atom> atoms;
      for (const auto& [key, val] : j["atoms"].items()) {
        if (!val.is_number())
          throw ConfigError("atom mass must be a number at site " + key);
        atoms.push_back({parse_site(key), val.get<double>()});
      }
      return LatticeMeasure::finite_atoms(std::move(atoms));
    }
    if (type == "geometric") {
      if (!j.contains("sign") || !j.contains("r"))
        throw ConfigError("geometric measure needs \"sign\" and \"r\"");
      return LatticeMeasure::geometric(
          sign_from_string(j["sign"].get<std::string>()),
          j["r"].get<double>());
    }
    if (type == "power") {
      if (!j.contains("sign") || !j.contains("s"))
        throw ConfigError("power measure needs \"sign\" and \"s\"");
      return LatticeMeasure::power(
          sign_from_string(j["sign"].get<std::string>()),
          j["s"].get<double>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid measure: ") + e.what());
  }
  throw ConfigError("unknown measure type \"" + type + "\"");
}

Window parse_window(const std::string& text) {
  std::string t = text;
  auto sep = t.find(':');
  if (sep == std::string::npos) sep = t.find(',');
  if (sep == std::string::npos)
    throw ConfigError("window must look like LO:HI, got \"" + text + "\"");
  try {
    Window w{std::stoll(t.substr(0, sep)), std::stoll(t.substr(sep + 1))};
    if (w.empty()) throw ConfigError("window is empty: \"" + text + "\"");
    return w;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("window must look like LO:HI, got \"" + text + "\"");
  }
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  RunConfig cfg;
  if (!j.contains("mu") || !j.contains("mu_prime"))
    throw ConfigError("config needs \"mu\" and \"mu_prime\" measures");
  cfg.mu = measure_from_json(j["mu"]);
  cfg.mu_prime = measure_from_json(j["mu_prime"]);
  auto get_num = [&](const char* key, double lo, double hi, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number())
      throw ConfigError(std::string("\"") + key + "\" must be a number");
    double v = j[key].get<double>();
    if (v < lo || v > hi)
      throw ConfigError(std::string("\"") + key + "\" out of range");
    return v;
  };
  cfg.alpha = get_num("alpha", 0.0, 1.0, cfg.alpha);
  cfg.x0 = static_cast<long long>(get_num("x0", -1e15, 1e15, double(cfg.x0)));
  cfg.eps_mass = get_num("eps_mass", 1e-18, 0.5, cfg.eps_mass);
  cfg.p = get_num("p", 1e-9, 1.0 - 1e-9, cfg.p);
  cfg.n_steps =
      static_cast<long long>(get_num("n_steps", 1, 1e12, double(cfg.n_steps)));
  cfg.n_traj =
      static_cast<long long>(get_num("n_traj", 1, 1e9, double(cfg.n_traj)));
  cfg.parallelism = static_cast<int>(
      get_num("parallelism", 1, 4096, double(cfg.parallelism)));
  cfg.h_max =
      static_cast<long long>(get_num("h_max", 1, 1e6, double(cfg.h_max)));
  cfg.n_sim =
      static_cast<long long>(get_num("n_sim", 1, 1e9, double(cfg.n_sim)));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ConfigError("\"seed\" must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("window")) {
    const auto& w = j["window"];
    if (w.is_array() && w.size() == 2 && w[0].is_number_integer() &&
        w[1].is_number_integer()) {
      cfg.window = Window{w[0].get<long long>(), w[1].get<long long>()};
      if (cfg.window.empty()) throw ConfigError("window is empty");
    } else if (w.is_string()) {
      cfg.window = parse_window(w.get<std::string>());
    } else {
      throw ConfigError("\"window\" must be [lo, hi] or \"lo:hi\"");
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string())
      throw ConfigError("\"output\" must be a string");
    cfg.output = j["output"].get<std::string>();
  }
  if (j.contains("dump_path")) {
    if (!j["dump_path"].is_string())
      throw ConfigError("\"dump_path\" must be a string");
    cfg.dump_path = j["dump_path"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["mu"] = measure_to_json(cfg.mu);
  j["mu_prime"] = measure_to_json(cfg.mu_prime);
  j["alpha"] = cfg.alpha;
  j["x0"] = cfg.x0;
  j["window"] = {cfg.window.lo, cfg.window.hi};
  j["seed"] = cfg.seed;
  j["eps_mass"] = cfg.eps_mass;
  j["output"] = cfg.output;
  if (!cfg.dump_path.empty()) j["dump_path"] = cfg.dump_path;
  j["n_steps"] = cfg.n_steps;
  j["n_traj"] = cfg.n_traj;
  j["parallelism"] = cfg.parallelism;
  j["p"] = cfg.p;
  j["h_max"] = cfg.h_max;
  j["n_sim"] = cfg.n_sim;
  return j;
}

nlohmann::json decomposition_to_json(const ClassDecomposition& dec,
                                     Window window) {
  nlohmann::json j;
  j["delta"] = dec.delta;
  nlohmann::json classes = nlohmann::json::array();
  for (const ClassDescriptor& c : dec.classes) {
    nlohmann::json jc;
    jc["r"] = c.residue;
    jc["lower"] = c.lower ? nlohmann::json(*c.lower) : nlohmann::json();
    jc["upper"] = c.upper ? nlohmann::json(*c.upper) : nlohmann::json();
    jc["excluded"] = c.excluded;
    if (c.excluded_band) {
      jc["excluded_band"] = {{"band_lo", c.excluded_band->band_lo},
                             {"band_hi", c.excluded_band->band_hi},
                             {"step", c.excluded_band->step},
                             {"upward", c.excluded_band->upward}};
    }
    classes.push_back(std::move(jc));
  }
  j["classes"] = std::move(classes);
  nlohmann::json transient = nlohmann::json::array();
  for (long long x = window.lo; x <= window.hi; ++x)
    if (dec.is_transient(x))
      transient.push_back(
          {{"x", x}, {"absorbed_r", dec.absorbed_residue(x)}});
  j["transient"] = std::move(transient);
  return j;
}

nlohmann::json crossing_to_json(const CrossingClass& cc) {
  auto side = [](const SetDescriptor& s) {
    nlohmann::json j;
    j["lower"] = s.lower ? nlohmann::json(*s.lower) : nlohmann::json();
    j["upper"] = s.upper ? nlohmann::json(*s.upper) : nlohmann::json();
    j["excluded"] = s.excluded;
    return j;
  };
  nlohmann::json j;
  j["r"] = cc.residue;
  j["plus"] = side(cc.plus_side);
  j["minus"] = side(cc.minus_side);
  j["noncrossing"] = cc.noncrossing;
  return j;
}

void write_measure_csv(const std::string& path, const ZMeasure& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "site,value\n";
  for (long long x = m.window.lo; x <= m.window.hi; ++x)
    out << x << "," << nlohmann::json(m.at(x)).dump() << "\n";
}

void write_measure_sidecar(const std::string& path, const ZMeasure& m,
                           bool normalized) {
  nlohmann::json j;
  j["window"] = {m.window.lo, m.window.hi};
  j["tail_bound"] = m.tail_bound;
  j["normalized"] = normalized;
  write_json_file(path, j);
}

void write_kernel_csv(const std::string& path, const CrossingKernel& kernel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,y,prob\n";
  for (const auto& [x, row] : kernel.rows)
    for (const auto& [y, prob] : row.entries)
      out << x << "," << y << "," << nlohmann::json(prob).dump() << "\n";
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON in ") + path + ": " +
                      e.what());
  }
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace oscwalk
