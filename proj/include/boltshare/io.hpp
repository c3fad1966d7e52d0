#pragma once

// File formats: joint config JSON, model JSON, and the CSV artifacts.

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "boltshare/csv.hpp"
#include "boltshare/joint_model.hpp"
#include "boltshare/network.hpp"
#include "boltshare/optimizer.hpp"
#include "boltshare/surrogate.hpp"

namespace boltshare {

using nlohmann::json;

/// A document that does not match the expected schema.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline double require_number(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string("key '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(std::string("key '") + key + "' must be finite");
  return d;
}

}  // namespace detail

inline const std::vector<std::string>& joint_config_keys() {
  static const std::vector<std::string> keys{"l_p_mm",   "d_mm",     "phi_mm",   "t_mm",
                                             "w_mm",     "E_px_GPa", "E_py_GPa", "G_p_GPa",
                                             "E_b_GPa",  "G_b_GPa",  "mu_b",     "v",
                                             "k",        "beta",     "knee_c_policy", "n_bolts"};
  return keys;
}

/// Parses and validates a joint config. Every numeric key is required;
/// `knee_c_policy` defaults to "offset_from_b" and `n_bolts` to 3.
inline JointConfig joint_config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("joint config must be a JSON object");
  const auto& known = joint_config_keys();
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw SchemaError("unknown key '" + key + "' in joint config");

  using detail::require_number;
  JointConfig c;
  c.geometry.pitch_mm = require_number(j, "l_p_mm");
  c.geometry.bolt_diameter_mm = require_number(j, "d_mm");
  c.geometry.head_diameter_mm = require_number(j, "phi_mm");
  c.geometry.thickness_mm = require_number(j, "t_mm");
  c.geometry.width_mm = require_number(j, "w_mm");
  c.laminate.Ex_GPa = require_number(j, "E_px_GPa");
  c.laminate.Ey_GPa = require_number(j, "E_py_GPa");
  c.laminate.G_GPa = require_number(j, "G_p_GPa");
  c.bolt.E_GPa = require_number(j, "E_b_GPa");
  c.bolt.G_GPa = require_number(j, "G_b_GPa");
  c.bolt.poisson = require_number(j, "mu_b");
  c.friction.friction_coeff = require_number(j, "v");
  c.friction.torque_coeff = require_number(j, "k");
  c.friction.bending_fraction = require_number(j, "beta");
  if (j.contains("n_bolts")) {
    if (!j["n_bolts"].is_number_integer()) throw SchemaError("key 'n_bolts' must be an integer");
    c.geometry.n_bolts = j["n_bolts"].get<int>();
  }
  if (j.contains("knee_c_policy")) {
    const auto& p = j["knee_c_policy"];
    if (!p.is_string()) throw SchemaError("key 'knee_c_policy' must be a string");
    if (p == "offset_from_b") c.knee_policy = KneePolicy::offset_from_b;
    else if (p == "absolute") c.knee_policy = KneePolicy::absolute;
    else throw SchemaError("knee_c_policy must be 'offset_from_b' or 'absolute'");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return c;
}

inline json joint_config_to_json(const JointConfig& c) {
  return {{"l_p_mm", c.geometry.pitch_mm},
          {"d_mm", c.geometry.bolt_diameter_mm},
          {"phi_mm", c.geometry.head_diameter_mm},
          {"t_mm", c.geometry.thickness_mm},
          {"w_mm", c.geometry.width_mm},
          {"n_bolts", c.geometry.n_bolts},
          {"E_px_GPa", c.laminate.Ex_GPa},
          {"E_py_GPa", c.laminate.Ey_GPa},
          {"G_p_GPa", c.laminate.G_GPa},
          {"E_b_GPa", c.bolt.E_GPa},
          {"G_b_GPa", c.bolt.G_GPa},
          {"mu_b", c.bolt.poisson},
          {"v", c.friction.friction_coeff},
          {"k", c.friction.torque_coeff},
          {"beta", c.friction.bending_fraction},
          {"knee_c_policy",
           c.knee_policy == KneePolicy::offset_from_b ? "offset_from_b" : "absolute"}};
}

// ---------------------------------------------------------------------------
// Surrogate model

inline constexpr int kModelFormatVersion = 1;

inline json model_to_json(const SurrogateModel& m) {
  json layers = json::array();
  for (const auto& l : m.net.layers())
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  return {{"format", "boltshare-mlp"},
          {"version", kModelFormatVersion},
          {"layer_sizes", m.net.layer_sizes()},
          {"hidden_activation", "relu"},
          {"output_activation", "identity"},
          {"layers", layers},
          {"normalization", {{"lo", m.norm.lo}, {"hi", m.norm.hi}}}};
}

inline SurrogateModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "boltshare-mlp") throw SchemaError("not a boltshare-mlp document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw SchemaError("unsupported model version " + j.at("version").dump());
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers"))
      layers.push_back({l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                        l.at("weights").get<std::vector<double>>(),
                        l.at("bias").get<std::vector<double>>()});
    SurrogateModel m;
    m.net = Mlp::from_layers(std::move(layers));
    if (m.net.layer_sizes() != j.at("layer_sizes").get<std::vector<std::size_t>>())
      throw SchemaError("layer_sizes disagree with layer shapes");
    if (m.net.input_size() != kDesignDim || m.net.output_size() != 1)
      throw SchemaError("model must map 6 inputs to 1 output");
    m.norm.lo = j.at("normalization").at("lo").get<DesignVector>();
    m.norm.hi = j.at("normalization").at("hi").get<DesignVector>();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model document: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV artifacts

inline void write_dataset_csv(std::ostream& os, std::span<const Sample> samples) {
  std::string buf(kDatasetHeader);
  buf.push_back('\n');
  for (const auto& s : samples) {
    for (double v : s.x) {
      csv::append_number(buf, v);
      buf.push_back(',');
    }
    csv::append_number(buf, s.u);
    buf.push_back('\n');
  }
  os << buf;
}

inline Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("dataset: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader)
    throw SchemaError("dataset: expected header '" + std::string(kDatasetHeader) + "'");
  Dataset ds;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != kDesignDim + 1)
      throw SchemaError("dataset: row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " fields");
    Sample s{};
    try {
      for (std::size_t k = 0; k < kDesignDim; ++k) s.x[k] = csv::parse_number(fields[k]);
      s.u = csv::parse_number(fields[kDesignDim]);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("dataset: row " + std::to_string(row) + ": " + e.what());
    }
    if (!in_design_space(s.x))
      throw SchemaError("dataset: row " + std::to_string(row) + " outside the design space");
    if (!(s.u >= 0.0 && s.u <= 1.0))
      throw SchemaError("dataset: row " + std::to_string(row) + " has u outside [0, 1]");
    ds.samples.push_back(s);
  }
  return ds;
}

inline void write_history_csv(std::ostream& os, const LoadHistory& h) {
  const std::size_t n = h.records.empty() ? 0 : h.records.front().bolt_loads_N.size();
  std::string buf = "u_mm,P_N";
  for (std::size_t i = 1; i <= n; ++i) buf += ",F" + std::to_string(i) + "_N";
  for (std::size_t i = 1; i <= n; ++i) buf += ",phase" + std::to_string(i);
  buf.push_back('\n');
  for (const auto& r : h.records) {
    csv::append_number(buf, r.u_mm);
    buf.push_back(',');
    csv::append_number(buf, r.load_N);
    for (double f : r.bolt_loads_N) {
      buf.push_back(',');
      csv::append_number(buf, f);
    }
    for (Phase p : r.phases) {
      buf.push_back(',');
      buf += std::to_string(static_cast<int>(p));
    }
    buf.push_back('\n');
  }
  os << buf;
}

inline void write_trace_csv(std::ostream& os, const OptimizationTrace& t) {
  std::string buf = "iter,best_u,mean_u,elapsed_s\n";
  for (const auto& r : t.iterations) {
    buf += std::to_string(r.iter);
    buf.push_back(',');
    csv::append_number(buf, r.best_u);
    buf.push_back(',');
    csv::append_number(buf, r.mean_u);
    buf.push_back(',');
    csv::append_number(buf, r.elapsed_s);
    buf.push_back('\n');
  }
  os << buf;
}

inline void write_training_csv(std::ostream& os, std::span<const EpochRecord> history) {
  std::string buf = "epoch,train_loss,val_loss,train_mse,val_mse\n";
  for (const auto& r : history) {
    buf += std::to_string(r.epoch);
    for (double v : {r.train_loss, r.validation_loss, r.train_mse, r.validation_mse}) {
      buf.push_back(',');
      csv::append_number(buf, v);
    }
    buf.push_back('\n');
  }
  os << buf;
}

inline json distribution_to_json(const DistributionResult& d) {
  return {{"target_load_N", d.target_load_N},
          {"u_mm", d.u_mm},
          {"bolt_loads_N", d.bolt_loads_N},
          {"ratios", d.ratios},
          {"unevenness", d.unevenness}};
}

}  // namespace boltshare
