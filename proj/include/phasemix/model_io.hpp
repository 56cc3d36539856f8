#ifndef PHASEMIX_MODEL_IO_HPP
#define PHASEMIX_MODEL_IO_HPP

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "phasemix/inference.hpp"
#include "phasemix/model.hpp"

namespace phasemix {

/// Model file contents: the mixture itself plus its closed-set family.
/// JSON schema: {n, m, Q: [m x (n+1) x (n+1)], pi0: [n+1], S0: [m x (n+1)
/// diagonals], gamma: [sets of 1-based state indices, n+1 = absorbing]}.
struct ModelFile {
  MixtureModel model;
  ClosedSetFamily family;
};

namespace detail {

inline void require_keys(const nlohmann::json& j,
                         const std::set<std::string>& keys,
                         const std::string& what) {
  if (!j.is_object()) throw std::runtime_error(what + ": object expected");
  for (const auto& k : keys)
    if (!j.contains(k))
      throw std::runtime_error(what + ": missing key '" + k + "'");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k))
      throw std::runtime_error(what + ": unknown key '" + k + "'");
}

inline Vector parse_vector(const nlohmann::json& j, std::size_t len,
                           const std::string& what) {
  if (!j.is_array() || j.size() != len)
    throw std::runtime_error(what + ": expected an array of length " +
                             std::to_string(len));
  Vector v(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (!j[i].is_number())
      throw std::runtime_error(what + ": non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline Matrix parse_matrix(const nlohmann::json& j, std::size_t dim,
                           const std::string& what) {
  if (!j.is_array() || j.size() != dim)
    throw std::runtime_error(what + ": expected " + std::to_string(dim) +
                             " rows");
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const Vector row = parse_vector(j[i], dim, what + " row");
    for (std::size_t c = 0; c < dim; ++c) m(i, c) = row[c];
  }
  return m;
}

}  // namespace detail

inline ModelFile model_from_json(const nlohmann::json& j) {
  detail::require_keys(j, {"n", "m", "Q", "pi0", "S0", "gamma"}, "model");
  ModelFile out;
  if (!j["n"].is_number_unsigned() || !j["m"].is_number_unsigned())
    throw std::runtime_error("model: n and m must be nonnegative integers");
  out.model.n = j["n"].get<std::size_t>();
  out.model.m = j["m"].get<std::size_t>();
  if (out.model.n == 0 || out.model.m == 0)
    throw std::runtime_error("model: n and m must be positive");
  const std::size_t N = out.model.n + 1;

  if (!j["Q"].is_array() || j["Q"].size() != out.model.m)
    throw std::runtime_error("model: Q must hold one matrix per regime");
  for (std::size_t k = 0; k < out.model.m; ++k)
    out.model.Q.push_back(detail::parse_matrix(j["Q"][k], N, "Q"));

  out.model.pi0 = detail::parse_vector(j["pi0"], N, "pi0");

  if (!j["S0"].is_array() || j["S0"].size() != out.model.m)
    throw std::runtime_error("model: S0 must hold one diagonal per regime");
  for (std::size_t k = 0; k < out.model.m; ++k)
    out.model.S0.push_back(detail::parse_vector(j["S0"][k], N, "S0"));

  if (!j["gamma"].is_array())
    throw std::runtime_error("model: gamma must be an array of index sets");
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& g : j["gamma"]) {
    if (!g.is_array())
      throw std::runtime_error("model: each gamma entry must be an index set");
    std::vector<std::size_t> s;
    for (const auto& x : g) {
      if (!x.is_number_unsigned() || x.get<std::size_t>() < 1 ||
          x.get<std::size_t>() > N)
        throw std::runtime_error(
            "model: gamma indices must lie in 1..n+1 (1-based)");
      s.push_back(x.get<std::size_t>() - 1);
    }
    sets.push_back(std::move(s));
  }
  out.family = ClosedSetFamily::make(out.model.n, std::move(sets));
  return out;
}

inline nlohmann::json model_to_json(const ModelFile& mf) {
  nlohmann::json j;
  const std::size_t N = mf.model.n + 1;
  j["n"] = mf.model.n;
  j["m"] = mf.model.m;
  j["Q"] = nlohmann::json::array();
  for (const auto& q : mf.model.Q) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < N; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < N; ++c) row.push_back(q(i, c));
      rows.push_back(std::move(row));
    }
    j["Q"].push_back(std::move(rows));
  }
  j["pi0"] = mf.model.pi0;
  j["S0"] = nlohmann::json::array();
  for (const auto& s : mf.model.S0) j["S0"].push_back(s);
  j["gamma"] = nlohmann::json::array();
  for (const auto& g : mf.family.gamma) {
    nlohmann::json set = nlohmann::json::array();
    for (std::size_t s : g) set.push_back(s + 1);
    j["gamma"].push_back(std::move(set));
  }
  return j;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

inline void save_model(const ModelFile& mf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(mf).dump(2) << "\n";
}

/// PathRecord JSON: {events: [[time, state]...], horizon}; 1-based states.
inline PathRecord path_from_json(const nlohmann::json& j) {
  detail::require_keys(j, {"events", "horizon"}, "path");
  PathRecord rec;
  if (!j["horizon"].is_number())
    throw std::runtime_error("path: horizon must be a number");
  rec.horizon = j["horizon"].get<double>();
  if (!j["events"].is_array() || j["events"].empty())
    throw std::runtime_error("path: events must be a nonempty array");
  for (const auto& e : j["events"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number_unsigned() || e[1].get<std::size_t>() < 1)
      throw std::runtime_error("path: each event must be [time, state]");
    rec.events.push_back({e[0].get<double>(), e[1].get<std::size_t>() - 1});
  }
  return rec;
}

inline nlohmann::json path_to_json(const PathRecord& rec) {
  nlohmann::json j;
  j["events"] = nlohmann::json::array();
  for (const auto& e : rec.events)
    j["events"].push_back({e.time, e.state + 1});
  j["horizon"] = rec.horizon;
  return j;
}

}  // namespace phasemix

#endif
