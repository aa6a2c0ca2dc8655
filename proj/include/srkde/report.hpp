#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srkde/classifier.hpp"
#include "srkde/csv.hpp"
#include "srkde/experiment.hpp"
#include "srkde/mixture.hpp"

namespace srkde {

using json = nlohmann::json;

inline json mixture_to_json(const GaussianMixture& g) {
  json components = json::array();
  for (const auto& c : g.components()) {
    components.push_back({{"weight", c.weight}, {"mean", c.mean}});
  }
  return {{"components", components}};
}

inline GaussianMixture mixture_from_json(const json& j) {
  std::vector<GaussianMixture::Component> components;
  for (const auto& c : j.at("components")) {
    components.push_back(
        {c.at("weight").get<double>(),
         c.at("mean").get<std::vector<double>>()});
  }
  return GaussianMixture(std::move(components));
}

/// Named mixtures accepted wherever a mixture is configured.
/// "benchmark" (alias "paper") is the 4-D two-component default;
/// "literal" is its unnormalized-weight variant.
inline GaussianMixture named_mixture(const std::string& name) {
  if (name == "benchmark" || name == "paper") return benchmark_mixture();
  if (name == "literal") return benchmark_mixture(true);
  throw std::invalid_argument("unknown mixture name \"" + name + "\"");
}

inline json config_to_json(const ConvergenceConfig& cfg) {
  return {{"n_list", cfg.n_list},
          {"repeats", cfg.repeats},
          {"sigma_rule",
           {{"a", cfg.sigma_rule.a},
            {"n0", cfg.sigma_rule.n0},
            {"exponent", cfg.sigma_rule.exponent}}},
          {"eval_points", cfg.eval_points},
          {"mixture", mixture_to_json(cfg.mixture)},
          {"seed", cfg.seed}};
}

/// Parses a config with every field optional except n_list; omitted
/// fields take the benchmark defaults.  The mixture may be an inline
/// object or a name string.
inline ConvergenceConfig config_from_json(const json& j) {
  ConvergenceConfig cfg;
  cfg.n_list = j.at("n_list").get<std::vector<std::size_t>>();
  if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<std::size_t>();
  if (j.contains("sigma_rule")) {
    const json& rule = j.at("sigma_rule");
    if (rule.contains("a")) cfg.sigma_rule.a = rule.at("a").get<double>();
    if (rule.contains("n0")) cfg.sigma_rule.n0 = rule.at("n0").get<double>();
    if (rule.contains("exponent")) {
      cfg.sigma_rule.exponent = rule.at("exponent").get<double>();
    }
  }
  if (j.contains("mixture")) {
    const json& mix = j.at("mixture");
    cfg.mixture = mix.is_string() ? named_mixture(mix.get<std::string>())
                                  : mixture_from_json(mix);
  }
  if (j.contains("eval_points")) {
    cfg.eval_points =
        j.at("eval_points").get<std::vector<std::vector<double>>>();
  } else if (cfg.mixture.dimension() != 4) {
    throw std::invalid_argument(
        "eval_points must be given for non-4-D mixtures");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

namespace detail {

inline json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline double null_to_nan(const json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

}  // namespace detail

inline json result_to_json(const ConvergenceResult& res) {
  json fits = json::array();
  for (const auto& fit : res.fits) {
    fits.push_back({{"point", fit.point},
                    {"c", detail::nan_to_null(fit.c)},
                    {"delta", detail::nan_to_null(fit.delta)}});
  }
  // Wall time is deliberately omitted: reports must be byte-identical
  // across reruns of the same configuration.
  return {{"config", config_to_json(res.config)},
          {"mse", res.mse},
          {"fits", fits},
          {"stream_seeds", res.stream_seeds}};
}

inline ConvergenceResult result_from_json(const json& j) {
  ConvergenceResult res;
  res.config = config_from_json(j.at("config"));
  res.mse = j.at("mse").get<std::vector<std::vector<double>>>();
  for (const auto& f : j.at("fits")) {
    PointFit fit;
    fit.point = f.at("point").get<std::vector<double>>();
    fit.c = detail::null_to_nan(f.at("c"));
    fit.delta = detail::null_to_nan(f.at("delta"));
    res.fits.push_back(std::move(fit));
  }
  res.stream_seeds =
      j.at("stream_seeds").get<std::vector<std::vector<std::uint64_t>>>();
  return res;
}

namespace detail {

inline std::string point_label(const std::vector<double>& point) {
  std::string label = "(";
  char buffer[32];
  for (std::size_t d = 0; d < point.size(); ++d) {
    if (d) label += ' ';
    std::snprintf(buffer, sizeof(buffer), "%g", point[d]);
    label += buffer;
  }
  label += ')';
  return label;
}

inline std::string scientific(double v) {
  if (std::isnan(v)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.9e", v);
  return buffer;
}

}  // namespace detail

/// One row per evaluation point, one MSE column per sample size, the
/// fitted slope last.
inline std::string result_to_csv(const ConvergenceResult& res) {
  std::string out = "point";
  for (std::size_t n : res.config.n_list) {
    out += ",n=" + std::to_string(n);
  }
  out += ",c\n";
  for (std::size_t p = 0; p < res.mse.size(); ++p) {
    out += detail::point_label(res.config.eval_points[p]);
    for (double value : res.mse[p]) {
      out += ',' + detail::scientific(value);
    }
    out += ',' + detail::scientific(res.fits[p].c);
    out += '\n';
  }
  return out;
}

inline json classifier_to_json(const ClassifierModel& model) {
  json classes = json::array();
  for (std::size_t j = 0; j < model.class_count(); ++j) {
    const SRKDEModel& m = model.models()[j];
    json points = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto p = m.data().point(i);
      points.push_back(std::vector<double>(p.begin(), p.end()));
    }
    classes.push_back({{"label", model.classes()[j].label},
                       {"count", model.classes()[j].count},
                       {"points", points},
                       {"sigmas", m.sigmas()}});
  }
  return {{"m", model.dimension()},
          {"k", model.neighbor_order()},
          {"beta", model.beta()},
          {"k_prime", model.k_prime()},
          {"classes", classes}};
}

/// Rebuilds a classifier from its serialized form.  Stored bandwidths
/// are used as-is for fast loading; with `verify` they are recomputed
/// from the points and must match to 1e-12 relative.  A class entry may
/// carry "points_ref" (a CSV path) instead of inline "points".
inline ClassifierModel classifier_from_json(const json& j,
                                            bool verify = false) {
  const auto m = j.at("m").get<std::size_t>();
  const auto k = j.at("k").get<std::size_t>();
  const auto beta = j.at("beta").get<double>();
  const auto k_prime = j.at("k_prime").get<std::size_t>();
  std::vector<ClassSummary> classes;
  std::vector<SRKDEModel> models;
  for (const auto& cls : j.at("classes")) {
    std::shared_ptr<const Dataset> data;
    if (cls.contains("points_ref")) {
      ParsedCsv parsed =
          read_dataset_csv(cls.at("points_ref").get<std::string>());
      data = std::make_shared<const Dataset>(std::move(parsed.data));
    } else {
      std::vector<double> values;
      for (const auto& row : cls.at("points")) {
        const auto point = row.get<std::vector<double>>();
        check_same_dimension(m, point.size(), "stored point");
        values.insert(values.end(), point.begin(), point.end());
      }
      data = std::make_shared<const Dataset>(m, std::move(values));
    }
    check_same_dimension(m, data->dimension(), "stored class data");
    const auto label = cls.at("label").get<std::string>();
    const auto count = cls.at("count").get<std::size_t>();
    if (count != data->size()) {
      throw std::runtime_error("class \"" + label +
                               "\": stored count does not match points");
    }
    auto sigmas = cls.at("sigmas").get<std::vector<double>>();
    SRKDEModel model(data, k, beta, std::move(sigmas));
    if (verify) {
      const SRKDEModel fresh(data, k, beta);
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        const double stored = model.sigmas()[i];
        const double expected = fresh.sigmas()[i];
        if (std::abs(stored - expected) >
            1e-12 * std::max(std::abs(expected), 1e-300)) {
          throw std::runtime_error(
              "class \"" + label + "\": stored bandwidth " +
              std::to_string(i) + " does not match recomputation");
        }
      }
    }
    classes.push_back({label, count});
    models.push_back(std::move(model));
  }
  return ClassifierModel(std::move(classes), std::move(models), k_prime);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace srkde
