// Command-line front end: synthetic data generation, density evaluation,
// classifier training and prediction, and the convergence experiment.
// Every run that writes an output also writes a manifest capturing the
// fully resolved parameters, so runs can be reproduced exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srkde/srkde.hpp"

namespace {

using srkde::json;

std::string now_iso_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

/// Writes `<out>.manifest.json` (or `manifest.json` inside a directory
/// output) describing the run: command, resolved parameters, seed,
/// version, timestamps.
void write_manifest(const std::string& out_path, bool out_is_dir,
                    const std::string& command, const json& parameters,
                    std::uint64_t seed, const std::string& started_at) {
  const std::string path =
      out_is_dir ? (std::filesystem::path(out_path) / "manifest.json").string()
                 : out_path + ".manifest.json";
  const json manifest = {{"command", command},
                         {"parameters", parameters},
                         {"seed", seed},
                         {"version", srkde::kVersion},
                         {"started_at", started_at},
                         {"finished_at", now_iso_utc()}};
  srkde::write_text_file(path, manifest.dump(2) + "\n");
}

/// A mixture argument is either a named mixture or a JSON file path.
srkde::GaussianMixture resolve_mixture(const std::string& spec) {
  if (std::filesystem::exists(spec)) {
    return srkde::mixture_from_json(srkde::read_json_file(spec));
  }
  return srkde::named_mixture(spec);
}

std::vector<double> parse_inline_point(const std::string& text) {
  std::vector<double> point;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t comma = text.find(',', begin);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(begin, comma - begin);
    try {
      std::size_t used = 0;
      point.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw std::runtime_error("cannot parse coordinate \"" + token +
                               "\" in \"" + text + "\"");
    }
    begin = comma + 1;
  }
  return point;
}

struct GenArgs {
  std::string mixture = "benchmark";
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string label;
};

int run_gen(const GenArgs& args) {
  const std::string started = now_iso_utc();
  const srkde::GaussianMixture mixture = resolve_mixture(args.mixture);
  const srkde::Dataset data = srkde::sample_mixture(mixture, args.n, args.seed);
  if (args.label.empty()) {
    srkde::write_dataset_csv(args.out, data);
  } else {
    const std::vector<std::string> labels(data.size(), args.label);
    srkde::write_dataset_csv(args.out, data, &labels);
  }
  write_manifest(args.out, false, "gen",
                 {{"mixture", srkde::mixture_to_json(mixture)},
                  {"n", args.n},
                  {"label", args.label},
                  {"out", args.out}},
                 args.seed, started);
  std::cout << "wrote " << data.size() << " points to " << args.out << "\n";
  return 0;
}

struct DensityArgs {
  std::string data;
  bool fixed = false;
  bool srkde_mode = false;
  double sigma = 0.0;
  double lambda = 0.0;
  std::size_t k = 0;
  double beta = 0.0;
  double beta0 = 1.0;
  std::size_t k_prime = 0;  // 0: untruncated
  double force_sigma = 0.0;
  std::string points_csv;
  std::vector<std::string> inline_points;
  std::string out;
};

int run_density(const DensityArgs& args) {
  const std::string started = now_iso_utc();
  if (args.fixed == args.srkde_mode) {
    throw std::runtime_error("choose exactly one of --fixed and --srkde");
  }
  const auto data = std::make_shared<const srkde::Dataset>(
      srkde::read_dataset_csv(args.data).data);
  const std::size_t m = data->dimension();
  const std::size_t n = data->size();

  std::vector<std::vector<double>> points;
  if (!args.points_csv.empty()) {
    const srkde::Dataset q = srkde::read_dataset_csv(args.points_csv).data;
    srkde::check_same_dimension(m, q.dimension(), "query file");
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto p = q.point(i);
      points.emplace_back(p.begin(), p.end());
    }
  }
  for (const std::string& text : args.inline_points) {
    std::vector<double> p = parse_inline_point(text);
    srkde::check_same_dimension(m, p.size(), "inline point");
    points.push_back(std::move(p));
  }
  if (points.empty()) {
    throw std::runtime_error("no evaluation points: give --points or --at");
  }

  std::vector<double> densities(points.size());
  json parameters;
  if (args.fixed) {
    if ((args.sigma > 0.0) == (args.lambda > 0.0)) {
      throw std::runtime_error(
          "--fixed needs exactly one of --sigma and --lambda");
    }
    const srkde::FixedEstimator estimator =
        args.sigma > 0.0
            ? srkde::FixedEstimator::with_sigma(data, args.sigma)
            : srkde::FixedEstimator(data, args.lambda);
    for (std::size_t i = 0; i < points.size(); ++i) {
      densities[i] = estimator.estimate(points[i]);
    }
    parameters = {{"mode", "fixed"},
                  {"data", args.data},
                  {"sigma", estimator.sigma()},
                  {"lambda", estimator.lambda()}};
  } else {
    const std::size_t k =
        args.k > 0 ? args.k : srkde::default_neighbor_order(n);
    const double beta = args.beta > 0.0
                            ? args.beta
                            : srkde::beta_from_coefficient(args.beta0, n);
    std::unique_ptr<srkde::SRKDEModel> model;
    if (args.force_sigma > 0.0) {
      model = std::make_unique<srkde::SRKDEModel>(
          data, k, beta, std::vector<double>(n, args.force_sigma));
    } else {
      model = std::make_unique<srkde::SRKDEModel>(data, k, beta);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      densities[i] = args.k_prime > 0 ? model->estimate(points[i], args.k_prime)
                                      : model->estimate(points[i]);
    }
    parameters = {{"mode", "srkde"},
                  {"data", args.data},
                  {"k", k},
                  {"beta", beta},
                  {"k_prime", args.k_prime},
                  {"force_sigma", args.force_sigma}};
  }

  std::string table;
  for (std::size_t d = 0; d < m; ++d) {
    table += 'x' + std::to_string(d + 1) + ",";
  }
  table += "density\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double coordinate : points[i]) {
      table += srkde::format_double(coordinate) + ",";
    }
    table += srkde::format_double(densities[i]) + "\n";
  }
  if (args.out.empty()) {
    std::cout << table;
  } else {
    srkde::write_text_file(args.out, table);
    parameters["out"] = args.out;
    write_manifest(args.out, false, "density", parameters, 0, started);
    std::cout << "wrote " << points.size() << " densities to " << args.out
              << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string data;
  std::size_t k = 0;
  double beta = 0.0;
  double beta0 = 1.0;
  std::size_t k_prime = srkde::kDefaultKPrime;
  std::string out;
};

int run_train(const TrainArgs& args) {
  const std::string started = now_iso_utc();
  srkde::ParsedCsv parsed = srkde::read_dataset_csv(args.data);
  if (!parsed.has_labels) {
    throw std::runtime_error(args.data + ": training data needs a label column");
  }
  const srkde::LabeledDataset labeled(std::move(parsed.data),
                                      std::move(parsed.labels));
  std::size_t smallest = labeled.size();
  for (const auto& c : labeled.classes()) smallest = std::min(smallest, c.count);
  const std::size_t k = args.k > 0
                            ? args.k
                            : srkde::default_neighbor_order(smallest);
  const double beta = args.beta > 0.0
                          ? args.beta
                          : srkde::beta_from_coefficient(args.beta0, smallest);
  const srkde::ClassifierModel model =
      srkde::train(labeled, k, beta, args.k_prime);
  srkde::write_text_file(args.out,
                         srkde::classifier_to_json(model).dump(2) + "\n");
  write_manifest(args.out, false, "train",
                 {{"data", args.data},
                  {"k", k},
                  {"beta", beta},
                  {"k_prime", args.k_prime},
                  {"out", args.out}},
                 0, started);
  std::cout << "trained " << model.class_count() << " classes on "
            << labeled.size() << " points; model written to " << args.out
            << "\n";
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  bool verify = false;
};

int run_predict(const PredictArgs& args) {
  const std::string started = now_iso_utc();
  const srkde::ClassifierModel model = srkde::classifier_from_json(
      srkde::read_json_file(args.model), args.verify);
  srkde::ParsedCsv parsed = srkde::read_dataset_csv(args.data);
  srkde::check_same_dimension(model.dimension(), parsed.data.dimension(),
                              "input data");
  std::vector<std::string> predicted(parsed.data.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < parsed.data.size(); ++i) {
    predicted[i] = model.predict(parsed.data.point(i));
    if (parsed.has_labels && predicted[i] == parsed.labels[i]) ++correct;
  }
  if (parsed.has_labels) {
    char line[64];
    std::snprintf(line, sizeof(line), "accuracy %.4f\n",
                  static_cast<double>(correct) /
                      static_cast<double>(parsed.data.size()));
    std::cout << line;
  }
  if (!args.out.empty()) {
    srkde::write_dataset_csv(args.out, parsed.data, &predicted);
    write_manifest(args.out, false, "predict",
                   {{"model", args.model},
                    {"data", args.data},
                    {"verify", args.verify},
                    {"out", args.out}},
                   0, started);
    std::cout << "wrote predictions to " << args.out << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::size_t threads = 1;
};

int run_experiment(const ExperimentArgs& args) {
  const std::string started = now_iso_utc();
  const srkde::ConvergenceConfig cfg =
      srkde::config_from_json(srkde::read_json_file(args.config));
  const srkde::ConvergenceResult result =
      srkde::run_convergence(cfg, args.threads);
  std::filesystem::create_directories(args.out);
  const auto dir = std::filesystem::path(args.out);
  srkde::write_text_file((dir / "report.csv").string(),
                         srkde::result_to_csv(result));
  srkde::write_text_file((dir / "report.json").string(),
                         srkde::result_to_json(result).dump(2) + "\n");
  json parameters = srkde::config_to_json(cfg);
  parameters["threads"] = args.threads;
  parameters["out"] = args.out;
  write_manifest(args.out, true, "experiment", parameters, cfg.seed, started);
  for (const auto& fit : result.fits) {
    std::printf("point %s: c = %.6f\n",
                srkde::detail::point_label(fit.point).c_str(), fit.c);
  }
  std::printf("reports written to %s (%.1f s)\n", args.out.c_str(),
              result.wall_seconds);
  return 0;
}

int run_selftest() {
  std::size_t failures = 0;
  const auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", name);
    if (!ok) ++failures;
  };

  {
    bool ok = true;
    for (std::size_t m : {1, 2, 3, 4, 8}) {
      for (double sigma : {0.005, 0.1, 1.0, 10.0}) {
        ok = ok && std::abs(srkde::normalization_check(m, sigma) - 1.0) <= 1e-9;
      }
    }
    check("kernel unit mass across dimensions and bandwidths", ok);
  }
  {
    srkde::Xoshiro256pp rng(17);
    std::vector<double> values(300 * 4);
    for (double& v : values) v = rng.normal();
    values[8] = values[0];  // duplicate coordinates across two points
    values[9] = values[1];
    const auto data = std::make_shared<const srkde::Dataset>(4, values);
    const srkde::KdTreeIndex index(data);
    bool ok = true;
    for (std::size_t q = 0; q < 20 && ok; ++q) {
      std::vector<double> query(4);
      for (double& v : query) v = rng.normal();
      for (std::size_t k : {1, 5, 32}) {
        const auto fast = index.k_nearest(query, k);
        std::vector<std::pair<double, std::size_t>> slow;
        for (std::size_t i = 0; i < data->size(); ++i) {
          slow.push_back(
              {srkde::squared_distance(query, data->point(i)), i});
        }
        std::sort(slow.begin(), slow.end());
        for (std::size_t i = 0; i < k; ++i) {
          ok = ok && fast[i].index == slow[i].second &&
               fast[i].distance == std::sqrt(slow[i].first);
        }
      }
    }
    check("k-nearest queries match brute force", ok);
  }
  {
    srkde::Xoshiro256pp rng(29);
    bool ok = true;
    for (std::size_t m : {1, 2, 4}) {
      std::vector<double> values(50 * m);
      for (double& v : values) v = rng.normal();
      const auto data = std::make_shared<const srkde::Dataset>(m, values);
      const srkde::FixedEstimator estimator(data, 0.8);
      const std::vector<double> origin(m, 0.0);
      const double direct = estimator.estimate(origin);
      const double via_transform =
          srkde::estimate_fz0(srkde::super_radius_transform(*data, origin),
                              estimator.sigma()) /
          srkde::unit_ball_volume(m);
      ok = ok && std::abs(direct - via_transform) <= 1e-12 * direct;
    }
    check("fixed estimate equals transformed 1-D estimate", ok);
  }
  {
    srkde::Xoshiro256pp rng(31);
    std::vector<double> values(40 * 2);
    for (double& v : values) v = rng.normal();
    const auto data = std::make_shared<const srkde::Dataset>(2, values);
    const double sigma = 0.7;
    const srkde::SRKDEModel model(data, 3, 1.0,
                                  std::vector<double>(40, sigma));
    const srkde::FixedEstimator fixed =
        srkde::FixedEstimator::with_sigma(data, sigma);
    const std::vector<double> at = {0.25, -0.5};
    const double a = model.estimate(at);
    const double b = fixed.estimate(at);
    check("equal per-point bandwidths reduce to the fixed estimator",
          std::abs(a - b) <= 1e-12 * b);
  }
  {
    std::vector<std::pair<double, double>> pairs;
    for (double n : {100.0, 1000.0, 10000.0}) {
      pairs.push_back({n, std::pow(n, -2.0 / 3.0)});
    }
    const auto [c, delta] = srkde::fit_slope(pairs);
    check("slope fit recovers an exact power law",
          std::abs(c + 2.0 / 3.0) <= 1e-12 && std::isfinite(delta));
  }
  if (failures == 0) {
    std::printf("all self-tests passed\n");
    return 0;
  }
  std::printf("%zu self-test(s) failed\n", failures);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"super-radius kernel density estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(srkde::kVersion));

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "draw a synthetic dataset as CSV");
  gen->add_option("--mixture", gen_args.mixture,
                  "named mixture (benchmark, literal) or mixture JSON path");
  gen->add_option("--n", gen_args.n, "number of points")->required();
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--out", gen_args.out, "output CSV path")->required();
  gen->add_option("--label", gen_args.label,
                  "attach this class label to every row");

  DensityArgs density_args;
  auto* density =
      app.add_subcommand("density", "evaluate a density estimate at points");
  density->add_option("--data", density_args.data, "training data CSV")
      ->required();
  density->add_flag("--fixed", density_args.fixed,
                    "fixed-bandwidth estimator");
  density->add_flag("--srkde", density_args.srkde_mode,
                    "variable-bandwidth estimator");
  density->add_option("--sigma", density_args.sigma,
                      "bandwidth for --fixed");
  density->add_option("--lambda", density_args.lambda,
                      "rate constant for --fixed: sigma = lambda n^{-1/3}");
  density->add_option("--k", density_args.k,
                      "neighbor order (default: ceil(sqrt(n)))");
  density->add_option("--beta", density_args.beta,
                      "smoothing parameter (default: n^{2/3})");
  density->add_option("--beta0", density_args.beta0,
                      "smoothing coefficient: beta = beta0 n^{2/3}");
  density->add_option("--kprime", density_args.k_prime,
                      "sum only the kprime nearest terms (default: all)");
  density->add_option("--force-sigma", density_args.force_sigma,
                      "override every per-point bandwidth with this value");
  density->add_option("--points", density_args.points_csv,
                      "CSV of evaluation points");
  density->add_option("--at", density_args.inline_points,
                      "inline point \"x1,x2,...\" (repeatable)");
  density->add_option("--out", density_args.out,
                      "output CSV path (default: stdout)");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit the density classifier");
  train->add_option("--data", train_args.data, "labeled training CSV")
      ->required();
  train->add_option("--k", train_args.k,
                    "neighbor order (default: ceil(sqrt(smallest class)))");
  train->add_option("--beta", train_args.beta,
                    "smoothing parameter (default: smallest class^{2/3})");
  train->add_option("--beta0", train_args.beta0,
                    "smoothing coefficient: beta = beta0 n^{2/3}");
  train->add_option("--kprime", train_args.k_prime,
                    "per-query neighbor cap stored in the model");
  train->add_option("--out", train_args.out, "model JSON path")->required();

  PredictArgs predict_args;
  auto* predict =
      app.add_subcommand("predict", "classify points with a trained model");
  predict->add_option("--model", predict_args.model, "model JSON path")
      ->required();
  predict->add_option("--data", predict_args.data,
                      "points CSV; accuracy is printed if it has labels")
      ->required();
  predict->add_option("--out", predict_args.out, "predictions CSV path");
  predict->add_flag("--verify", predict_args.verify,
                    "recompute stored bandwidths and require a match");

  ExperimentArgs experiment_args;
  auto* experiment =
      app.add_subcommand("experiment", "run the convergence-rate experiment");
  experiment->add_option("--config", experiment_args.config,
                         "experiment config JSON")
      ->required();
  experiment->add_option("--out", experiment_args.out, "output directory")
      ->required();
  experiment->add_option("--threads", experiment_args.threads,
                         "worker thread count")
      ->envname("SRKDE_THREADS");

  auto* selftest =
      app.add_subcommand("selftest", "run built-in consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (density->parsed()) return run_density(density_args);
    if (train->parsed()) return run_train(train_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (experiment->parsed()) return run_experiment(experiment_args);
    if (selftest->parsed()) return run_selftest();
  } catch (const std::exception& error) {
    std::cerr << "srkde: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
