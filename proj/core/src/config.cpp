#include "iukf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "iukf/errors.hpp"

namespace iukf {
namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (const auto v = node[key]) {
    try {
      out = v.as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(where + "." + key + ": " + e.what());
    }
  }
}

template <typename T>
void read_optional(const YAML::Node& node, const char* key, std::optional<T>& out,
                   const std::string& where) {
  if (node[key]) {
    T value{};
    read(node, key, value, where);
    out = value;
  }
}

Matrix read_matrix(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(where + " must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = node[static_cast<std::size_t>(i)].as<std::vector<double>>();
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(where + " has ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void read_matrix_key(const YAML::Node& node, const char* key, Matrix& out,
                     const std::string& where) {
  if (const auto v = node[key]) out = read_matrix(v, where + "." + key);
}

void read_vector_key(const YAML::Node& node, const char* key, Vector& out,
                     const std::string& where) {
  if (const auto v = node[key]) {
    const auto values = v.as<std::vector<double>>();
    out = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    (void)where;
  }
}

void read_fm(const YAML::Node& node, FmParameters& p) {
  const std::string w = "fm";
  check_keys(node, w,
             {"sample_period", "beta", "process_variance", "measurement_variance",
              "action_variance", "literal_transition", "forward_initial_variance",
              "inverse_initial_variance", "forward_kappa", "inverse_kappa",
              "assumed_forward_kappa", "horizon", "runs"});
  read(node, "sample_period", p.sample_period, w);
  read(node, "beta", p.beta, w);
  read(node, "process_variance", p.process_variance, w);
  read(node, "measurement_variance", p.measurement_variance, w);
  read(node, "action_variance", p.action_variance, w);
  read(node, "literal_transition", p.literal_transition, w);
  read(node, "forward_initial_variance", p.forward_initial_variance, w);
  read(node, "inverse_initial_variance", p.inverse_initial_variance, w);
  read(node, "forward_kappa", p.forward_kappa, w);
  read(node, "inverse_kappa", p.inverse_kappa, w);
  read(node, "assumed_forward_kappa", p.assumed_forward_kappa, w);
  read(node, "horizon", p.horizon, w);
  read(node, "runs", p.runs, w);
}

void read_reentry(const YAML::Node& node, ReentryParameters& p) {
  const std::string w = "reentry";
  check_keys(node, w,
             {"rho0", "h0", "gm0", "beta0", "dt", "substeps", "q_velocity", "q_parameter",
              "range_sigma", "bearing_sigma", "action_variance", "initial_state",
              "forward_initial_mean", "forward_initial_variances", "inverse_initial_variances",
              "forward_kappa", "inverse_kappa", "assumed_forward_kappa", "horizon", "runs"});
  read(node, "rho0", p.rho0, w);
  read(node, "h0", p.h0, w);
  read(node, "gm0", p.gm0, w);
  read(node, "beta0", p.beta0, w);
  read(node, "dt", p.dt, w);
  read(node, "substeps", p.substeps, w);
  read(node, "q_velocity", p.q_velocity, w);
  read(node, "q_parameter", p.q_parameter, w);
  read(node, "range_sigma", p.range_sigma, w);
  read(node, "bearing_sigma", p.bearing_sigma, w);
  read(node, "action_variance", p.action_variance, w);
  read(node, "initial_state", p.initial_state, w);
  read(node, "forward_initial_mean", p.forward_initial_mean, w);
  read(node, "forward_initial_variances", p.forward_initial_variances, w);
  read(node, "inverse_initial_variances", p.inverse_initial_variances, w);
  read(node, "forward_kappa", p.forward_kappa, w);
  read(node, "inverse_kappa", p.inverse_kappa, w);
  read(node, "assumed_forward_kappa", p.assumed_forward_kappa, w);
  read(node, "horizon", p.horizon, w);
  read(node, "runs", p.runs, w);
}

void read_linear(const YAML::Node& node, LinearParameters& p) {
  const std::string w = "linear";
  check_keys(node, w,
             {"transition", "observation", "action", "process_noise", "measurement_noise",
              "action_noise", "initial_state", "random_initial", "forward_initial_mean",
              "forward_initial_covariance", "inverse_initial_covariance", "forward_kappa",
              "inverse_kappa", "assumed_forward_kappa", "horizon", "runs"});
  read_matrix_key(node, "transition", p.transition, w);
  read_matrix_key(node, "observation", p.observation, w);
  read_matrix_key(node, "action", p.action, w);
  read_matrix_key(node, "process_noise", p.process_noise, w);
  read_matrix_key(node, "measurement_noise", p.measurement_noise, w);
  read_matrix_key(node, "action_noise", p.action_noise, w);
  read_vector_key(node, "initial_state", p.initial_state, w);
  read(node, "random_initial", p.random_initial, w);
  read_vector_key(node, "forward_initial_mean", p.forward_initial_mean, w);
  read_matrix_key(node, "forward_initial_covariance", p.forward_initial_covariance, w);
  read_matrix_key(node, "inverse_initial_covariance", p.inverse_initial_covariance, w);
  read(node, "forward_kappa", p.forward_kappa, w);
  read(node, "inverse_kappa", p.inverse_kappa, w);
  read(node, "assumed_forward_kappa", p.assumed_forward_kappa, w);
  read(node, "horizon", p.horizon, w);
  read(node, "runs", p.runs, w);
}

ExperimentConfig from_yaml(const YAML::Node& root) {
  ExperimentConfig cfg;
  const std::string w = "config";
  check_keys(root, w,
             {"scenario", "horizon", "runs", "seed", "forward_filters", "inverse_filters",
              "regularization", "sigma_star_anchor", "compute_bounds", "output", "fm", "reentry",
              "linear"});
  read(root, "scenario", cfg.scenario, w);
  read_optional(root, "horizon", cfg.horizon, w);
  read_optional(root, "runs", cfg.runs, w);
  read(root, "seed", cfg.seed, w);
  read(root, "regularization", cfg.regularization, w);
  read(root, "compute_bounds", cfg.compute_bounds, w);
  if (const auto a = root["sigma_star_anchor"]) {
    try {
      cfg.sigma_star_anchor = parse_anchor(a.as<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  if (const auto list = root["forward_filters"]) {
    if (!list.IsSequence()) throw ConfigError("forward_filters must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto node = list[i];
      const std::string where = "forward_filters[" + std::to_string(i) + "]";
      check_keys(node, where, {"name", "kind", "kappa"});
      ForwardFilterConfig f;
      read(node, "name", f.name, where);
      std::string kind = "ukf";
      read(node, "kind", kind, where);
      try {
        f.kind = parse_forward_kind(kind);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
      }
      read_optional(node, "kappa", f.kappa, where);
      cfg.forward_filters.push_back(std::move(f));
    }
  }
  if (const auto list = root["inverse_filters"]) {
    if (!list.IsSequence()) throw ConfigError("inverse_filters must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto node = list[i];
      const std::string where = "inverse_filters[" + std::to_string(i) + "]";
      check_keys(node, where,
                 {"name", "kind", "true_forward", "assumed_forward", "assumed_kappa",
                  "inverse_kappa"});
      InverseFilterConfig inv;
      read(node, "name", inv.name, where);
      read(node, "true_forward", inv.true_forward, where);
      std::string kind = "iukf";
      read(node, "kind", kind, where);
      std::string assumed;
      read(node, "assumed_forward", assumed, where);
      try {
        inv.kind = parse_inverse_kind(kind);
        inv.assumed_forward = assumed.empty()
                                  ? (inv.kind == InverseKind::kIukf ? ForwardKind::kUkf
                                                                    : ForwardKind::kEkf)
                                  : parse_forward_kind(assumed);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
      }
      read_optional(node, "assumed_kappa", inv.assumed_kappa, where);
      read_optional(node, "inverse_kappa", inv.inverse_kappa, where);
      cfg.inverse_filters.push_back(std::move(inv));
    }
  }
  if (const auto out = root["output"]) {
    check_keys(out, "output", {"records", "summary", "plot_dir", "failures"});
    read(out, "records", cfg.output.records, "output");
    read(out, "summary", cfg.output.summary, "output");
    read(out, "plot_dir", cfg.output.plot_dir, "output");
    read(out, "failures", cfg.output.failures, "output");
  }
  if (const auto n = root["fm"]) read_fm(n, cfg.fm);
  if (const auto n = root["reentry"]) read_reentry(n, cfg.reentry);
  if (const auto n = root["linear"]) read_linear(n, cfg.linear);

  apply_default_filter_matrix(cfg);
  validate(cfg);
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  try {
    return from_yaml(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace iukf
