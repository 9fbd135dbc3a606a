#include "ocpls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ocpls/csv.hpp"

namespace ocpls {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] void bad_value(const std::string& field, const std::string& expected, const std::string& text) {
  throw ConfigError(field + ": expected " + expected + ", got '" + text + "'");
}

double to_double(const std::string& field, const std::string& text) {
  if (trim(text).empty()) bad_value(field, "a number", text);
  try {
    return csv::parse_number(trim(text));
  } catch (const std::invalid_argument&) {
    bad_value(field, "a number", text);
  }
}

std::uint64_t to_u64(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    bad_value(field, "a nonnegative integer", raw);
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(field, "true or false", raw);
}

std::vector<std::string> to_list(const std::string& raw) {
  std::vector<std::string> out;
  if (trim(raw).empty()) return out;
  for (std::string_view item : csv::split(raw)) out.push_back(trim(item));
  return out;
}

template <typename T, typename F>
std::vector<T> to_vector(const std::string& field, const std::string& raw, F convert) {
  std::vector<T> out;
  for (const std::string& item : to_list(raw)) out.push_back(T(convert(field, item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += csv::format_number(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

using Setter = std::function<void(const std::string& field, const std::string& value)>;

void apply_section(const std::string& section, const pt::ptree& node, const std::map<std::string, Setter>& setters) {
  for (const auto& [key, child] : node) {
    const std::string field = section + "." + key;
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(field + ": unknown key");
    if (!child.empty()) throw ConfigError(field + ": nested values are not supported");
    it->second(field, child.data());
  }
}

std::map<std::string, Setter> problem_setters(ProblemSpec& p) {
  return {
      {"kind", [&p](auto& f, auto& v) {
         try {
           p.kind = parse_problem_kind(trim(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(f + ": " + e.what());
         }
       }},
      {"dataset", [&p](auto&, auto& v) { p.dataset = trim(v); }},
      {"seed", [&p](auto& f, auto& v) { p.seed = to_u64(f, v); }},
      {"dimension", [&p](auto& f, auto& v) { p.dimension = to_u64(f, v); }},
      {"lambda_min", [&p](auto& f, auto& v) { p.lambda_min = to_double(f, v); }},
      {"lambda_max", [&p](auto& f, auto& v) { p.lambda_max = to_double(f, v); }},
      {"lambda_reg", [&p](auto& f, auto& v) { p.lambda_reg = to_double(f, v); }},
      {"init_scale", [&p](auto& f, auto& v) { p.init_scale = to_double(f, v); }},
      {"n_train", [&p](auto& f, auto& v) { p.n_train = to_u64(f, v); }},
      {"n_val", [&p](auto& f, auto& v) { p.n_val = to_u64(f, v); }},
      {"noise_sigma", [&p](auto& f, auto& v) { p.noise_sigma = to_double(f, v); }},
      {"feature_dim", [&p](auto& f, auto& v) { p.feature_dim = to_u64(f, v); }},
      {"hidden", [&p](auto& f, auto& v) { p.hidden = to_vector<std::size_t>(f, v, to_u64); }},
      {"s_p_init", [&p](auto& f, auto& v) { p.s_p_init = to_double(f, v); }},
      {"s_q_init", [&p](auto& f, auto& v) { p.s_q_init = to_double(f, v); }},
  };
}

std::map<std::string, Setter> run_setters(RunSpec& r) {
  return {
      {"max_iterations", [&r](auto& f, auto& v) { r.max_iterations = to_u64(f, v); }},
      {"batch_size", [&r](auto& f, auto& v) { r.batch_size = to_u64(f, v); }},
      {"validation_interval", [&r](auto& f, auto& v) { r.validation_interval = to_u64(f, v); }},
      {"checkpoints", [&r](auto& f, auto& v) { r.checkpoints = to_vector<std::size_t>(f, v, to_u64); }},
      {"out_dir", [&r](auto&, auto& v) { r.out_dir = trim(v); }},
      {"record_wall_time", [&r](auto& f, auto& v) { r.record_wall_time = to_bool(f, v); }},
      {"threads", [&r](auto& f, auto& v) { r.threads = to_u64(f, v); }},
  };
}

std::map<std::string, Setter> robustness_setters(RobustnessSpec& s) {
  return {{"noise_levels", [&s](auto& f, auto& v) { s.noise_levels = to_vector<double>(f, v, to_double); }}};
}

std::map<std::string, Setter> arm_setters(OptimizerSpec& o) {
  return {
      {"optimizer", [&o](auto& f, auto& v) {
         try {
           o.kind = parse_optimizer_kind(trim(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(f + ": " + e.what());
         }
       }},
      {"alpha", [&o](auto& f, auto& v) { o.alpha = to_double(f, v); }},
      {"beta1", [&o](auto& f, auto& v) { o.beta1 = to_double(f, v); }},
      {"beta2", [&o](auto& f, auto& v) { o.beta2 = to_double(f, v); }},
      {"lambda", [&o](auto& f, auto& v) { o.lambda = to_double(f, v); }},
      {"clamp_floor", [&o](auto& f, auto& v) { o.clamp_floor = to_double(f, v); }},
      {"inner_mode", [&o](auto& f, auto& v) {
         try {
           o.inner_mode = parse_inner_mode(trim(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(f + ": " + e.what());
         }
       }},
      {"inner_cap", [&o](auto& f, auto& v) {
         if (trim(v) == "unlimited") {
           o.inner_cap.reset();
         } else {
           o.inner_cap = to_u64(f, v);
         }
       }},
      {"epsilon", [&o](auto& f, auto& v) { o.epsilon = to_double(f, v); }},
      {"rho_clip", [&o](auto& f, auto& v) { o.rho_clip = to_double(f, v); }},
  };
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::quadratic:
      return "quadratic";
    case ProblemKind::rosenbrock:
      return "rosenbrock";
    case ProblemKind::least_squares:
      return "least_squares";
    case ProblemKind::pose:
      return "pose";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "quadratic") return ProblemKind::quadratic;
  if (text == "rosenbrock") return ProblemKind::rosenbrock;
  if (text == "least_squares") return ProblemKind::least_squares;
  if (text == "pose") return ProblemKind::pose;
  throw std::invalid_argument("unknown problem kind '" + text + "'");
}

std::vector<ArmSpec> default_arms() {
  OptimizerSpec ocp;
  ocp.kind = OptimizerKind::ocp_ls;
  ocp.alpha = 0.01;

  OptimizerSpec adamw;
  adamw.kind = OptimizerKind::adamw;
  adamw.alpha = 1e-3;

  OptimizerSpec sophia;
  sophia.kind = OptimizerKind::sophia;
  sophia.alpha = 1e-3;
  sophia.beta1 = 0.965;
  sophia.beta2 = 0.99;
  sophia.epsilon = 1e-12;

  return {{"ocp_ls", ocp}, {"adamw", adamw}, {"sophia", sophia}};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
  const ProblemSpec& p = problem;
  if (p.dataset.empty()) fail("problem.dataset", "must not be empty");
  if (p.kind == ProblemKind::pose) {
    if (p.n_train == 0) fail("problem.n_train", "must be >= 1");
    if (p.n_val == 0) fail("problem.n_val", "must be >= 1");
    if (p.feature_dim == 0) fail("problem.feature_dim", "must be >= 1");
    if (!(p.noise_sigma >= 0.0)) fail("problem.noise_sigma", "must be >= 0");
    for (std::size_t h : p.hidden)
      if (h == 0) fail("problem.hidden", "layer widths must be >= 1");
  } else {
    const std::size_t min_dim = p.kind == ProblemKind::rosenbrock ? 2 : 1;
    if (p.dimension < min_dim) fail("problem.dimension", "must be >= " + std::to_string(min_dim));
    if (!(p.init_scale >= 0.0)) fail("problem.init_scale", "must be >= 0");
  }
  if (p.kind == ProblemKind::quadratic) {
    if (!(p.lambda_min > 0.0)) fail("problem.lambda_min", "must be > 0");
    if (!(p.lambda_max >= p.lambda_min)) fail("problem.lambda_max", "must be >= lambda_min");
    if (!(p.lambda_reg >= 0.0)) fail("problem.lambda_reg", "must be >= 0");
  }
  if (p.kind == ProblemKind::least_squares && p.n_train == 0) fail("problem.n_train", "must be >= 1");

  if (run.max_iterations < 1) fail("run.max_iterations", "must be >= 1");
  if (run.batch_size < 1) fail("run.batch_size", "must be >= 1");
  if (run.validation_interval < 1) fail("run.validation_interval", "must be >= 1");
  if (p.kind == ProblemKind::pose && run.batch_size > p.n_train) fail("run.batch_size", "exceeds problem.n_train");

  for (double level : robustness.noise_levels)
    if (!(level >= 0.0)) fail("robustness.noise_levels", "levels must be >= 0");

  if (arms.empty()) fail("arm", "at least one arm is required");
  std::set<std::string> names;
  for (const ArmSpec& arm : arms) {
    if (arm.name.empty()) fail("arm", "arm names must not be empty");
    if (!names.insert(arm.name).second) fail("arm." + arm.name, "duplicate arm name");
    try {
      arm.optimizer.validate();
    } catch (const std::invalid_argument& e) {
      fail("arm." + arm.name, e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig cfg;
  bool saw_arms = false;
  std::set<std::string> seen_sections;
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError(source + ": key '" + section + "' outside of any section");
    if (section == "problem") {
      apply_section(section, node, problem_setters(cfg.problem));
    } else if (section == "run") {
      apply_section(section, node, run_setters(cfg.run));
    } else if (section == "robustness") {
      apply_section(section, node, robustness_setters(cfg.robustness));
    } else if (section.rfind("arm.", 0) == 0) {
      if (!saw_arms) cfg.arms.clear();
      saw_arms = true;
      ArmSpec arm;
      arm.name = section.substr(4);
      if (!node.get_child_optional("optimizer")) throw ConfigError(section + ".optimizer: required");
      apply_section(section, node, arm_setters(arm.optimizer));
      cfg.arms.push_back(std::move(arm));
    } else {
      throw ConfigError(source + ": unknown section [" + section + "]");
    }
  }
  if (!saw_arms) cfg.arms = default_arms();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    for (const std::string& line : csv::read_lines(path)) text += line + "\n";
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.string());
}

std::string format_config(const ExperimentConfig& cfg) {
  const auto num = [](double v) { return csv::format_number(v); };
  const ProblemSpec& p = cfg.problem;
  std::ostringstream out;
  out << "[problem]\n"
      << "kind = " << to_string(p.kind) << "\n"
      << "dataset = " << p.dataset << "\n"
      << "seed = " << p.seed << "\n"
      << "dimension = " << p.dimension << "\n"
      << "lambda_min = " << num(p.lambda_min) << "\n"
      << "lambda_max = " << num(p.lambda_max) << "\n"
      << "lambda_reg = " << num(p.lambda_reg) << "\n"
      << "init_scale = " << num(p.init_scale) << "\n"
      << "n_train = " << p.n_train << "\n"
      << "n_val = " << p.n_val << "\n"
      << "noise_sigma = " << num(p.noise_sigma) << "\n"
      << "feature_dim = " << p.feature_dim << "\n"
      << "hidden = " << join(p.hidden) << "\n"
      << "s_p_init = " << num(p.s_p_init) << "\n"
      << "s_q_init = " << num(p.s_q_init) << "\n\n";
  const RunSpec& r = cfg.run;
  out << "[run]\n"
      << "max_iterations = " << r.max_iterations << "\n"
      << "batch_size = " << r.batch_size << "\n"
      << "validation_interval = " << r.validation_interval << "\n"
      << "checkpoints = " << join(r.checkpoints) << "\n";
  if (!r.out_dir.empty()) out << "out_dir = " << r.out_dir << "\n";
  out << "record_wall_time = " << (r.record_wall_time ? "true" : "false") << "\n"
      << "threads = " << r.threads << "\n\n";
  out << "[robustness]\n"
      << "noise_levels = " << join(cfg.robustness.noise_levels) << "\n";
  for (const ArmSpec& arm : cfg.arms) {
    const OptimizerSpec& o = arm.optimizer;
    out << "\n[arm." << arm.name << "]\n"
        << "optimizer = " << to_string(o.kind) << "\n"
        << "alpha = " << num(o.alpha) << "\n"
        << "beta1 = " << num(o.beta1) << "\n"
        << "beta2 = " << num(o.beta2) << "\n"
        << "lambda = " << num(o.lambda) << "\n"
        << "clamp_floor = " << num(o.clamp_floor) << "\n"
        << "inner_mode = " << to_string(o.inner_mode) << "\n"
        << "inner_cap = " << (o.inner_cap ? std::to_string(*o.inner_cap) : std::string("unlimited")) << "\n"
        << "epsilon = " << num(o.epsilon) << "\n"
        << "rho_clip = " << num(o.rho_clip) << "\n";
  }
  return out.str();
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  csv::write_text(path, format_config(cfg));
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const ConfigOverrides& overrides) {
  if (overrides.max_iterations) cfg.run.max_iterations = *overrides.max_iterations;
  if (overrides.seed) cfg.problem.seed = *overrides.seed;
  if (overrides.out_dir) cfg.run.out_dir = *overrides.out_dir;
  if (!overrides.arms.empty()) {
    std::vector<ArmSpec> kept;
    for (const std::string& name : overrides.arms) {
      auto it = std::find_if(cfg.arms.begin(), cfg.arms.end(), [&](const ArmSpec& a) { return a.name == name; });
      if (it == cfg.arms.end()) throw ConfigError("--arm: no arm named '" + name + "'");
      kept.push_back(*it);
    }
    cfg.arms = std::move(kept);
  }
  cfg.validate();
  return cfg;
}

}  // namespace ocpls
