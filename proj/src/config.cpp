#include "aicmss/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "aicmss/csv.hpp"
#include "aicmss/errors.hpp"

namespace aicmss {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kAllowed[] = {
    {"a", "b", "sigma_w", "x0"},
    {"u_max", "c", "a_init", "b_init"},
    {"horizon", "runs", "seed", "psi", "d", "lambda", "out", "workers"},
};
const char* const kSections[] = {"system", "controller", "run"};

double to_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::config,
          key + ": not a real number: '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::config,
          key + ": not a non-negative integer: '" + text + "'");
  return v;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    if (auto v = tree_->get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }
  double real(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (auto v = raw(key)) return to_real(name_ + "." + key, *v);
    require(fallback.has_value(), ErrorKind::config, "missing required key " + name_ + "." + key);
    return *fallback;
  }
  std::optional<double> opt_real(const std::string& key) const {
    if (auto v = raw(key)) return to_real(name_ + "." + key, *v);
    return std::nullopt;
  }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) const {
    if (auto v = raw(key)) return to_uint(name_ + "." + key, *v);
    return fallback;
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::config, std::string("malformed configuration: ") + e.message() + " (line " +
                                std::to_string(e.line()) + ")");
  }

  const pt::ptree* sections[3] = {nullptr, nullptr, nullptr};
  for (const auto& [name, child] : tree) {
    int idx = -1;
    for (int i = 0; i < 3; ++i)
      if (name == kSections[i]) idx = i;
    require(idx >= 0, ErrorKind::config,
            child.empty() ? "key outside any section: " + name : "unknown section [" + name + "]");
    sections[idx] = &child;
    for (const auto& [key, value] : child) {
      require(kAllowed[idx].count(key) == 1, ErrorKind::config,
              "unknown key " + name + "." + key);
      require(value.empty(), ErrorKind::config, "nested key under " + name + "." + key);
    }
  }
  const Section sys(sections[0], "system"), ctl(sections[1], "controller"), run(sections[2], "run");

  try {
    ExperimentConfig cfg{
        SystemParams(sys.real("a"), sys.real("b"), sys.real("sigma_w"), sys.real("x0", 0.0)),
        ControllerConfig(ctl.real("u_max", 1.0), ctl.real("c", 0.1), ctl.real("a_init", -1.0),
                         ctl.real("b_init", -5.0))};
    cfg.horizon = run.uint("horizon", cfg.horizon);
    cfg.n_runs = run.uint("runs", cfg.n_runs);
    cfg.master_seed = run.uint("seed", cfg.master_seed);
    cfg.psi = run.real("psi", cfg.psi);
    cfg.d = run.opt_real("d");
    cfg.lambda = run.opt_real("lambda");
    cfg.workers = run.uint("workers", cfg.workers);
    if (auto out = run.raw("out")) cfg.output_dir = *out;

    require(cfg.horizon >= 2, ErrorKind::config, "run.horizon must be >= 2");
    require(cfg.n_runs >= 1, ErrorKind::config, "run.runs must be >= 1");
    require(cfg.workers >= 1, ErrorKind::config, "run.workers must be >= 1");
    require(cfg.psi > 0.0 && cfg.psi < 1.0, ErrorKind::config, "psi must satisfy 0 < psi < 1");
    require(!cfg.d || *cfg.d > 0.0, ErrorKind::config, "d must be > 0");
    require(!cfg.lambda || (*cfg.lambda > 0.0 && *cfg.lambda < 1.0), ErrorKind::config,
            "lambda must satisfy 0 < lambda < 1");
    return cfg;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) fail(ErrorKind::config, e.what());
    throw;
  }
}

ExperimentConfig preset(const std::string& name) {
  const ControllerConfig ctl(1.0, 0.1, -1.0, -5.0);
  if (name == "system1") {
    ExperimentConfig cfg{SystemParams(0.7, -1.0, 1.0, 0.0), ctl};
    cfg.lambda = 0.8;
    return cfg;
  }
  if (name == "system2") return {SystemParams(-1.0, 2.0, 2.0, 0.0), ctl};
  if (name == "system3") return {SystemParams(1.0, 0.5, 1.5, 0.0), ctl};
  fail(ErrorKind::config, "unknown preset '" + name + "' (expected system1, system2 or system3)");
}

}  // namespace aicmss
