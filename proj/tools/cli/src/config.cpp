#include "resistograph/cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "resistograph/error.hpp"

namespace resistograph::cli {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

std::string_view kind_name(FstTransform t) { return t == FstTransform::odds ? "odds" : "identity"; }

pt::ptree to_ptree(const RunConfig& c) {
  pt::ptree t;
  t.put("run.mode", std::string(to_string(c.mode)));
  t.put("run.seed", std::to_string(c.seed));
  t.put("run.threads", std::to_string(c.threads));
  t.put("run.output_dir", c.output_dir.string());
  t.put("run.optimizer", std::string(to_string(c.optimizer)));

  t.put("model.kind", std::string(to_string(c.model.kind)));
  t.put("model.floor_unclassified", fmt_bool(c.model.floor_unclassified));

  t.put("optimizer.learning_rate", fmt_double(c.optim.learning_rate));
  t.put("optimizer.gamma", fmt_double(c.optim.gamma));
  t.put("optimizer.iterations", std::to_string(c.optim.iterations));
  t.put("optimizer.rmsprop_eps", fmt_double(c.optim.rmsprop_eps));
  t.put("optimizer.floor_beta", fmt_double(c.optim.floors.beta));
  t.put("optimizer.floor_beta_opt", fmt_double(c.optim.floors.beta_opt));
  t.put("optimizer.floor_beta_sd", fmt_double(c.optim.floors.beta_sd));
  t.put("optimizer.floor_alpha", fmt_double(c.optim.floors.alpha));
  t.put("optimizer.snapshot_every", std::to_string(c.optim.snapshot_every));
  t.put("optimizer.init", c.init);

  t.put("solver.tolerance", fmt_double(c.solver.tolerance));
  t.put("solver.max_iterations", std::to_string(c.solver.max_iterations));
  t.put("solver.preconditioner", "identity");
  t.put("solver.warm_start", fmt_bool(c.warm_start));

  t.put("data.elevation", c.data.elevation.string());
  t.put("data.landcover", c.data.landcover.string());
  t.put("data.codes", c.data.codes.string());
  t.put("data.fst", c.data.fst.string());
  t.put("data.unbounded_dissimilarity", fmt_bool(c.data.unbounded_dissimilarity));
  t.put("data.cellsize", fmt_double(c.data.cellsize));
  t.put("data.r2_transform", std::string(kind_name(c.data.r2_transform)));

  const SyntheticConfig& s = c.synthetic;
  t.put("synthetic.rows", std::to_string(s.landscape.rows));
  t.put("synthetic.cols", std::to_string(s.landscape.cols));
  t.put("synthetic.landcover_types", std::to_string(s.landscape.landcover_types));
  t.put("synthetic.elevation_bumps", std::to_string(s.landscape.elevation_bumps));
  t.put("synthetic.patches_per_type", std::to_string(s.landscape.patches_per_type));
  t.put("synthetic.sample_size", std::to_string(s.sample_size));
  t.put("synthetic.relative_noise", fmt_double(s.relative_noise));
  t.put("synthetic.test_size", std::to_string(s.test_size));
  t.put("synthetic.eval_every", std::to_string(s.eval_every));

  t.put("sweep.sample_sizes", join(c.sweep.sample_sizes));
  t.put("sweep.relative_noise", join(c.sweep.relative_noise));
  t.put("sweep.seeds", std::to_string(c.sweep.seeds));

  t.put("evaluate.theta", c.theta.string());
  t.put("evaluate.error_presence_threshold", fmt_double(c.error_presence_threshold));
  t.put("evaluate.table_presence_threshold", fmt_double(c.table_presence_threshold));

  t.put("resistance.edges", c.edges.string());
  t.put("resistance.nodes", join(c.nodes));
  return t;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::filesystem::path base) : tree_(tree), base_(std::move(base)) {}

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string str(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  std::filesystem::path path(const std::string& key, const std::filesystem::path& fallback) const {
    const std::string v = str(key, fallback.string());
    if (v.empty()) return {};
    std::filesystem::path p(v);
    if (p.is_relative() && !base_.empty()) p = base_ / p;
    return p.lexically_normal();
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, str(key, ""));
  }

  template <class Int>
  Int integer(const std::string& key, Int fallback) const {
    if (!has(key)) return fallback;
    return parse_int<Int>(key, str(key, ""));
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(key + ": '" + v + "' is not a boolean");
  }

  template <class T>
  std::vector<T> list(const std::string& key, const std::vector<T>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<T> out;
    std::stringstream ss(str(key, ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (item.empty()) continue;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(parse_real(key, item));
      } else {
        out.push_back(parse_int<T>(key, item));
      }
    }
    return out;
  }

 private:
  static double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
      throw ParseError(key + ": '" + v + "' is not a number");
    }
    return out;
  }

  template <class Int>
  static Int parse_int(const std::string& key, const std::string& v) {
    Int out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
      throw ParseError(key + ": '" + v + "' is not an integer");
    }
    return out;
  }

  const pt::ptree& tree_;
  std::filesystem::path base_;
};

void require_file(const std::filesystem::path& p, const char* what) {
  if (!p.empty() && !std::filesystem::is_regular_file(p)) {
    throw DataError(std::string(what) + " file not found: " + p.string());
  }
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::fit:
      return "fit";
    case Mode::simulate:
      return "simulate";
    case Mode::sweep:
      return "sweep";
    case Mode::evaluate:
      return "evaluate";
    case Mode::resistance:
      return "resistance";
    case Mode::baseline:
      return "baseline";
  }
  return "fit";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::fit, Mode::simulate, Mode::sweep, Mode::evaluate, Mode::resistance,
                 Mode::baseline}) {
    if (to_string(m) == name) return m;
  }
  throw ParseError("unknown mode '" + std::string(name) + "'");
}

InitMode RunConfig::init_mode() const {
  if (init.empty()) return real_data() ? InitMode::real : InitMode::synthetic;
  if (init == "synthetic") return InitMode::synthetic;
  if (init == "real") return InitMode::real;
  throw ParseError("optimizer.init must be 'synthetic' or 'real', got '" + init + "'");
}

void RunConfig::validate() const {
  if (threads < 0) throw DataError("run.threads must be >= 0");
  optim.validate();
  if (!(solver.tolerance > 0.0)) throw DataError("solver.tolerance must be positive");
  if (solver.max_iterations < 0) throw DataError("solver.max_iterations must be >= 0");
  require_file(data.elevation, "elevation");
  require_file(data.landcover, "landcover");
  require_file(data.codes, "code table");
  require_file(data.fst, "dissimilarity");
  require_file(theta, "parameter");
  require_file(edges, "edge list");
  if (!data.landcover.empty() && data.codes.empty()) {
    throw DataError("data.landcover needs data.codes");
  }
  if (real_data() && !data.has_rasters()) throw DataError("data.fst needs at least one raster");
  if (data.cellsize < 0.0) throw DataError("data.cellsize must be >= 0");
  if (synthetic.sample_size < 2 || synthetic.test_size < 2) {
    throw DataError("synthetic sample sizes must be >= 2");
  }
  if (synthetic.relative_noise < 0.0) throw DataError("synthetic.relative_noise must be >= 0");
  if (synthetic.eval_every < 1) throw DataError("synthetic.eval_every must be >= 1");
  if (sweep.seeds < 1 || sweep.sample_sizes.empty() || sweep.relative_noise.empty()) {
    throw DataError("sweep needs at least one size, noise level and seed");
  }
  (void)init_mode();
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  const pt::ptree known = to_ptree(RunConfig{});
  for (const auto& [section, body] : tree) {
    if (!known.get_child_optional(section)) throw ParseError("unknown config section [" + section + "]");
    for (const auto& kv : body) {
      if (!known.get_child_optional(section + "." + kv.first)) {
        throw ParseError("unknown config key " + section + "." + kv.first);
      }
    }
  }

  const Reader r(tree, base);
  RunConfig c;
  c.mode = parse_mode(r.str("run.mode", "fit"));
  c.seed = r.integer<std::uint64_t>("run.seed", c.seed);
  c.threads = r.integer<int>("run.threads", c.threads);
  c.output_dir = r.path("run.output_dir", c.output_dir);
  c.optimizer = parse_fit_method(r.str("run.optimizer", std::string(to_string(c.optimizer))));

  c.data.elevation = r.path("data.elevation", {});
  c.data.landcover = r.path("data.landcover", {});
  c.data.codes = r.path("data.codes", {});
  c.data.fst = r.path("data.fst", {});
  c.data.unbounded_dissimilarity = r.boolean("data.unbounded_dissimilarity", false);
  c.data.cellsize = r.real("data.cellsize", 0.0);
  const std::string transform = r.str("data.r2_transform", "identity");
  if (transform == "identity") {
    c.data.r2_transform = FstTransform::identity;
  } else if (transform == "odds") {
    c.data.r2_transform = FstTransform::odds;
  } else {
    throw ParseError("data.r2_transform must be 'identity' or 'odds'");
  }

  c.model.kind = parse_model_kind(r.str("model.kind", std::string(to_string(c.model.kind))));
  c.model.floor_unclassified = r.boolean("model.floor_unclassified", c.real_data());

  c.optim.learning_rate = r.real("optimizer.learning_rate", c.optim.learning_rate);
  c.optim.gamma = r.real("optimizer.gamma", c.optim.gamma);
  c.optim.iterations = r.integer<int>("optimizer.iterations", c.optim.iterations);
  c.optim.rmsprop_eps = r.real("optimizer.rmsprop_eps", c.optim.rmsprop_eps);
  const Floors floors = c.real_data() ? Floors::real_data() : Floors::synthetic();
  c.optim.floors.beta = r.real("optimizer.floor_beta", floors.beta);
  c.optim.floors.beta_opt = r.real("optimizer.floor_beta_opt", floors.beta_opt);
  c.optim.floors.beta_sd = r.real("optimizer.floor_beta_sd", floors.beta_sd);
  c.optim.floors.alpha = r.real("optimizer.floor_alpha", floors.alpha);
  c.optim.snapshot_every = r.integer<int>("optimizer.snapshot_every", c.optim.snapshot_every);
  c.init = r.str("optimizer.init", "");
  if (c.init.empty()) c.init = c.real_data() ? "real" : "synthetic";

  c.solver.tolerance = r.real("solver.tolerance", c.solver.tolerance);
  c.solver.max_iterations = r.integer<int>("solver.max_iterations", c.solver.max_iterations);
  if (r.str("solver.preconditioner", "identity") != "identity") {
    throw ParseError("solver.preconditioner: only 'identity' is supported");
  }
  c.warm_start = r.boolean("solver.warm_start", c.warm_start);

  SyntheticConfig& s = c.synthetic;
  s.landscape.rows = r.integer<int>("synthetic.rows", s.landscape.rows);
  s.landscape.cols = r.integer<int>("synthetic.cols", s.landscape.cols);
  s.landscape.landcover_types = r.integer<int>("synthetic.landcover_types", s.landscape.landcover_types);
  s.landscape.elevation_bumps = r.integer<int>("synthetic.elevation_bumps", s.landscape.elevation_bumps);
  s.landscape.patches_per_type =
      r.integer<int>("synthetic.patches_per_type", s.landscape.patches_per_type);
  s.sample_size = r.integer<int>("synthetic.sample_size", s.sample_size);
  s.relative_noise = r.real("synthetic.relative_noise", s.relative_noise);
  s.test_size = r.integer<int>("synthetic.test_size", s.test_size);
  s.eval_every = r.integer<int>("synthetic.eval_every", s.eval_every);

  c.sweep.sample_sizes = r.list<int>("sweep.sample_sizes", c.sweep.sample_sizes);
  c.sweep.relative_noise = r.list<double>("sweep.relative_noise", c.sweep.relative_noise);
  c.sweep.seeds = r.integer<int>("sweep.seeds", c.sweep.seeds);

  c.theta = r.path("evaluate.theta", {});
  c.error_presence_threshold = r.real("evaluate.error_presence_threshold", c.error_presence_threshold);
  c.table_presence_threshold = r.real("evaluate.table_presence_threshold", c.table_presence_threshold);

  c.edges = r.path("resistance.edges", {});
  c.nodes = r.list<int>("resistance.nodes", {});
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

void write_config(const RunConfig& cfg, std::ostream& out) {
  pt::write_ini(out, to_ptree(cfg));
}

}  // namespace resistograph::cli
