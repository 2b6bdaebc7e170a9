#include "ctvrpca/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <sstream>

#include "ctvrpca/errors.hpp"

namespace ctvrpca::io {

// ---------------------------------------------------------------------------
// Tensor files

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b]))
         << (8 * b);
  }
  return v;
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

double get_f64(std::string_view in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b]))
            << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

std::uint32_t checked_extent(Index v) {
  if (v <= 0 || v > static_cast<Index>(std::numeric_limits<std::uint32_t>::max())) {
    throw FormatError("tensor extent does not fit the file header");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_tensor(const Tensor3& t) {
  const Dims& d = t.dims();
  std::string out;
  out.reserve(16 + 8 * static_cast<std::size_t>(d.size()));
  out.append(kTensorMagic);
  put_u32(out, checked_extent(d.h));
  put_u32(out, checked_extent(d.w));
  put_u32(out, checked_extent(d.s));
  for (double v : t.data()) put_f64(out, v);
  return out;
}

Tensor3 decode_tensor(std::string_view bytes) {
  if (bytes.size() < 16) throw FormatError("tensor file shorter than its header");
  if (bytes.substr(0, 4) != kTensorMagic) {
    throw FormatError("tensor file has bad magic (expected CTV1)");
  }
  const Dims d{get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
  if (d.h == 0 || d.w == 0 || d.s == 0) {
    throw FormatError("tensor file declares a zero extent");
  }
  const auto count = static_cast<std::uint64_t>(d.h) *
                     static_cast<std::uint64_t>(d.w) *
                     static_cast<std::uint64_t>(d.s);
  if (bytes.size() - 16 != 8 * count) {
    throw FormatError("tensor payload is " + std::to_string(bytes.size() - 16) +
                      " bytes, header implies " + std::to_string(8 * count));
  }
  std::vector<double> data(count);
  for (std::size_t p = 0; p < count; ++p) data[p] = get_f64(bytes, 16 + 8 * p);
  try {
    return Tensor3(d, std::move(data));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("tensor file: ") + e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  write_text(path, encode_tensor(t));
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_tensor(buf.str());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Run config

namespace {

class Section {
 public:
  Section(const Json& obj, std::string where,
          std::initializer_list<std::string_view> allowed)
      : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    for (const auto& [key, _] : obj_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) throw ConfigError("unknown key '" + where_ + "." + key + "'");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + " must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t seed(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(path(key) + " must be a nonnegative integer");
  }

  std::vector<double> numbers(const char* key,
                              const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_array() || v.empty()) {
      throw ConfigError(path(key) + " must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(path(key) + " must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::string path(const char* key) const { return where_ + "." + key; }
  const Json& at(const char* key) const { return obj_.at(key); }

 private:
  const Json& obj_;
  std::string where_;
};

template <typename Fn>
void as_config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

PhaseConfig RunConfig::phase_config() const {
  PhaseConfig p = phase;
  p.solver = solver;
  p.base = synthetic;
  return p;
}

RunConfig parse_run_config(const Json& doc) {
  RunConfig cfg;
  Section top(doc, "config", {"solver", "synthetic", "phase"});

  if (top.has("solver")) {
    Section s(top.at("solver"), "solver",
              {"lambda", "mu0", "rho", "eps1", "eps2", "max_iters", "mu_cap",
               "seed"});
    SolverConfig& c = cfg.solver;
    if (s.has("lambda") && !s.at("lambda").is_null()) {
      c.lambda = s.number("lambda", 0.0);
    }
    c.mu0 = s.number("mu0", c.mu0);
    c.rho = s.number("rho", c.rho);
    c.eps1 = s.number("eps1", c.eps1);
    c.eps2 = s.number("eps2", c.eps2);
    const std::int64_t iters = s.integer("max_iters", c.max_iters);
    if (iters <= 0 || iters > std::numeric_limits<int>::max()) {
      throw ConfigError("solver.max_iters must be a positive int");
    }
    c.max_iters = static_cast<int>(iters);
    c.mu_cap = s.number("mu_cap", c.mu_cap);
    c.seed = s.seed("seed", c.seed);
    as_config_error([&] { c.validate(); });
  }

  if (top.has("synthetic")) {
    Section s(top.at("synthetic"), "synthetic",
              {"h", "w", "s", "r", "rho_s", "gaussian_sigma", "seed",
               "smoother_window"});
    SyntheticSpec& y = cfg.synthetic;
    y.h = s.integer("h", y.h);
    y.w = s.integer("w", y.w);
    y.s = s.integer("s", y.s);
    y.r = s.integer("r", y.r);
    y.rho_s = s.number("rho_s", y.rho_s);
    y.gaussian_sigma = s.number("gaussian_sigma", y.gaussian_sigma);
    y.seed = s.seed("seed", y.seed);
    y.smoother_window = s.integer("smoother_window", y.smoother_window);
    as_config_error([&] { y.validate(); });
  }

  if (top.has("phase")) {
    Section s(top.at("phase"), "phase",
              {"rho_s", "rank_ratio", "trials", "threshold", "seed", "solvers"});
    PhaseConfig& p = cfg.phase;
    p.rho_s = s.numbers("rho_s", p.rho_s);
    p.rank_ratio = s.numbers("rank_ratio", p.rank_ratio);
    const std::int64_t trials = s.integer("trials", p.trials);
    if (trials < 1 || trials > 1'000'000) {
      throw ConfigError("phase.trials must be a positive integer");
    }
    p.trials = static_cast<int>(trials);
    p.threshold = s.number("threshold", p.threshold);
    p.seed = s.seed("seed", p.seed);
    if (s.has("solvers")) {
      const Json& v = s.at("solvers");
      if (!v.is_array() || v.empty()) {
        throw ConfigError("phase.solvers must be a non-empty array");
      }
      p.solvers.clear();
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("phase.solvers must hold strings");
        as_config_error([&] { p.solvers.push_back(parse_solver(e.get<std::string>())); });
      }
    }
  }

  as_config_error([&] { cfg.phase_config().validate(); });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

Json to_json(const RunConfig& cfg) {
  Json solver = {{"mu0", cfg.solver.mu0},       {"rho", cfg.solver.rho},
                 {"eps1", cfg.solver.eps1},     {"eps2", cfg.solver.eps2},
                 {"max_iters", cfg.solver.max_iters},
                 {"mu_cap", cfg.solver.mu_cap}, {"seed", cfg.solver.seed}};
  solver["lambda"] = cfg.solver.lambda ? Json(*cfg.solver.lambda) : Json(nullptr);
  const SyntheticSpec& y = cfg.synthetic;
  Json synthetic = {{"h", y.h},
                    {"w", y.w},
                    {"s", y.s},
                    {"r", y.r},
                    {"rho_s", y.rho_s},
                    {"gaussian_sigma", y.gaussian_sigma},
                    {"seed", y.seed},
                    {"smoother_window", y.smoother_window}};
  Json solvers = Json::array();
  for (auto k : cfg.phase.solvers) solvers.push_back(std::string(solver_name(k)));
  Json phase = {{"rho_s", cfg.phase.rho_s},
                {"rank_ratio", cfg.phase.rank_ratio},
                {"trials", cfg.phase.trials},
                {"threshold", cfg.phase.threshold},
                {"seed", cfg.phase.seed},
                {"solvers", solvers}};
  return {{"solver", solver}, {"synthetic", synthetic}, {"phase", phase}};
}

// ---------------------------------------------------------------------------
// CSV and JSON outputs

void write_diagnostics_csv(std::ostream& os,
                           const std::vector<IterationDiagnostics>& diags) {
  os << "iter,chg_m,chg_x,chg_s,chg,rel_err_m,rel_err_x,rel_err_s,objective,"
        "feas_g1,feas_g2,feas_g3,mu\n";
  for (const auto& d : diags) {
    os << d.iter;
    for (double v : {d.chg_m, d.chg_x, d.chg_s, d.chg, d.rel_err_m,
                     d.rel_err_x, d.rel_err_s, d.objective, d.feas_g[0],
                     d.feas_g[1], d.feas_g[2], d.mu}) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
}

void write_phase_csv(std::ostream& os, const PhaseGrid& grid) {
  os << "rank_index,rho_index,rank_ratio,rank,rho_s,trial,seed,solver,success,"
        "rel_err,iterations\n";
  for (const auto& o : grid.outcomes) {
    os << o.rank_index << ',' << o.rho_index << ','
       << format_double(grid.config.rank_ratio[o.rank_index]) << ',' << o.rank
       << ',' << format_double(o.rho_s) << ',' << o.trial << ',' << o.seed
       << ',' << solver_name(o.solver) << ',' << (o.success ? 1 : 0) << ','
       << format_double(o.rel_err) << ',' << o.iterations << '\n';
  }
}

Json phase_summary_json(const PhaseGrid& grid) {
  const PhaseConfig& c = grid.config;
  Json solvers = Json::object();
  for (auto k : c.solvers) {
    Json cells = Json::array();
    for (std::size_t a = 0; a < c.rank_ratio.size(); ++a) {
      Json row = Json::array();
      for (std::size_t b = 0; b < c.rho_s.size(); ++b) {
        row.push_back(grid.success_fraction(k, a, b));
      }
      cells.push_back(row);
    }
    std::size_t failures = 0;
    for (const auto& o : grid.outcomes) {
      if (o.solver == k && o.solver_failed) ++failures;
    }
    solvers[std::string(solver_name(k))] = {
        {"success_area", grid.success_area(k)},
        {"success_fraction", cells},
        {"solver_failures", failures}};
  }
  return {{"schema", kPhaseSchema},
          {"rho_s", c.rho_s},
          {"rank_ratio", c.rank_ratio},
          {"trials", c.trials},
          {"threshold", c.threshold},
          {"seed", c.seed},
          {"solvers", solvers}};
}

namespace {

Json triple_json(const IncoherenceTriple& t) {
  return {{"mu_u", t.mu_u}, {"mu_v", t.mu_v}, {"mu_uv", t.mu_uv}, {"max", t.max()}};
}

}  // namespace

Json incoherence_json(const IncoherenceReport& rep) {
  Json grads = Json::array();
  for (const auto& t : rep.gradient) grads.push_back(triple_json(t));
  return {{"rank", rep.rank},
          {"original", triple_json(rep.original)},
          {"gradient", grads},
          {"mu_pcp", rep.mu_pcp},
          {"mu_3dctv", rep.mu_3dctv}};
}

Json instance_sidecar_json(const SyntheticInstance& inst) {
  const SyntheticSpec& y = inst.spec;
  return {{"spec",
           {{"h", y.h},
            {"w", y.w},
            {"s", y.s},
            {"r", y.r},
            {"rho_s", y.rho_s},
            {"gaussian_sigma", y.gaussian_sigma},
            {"seed", y.seed},
            {"smoother_window", y.smoother_window}}},
          {"support_size", inst.support.size()},
          {"support", inst.support},
          {"true_rank_upper", inst.true_rank_upper}};
}

Json decomposition_summary_json(const DecompositionResult& res,
                                SolverKind solver, double objective) {
  Json last = nullptr;
  if (!res.diagnostics.empty()) {
    const auto& d = res.diagnostics.back();
    last = {{"chg", d.chg},
            {"rel_err_m", d.rel_err_m},
            {"feas_g", d.feas_g},
            {"mu", d.mu}};
  }
  return {{"solver", std::string(solver_name(solver))},
          {"diagnostics_schema", kDiagnosticsSchema},
          {"lambda", res.lambda},
          {"objective", objective},
          {"iterations", res.iters_used},
          {"converged", res.converged},
          {"final", last},
          {"svd_calls", res.ops.svd},
          {"fft_forward", res.ops.fft_forward},
          {"fft_inverse", res.ops.fft_inverse}};
}

}  // namespace ctvrpca::io
