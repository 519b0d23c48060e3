#include "driver.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace hmfem {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    config_error("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    // accept integral values written as 2e4
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 9e15) config_error("'" + key + "' expects an integer, got '" + v + "'");
    return static_cast<long long>(d);
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 0) config_error("'" + key + "' must be nonnegative");
  return static_cast<std::size_t>(n);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "problem") {
    if (v == "lshape") problem = ProblemKind::LShape;
    else if (v == "manufactured") problem = ProblemKind::Manufactured;
    else if (v == "from-files") problem = ProblemKind::FromFiles;
    else config_error("problem must be lshape, manufactured or from-files, got '" + v + "'");
  } else if (key == "r") {
    const long long n = parse_int(key, v);
    if (n < 0 || n > 9) config_error("r must lie in 0..9");
    r = static_cast<int>(n);
  } else if (key == "theta") {
    theta = parse_double(key, v);
  } else if (key == "lambda") {
    lambda = parse_double(key, v);
  } else if (key == "mu") {
    mu = parse_double(key, v);
  } else if (key == "refinement") {
    if (v == "adaptive") refinement = RefinementMode::Adaptive;
    else if (v == "uniform") refinement = RefinementMode::Uniform;
    else config_error("refinement must be adaptive or uniform, got '" + v + "'");
  } else if (key == "max_elements") {
    max_elements = parse_count(key, v);
  } else if (key == "max_iterations") {
    max_iterations = parse_count(key, v);
  } else if (key == "eta_tol") {
    eta_tol = parse_double(key, v);
  } else if (key == "pcg_tol") {
    pcg_tol = parse_double(key, v);
  } else if (key == "pcg_maxit") {
    pcg_maxit = parse_count(key, v);
  } else if (key == "preconditioner") {
    if (v == "cholesky") preconditioner = PreconditionerChoice::Cholesky;
    else if (v == "ic0") preconditioner = PreconditionerChoice::IncompleteCholesky;
    else config_error("preconditioner must be cholesky or ic0, got '" + v + "'");
  } else if (key == "out") {
    if (v.empty()) config_error("out must not be empty");
    out = v;
  } else if (key == "mesh") {
    mesh = v;
  } else if (key == "data") {
    if (v != "manufactured" && v != "lshape") config_error("data must be manufactured or lshape, got '" + v + "'");
    data = v;
  } else {
    config_error("unknown configuration key '" + key + "'");
  }
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "problem") {
    return problem == ProblemKind::LShape ? "lshape" : problem == ProblemKind::Manufactured ? "manufactured" : "from-files";
  }
  if (key == "r") return std::to_string(r);
  if (key == "theta") return fmt(theta);
  if (key == "lambda") return fmt(lambda);
  if (key == "mu") return fmt(mu);
  if (key == "refinement") return refinement == RefinementMode::Adaptive ? "adaptive" : "uniform";
  if (key == "max_elements") return std::to_string(max_elements);
  if (key == "max_iterations") return std::to_string(max_iterations);
  if (key == "eta_tol") return fmt(eta_tol);
  if (key == "pcg_tol") return fmt(pcg_tol);
  if (key == "pcg_maxit") return std::to_string(pcg_maxit);
  if (key == "preconditioner") return preconditioner == PreconditionerChoice::Cholesky ? "cholesky" : "ic0";
  if (key == "out") return out;
  if (key == "mesh") return mesh;
  if (key == "data") return data;
  config_error("unknown configuration key '" + key + "'");
}

void RunConfig::load(std::istream& is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key=value");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot open config file '" + path + "'");
  load(is);
}

void RunConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) config_error("theta must lie in (0,1), got " + fmt(theta));
  if (!(mu > 0.0) || !(lambda > 0.0)) config_error("lambda and mu must be positive");
  if (r < 0 || r > 9) config_error("r must lie in 0..9");
  if (max_elements == 0) config_error("max_elements must be positive");
  if (!(eta_tol >= 0.0)) config_error("eta_tol must be nonnegative");
  if (!(pcg_tol > 0.0 && pcg_tol < 1.0)) config_error("pcg_tol must lie in (0,1)");
  if (problem == ProblemKind::FromFiles && mesh.empty()) config_error("problem=from-files needs mesh=PATH");
  if (problem != ProblemKind::FromFiles && !mesh.empty()) config_error("mesh=PATH is only used with problem=from-files");
}

AfemConfig RunConfig::afem() const {
  AfemConfig a;
  a.theta = theta;
  a.space.r = r;
  a.max_elements = max_elements;
  a.max_iterations = max_iterations;
  a.eta_tol = eta_tol;
  a.refinement = refinement;
  a.pcg.tol = pcg_tol;
  a.pcg.maxit = pcg_maxit;
  a.pcg.preconditioner = preconditioner;
  return a;
}

ProblemSetup make_problem(const RunConfig& cfg) {
  cfg.validate();
  ProblemSetup s;
  const MaterialParams m = cfg.material();
  const bool lshape_data =
      cfg.problem == ProblemKind::LShape || (cfg.problem == ProblemKind::FromFiles && cfg.data == "lshape");
  ExactSolution exact = lshape_data ? lshape_exact(m) : manufactured_polynomial(cfg.r, m);
  if (lshape_data) s.z = find_z(m.lambda, m.mu, 1.5 * std::numbers::pi);
  s.problem.data = exact.problem_data();
  s.problem.exact = std::move(exact);
  s.mesh = std::make_shared<const Mesh>(cfg.problem == ProblemKind::FromFiles ? read_mesh(cfg.mesh)
                                                                               : l_shaped_initial_mesh());
  return s;
}

RunResult run_solve(const RunConfig& cfg, const std::function<void(const AfemRecord&)>& on_record) {
  RunResult res;
  res.config = cfg;
  res.setup = make_problem(cfg);
  AfemConfig a = cfg.afem();
  a.max_iterations = 0;
  res.trace = run(res.setup.mesh, a, res.setup.problem, on_record);
  res.trace.truncated = false;
  return res;
}

RunResult run_adapt(const RunConfig& cfg, const std::function<void(const AfemRecord&)>& on_record) {
  RunResult res;
  res.config = cfg;
  res.setup = make_problem(cfg);
  res.trace = run(res.setup.mesh, cfg.afem(), res.setup.problem, on_record);
  return res;
}

void write_trace_csv(std::ostream& os, const std::vector<AfemRecord>& rows) {
  os << kTraceHeader << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.iter << ',' << r.nt << ',' << r.n_sigma << ',' << r.n_u << ',' << r.n_lambda << ',' << r.eta << ',' << r.osc
       << ',' << r.bar_eta << ',';
    if (r.err_A) os << *r.err_A;
    os << ',' << r.marked << ',' << r.pcg_iters << ',' << r.wall_ms << '\n';
  }
}

std::optional<double> trace_slope(const std::vector<AfemRecord>& rows, std::size_t window, bool estimator) {
  std::vector<double> nt, err;
  for (const auto& r : rows) {
    const double v = estimator ? r.bar_eta : r.err_A.value_or(0.0);
    if (v > 0.0) {
      nt.push_back(static_cast<double>(r.nt));
      err.push_back(v);
    }
  }
  const std::size_t w = std::min(window, nt.size());
  if (w < 2 || nt[nt.size() - w] == nt.back()) return std::nullopt;
  return rate(nt, err, w);
}

void write_outputs(const std::string& dir, const RunResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  auto open = [&](const char* name) {
    std::ofstream os(base / name);
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + (base / name).string() + "'");
    return os;
  };
  write_mesh((base / "mesh.txt").string(), *result.trace.final_mesh);
  {
    auto os = open("trace.csv");
    write_trace_csv(os, result.trace.rows);
  }
  {
    auto os = open("indicators.csv");
    write_indicators(os, result.trace.final_report);
  }
  auto os = open("summary.txt");
  const auto& rows = result.trace.rows;
  const auto& cfg = result.config;
  os << std::setprecision(17);
  os << "problem=" << cfg.get("problem") << '\n'
     << "r=" << cfg.r << '\n'
     << "theta=" << cfg.theta << '\n'
     << "lambda=" << cfg.lambda << '\n'
     << "mu=" << cfg.mu << '\n'
     << "refinement=" << cfg.get("refinement") << '\n';
  if (result.setup.z) os << "z=" << *result.setup.z << '\n';
  os << "rows=" << rows.size() << '\n'
     << "final_nt=" << (rows.empty() ? 0 : rows.back().nt) << '\n'
     << "truncated=" << (result.trace.truncated ? "true" : "false") << '\n';
  const std::size_t window = 8;
  const auto s_err = trace_slope(rows, window, false);
  const auto s_est = trace_slope(rows, window, true);
  os << "slope_window=" << window << '\n';
  os << "slope_err_A=";
  if (s_err) os << *s_err;
  os << '\n' << "slope_bar_eta=";
  if (s_est) os << *s_est;
  os << '\n';
  if (!os) throw Error(ErrorKind::Io, "failed writing summary.txt");
}

void export_initial_mesh(const RunConfig& cfg, const std::string& dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  const Mesh mesh = cfg.problem == ProblemKind::FromFiles ? read_mesh(cfg.mesh) : l_shaped_initial_mesh();
  write_mesh((std::filesystem::path(dir) / "mesh.txt").string(), mesh);
}

}  // namespace hmfem
