#include "mdslab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mdslab/error.hpp"
#include "mdslab/mds.hpp"
#include "mdslab/products.hpp"
#include "mdslab/spaces.hpp"
#include "mdslab/sphere_spectral.hpp"
#include "mdslab/stability.hpp"
#include "mdslab/table.hpp"

namespace mdslab {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kCommands[] = {
    "space gen",    "mds embed",          "mds krein",     "sphere eigen",
    "sphere asymptotics", "stability converge", "product check", "torus check",
};

constexpr Claim kClaims[] = {
    {"space gen", "finite samples of analytic spaces carry valid metrics and uniform weights"},
    {"mds embed", "classical MDS embeds a finite metric measure space by its positive spectrum"},
    {"mds krein", "positive and negative parts together reproduce every squared distance exactly"},
    {"sphere eigen", "kernel eigenvalues on spheres from the Taylor series agree with quadrature up to a fixed factor"},
    {"sphere asymptotics", "odd-degree sphere eigenvalues decay like n^-(d+1)"},
    {"stability converge", "grid MDS maps converge to the circle limit map up to an orthogonal transform"},
    {"product check", "the spectrum of a product is the union of the factor spectra"},
    {"torus check", "the flat torus embeds as a sum of circle snowflakes"},
};

std::string words(const std::vector<std::string>& args, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count && i < args.size(); ++i) s += (i ? " " : "") + args[i];
  return s;
}

std::string usage() {
  std::string s = "usage: mdslab <command> [--flag value ...]\n       mdslab run --config cfg.json\ncommands:\n";
  for (const auto& c : kClaims) s += fmt::format("  {:<20} {}\n", c.command, c.claim);
  return s;
}

// {:.15g}, keeping a decimal point on integral values.
std::string format_scalar(double v) {
  std::string s = fmt::format("{:.15g}", v);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string json_scalar_to_arg(const ojson& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_scalar_to_arg(v[i], key);
    return s;
  }
  throw Error(ErrorKind::ParseError, fmt::format("option '{}' must be a scalar or array", key));
}

template <class T>
T get_checked(const ojson& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, fmt::format("config key '{}': {}", key, e.what()));
  }
}

std::uint64_t get_unsigned(const ojson& v, std::string_view key) {
  if (!v.is_number_unsigned())
    throw Error(ErrorKind::ParseError, fmt::format("config key '{}' must be a non-negative integer", key));
  return v.get<std::uint64_t>();
}

struct Flags {
  std::string space, input, out, mode = "grid", method = "quadrature", kernel = "full";
  std::vector<std::size_t> sizes;
  std::vector<std::string> factors;
  std::size_t n = 0, m = 0, refinement = 8, jobs = 1, pairs = 1000;
  int dim = 1, degree = 1, nmin = 5, nmax = 0, k = 2, trunc = 99;
  std::optional<double> p;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

void add_flags(CLI::App& app, const std::string& cmd, Flags& f) {
  auto seed = [&] { app.add_option("--seed", f.seed, "RNG seed")->envname("MDSLAB_SEED"); };
  if (cmd == "space gen") {
    app.add_option("--space", f.space, "space spec")->required();
    app.add_option("--n", f.n, "sample size")->required();
    app.add_option("--mode", f.mode)->check(CLI::IsMember({"grid", "random"}));
    seed();
    app.add_option("--out", f.out)->required();
  } else if (cmd == "mds embed") {
    app.add_option("--input", f.input)->required();
    app.add_option("--m", f.m, "dimensions kept (default: all positive)");
    app.add_option("--p", f.p, "L^p normalization exponent, p >= 4");
    app.add_option("--out", f.out)->required();
  } else if (cmd == "mds krein") {
    app.add_option("--input", f.input)->required();
    app.add_option("--out", f.out)->required();
  } else if (cmd == "sphere eigen") {
    app.add_option("--dim", f.dim)->required();
    app.add_option("--degree", f.degree)->required();
    app.add_option("--method", f.method)->check(CLI::IsMember({"quadrature", "series"}));
    app.add_option("--kernel", f.kernel)->check(CLI::IsMember({"full", "snowflake"}));
    app.add_option("--tol", f.tol);
    app.add_option("--out", f.out);
  } else if (cmd == "sphere asymptotics") {
    app.add_option("--dim", f.dim)->required();
    app.add_option("--nmin", f.nmin);
    app.add_option("--nmax", f.nmax)->required();
    app.add_option("--tol", f.tol);
    app.add_option("--out", f.out)->required();
  } else if (cmd == "stability converge") {
    app.add_option("--space", f.space)->required();
    app.add_option("--sizes", f.sizes)->required()->delimiter(',');
    f.m = 2;
    app.add_option("--m", f.m);
    app.add_option("--refinement", f.refinement);
    app.add_option("--jobs", f.jobs);
    app.add_option("--out", f.out)->required();
  } else if (cmd == "product check") {
    app.add_option("--factors", f.factors)->required()->delimiter(',')->expected(2);
    app.add_option("--out", f.out)->required();
  } else if (cmd == "torus check") {
    f.n = 256;
    app.add_option("--n", f.n);
    app.add_option("--k", f.k);
    app.add_option("--trunc", f.trunc);
    app.add_option("--pairs", f.pairs);
    seed();
    app.add_option("--out", f.out);
  }
}

// Canonical record of the parsed flags (defaults excluded, seed resolved).
ojson effective_args(const CLI::App& app, const std::string& cmd, const Flags& f) {
  ojson args = ojson::object();
  std::vector<std::pair<std::string, std::string>> items;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    std::string joined;
    for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
    items.emplace_back(opt->get_name(), joined);
  }
  if (cmd == "space gen" || cmd == "torus check") items.emplace_back("--seed", std::to_string(f.seed));
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  for (auto& [k, v] : items) args[k] = v;
  return ojson{{"command", cmd}, {"args", args}};
}

Table embedding_table(const Eigen::MatrixXd& x, std::string_view prefix) {
  Table t;
  for (Eigen::Index c = 0; c < x.cols(); ++c) t.header.push_back(fmt::format("{}{}", prefix, c + 1));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(i, c);
    t.rows.push_back(std::move(row));
  }
  return t;
}

KernelKind parse_kernel(const std::string& s) { return s == "snowflake" ? KernelKind::Snowflake : KernelKind::Full; }

// Runs the command and returns the result path ("" if nothing was written).
std::string dispatch(const std::string& cmd, const Flags& f, std::ostream& out) {
  if (cmd == "space gen") {
    const auto space = AnalyticSpace::parse(f.space);
    const auto mode = f.mode == "random" ? SampleSpec::Mode::UniformRandom : SampleSpec::Mode::Grid;
    write_finite_space(sample(space, {mode, f.n, f.seed}), f.out);
    out << fmt::format("wrote {} points of {} to {}\n", f.n, space.to_string(), f.out);
    return f.out;
  }
  if (cmd == "mds embed") {
    const auto result = classical_mds(read_finite_space(f.input));
    const std::size_t m = f.m ? f.m : result.positive_count;
    const Eigen::MatrixXd x = f.p ? lp_normalize(result, *f.p, m) : embed(result, m);
    emit_table(embedding_table(x, "x"), f.out);
    out << fmt::format("{} positive, {} negative eigenvalues; wrote {} coordinates per point\n",
                       result.positive_count, result.negative_count, m);
    return f.out;
  }
  if (cmd == "mds krein") {
    const auto space = read_finite_space(f.input);
    const auto result = classical_mds(space);
    const Eigen::MatrixXd pos = embed(result, result.positive_count);
    const Eigen::MatrixXd neg = embed_negative(result);
    Eigen::MatrixXd both(pos.rows(), pos.cols() + neg.cols());
    both << pos, neg;
    Table t = embedding_table(both, "c");
    for (Eigen::Index c = 0; c < both.cols(); ++c)
      t.header[static_cast<std::size_t>(c)] =
          c < pos.cols() ? fmt::format("pos{}", c + 1) : fmt::format("neg{}", c - pos.cols() + 1);
    emit_table(t, f.out);
    double worst = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t k = i + 1; k < space.size(); ++k) {
        const double d = space.distance(i, k);
        worst = std::max(worst, std::abs(reconstruct_distance_sq(result, i, k) - d * d));
      }
    out << fmt::format("max |reconstructed d^2 - d^2| = {:.3e}\n", worst);
    return f.out;
  }
  if (cmd == "sphere eigen") {
    const auto kind = parse_kernel(f.kernel);
    const double v = f.method == "series" ? eigenvalue_series(f.dim, f.degree, f.tol, kind)
                                          : eigenvalue_quadrature(f.dim, f.degree, kind);
    out << format_scalar(v) << "\n";
    if (f.out.empty()) return {};
    emit_table({{"dim", "degree", "value"}, {{double(f.dim), double(f.degree), v}}}, f.out);
    return f.out;
  }
  if (cmd == "sphere asymptotics") {
    const auto scan = asymptotic_scan(f.dim, f.nmin, f.nmax, f.tol);
    Table t{{"n", "lambda", "normalized", "s_peak"}, {}};
    for (const auto& r : scan.rows)
      t.rows.push_back({double(r.n), r.lambda, r.normalized, double(r.peak)});
    emit_table(t, f.out);
    out << fmt::format("max/min of lambda n^(d+1): {:.6g}\n", scan.spread());
    return f.out;
  }
  if (cmd == "stability converge") {
    const auto t = convergence_experiment(AnalyticSpace::parse(f.space), f.sizes, f.m,
                                          {f.refinement, f.jobs});
    emit_table(t, f.out);
    out << fmt::format("wrote {} rows to {} (GW columns are coupling upper bounds)\n", t.rows.size(), f.out);
    return f.out;
  }
  if (cmd == "product check") {
    const auto a = read_finite_space(f.factors.at(0));
    const auto b = read_finite_space(f.factors.at(1));
    const auto pred = predict_product_spectrum(classical_mds(a), classical_mds(b));
    const auto direct = classical_mds(product_space(a, b));
    const double spec = spectrum_distance(pred, direct.eigenvalues);
    const double add = verify_product_embedding(a, b);
    emit_table({{"spectrum_distance", "additivity_error", "merged_nonzero", "product_points"},
                {{spec, add, double(pred.eigenvalues.size()), double(direct.size())}}},
               f.out);
    out << fmt::format("spectrum distance {:.3e}, additivity error {:.3e}\n", spec, add);
    return f.out;
  }
  if (cmd == "torus check") {
    const auto rep = torus_check(f.n, f.k, f.trunc, f.pairs, f.seed);
    out << fmt::format("max abs error {:.6g}, max rel error {:.6g}, band violation {:.6g} over {} pairs\n",
                       rep.max_abs_error, rep.max_rel_error, rep.max_holder_violation, rep.pairs);
    if (f.out.empty()) return {};
    emit_table({{"max_abs_error", "max_rel_error", "max_holder_violation", "pairs"},
                {{rep.max_abs_error, rep.max_rel_error, rep.max_holder_violation, double(rep.pairs)}}},
               f.out);
    return f.out;
  }
  throw Error(ErrorKind::UnknownCommand, cmd);
}

int run_command(const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::string cmd = words(args, 2);
  if (args.size() < 2 || std::find(std::begin(kCommands), std::end(kCommands), cmd) == std::end(kCommands))
    throw Error(ErrorKind::UnknownCommand, fmt::format("'{}'", words(args, std::min<std::size_t>(2, args.size()))));
  CLI::App app{std::string(cmd), "mdslab " + cmd};
  Flags f;
  add_flags(app, cmd, f);
  std::vector<std::string> rest(args.begin() + 2, args.end());
  std::reverse(rest.begin(), rest.end());
  app.parse(rest);

  const std::string result = dispatch(cmd, f, out);
  if (!result.empty()) {
    RunRecord rec;
    rec.command = cmd;
    rec.config_hash = fnv1a_hex(effective_args(app, cmd, f).dump());
    rec.tool_version = std::string(kToolVersion);
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.result = result;
    write_text_file(result + ".run.json", rec.to_json().dump(2) + "\n");
  }
  return 0;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "config must be a JSON object");
  static const std::set<std::string> known = {"command", "space", "sizes", "m",       "p",
                                              "tol",     "seed",  "out",   "options"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(ErrorKind::ParseError, fmt::format("unknown config key '{}'", key));
  if (!j.contains("command")) throw Error(ErrorKind::ParseError, "config needs a 'command'");

  ExperimentConfig c;
  c.command = get_checked<std::string>(j["command"], "command");
  if (j.contains("space")) c.space = get_checked<std::string>(j["space"], "space");
  if (j.contains("sizes")) {
    if (!j["sizes"].is_array()) throw Error(ErrorKind::ParseError, "config key 'sizes' must be an array");
    for (const auto& s : j["sizes"]) c.sizes.push_back(get_unsigned(s, "sizes"));
  }
  if (j.contains("m")) c.m = get_unsigned(j["m"], "m");
  if (j.contains("p")) c.p = get_checked<double>(j["p"], "p");
  if (j.contains("tol")) c.tol = get_checked<double>(j["tol"], "tol");
  if (j.contains("seed")) c.seed = get_unsigned(j["seed"], "seed");
  if (j.contains("out")) c.out = get_checked<std::string>(j["out"], "out");
  if (j.contains("options")) {
    if (!j["options"].is_object()) throw Error(ErrorKind::ParseError, "config key 'options' must be an object");
    c.options = j["options"];
  }
  return c;
}

std::string format_config(const ExperimentConfig& c) {
  ojson j;
  j["command"] = c.command;
  if (c.space) j["space"] = *c.space;
  if (!c.sizes.empty()) j["sizes"] = c.sizes;
  if (c.m) j["m"] = *c.m;
  if (c.p) j["p"] = *c.p;
  if (c.tol) j["tol"] = *c.tol;
  if (c.seed) j["seed"] = *c.seed;
  if (c.out) j["out"] = *c.out;
  if (!c.options.empty()) j["options"] = c.options;
  return j.dump(2) + "\n";
}

std::vector<std::string> config_to_args(const ExperimentConfig& c) {
  std::vector<std::string> args;
  std::istringstream words_in(c.command);
  for (std::string w; words_in >> w;) args.push_back(w);
  auto flag = [&](const std::string& name, const std::string& value) {
    args.push_back("--" + name);
    args.push_back(value);
  };
  if (c.space) flag("space", *c.space);
  if (!c.sizes.empty()) {
    std::string s;
    for (std::size_t i = 0; i < c.sizes.size(); ++i) s += (i ? "," : "") + std::to_string(c.sizes[i]);
    flag("sizes", s);
  }
  if (c.m) flag("m", std::to_string(*c.m));
  if (c.p) flag("p", ojson(*c.p).dump());
  if (c.tol) flag("tol", ojson(*c.tol).dump());
  if (c.seed) flag("seed", std::to_string(*c.seed));
  if (c.out) flag("out", *c.out);
  for (const auto& [key, value] : c.options.items()) flag(key, json_scalar_to_arg(value, key));
  return args;
}

nlohmann::ordered_json RunRecord::to_json() const {
  return ojson{{"command", command},
               {"config_hash", config_hash},
               {"tool_version", tool_version},
               {"wall_time_s", wall_time_s},
               {"result", result}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::span<const Claim> claim_registry() { return kClaims; }
std::span<const std::string_view> subcommands() { return kCommands; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
      out << usage();
      return 0;
    }
    if (!args.empty() && args[0] == "run") {
      CLI::App app{"run", "mdslab run"};
      std::string config_path;
      app.add_option("--config", config_path)->required();
      std::vector<std::string> rest(args.begin() + 1, args.end());
      std::reverse(rest.begin(), rest.end());
      app.parse(rest);
      return run_command(config_to_args(parse_config(read_text_file(config_path))), out);
    }
    return run_command(args, out);
  } catch (const CLI::CallForHelp&) {
    out << usage();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ParseError: " << e.what() << "\n" << usage();
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (e.kind() == ErrorKind::UnknownCommand) err << usage();
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mdslab
