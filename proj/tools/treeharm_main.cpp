// Batch runner for the verification suites: every check writes a
// machine-readable artifact and exits 0 only when all checks pass.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeharm/boundary.hpp"
#include "treeharm/gram.hpp"
#include "treeharm/io.hpp"
#include "treeharm/random.hpp"

using namespace treeharm;
using nlohmann::json;

namespace {

struct Options {
  std::string family_spec = "preset:t2";
  std::vector<double> lambdas = {0.8};
  int depth = -1;  // command-specific default when negative
  std::uint64_t seed = 1;
  int trials = -1;
  double tol = -1.0;
  std::string element_path;
  std::string measure_path;
  std::string out_path;
  std::string format = "csv";
};

std::vector<double> parse_lambda_spec(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double start, stop, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
        step <= 0)
      throw CLI::ValidationError("--lambda", "expected start:stop:step");
    for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    out.push_back(std::stod(spec.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--lambda", "empty list");
  return out;
}

void load_config(const std::string& path, Options* o) {
  const json j = json::parse(io::read_file(path));
  if (j.contains("family")) o->family_spec = j.at("family").get<std::string>();
  if (j.contains("lambda")) {
    if (j.at("lambda").is_array())
      o->lambdas = j.at("lambda").get<std::vector<double>>();
    else if (j.at("lambda").is_object()) {
      const auto& r = j.at("lambda");
      o->lambdas.clear();
      const double step = r.at("step").get<double>();
      for (double v = r.at("start").get<double>();
           v <= r.at("stop").get<double>() + 1e-12; v += step)
        o->lambdas.push_back(v);
    } else {
      o->lambdas = {j.at("lambda").get<double>()};
    }
  }
  if (j.contains("depth")) o->depth = j.at("depth").get<int>();
  if (j.contains("seed")) o->seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) o->trials = j.at("trials").get<int>();
  if (j.contains("tol")) o->tol = j.at("tol").get<double>();
  if (j.contains("element")) o->element_path = j.at("element").get<std::string>();
  if (j.contains("measure")) o->measure_path = j.at("measure").get<std::string>();
  if (j.contains("out")) o->out_path = j.at("out").get<std::string>();
  if (j.contains("format")) o->format = j.at("format").get<std::string>();
}

// Rows of named string cells; written as CSV or a JSON array.
struct Artifact {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

  std::string render(const std::string& format) const {
    if (format == "json") {
      json arr = json::array();
      for (const auto& r : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
        arr.push_back(obj);
      }
      return arr.dump() + "\n";
    }
    io::Csv csv(header);
    for (const auto& r : rows) csv.row(r);
    return csv.text();
  }
};

void emit(const Artifact& a, const Options& o) {
  const std::string text = a.render(o.format);
  if (o.out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::FILE* fp = std::fopen(o.out_path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + o.out_path);
  std::fwrite(text.data(), 1, text.size(), fp);
  std::fclose(fp);
}

std::string fmt(double v) { return io::Csv::num(v); }

int finish(const std::string& name, int failures) {
  if (failures == 0) {
    std::printf("%s: all checks passed\n", name.c_str());
    return 0;
  }
  std::printf("%s: %d check(s) FAILED\n", name.c_str(), failures);
  return 1;
}

std::optional<Hierarchomorphism> load_element(const Options& o, const TreeFamily& f) {
  if (o.element_path.empty()) return std::nullopt;
  return io::element_from_json(f, io::read_file(o.element_path));
}

CylinderMeasure load_measure(const Options& o, const TreeFamily& f) {
  if (o.measure_path.empty()) return uniform_measure(f);
  return io::measure_from_json(io::read_file(o.measure_path));
}

// ---------------------------------------------------------------- commands

int cmd_gram_check(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const int max_depth = o.depth < 0 ? 4 : o.depth;
  const double tol_embed = o.tol < 0 ? 1e-12 : o.tol;
  Artifact a;
  a.header = {"check", "family", "lambda", "depth", "value", "threshold", "pass"};
  int failures = 0;
  auto record = [&](const std::string& check, double lambda, int depth,
                    double value, double threshold, bool pass) {
    a.row({check, o.family_spec, fmt(lambda), io::Csv::num(depth), fmt(value),
           fmt(threshold), pass ? "1" : "0"});
    if (!pass) ++failures;
  };

  for (double lambda : o.lambdas) {
    for (int depth = 1; depth <= max_depth; ++depth) {
      const auto verts = vertices_to_depth(f, depth);
      const auto ctx = build_gram(f, lambda, verts);
      const double eig = linalg::smallest_eigenvalue_spd(ctx.gram, ctx.factor);
      record("kernel_positivity", lambda, depth, eig, 0.0, eig > 0.0);

      const double resid = linalg::max_abs_diff(
          linalg::matmul(ctx.factor, linalg::transpose(ctx.factor)), ctx.gram);
      record("factor_residual", lambda, depth, resid, 1e-10, resid < 1e-10);

      const auto gf = gram_f(ctx);
      double worst = 0.0;
      for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = 0; j < verts.size(); ++j)
          worst = std::max(worst, std::fabs(gf(i, j) - ctx.f_scale[i] *
                                                           ctx.gram(i, j) *
                                                           ctx.f_scale[j]));
      record("scaling_consistency", lambda, depth, worst, 1e-12, worst < 1e-12);

      const double embed = kernel_check(affine_embedding(f, lambda, verts));
      record("embedding_certificate", lambda, depth, embed, tol_embed,
             embed < tol_embed);
    }
  }
  emit(a, o);
  return finish("gram_check", failures);
}

int cmd_norm_table(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const int depth = o.depth < 0 ? 12 : o.depth;
  const CylinderMeasure m = load_measure(o, f);
  Artifact a;
  a.header = {"lambda", "depth", "partial_norm", "ratio"};
  for (double lambda : o.lambdas) {
    const auto levels = level_aggregates(f, lambda, m, depth);
    double partial = total_mass(m) * total_mass(m);
    double prev_level = 0.0;
    for (int d = 0; d < depth; ++d) {
      partial += levels[d];
      const double ratio = (d > 0 && prev_level != 0.0) ? levels[d] / prev_level : 0.0;
      a.row({fmt(lambda), io::Csv::num(d + 1), fmt(partial), fmt(ratio)});
      prev_level = levels[d];
    }
  }
  emit(a, o);
  std::printf("norm_table: wrote %zu rows\n", a.rows.size());
  return 0;
}

int cmd_cocycle_fuzz(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const int trials = o.trials < 0 ? 200 : o.trials;
  const int budget = o.depth < 0 ? 3 : o.depth;
  Artifact a;
  a.header = {"check", "trial", "n_composed", "n_sum", "pass"};
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t base = o.seed * 1000003ULL + t;
    const auto g = random_element(f, base * 2 + 1, budget, 2);
    const auto h = random_element(f, base * 2 + 2, budget, 2);
    const BoundaryPoint w = random_boundary_point(f, base);
    const Rat lhs = compose(g, h).pseudoderivative(w);
    const Rat rhs = h.pseudoderivative(w) + g.pseudoderivative(h.apply_boundary(w));
    const bool pass = lhs == rhs;
    if (!pass) ++failures;
    a.row({"cocycle_additivity", io::Csv::num(t), lhs.str(), rhs.str(),
           pass ? "1" : "0"});
  }
  emit(a, o);
  return finish("cocycle_fuzz", failures);
}

int cmd_rank_stability(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const int max_depth = o.depth < 0 ? 7 : o.depth;
  const int trials = o.trials < 0 ? 20 : o.trials;
  const double tol = o.tol < 0 ? 1e-8 : o.tol;
  const auto fixed = load_element(o, f);
  Artifact a;
  a.header = {"check", "trial", "pieces", "depth", "rank", "pass"};
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const Hierarchomorphism g =
        fixed ? *fixed : random_element(f, o.seed * 7919ULL + t, 2, 1);
    const std::size_t k = g.piece_count();
    int first_rank = -1;
    bool stable = true;
    for (int depth = max_depth - 2; depth <= max_depth; ++depth) {
      const auto ctx =
          build_gram(f, o.lambdas.front(), vertices_to_depth(f, depth), false);
      const int rank = linalg::numerical_rank(deviation_form(ctx, g), tol);
      if (first_rank < 0) first_rank = rank;
      const bool pass = rank == first_rank && rank <= static_cast<int>(k * k);
      stable = stable && pass;
      a.row({"deviation_rank_stability", io::Csv::num(t), io::Csv::num(int(k)),
             io::Csv::num(depth), io::Csv::num(rank), pass ? "1" : "0"});
    }
    if (!stable) ++failures;
    if (fixed) break;
  }
  emit(a, o);
  return finish("rank_stability", failures);
}

int cmd_sigma(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const int depth = o.depth < 0 ? 160 : o.depth;
  const double tol = o.tol < 0 ? 0.005 : o.tol;
  const CylinderMeasure probe = load_measure(o, f);
  const SigmaEstimate est = estimate_sigma(f, probe, depth, tol);
  Artifact a;
  a.header = {"lambda", "depth", "partial_norm", "ratio"};
  for (const auto& r : est.trace)
    a.row({fmt(r.lambda), io::Csv::num(r.depth), fmt(std::exp(r.log_partial)),
           fmt(r.ratio)});
  emit(a, o);
  std::printf("sigma: bracket [%.6f, %.6f] midpoint %.6f\n", est.lower,
              est.upper, est.midpoint);
  return 0;
}

int cmd_transform_check(const Options& o) {
  const TreeFamily f = io::parse_family_spec(o.family_spec);
  const double lambda = o.lambdas.front();
  const int trials = o.trials < 0 ? 50 : o.trials;
  const int depth = o.depth < 0 ? 5 : o.depth;
  Artifact a;
  a.header = {"check", "trial", "value", "threshold", "pass"};
  int failures = 0;
  auto record = [&](const std::string& check, int trial, double value,
                    double threshold, bool pass) {
    a.row({check, io::Csv::num(trial), fmt(value), fmt(threshold),
           pass ? "1" : "0"});
    if (!pass) ++failures;
  };

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t base = o.seed * 104729ULL + t;
    const auto g = random_element(f, base * 2 + 1, 2, 1);
    const auto h = random_element(f, base * 2 + 2, 2, 1);
    const auto m = random_charge(f, base, 2);
    const auto two = transform_measure(g, lambda, transform_measure(h, lambda, m));
    const auto one = transform_measure(compose(g, h), lambda, m);
    const Cut common = join_cuts(two.cut, one.cut);
    const auto pa = push_to_cut(f, two, common);
    const auto pb = push_to_cut(f, one, common);
    double worst = 0.0;
    for (std::size_t i = 0; i < pa.values.size(); ++i)
      worst = std::max(worst, std::fabs(pa.values[i] - pb.values[i]));
    record("measure_homomorphism", t, worst, 1e-12, worst < 1e-12);
  }

  for (int t = 0; t < trials / 5 + 1; ++t) {
    const auto g = random_element(f, o.seed * 31 + t, 2, 1,
                                  {.depth_preserving = true});
    const auto m = random_charge(f, o.seed * 37 + t, 2);
    const auto ctx = build_gram(f, lambda, vertices_to_depth(f, depth), false);
    const auto u = u_matrix(ctx, g);
    const auto m2 = push_to_cut(f, m, join_cuts(m.cut, g.domain_cut()));
    const auto lhs = psi_vector(ctx, transform_measure(g, lambda, m));
    const auto rhs = linalg::matvec(u, psi_vector(ctx, m2));
    std::vector<double> diff(lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
    const double err = std::sqrt(norm2(ctx, diff));
    record("psi_intertwining", t, err, 1e-9, err < 1e-9);
  }

  for (int t = 0; t < 5; ++t) {
    const auto g = random_element(f, o.seed * 41 + t, 2, 1);
    const int r1 = boundary_deviation_rank(g, lambda, depth - 1);
    const int r2 = boundary_deviation_rank(g, lambda, depth);
    record("boundary_rank_stability", t, double(r2 - r1), 0.0, r1 == r2);
  }

  emit(a, o);
  return finish("transform_check", failures);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree boundary harmonic analysis experiment runner"};
  app.require_subcommand(1);

  Options o;
  std::string lambda_spec;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--family", o.family_spec,
                    "family descriptor file or preset:t2|t3|freegroup:l1,l2");
    cmd->add_option("--lambda", lambda_spec, "value, comma list, or start:stop:step");
    cmd->add_option("--depth", o.depth, "depth limit");
    cmd->add_option("--seed", o.seed, "fuzz seed");
    cmd->add_option("--trials", o.trials, "number of fuzz trials");
    cmd->add_option("--element", o.element_path, "element JSON file");
    cmd->add_option("--measure", o.measure_path, "measure JSON file");
    cmd->add_option("--tol", o.tol, "tolerance override");
    cmd->add_option("--out", o.out_path, "artifact output path (default stdout)");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* gram = app.add_subcommand("gram_check", "kernel matrix checks");
  CLI::App* norm = app.add_subcommand("norm_table", "partial norm table");
  CLI::App* coc = app.add_subcommand("cocycle_fuzz", "depth-shift additivity fuzz");
  CLI::App* rank = app.add_subcommand("rank_stability", "deviation rank stability");
  CLI::App* sig = app.add_subcommand("sigma", "critical exponent bisection");
  CLI::App* tra = app.add_subcommand("transform_check", "measure action checks");
  for (CLI::App* cmd : {gram, norm, coc, rank, sig, tra}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // 2 signals a usage error
  }

  try {
    if (!config_path.empty()) {
      Options base;
      load_config(config_path, &base);
      // flags override config values
      Options flags = o;
      o = base;
      if (!flags.family_spec.empty() && flags.family_spec != "preset:t2")
        o.family_spec = flags.family_spec;
      if (flags.depth >= 0) o.depth = flags.depth;
      if (flags.seed != 1) o.seed = flags.seed;
      if (flags.trials >= 0) o.trials = flags.trials;
      if (flags.tol >= 0) o.tol = flags.tol;
      if (!flags.element_path.empty()) o.element_path = flags.element_path;
      if (!flags.measure_path.empty()) o.measure_path = flags.measure_path;
      if (!flags.out_path.empty()) o.out_path = flags.out_path;
      if (flags.format != "csv") o.format = flags.format;
    }
    if (!lambda_spec.empty()) o.lambdas = parse_lambda_spec(lambda_spec);

    if (gram->parsed()) return cmd_gram_check(o);
    if (norm->parsed()) return cmd_norm_table(o);
    if (coc->parsed()) return cmd_cocycle_fuzz(o);
    if (rank->parsed()) return cmd_rank_stability(o);
    if (sig->parsed()) return cmd_sigma(o);
    if (tra->parsed()) return cmd_transform_check(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
