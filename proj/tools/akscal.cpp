// akscal: curvature tables, Z-bound optimisation, operator diagnostics,
// circle rearrangements and the acceptance suite.

#include "akscal/acceptance.hpp"
#include "akscal/csv.hpp"
#include "akscal/expr.hpp"
#include "akscal/run_config.hpp"
#include "akscal/spec_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

using namespace akscal;
using cli::RunConfig;

namespace {

/// Writes the table to stdout and, when requested, to a file in the output directory.
void emit(const csv::Table& t, const RunConfig& c, const std::string& file) {
  t.write(std::cout);
  if (!file.empty()) t.save(cli::artifactPath(c, file));
}

std::string idx(int i) { return std::to_string(i + 1); }

// ---------------------------------------------------------------------------
// curvature

template <class S>
csv::Table curvatureTable(const lie::LieFrameSpec<S>& spec) {
  const lie::LeftInvariantGeometry<S> geo(spec);
  const auto& cd = geo.data();
  const int d = spec.dim;
  csv::Table t({"table", "i", "j", "k", "value"});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int k = 0; k < d; ++k)
        if (cd.gamma(a, b, k) != S(0)) t.row("gamma", idx(a), idx(b), idx(k), cd.gamma(a, b, k));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) t.row("sectional", idx(i), idx(j), "", cd.sectional(i, j));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.row("ricci", idx(i), idx(j), "", cd.ricci(i, j));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.row("ricci_anti", idx(i), idx(j), "", cd.ricciAnti(i, j));
  t.row("scalar", "", "", "", cd.scalar);
  t.row("star_scalar", "", "", "", cd.starScalar);
  t.row("norm_nabla_j_sq_vector", "", "", "", cd.normNablaJSq);
  t.row("norm_nabla_j_sq_form", "", "", "", cd.normNablaOmegaSq);
  t.row("hermitian_scalar", "", "", "", cd.hermitianScalar);
  if (!spec.latticeVolumes.empty()) t.row("z_ratio", "", "", "", geo.zRatio());
  return t;
}

int runCurvature(const RunConfig& c, const std::string& csvFile) {
  const auto& path = c.inputs.at(0);
  const auto t = c.exact ? curvatureTable(io::loadSpec<Rational>(path)) : curvatureTable(io::loadSpec<double>(path));
  emit(t, c, csvFile);
  return 0;
}

// ---------------------------------------------------------------------------
// zbound

std::string joinClass(const cohomology::SymplecticClass& cls) {
  std::string s;
  for (Eigen::Index i = 0; i < cls.base.size(); ++i) s += (i ? " " : "") + csv::cell(cls.base(i));
  if (cls.fiber) s += "; " + csv::cell(*cls.fiber);
  return s;
}

int runZBound(const RunConfig& c, const std::optional<std::string>& seedText, bool certify, const std::string& csvFile) {
  using namespace cohomology;
  const auto file = io::loadModel(c.inputs.at(0));
  const auto& m = file.model;
  std::optional<SymplecticClass> seed = file.seed;
  if (seedText) seed = io::parseClass(*seedText, m);
  if (!seed) throw Error("cli", "seed", "model has no 'seed' line; pass --seed");
  OptimizeOptions opt;
  opt.budget = c.budget;
  const auto res = optimizeZBound(m, *seed, opt);
  csv::Table t({"section", "key", "value"});
  t.row("model", "name", m.name);
  if (m.n == 2) t.row("model", "almost_complex", acCheck(m));
  t.row("seed", "class", joinClass(*seed));
  t.row("seed", "value", evalZBound(m, *seed));
  t.row("result", "value", res.value);
  t.row("result", "unbounded", res.unbounded);
  t.row("result", "converged", res.converged);
  t.row("result", "iterations", res.iterations);
  t.row("result", "grad_norm", res.gradNorm);
  t.row("result", "argmax", joinClass(res.argmax));
  if (!res.warning.empty()) t.row("result", "warning", res.warning);
  if (certify) {
    const auto cert = res.unbounded ? std::nullopt : certificate(m, res.argmax);
    if (!cert) {
      t.row("certificate", "available", false);
    } else {
      t.row("certificate", "available", true);
      t.row("certificate", "k", cert->k);
      t.row("certificate", "A", cert->a);
      t.row("certificate", "B", cert->b);
      t.row("certificate", "y", cert->y);
      t.row("certificate", "l", cert->l);
      t.row("certificate", "z", cert->z);
      t.row("certificate", "h_bound", cert->hBound);
      t.row("certificate", "ratio_lower", cert->ratioLower);
      t.row("certificate", "analytic_bound", cert->analyticBound);
      t.row("certificate", "sign_bound", cert->signBound);
      t.row("certificate", "chain_holds", cert->chainHolds);
    }
  }
  emit(t, c, csvFile);
  return res.converged || res.unbounded ? 0 : 1;
}

// ---------------------------------------------------------------------------
// operator

int runOperator(const RunConfig& c, const std::string& variant, bool sweep, std::optional<int> gapCount,
                const std::string& csvFile) {
  using namespace oplab;
  if (variant != "kt" && variant != "flat") throw Error("cli", "variant", "variant must be 'kt' or 'flat'");
  const Variant v = variant == "kt" ? ktVariant(Grid::twisted(c.n, c.n, c.d)) : flatTorus(c.n, c.n);
  csv::Table t({"section", "index", "key", "value"});
  t.row("variant", "", "name", v.name);
  t.row("variant", "", "N", c.n);
  t.row("variant", "", "unknowns", v.grid.size());
  for (int a = 0; a < 4; ++a) t.row("variant", idx(a), "r_minus", v.rMinus(a, a));

  // Constants are the reference test field: their residuals are the r^- terms.
  const auto res = kernelSystemResidual(v, Field::Ones(static_cast<Eigen::Index>(v.grid.size())));
  for (int s = 0; s < 6; ++s) t.row("residual_constant", idx(s), "norm", res.norms[s]);

  if (sweep) {
    if (variant == "flat") {
      const auto s = flatSymbolSweep(c.n);
      t.row("symbol", "", "waves", s.waves);
      t.row("symbol", "", "max_deviation", s.maxDeviation);
      t.row("symbol", "", "bound_5h2", s.bound);
      for (int a = 0; a < 4; ++a) t.row("symbol", idx(a), "worst_xi", s.worst(a));
      t.row("symbol", "", "pass", s.maxDeviation <= s.bound);
    } else {
      const auto s = ktSymbolSweep(c.n, c.d);
      for (std::size_t i = 0; i < s.xiNorm.size(); ++i) {
        const int m = static_cast<int>(i);
        t.row("symbol", idx(m), "xi_norm", s.xiNorm[i]);
        t.row("symbol", idx(m), "ratio", s.ratio[i]);
        t.row("symbol", idx(m), "flat_ratio", s.flatRatio[i]);
        t.row("symbol", idx(m), "relative", s.relative[i]);
      }
      t.row("symbol", "", "slope", s.slope);
      t.row("symbol", "", "constant", s.constant);
      t.row("symbol", "", "pass", s.slope <= -0.8);
    }
  }
  if (gapCount) {
    if (*gapCount < 1) throw Error("cli", "range", "--kernel-gap needs a positive count");
    const auto r = kernelGap(v, *gapCount, c.seed);
    t.row("spectrum", "", "method", r.method);
    t.row("spectrum", "", "nullity", r.nullity);
    t.row("spectrum", "", "constant_overlap", r.constantOverlap);
    t.row("spectrum", "", "constant_deviation", r.constantDeviation);
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
      t.row("spectrum", idx(static_cast<int>(i)), "eigenvalue", r.eigenvalues[i]);
      t.row("spectrum", idx(static_cast<int>(i)), "residual", r.residuals[i]);
    }
    std::cerr << "kernel gap: " << r.method << " solve in " << r.seconds << " s\n";
  }
  emit(t, c, csvFile);
  return 0;
}

// ---------------------------------------------------------------------------
// rearrange

/// Samples file: one value per line (last column of a CSV row), uniform on
/// [0, 2 pi); lines that do not parse as numbers are skipped as headers.
rearrange::Function loadFunction(const std::string& text) {
  if (!std::filesystem::is_regular_file(text)) return expr::parse(text);
  std::ifstream f(text);
  std::vector<double> values;
  std::string line;
  while (std::getline(f, line)) {
    const auto comma = line.find_last_of(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (cell.find_first_not_of(" \t\r", used) == std::string::npos) values.push_back(v);
    } catch (const std::exception&) {
    }
  }
  if (values.size() < 4) throw Error("cli", "samples", "'" + text + "' holds fewer than 4 samples");
  return rearrange::fromSamples(std::move(values));
}

int runRearrange(const RunConfig& c, const std::string& fText, const std::string& f1Text, const std::string& phiFile,
                 const std::string& csvFile) {
  using namespace rearrange;
  const Function f = loadFunction(fText), f1 = loadFunction(f1Text);
  const auto plan = buildPlan(f, f1, c.eps, c.p);
  const auto phi = realizeDiffeo(plan);
  const double err = rearrangeError(f, f1, phi, c.p);
  double md = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4; ++k) md = std::min(md, phi.at(k / 4.0).minDerivative(10000));

  csv::Table t({"section", "index", "key", "value"});
  t.row("plan", "", "epsilon", plan.epsilon);
  t.row("plan", "", "p", plan.p);
  t.row("plan", "", "delta", plan.delta);
  t.row("plan", "", "arcs", plan.arcs.size());
  t.row("plan", "", "omega_length", plan.omegaLength());
  t.row("plan", "", "budget", plan.budget());
  t.row("plan", "", "identity", plan.identity);
  for (std::size_t s = 0; s < phi.stages().size(); ++s) {
    const auto& st = phi.stages()[s];
    t.row("stage", idx(static_cast<int>(s)), "half_width", st.halfWidth);
    for (std::size_t i = 0; i < st.before.size(); ++i)
      t.row("node", idx(static_cast<int>(s)) + ":" + idx(static_cast<int>(i)), "before_after",
            csv::cell(st.before[i]) + " " + csv::cell(st.after[i]));
  }
  t.row("result", "", "error", err);
  t.row("result", "", "min_derivative", md);
  t.row("result", "", "below_epsilon", err < c.eps);
  emit(t, c, csvFile);

  if (!phiFile.empty()) {
    csv::Table s({"t", "x", "phi", "derivative"});
    for (int k = 0; k <= 4; ++k) {
      const auto pt = phi.at(k / 4.0);
      for (int i = 0; i < 256; ++i) {
        const double x = rearrange::kLength * i / 256.0;
        s.row(k / 4.0, x, pt(x), pt.derivative(x));
      }
    }
    s.save(cli::artifactPath(c, phiFile));
  }
  return err < c.eps ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report

int runReport(const RunConfig& c, const std::optional<std::string>& model, const std::string& csvFile) {
  const auto spec = io::loadSpec<Rational>(c.inputs.at(0));
  const lie::LeftInvariantGeometry<Rational> geo(spec);
  const auto& cd = geo.data();
  const auto id = lie::starScalarIdentity(cd);
  csv::Table t({"section", "key", "value"});
  t.row("spec", "name", spec.name);
  t.row("spec", "dim", spec.dim);
  t.row("curvature", "scalar", cd.scalar);
  t.row("curvature", "star_scalar", cd.starScalar);
  t.row("curvature", "hermitian_scalar", cd.hermitianScalar);
  t.row("identity", "s_star_minus_s", id.lhs);
  t.row("identity", "half_norm_nabla_j_sq_vector", id.halfVector);
  t.row("identity", "half_norm_nabla_j_sq_form", id.halfForm);
  t.row("identity", "holds", id.holds());
  if (!spec.latticeVolumes.empty()) {
    t.row("volume", "z_ratio", geo.zRatio());
    t.row("volume", "hermitian_total", geo.blair(0.0).lhs);
  }
  if (model) {
    const auto file = io::loadModel(*model);
    t.row("model", "name", file.model.name);
    if (file.model.n == 2) t.row("model", "almost_complex", cohomology::acCheck(file.model));
    if (file.seed) t.row("model", "z_bound_at_seed", cohomology::evalZBound(file.model, *file.seed));
    if (const auto b = cohomology::analyticBound(file.model)) t.row("model", "analytic_bound", *b);
  }
  emit(t, c, csvFile);
  return id.holds() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// paper-suite

int runSuite(const RunConfig& c, const std::string& csvFile) {
  const auto& list = acceptance::criteria();
  std::vector<acceptance::Outcome> outcomes(list.size());
  std::vector<std::future<void>> running;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (static_cast<int>(running.size()) >= c.jobs) {
      running.front().get();
      running.erase(running.begin());
    }
    running.push_back(std::async(std::launch::async, [&, i] { outcomes[i] = acceptance::run(list[i], c.seed); }));
  }
  for (auto& r : running) r.get();

  int failed = 0;
  csv::Table t({"id", "check", "anchor", "pass", "detail"});
  for (const auto& o : outcomes) {
    std::cerr << acceptance::summaryLine(o) << '\n';
    t.row(o.id, o.name, o.anchor, o.pass, o.detail);
    failed += !o.pass;
  }
  t.write(std::cout);
  t.save(cli::artifactPath(c, csvFile.empty() ? "paper_suite.csv" : csvFile));
  std::cerr << (failed ? "FAILED: " : "all checks passed: ") << list.size() - static_cast<std::size_t>(failed) << "/"
            << list.size() << '\n';
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"akscal: almost-Kahler scalar curvature toolkit"};
  app.require_subcommand(1);
  RunConfig c;
  std::optional<std::string> outFlag;
  std::string csvFile;
  app.add_option("--out", outFlag, "output directory (default: $AKSCAL_OUT or .)");
  app.add_option("--jobs", c.jobs, "maximum concurrent jobs")->capture_default_str();
  app.add_option("--rng-seed", c.seed, "seed for randomized checks")->capture_default_str();

  std::string specPath, modelPath;
  auto* curv = app.add_subcommand("curvature", "curvature tables of a left-invariant spec");
  curv->add_option("spec", specPath, "spec file")->required();
  curv->add_flag("--exact", c.exact, "exact rational arithmetic");
  curv->add_option("--csv", csvFile, "also write the table to this file");

  std::optional<std::string> seedText;
  bool certify = false;
  auto* zb = app.add_subcommand("zbound", "optimise the Z-bound over the cone of a model");
  zb->add_option("model", modelPath, "model file")->required();
  zb->add_option("--seed", seedText, "class 'b0,b1,...;l'");
  zb->add_flag("--certify", certify, "emit the analytic certificate");
  zb->add_option("--budget", c.budget, "iteration budget")->capture_default_str();
  zb->add_option("--csv", csvFile, "also write the table to this file");

  std::string variant = "kt";
  bool sweep = false;
  std::optional<int> gapCount;
  auto* op = app.add_subcommand("operator", "adjoint linearisation diagnostics");
  op->add_option("--variant", variant, "kt or flat")->capture_default_str();
  op->add_option("--N", c.n, "grid points per axis, 4..32")->capture_default_str();
  op->add_option("--d", c.d, "t-period of the Kodaira-Thurston lattice")->capture_default_str();
  op->add_flag("--symbol-sweep", sweep, "principal symbol sweep");
  op->add_option("--kernel-gap", gapCount, "number of smallest eigenvalues of the normal operator");
  op->add_option("--csv", csvFile, "also write the table to this file");

  std::string fText, f1Text, phiFile;
  auto* re = app.add_subcommand("rearrange", "approximate f1 by f composed with a circle diffeomorphism");
  re->add_option("--f", fText, "expression in x or samples file")->required();
  re->add_option("--f1", f1Text, "expression in x or samples file")->required();
  re->add_option("--eps", c.eps, "target L^p error")->capture_default_str();
  re->add_option("--p", c.p, "exponent p > 1")->capture_default_str();
  re->add_option("--emit-phi", phiFile, "write isotopy samples to this file");
  re->add_option("--csv", csvFile, "also write the table to this file");

  std::optional<std::string> reportModel;
  auto* rep = app.add_subcommand("report", "invariants of a spec, optionally with a model");
  rep->add_option("spec", specPath, "spec file")->required();
  rep->add_option("--model", reportModel, "model file");
  rep->add_option("--csv", csvFile, "also write the table to this file");

  auto* suite = app.add_subcommand("paper-suite", "run every acceptance check");
  suite->add_option("--csv", csvFile, "summary file name (default paper_suite.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    c.outDir = cli::resolveOutDir(outFlag);
    if (curv->parsed()) {
      c.subcommand = "curvature";
      c.inputs = {specPath};
    } else if (zb->parsed()) {
      c.subcommand = "zbound";
      c.inputs = {modelPath};
    } else if (op->parsed()) {
      c.subcommand = "operator";
    } else if (re->parsed()) {
      c.subcommand = "rearrange";
    } else if (rep->parsed()) {
      c.subcommand = "report";
      c.inputs = {specPath};
      if (reportModel) c.inputs.push_back(*reportModel);
    } else {
      c.subcommand = "paper-suite";
    }
    cli::validate(c);
    if (c.subcommand == "curvature") return runCurvature(c, csvFile);
    if (c.subcommand == "zbound") return runZBound(c, seedText, certify, csvFile);
    if (c.subcommand == "operator") return runOperator(c, variant, sweep, gapCount, csvFile);
    if (c.subcommand == "rearrange") return runRearrange(c, fText, f1Text, phiFile, csvFile);
    if (c.subcommand == "report") return runReport(c, reportModel, csvFile);
    return runSuite(c, csvFile);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: cli/internal: " << e.what() << '\n';
    return 2;
  }
}
