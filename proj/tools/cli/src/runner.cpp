#include "msv_cli/runner.hpp"

#include "msv/kernel.hpp"
#include "msv/semigroup.hpp"
#include "msv/smooth_fields.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace msv::cli {

using nlohmann::ordered_json;

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
    case Outcome::Skipped: return "SKIPPED";
  }
  return "?";
}

ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

ordered_json vec(const Eigen::VectorXd& x) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index k = 0; k < x.size(); ++k) a.push_back(number(x(k)));
  return a;
}

ordered_json vec(const std::vector<double>& x) {
  ordered_json a = ordered_json::array();
  for (double v : x) a.push_back(number(v));
  return a;
}

ordered_json kernel_witness(const KernelWitness& w) {
  return {{"t", number(w.t)}, {"x", vec(w.x)}, {"y", vec(w.y)}, {"i", w.i}, {"j", w.j}, {"value", number(w.value)}};
}

CheckResult skipped(std::string reason) {
  CheckResult r;
  r.outcome = Outcome::Skipped;
  r.reason = std::move(reason);
  return r;
}

// Hypothesis reports map HOLDS_ON_SAMPLE to PASS and both failure verdicts to
// FAIL; an unbounded trend without a point witness gets the outermost sample.
CheckResult from_report(const CheckReport& rep) {
  CheckResult r;
  for (const auto& [k, v] : rep.constants) r.constants[k] = number(v);
  r.constants["verdict"] = to_string(rep.verdict);
  r.notes = rep.notes;
  if (rep.verdict == Verdict::HoldsOnSample) return r;
  r.outcome = Outcome::Fail;
  r.reason = rep.verdict == Verdict::Fails ? "inequality violated on the sample" : "unbounded trend with radius";
  if (rep.witness) {
    const Witness& w = *rep.witness;
    r.witness = {{"x", vec(w.x)}, {"lhs", number(w.lhs)}, {"rhs", number(w.rhs)}, {"relation", w.relation}};
    if (w.xi.size() > 0) r.witness["xi"] = vec(w.xi);
    if (w.i > 0) {
      r.witness["i"] = w.i;
      r.witness["j"] = w.j;
    }
  } else if (!rep.series.empty() && !rep.series.back().radius.empty()) {
    const Series& s = rep.series.back();
    r.witness = {{"series", s.name},
                 {"radius", number(s.radius.back())},
                 {"value", number(s.value.back())},
                 {"relation", "sampled quantity stays bounded as the radius grows"}};
  }
  return r;
}

bool is_identity_q(const SystemSpec& s) {
  return s.Q.is_constant() && s.Q.eval(Eigen::VectorXd::Zero(s.d)).isIdentity(0.0);
}

void write_json(const std::filesystem::path& p, const ordered_json& j) {
  std::ofstream out(p);
  out << j.dump(2) << '\n';
}

SampleSet samples(Context& ctx) { return make_samples(ctx.spec().d); }

// ---------------------------------------------------------------- model

CheckResult little_o(Context& ctx) {
  const auto& s = ctx.spec();
  if (!s.alpha) return skipped("system.alpha not declared");
  if (!s.symmetric()) return skipped("V is not symmetric");
  return from_report(little_o_check(s.V, s.v, *s.alpha, samples(ctx)));
}

// ---------------------------------------------------------------- grid

CheckResult assemble_check(Context& ctx) {
  const auto& op = ctx.op();
  CheckResult r;
  const double asym = asymmetry(op.A);
  r.constants["unknowns"] = op.size();
  r.constants["nonzeros"] = op.A.nonZeros();
  r.constants["h"] = number(op.grid.h);
  r.constants["asymmetry"] = number(asym);
  r.constants["symmetric"] = op.symmetric;
  if (ctx.config().grid.dump_matrix) {
    std::ofstream out(ctx.artifact("matrix.txt"));
    write_coordinate(out, op.A);
    r.artifacts.push_back("matrix.txt");
  }
  if (ctx.spec().symmetric() && asym > 1e-12) {
    r.outcome = Outcome::Fail;
    r.reason = "symmetric system assembled to an asymmetric matrix";
    r.witness = {{"asymmetry", number(asym)}, {"relation", "||A - A^T||_max <= 1e-12 ||A||_max"}};
  }
  return r;
}

// ---------------------------------------------------------------- spectral

CheckResult eigen_check(Context& ctx) {
  if (!ctx.spec().symmetric()) return skipped("V is not symmetric");
  const auto& res = ctx.spectrum();
  CheckResult r;
  {
    std::ofstream out(ctx.artifact("eigenvalues.csv"));
    out.precision(17);
    out << "n,lambda,residual\n";
    for (int n = 0; n < res.k; ++n) out << n << ',' << res.lambdas(n) << ',' << res.residuals(n) << '\n';
  }
  r.artifacts.push_back("eigenvalues.csv");
  double worst = 0.0;
  for (int n = 0; n < res.k; ++n) worst = std::max(worst, res.residuals(n) / std::max(1.0, std::abs(res.lambdas(n))));
  const double h_d = ctx.grid().cell_volume();
  const Eigen::MatrixXd gram = h_d * res.vectors.transpose() * res.vectors;
  const double ortho = (gram - Eigen::MatrixXd::Identity(res.k, res.k)).cwiseAbs().maxCoeff();
  r.constants["k"] = res.k;
  r.constants["method"] = res.method;
  r.constants["lambda_0"] = number(res.lambdas(0));
  r.constants["lambda_max"] = number(res.lambdas(res.k - 1));
  r.constants["max_relative_residual"] = number(worst);
  r.constants["orthonormality_error"] = number(ortho);
  if (worst > 1e-8 || ortho > 1e-10) {
    r.outcome = Outcome::Fail;
    r.reason = "eigenpair residual or orthonormality out of tolerance";
    r.witness = {{"max_relative_residual", number(worst)}, {"orthonormality_error", number(ortho)},
                 {"relation", "residual <= 1e-8 max(1, lambda) and |<psi_i, psi_j> - delta_ij| <= 1e-10"}};
  }
  return r;
}

CheckResult weyl_check(Context& ctx) {
  const auto& s = ctx.spec();
  if (!s.symmetric()) return skipped("V is not symmetric");
  if (!s.alpha) return skipped("system.alpha not declared");
  if (ctx.config().spectral.k < 40) return skipped("spectral.k < 40");
  const auto w = weyl_fit(ctx.spectrum(), *s.alpha, s.d, s.m);
  CheckResult r;
  {
    std::ofstream out(ctx.artifact("weyl.csv"));
    out.precision(17);
    out << "lambda,count,ratio,theory\n";
    for (std::size_t k = 0; k < w.lambda.size(); ++k)
      out << w.lambda[k] << ',' << w.count[k] << ',' << w.ratio[k] << ',' << w.theory << '\n';
  }
  r.artifacts.push_back("weyl.csv");
  r.constants["exponent"] = number(w.exponent);
  r.constants["theory"] = number(w.theory);
  r.constants["tail"] = number(w.tail);
  r.constants["relative_deviation"] = number(w.rel_deviation);
  if (!is_identity_q(s)) {
    r.outcome = Outcome::Inconclusive;
    r.reason = "the asymptotic formula assumes Q = I; reported descriptively";
  } else if (std::abs(w.rel_deviation) > 0.1) {
    r.outcome = Outcome::Fail;
    r.reason = "tail ratio deviates from the theoretical constant by more than 10%";
    r.witness = {{"tail", number(w.tail)}, {"theory", number(w.theory)},
                 {"relation", "|tail / theory - 1| <= 0.1"}};
  }
  return r;
}

CheckResult trace(Context& ctx) {
  if (!ctx.spec().symmetric()) return skipped("V is not symmetric");
  CheckResult r;
  ordered_json rows = ordered_json::array();
  bool inconclusive = false;
  for (double t : ctx.config().spectral.t_trace) {
    const auto tr = trace_check(ctx.spectrum(), ctx.propagator(), t);
    rows.push_back({{"t", number(t)},
                    {"spectral_sum", number(tr.spectral_sum)},
                    {"kernel_trace", number(tr.kernel_trace)},
                    {"relative_gap", number(tr.rel_gap)},
                    {"truncation_bound", number(tr.truncation_bound)}});
    inconclusive = inconclusive || tr.inconclusive;
    if (r.outcome == Outcome::Pass && tr.abs_gap > tr.truncation_bound + 1e-8 * std::abs(tr.kernel_trace)) {
      r.outcome = Outcome::Fail;
      r.reason = "trace gap exceeds the truncation bound";
      r.witness = {{"t", number(t)}, {"abs_gap", number(tr.abs_gap)},
                   {"truncation_bound", number(tr.truncation_bound)},
                   {"relation", "gap <= truncation bound + 1e-8 trace"}};
    }
  }
  r.constants["rows"] = rows;
  if (inconclusive && r.outcome == Outcome::Pass) {
    r.outcome = Outcome::Inconclusive;
    r.reason = "truncation bound exceeds 10% of the spectral sum";
  }
  return r;
}

// ---------------------------------------------------------------- evolve

CheckResult contraction(Context& ctx) {
  const auto& c = ctx.config().evolve;
  const auto rep = contraction_check(ctx.op(), ctx.propagator(), c.t_grid, c.p_grid, c.trials, c.seed);
  CheckResult r;
  r.constants["max_ratio"] = number(rep.max_ratio);
  const auto beta = dissipativity_check(ctx.spec().vtilde(), make_samples(ctx.spec().d)).get("beta");
  if (beta > 0.0) r.notes.push_back("Vt is not dissipative on the sample; contraction is not expected");
  if (!rep.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "norm ratio above 1 + 1e-6";
    r.witness = {{"seed", rep.worst.seed}, {"t", number(rep.worst.t)}, {"p", number(rep.worst.p)},
                 {"ratio", number(rep.worst.ratio)}, {"relation", "||S(t) f||_p <= (1 + 1e-6) ||f||_p"}};
  }
  return r;
}

CheckResult ultracontractivity(Context& ctx) {
  const auto rep = lp_lq_check(ctx.op(), ctx.propagator(), ctx.config().evolve.t_grid, ctx.sources());
  CheckResult r;
  r.constants["t"] = vec(rep.t);
  r.constants["M_tilde"] = vec(rep.m_tilde);
  r.constants["spread"] = number(rep.spread);
  if (!rep.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "t^{d/2} sup|k| varies by more than a factor 10";
    r.witness = {{"spread", number(rep.spread)}, {"relation", "max M~(t) / min M~(t) <= 10"}};
  }
  return r;
}

CheckResult trotter(Context& ctx) {
  const auto& s = ctx.spec();
  const auto& c = ctx.config().evolve;
  const auto a_v = assemble_operator(s.Q, s.m, [&](const Eigen::VectorXd& x) { return s.V.eval(x); }, ctx.grid());
  const auto f = sample_field(random_bump_field(s.d, s.m, ctx.grid().R, c.seed), ctx.grid());
  const auto rep = trotter_kato_check(a_v, scalar_on_unknowns(s.v, ctx.grid(), s.m), c.trotter_t, c.n_grid, f);
  CheckResult r;
  r.constants["t"] = number(rep.t);
  r.constants["n"] = rep.n;
  r.constants["deviation"] = vec(rep.deviation);
  r.constants["slope"] = number(rep.slope);
  r.constants["exact"] = rep.exact;
  if (!rep.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "splitting error decays slower than n^-0.8";
    r.witness = {{"slope", number(rep.slope)}, {"relation", "log-log slope <= -0.8"}};
  }
  return r;
}

CheckResult kernel(Context& ctx) {
  const auto& c = ctx.config().evolve;
  const auto src = ctx.sources();
  const auto sl = kernel_slice(ctx.op(), ctx.propagator(), c.t_grid.front(), src.front());
  CheckResult r;
  {
    std::ofstream out(ctx.artifact("kernel_slice.csv"));
    write_kernel_csv(out, sl);
  }
  r.artifacts.push_back("kernel_slice.csv");
  r.constants["t"] = number(sl.t);
  r.constants["y"] = vec(sl.y());
  r.constants["max_abs"] = number(sl.values.cwiseAbs().maxCoeff());
  if (!sl.values.allFinite()) {
    r.outcome = Outcome::Fail;
    r.reason = "non-finite kernel entries";
    r.witness = {{"relation", "all kernel entries finite"}};
    return r;
  }
  if (ctx.spec().symmetric() && src.size() >= 2) {
    const auto other = kernel_slice(ctx.op(), ctx.propagator(), c.t_grid.front(), src[1]);
    const int m = sl.m;
    // K(t, y2, y1) from the first slice against K(t, y1, y2)^T from the second.
    const Eigen::MatrixXd k21 = sl.values.middleRows(src[1] * m, m);
    const Eigen::MatrixXd k12 = other.values.middleRows(src[0] * m, m);
    const double err = (k21 - k12.transpose()).cwiseAbs().maxCoeff();
    r.constants["symmetry_error"] = number(err);
    if (err > 1e-8 * std::max(1.0, r.constants["max_abs"].get<double>())) {
      r.outcome = Outcome::Fail;
      r.reason = "K(t,x,y)^T differs from K(t,y,x)";
      r.witness = {{"error", number(err)}, {"relation", "|K(t,x,y)^T - K(t,y,x)| <= 1e-8"}};
    }
  }
  return r;
}

std::vector<KernelSlice> all_slices(Context& ctx) {
  std::vector<KernelSlice> out;
  for (double t : ctx.config().evolve.t_grid)
    for (auto y : ctx.sources()) out.push_back(kernel_slice(ctx.op(), ctx.propagator(), t, y));
  return out;
}

CheckResult gaussian(Context& ctx) {
  const auto slices = all_slices(ctx);
  const auto g = gaussian_fit(slices);
  double bound = 0.0;
  for (const auto& s : slices)
    bound = std::max(bound, std::pow(s.t, 0.5 * s.grid.d) * s.values.cwiseAbs().maxCoeff());
  CheckResult r;
  r.constants["C1"] = number(g.C1);
  r.constants["C2"] = number(g.C2);
  r.constants["C1_least_squares"] = number(g.C1_ls);
  r.constants["envelope_lifted"] = g.envelope_lifted;
  r.constants["rms_residual"] = number(g.rms_residual);
  r.constants["points"] = g.points;
  r.constants["s_window"] = {number(g.s_min), number(g.s_max)};
  r.constants["max_scaled_kernel"] = number(bound);
  ordered_json file = r.constants;
  file["pass"] = g.pass;
  write_json(ctx.artifact("gaussian_fit.json"), file);
  r.artifacts.push_back("gaussian_fit.json");
  if (!g.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "no Gaussian envelope with C2 > 0";
    r.witness = {{"C2", number(g.C2)}, {"relation", "C2 > 0"}};
  }
  return r;
}

CheckResult dia_nondia(Context& ctx) {
  if (!ctx.spec().symmetric()) return skipped("V is not symmetric");
  DiaNondiaReport all;
  for (const auto& s : all_slices(ctx)) merge(all, offdiag_vs_diag_check(s));
  CheckResult r;
  r.constants["max_violation"] = number(all.max_violation);
  r.constants["most_negative_diagonal"] = number(all.most_negative_diagonal);
  if (!all.pass) {
    r.outcome = Outcome::Fail;
    r.reason = all.negative_diagonal ? "negative diagonal kernel entry" : "violation above 1e-9";
    r.witness = all.witness ? kernel_witness(*all.witness) : ordered_json::object();
    r.witness["relation"] = "|k_ij(t,x,y) + k_ij(t,y,x)| <= 2 sqrt(k_ii k_jj) + 1e-9";
  }
  return r;
}

CheckResult positivity(Context& ctx) {
  const auto p = positivity_probe(ctx.op(), ctx.propagator(), {0.1, 0.5, 1.0}, ctx.sources());
  CheckResult r;
  r.constants["min_entry"] = number(p.min_entry);
  r.constants["offdiagonal_nonnegative"] = p.offdiag_nonnegative;
  r.constants["consistent_with_sign_check"] = p.consistent;
  if (!p.consistent) r.notes.push_back("kernel sign disagrees with the off-diagonal sign check");
  if (p.negative_found) {
    r.outcome = Outcome::Fail;
    r.reason = "negative kernel entry";
    r.witness = kernel_witness(p.witness);
    r.witness["relation"] = "k_ij(t,x,y) >= -1e-9";
  }
  return r;
}

CheckResult lower_bound(Context& ctx) {
  if (!ctx.spec().symmetric()) return skipped("V is not symmetric");
  CheckResult r;
  ordered_json rows = ordered_json::array();
  const auto y = ctx.sources().front();
  for (double t : ctx.config().evolve.t_grid) {
    LowerBoundReport lb;
    try {
      lb = lower_bound_check(ctx.spec(), ctx.grid(), t, y);
    } catch (const std::invalid_argument& e) {
      return skipped(e.what());
    }
    rows.push_back({{"t", number(t)},
                    {"min_margin", number(lb.min_margin)},
                    {"min_margin_diagonal", number(lb.min_margin_diagonal)},
                    {"min_margin_offdiagonal", number(lb.min_margin_offdiagonal)}});
    if (!lb.pass && r.outcome == Outcome::Pass) {
      r.outcome = Outcome::Fail;
      r.reason = "k_2v exceeds a kernel entry";
      r.witness = kernel_witness(lb.witness);
      r.witness["relation"] = "k_ij(t,x,y) - k_2v(t,x,y) >= -1e-9";
    }
  }
  r.constants["rows"] = rows;
  return r;
}

CheckResult decay(Context& ctx) {
  const auto& s = ctx.spec();
  if (!s.alpha || !(*s.alpha > 2.0)) return skipped("needs alpha > 2");
  const auto f = decay_profile_fit(ctx.op(), ctx.propagator(), ctx.config().evolve.decay_t, *s.alpha);
  CheckResult r;
  r.constants["t"] = number(f.t);
  r.constants["gamma_hat"] = number(f.gamma_hat);
  r.constants["decay_gamma"] = number(f.decay_gamma);
  r.constants["beta_hat"] = number(f.beta_hat);
  r.constants["decay_beta"] = number(f.decay_beta);
  r.constants["window"] = {number(f.r_min), number(f.r_max)};
  r.constants["points"] = f.points;
  ordered_json file = r.constants;
  file["pass"] = f.pass;
  write_json(ctx.artifact("decay_fit.json"), file);
  r.artifacts.push_back("decay_fit.json");
  if (!is_identity_q(s)) r.notes.push_back("the lower-bound profile assumes Q = I");
  if (!f.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "fitted decay exponent outside 10% of 1 + alpha/2";
    r.witness = {{"gamma_hat", number(f.gamma_hat)}, {"decay_gamma", number(f.decay_gamma)},
                 {"relation", "|gamma_hat - (1 + alpha/2)| <= 0.1 (1 + alpha/2)"}};
  }
  return r;
}

CheckResult maximal(Context& ctx) {
  const auto& c = ctx.config().evolve;
  const auto m = maximal_inequality_probe(ctx.spec(), ctx.grid(), c.maximal_p, c.trials, c.seed);
  CheckResult r;
  r.constants["p"] = number(m.p);
  r.constants["C_hat"] = number(m.c_hat);
  r.constants["C_hat_refined"] = number(m.c_hat_refined);
  r.constants["stability_ratio"] = number(m.stability_ratio);
  r.constants["skipped_draws"] = m.skipped;
  if (!m.pass) {
    r.outcome = Outcome::Fail;
    r.reason = "estimate unstable under refinement";
    r.witness = {{"stability_ratio", number(m.stability_ratio)}, {"relation", "ratio of estimates <= 1.5"}};
  }
  return r;
}

int group_rank(const std::string& g) {
  if (g == "model") return 0;
  if (g == "grid") return 1;
  if (g == "spectral") return 2;
  return 3;
}

}  // namespace

// ---------------------------------------------------------------- context

Context::Context(RunConfig cfg)
    : cfg_(std::move(cfg)),
      spec_(build_system(cfg_.system)),
      grid_(build_grid(cfg_.system.d, cfg_.grid.R, cfg_.grid.N)) {}

const DiscreteOperator& Context::op() {
  std::call_once(op_once_, [&] { op_ = std::make_unique<DiscreteOperator>(assemble(spec_, grid_)); });
  return *op_;
}

const Propagator& Context::propagator() {
  std::call_once(prop_once_, [&] { prop_ = std::make_unique<Propagator>(op().A); });
  return *prop_;
}

const SpectralResult& Context::spectrum() {
  std::call_once(spec_once_, [&] {
    EigenOptions opts;
    opts.seed = cfg_.evolve.seed;
    const int k = static_cast<int>(std::min<Eigen::Index>(cfg_.spectral.k, op().size()));
    spectrum_ = std::make_unique<SpectralResult>(eigen_lowest(op(), k, opts));
  });
  return *spectrum_;
}

std::vector<Eigen::Index> Context::sources() {
  if (cfg_.evolve.sources.empty()) return probe_sources(grid_);
  std::vector<Eigen::Index> out;
  for (const auto& y : cfg_.evolve.sources)
    out.push_back(grid_.node_at(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))));
  return out;
}

std::filesystem::path Context::artifact(const std::string& file) {
  std::filesystem::create_directories(cfg_.output_dir);
  return cfg_.output_dir / file;
}

// ---------------------------------------------------------------- registry

void Registry::add(CheckDef def) {
  auto it = std::find_if(defs_.begin(), defs_.end(), [&](const CheckDef& d) { return d.name == def.name; });
  if (it != defs_.end()) *it = std::move(def);
  else defs_.push_back(std::move(def));
}

const CheckDef* Registry::find(const std::string& name) const {
  for (const auto& d : defs_)
    if (d.name == name) return &d;
  return nullptr;
}

Registry Registry::builtin() {
  Registry r;
  auto model = [&](std::string name, std::string anchor, std::function<CheckReport(Context&)> fn) {
    r.add({std::move(name), "model", std::move(anchor), [fn](Context& c) { return from_report(fn(c)); }});
  };
  model("ellipticity", "eta1 |xi|^2 <= <Q(x) xi, xi> <= eta2 |xi|^2 with eta1, eta2 > 0",
        [](Context& c) { return ellipticity_check(c.spec().Q, samples(c)); });
  model("dissipativity", "Re<V(x) xi, xi> <= beta |xi|^2 with beta < 0",
        [](Context& c) { return dissipativity_check(c.spec().V, samples(c)); });
  model("gradient_condition", "|D_j V(x) (-V(x))^(-gamma)| bounded for some gamma in [0, 1/2)",
        [](Context& c) { return gradient_condition_check(c.spec().V, default_gamma_grid(), samples(c)); });
  model("grad_ratio", "|grad v(x)| <= c v(x)", [](Context& c) { return grad_ratio_check(c.spec().v, samples(c)); });
  model("okazawa", "|grad v_eps|_Q^2 <= a v_eps^2 + b v_eps^3 with v_eps = v / (1 + eps v)",
        [](Context& c) { return okazawa_check(c.spec().v, c.spec().Q, default_eps_grid(), samples(c)); });
  model("sectoriality", "Re<-Vt(x) xi, xi> >= M |Im<Vt(x) xi, xi>| with M > 0",
        [](Context& c) { return sectoriality_check(c.spec(), samples(c)); });
  model("offdiagonal_sign", "off-diagonal entries of Vt(x) are nonnegative",
        [](Context& c) { return offdiagonal_sign_check(c.spec(), samples(c)); });
  model("coercivity", "|Vt(x) xi| >= rho(x) |xi| with rho(x) -> infinity",
        [](Context& c) { return coercivity_check(c.spec().vtilde(), samples(c)); });
  r.add({"little_o", "model", "v_ii(x) = o(|x|^alpha) as |x| -> infinity", little_o});

  r.add({"assemble", "grid", "A = -div(Q grad .) - Vt is symmetric when Q and Vt are", assemble_check});

  r.add({"eigen", "spectral", "sigma(-L) consists of eigenvalues with an orthonormal eigenbasis", eigen_check});
  r.add({"weyl", "spectral", "N(lambda) / lambda^(d(1/2 + 1/alpha)) tends to the Weyl constant", weyl_check});
  r.add({"trace", "spectral", "integral of sum_i k_ii(t,x,x) dx = sum_n exp(-lambda_n t)", trace});

  r.add({"contraction", "evolve", "||S(t) f||_p <= ||f||_p", contraction});
  r.add({"ultracontractivity", "evolve", "|k_ij(t,x,y)| <= M t^(-d/2)", ultracontractivity});
  r.add({"trotter_kato", "evolve", "(exp(-tv/n) exp(-(t/n) A_V))^n f -> S(t) f", trotter});
  r.add({"kernel", "evolve", "S(t) f(x) = integral K(t,x,y) f(y) dy", kernel});
  r.add({"gaussian", "evolve", "|k_ij(t,x,y)| <= C1 t^(-d/2) exp(-C2 |x-y|^2 / (4t))", gaussian});
  r.add({"dia_nondia", "evolve", "|k_ij(t,x,y) + k_ij(t,y,x)| <= 2 sqrt(k_ii(t,x,y) k_jj(t,x,y))", dia_nondia});
  r.add({"positivity", "evolve", "kernel nonnegative iff off-diagonal entries of Vt are nonnegative", positivity});
  r.add({"lower_bound", "evolve", "k_2v(t,x,y) <= k_ij(t,x,y)", lower_bound});
  r.add({"decay", "evolve", "k_ii(t,x,x) decays like exp(-c |x|^gamma) with gamma = 1 + alpha/2", decay});
  r.add({"maximal_inequality", "evolve", "||div(Q grad u)||_p + ||Vt u||_p <= C ||L u||_p", maximal});
  return r;
}

std::vector<std::string> default_suite(const Registry& reg) {
  std::vector<std::string> out;
  for (const auto& d : reg.all()) out.push_back(d.name);
  return out;
}

std::vector<std::string> group_names(const Registry& reg, const std::string& group) {
  std::vector<std::string> out;
  for (const auto& d : reg.all())
    if (d.group == group) out.push_back(d.name);
  return out;
}

// ---------------------------------------------------------------- run

RunOutcome run_checks(const RunConfig& cfg, const Registry& reg, const std::vector<std::string>& names,
                      int threads) {
  std::vector<const CheckDef*> defs;
  for (const auto& n : names) {
    const CheckDef* d = reg.find(n);
    if (!d) throw ConfigError("unknown check '" + n + "'");
    if (std::find(defs.begin(), defs.end(), d) == defs.end()) defs.push_back(d);
  }
  std::stable_sort(defs.begin(), defs.end(),
                   [](const CheckDef* a, const CheckDef* b) { return group_rank(a->group) < group_rank(b->group); });

  Context ctx(cfg);
  std::vector<CheckResult> results(defs.size());
  std::vector<bool> crashed(defs.size(), false);
  auto run_one = [&](std::size_t k) {
    try {
      results[k] = defs[k]->fn(ctx);
    } catch (const std::exception& e) {
      results[k] = CheckResult{};
      results[k].outcome = Outcome::Inconclusive;
      results[k].reason = std::string("runtime error: ") + e.what();
      crashed[k] = true;
    } catch (...) {
      results[k] = CheckResult{};
      results[k].outcome = Outcome::Inconclusive;
      results[k].reason = "runtime error";
      crashed[k] = true;
    }
  };
  if (threads <= 1) {
    for (std::size_t k = 0; k < defs.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < defs.size(); k = next++) run_one(k);
      });
    for (auto& th : pool) th.join();
  }

  RunOutcome out;
  ordered_json& rep = out.report;
  rep["tool"] = "msv";
  rep["version"] = MSV_VERSION;
  rep["environment"] = {{"grid", {{"d", cfg.system.d}, {"R", number(cfg.grid.R)}, {"N", cfg.grid.N},
                                  {"h", number(ctx.grid().h)}}},
                        {"seed", cfg.evolve.seed},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)}};
  rep["system"] = system_to_json(cfg.system);
  ordered_json checks = ordered_json::array();
  int counts[4] = {0, 0, 0, 0};
  bool any_fail = false, any_crash = false;
  for (std::size_t k = 0; k < defs.size(); ++k) {
    const CheckResult& r = results[k];
    ordered_json c;
    c["name"] = defs[k]->name;
    c["group"] = defs[k]->group;
    c["anchor"] = defs[k]->anchor;
    c["verdict"] = to_string(r.outcome);
    if (!r.reason.empty()) c["reason"] = r.reason;
    c["constants"] = r.constants;
    if (!r.witness.is_null()) c["witness"] = r.witness;
    c["artifacts"] = r.artifacts;
    if (!r.notes.empty()) c["notes"] = r.notes;
    checks.push_back(std::move(c));
    ++counts[static_cast<int>(r.outcome)];
    any_fail = any_fail || r.outcome == Outcome::Fail;
    any_crash = any_crash || crashed[k];
  }
  rep["checks"] = std::move(checks);
  rep["summary"] = {{"pass", counts[0]}, {"fail", counts[1]}, {"inconclusive", counts[2]}, {"skipped", counts[3]}};
  std::filesystem::create_directories(cfg.output_dir);
  write_json(cfg.output_dir / "report.json", rep);
  out.exit_code = any_crash ? 3 : any_fail ? 1 : 0;
  return out;
}

}  // namespace msv::cli
