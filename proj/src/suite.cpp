#include "mixlab/suite.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "mixlab/cltlab.hpp"
#include "mixlab/error.hpp"
#include "mixlab/fishmin.hpp"
#include "mixlab/infofn.hpp"

namespace mixlab {

bool SuiteResult::pass() const {
  for (const auto& r : reports) {
    if (!r.exploratory && !r.all_pass()) return false;
  }
  return true;
}

namespace {

void flatten(const CheckReport& r, const std::string& prefix, nlohmann::json& out) {
  const std::string name = prefix.empty() ? r.name : prefix + "." + r.name;
  out[name] = {{"pass", r.pass}, {"worst_margin", r.worst_margin}};
  for (const auto& c : r.companions) flatten(c, name, out);
}

CheckReport closeness(const std::string& name, double value, double expected, double tolerance) {
  MarginTracker t(name, tolerance);
  t.add(-std::abs(value - expected), 0.0, {{"value", value}, {"expected", expected}});
  return t.report();
}

CheckReport verdict(const std::string& name, bool ok) {
  MarginTracker t(name, 0.0);
  t.add(ok ? 1.0 : -1.0, 0.0);
  return t.report();
}

std::vector<CltRow> rows_for(const std::vector<CltRow>& rows, double delta) {
  std::vector<CltRow> out;
  for (const auto& r : rows) {
    if (r.delta == delta) out.push_back(r);
  }
  return out;
}

}  // namespace

nlohmann::json SuiteResult::summary() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& r : reports) flatten(r, "", out);
  return out;
}

SuiteResult run_suite(std::uint64_t seed) {
  SuiteResult res;
  auto& reports = res.reports;
  const QuadSpec quad;

  // Closed-form calibration.
  {
    const MixtureDensity g(ScalarMixerAtomic::single(1.0));
    reports.push_back(closeness("gaussian_entropy", entropy(g, quad).value, 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e), 1e-8));
    reports.push_back(closeness("gaussian_renyi_2", renyi_entropy(g, 2.0, quad).value,
                                0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(2.0), 1e-8));
    const MixtureDensity g2(ScalarMixerAtomic::single(2.0));
    reports.push_back(closeness("gaussian_fisher", fisher_information(g2, quad).value, 0.25, 1e-8));
    const MixtureDensity cauchy(atomize(StableMixerSpec{StableKind::PositiveStablePower, 1.0, seed}, 1 << 14, seed));
    reports.push_back(closeness("cauchy_entropy", entropy(cauchy, quad).value, std::log(4.0 * std::numbers::pi), 5e-3));
    reports.push_back(closeness("cauchy_fisher", fisher_information(cauchy, quad).value, 0.5, 2e-2));
  }

  Rng rng(derive_seed(seed, 1));
  // Concavity in t, Blachman–Stam and the two-point Fisher Jensen inequality.
  {
    std::vector<CheckReport> conc;
    std::vector<CheckReport> bs;
    std::vector<CheckReport> jensen;
    for (int i = 0; i < 10; ++i) {
      const MixtureDensity a = random_scalar_model(rng);
      const MixtureDensity b = random_scalar_model(rng);
      conc.push_back(check_entropy_concavity_t(a, b, 41, quad));
      bs.push_back(check_blachman_stam(a, b, 11, quad));
      jensen.push_back(check_fisher_jensen(a, b, 11, quad));
    }
    for (int i = 0; i < 2; ++i) {
      jensen.push_back(check_fisher_jensen(random_matrix_model(rng, 2), random_matrix_model(rng, 2), 11, quad));
    }
    reports.push_back(merge_reports(conc));
    reports.push_back(merge_reports(bs));
    reports.push_back(merge_reports(jensen));
  }
  // Concavity on the simplex, α ∈ {1, 2}.
  for (double alpha : {1.0, 2.0}) {
    std::vector<CheckReport> parts;
    for (int i = 0; i < 5; ++i) {
      std::vector<MixtureDensity> models;
      for (int k = 0; k < 3; ++k) models.push_back(random_scalar_model(rng));
      parts.push_back(check_simplex_concavity(models, alpha, 4, rng.next(), quad));
    }
    CheckReport merged = merge_reports(parts);
    merged.name += alpha == 1.0 ? "_alpha1" : "_alpha2";
    reports.push_back(merged);
  }
  // Schur concavity for i.i.d. sums, n ∈ {3, 4}.
  {
    std::vector<CheckReport> parts;
    for (std::size_t n : {3u, 4u}) {
      for (int i = 0; i < 2; ++i) {
        const std::vector<MixtureDensity> models(n, random_scalar_model(rng));
        parts.push_back(check_schur_concavity(models, 10, rng.next(), quad));
      }
    }
    reports.push_back(merge_reports(parts));
  }
  // Fisher sandwich.
  {
    std::vector<MixtureDensity> models;
    for (int i = 0; i < 10; ++i) models.push_back(random_scalar_model(rng));
    for (int i = 0; i < 10; ++i) models.push_back(random_matrix_model(rng, 2));
    reports.push_back(check_fisher_sandwich(models, quad));
    const MixtureDensity m12(ScalarMixerAtomic({1.0, 2.0}, {0.5, 0.5}));
    const double i12 = fisher_information(m12, quad).value;
    reports.push_back(verdict("fisher_two_atom_strictly_inside", i12 > 0.4 && i12 < 0.625));
  }
  reports.push_back(check_R_convexity(10'000, derive_seed(seed, 2)));
  reports.push_back(verify_sqrtXYsqrtX_counterexample());

  // CLT sweep for the equal-weights two-atom mixer.
  {
    CltConfig c;
    c.base_model = ScalarMixerAtomic({1.0, 2.0}, {0.5, 0.5});
    c.n_values = {4, 16, 64, 256, 1024};
    c.seed = derive_seed(seed, 3);
    const auto rows = run_clt(c);
    res.clt_csv = clt_rows_to_csv(rows);
    MarginTracker signed_("clt_psd_signed", 1e-9);
    MarginTracker decreasing("clt_strictly_decreasing", 0.0);
    const auto first = rows_for(rows, c.deltas.front());
    for (std::size_t i = 0; i < first.size(); ++i) {
      signed_.add(first[i].dev.min_eigenvalue, first[i].dev.error_bound, {{"n", first[i].dev.n}});
      if (i + 1 < first.size()) {
        decreasing.add(first[i].dev.deviation - first[i + 1].dev.deviation -
                           (first[i].dev.error_bound + first[i + 1].dev.error_bound),
                       0.0, {{"n", first[i].dev.n}});
      }
    }
    reports.push_back(signed_.report());
    reports.push_back(decreasing.report());
    for (double delta : c.deltas) {
      const auto sel = rows_for(rows, delta);
      const RateFit fit = fit_rate(sel);
      const ConstantFit constant = fit_constant(sel);
      MarginTracker rate("clt_rate_delta_" + std::to_string(delta).substr(0, 4), 0.0);
      rate.add(-clt_rate_exponent(delta) + 0.05 - fit.slope, 0.0, {{"slope", fit.slope}});
      reports.push_back(rate.report());
      MarginTracker stable("clt_constant_delta_" + std::to_string(delta).substr(0, 4), 0.0);
      stable.add(std::isfinite(constant.constant) ? 2.0 - constant.stability_ratio : -1.0, 0.0,
                 {{"constant", constant.constant}});
      reports.push_back(stable.report());
    }
  }
  // Rademacher type, reduced sizes.
  {
    std::vector<CheckReport> parts;
    const std::uint64_t type_seed = derive_seed(seed, 4);
    for (double p : {2.0, 4.0}) {
      for (double delta : {0.5, 1.0}) {
        const auto r = check_rademacher_type({p, delta, 10, 2, 20, type_seed, TypeNorm::Schatten});
        MarginTracker t("rademacher_type", 1e-12);
        t.add(1.0 - r.worst_ratio, 0.0, {{"p", p}, {"delta", delta}});
        parts.push_back(t.report());
      }
    }
    const auto op = check_rademacher_type({std::log(3.0) + 1.0, 1.0, 10, 2, 20, type_seed, TypeNorm::Operator});
    MarginTracker t("rademacher_type", 1e-12);
    t.add(1.0 - op.worst_ratio, 0.0, {{"norm", "operator"}});
    parts.push_back(t.report());
    reports.push_back(merge_reports(parts));
  }
  // Moment gate.
  {
    const StableMixerSpec gg{StableKind::GeneralizedGaussianMixer, 1.5, seed};
    const StableMixerSpec sym{StableKind::PositiveStablePower, 1.5, seed};
    reports.push_back(verdict("moment_gate_gg_admit", moment_condition_report(gg, 0.2).admitted));
    reports.push_back(verdict("moment_gate_gg_reject", !moment_condition_report(gg, 0.3).admitted));
    bool rejected = true;
    for (double delta : {0.1, 0.5, 1.0}) rejected = rejected && !moment_condition_report(sym, delta).admitted;
    reports.push_back(verdict("moment_gate_stable_reject", rejected));
  }
  // Fisher minimization over the simplex, n = 2.
  {
    MinimizeSpec spec;
    spec.n = 2;
    spec.seed = derive_seed(seed, 5);
    const auto r = minimize_fisher(MixtureDensity(ScalarMixerAtomic({1.0, 2.0}, {0.5, 0.5})), spec);
    res.fishmin_csv = trace_to_csv(r);
    reports.push_back(group_reports("min_fisher", r.checks, spec.tolerance));
  }
  return res;
}

void write_suite(const SuiteResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ConfigError(std::string("cannot write ") + (dir / name).string());
    os << text;
  };
  nlohmann::json full = nlohmann::json::array();
  for (const auto& r : result.reports) full.push_back(to_json(r));
  write("summary.json", result.summary().dump(2) + "\n");
  write("reports.json", full.dump(2) + "\n");
  write("clt.csv", result.clt_csv);
  write("fishmin_trace.csv", result.fishmin_csv);
}

}  // namespace mixlab
