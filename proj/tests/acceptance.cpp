// Acceptance gate: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "mixlab/checks.hpp"
#include "mixlab/cltlab.hpp"
#include "mixlab/error.hpp"
#include "mixlab/infofn.hpp"
#include "mixlab/matana.hpp"

#ifndef MIXLAB_CLI_PATH
#error "MIXLAB_CLI_PATH must point at the mixlab executable"
#endif

using namespace mixlab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome calibration() {
  Outcome o;
  const MixtureDensity g(ScalarMixerAtomic::single(1.0));
  const double h = entropy(g).value;
  note(o, std::abs(h - 0.5 * std::log(2 * std::numbers::pi * std::numbers::e)) < 1e-8, "N(0,1) entropy " + fmt(h));
  const double r = renyi_entropy(g, 2.0).value;
  note(o, std::abs(r - (0.5 * std::log(2 * std::numbers::pi) + 0.5 * std::log(2.0))) < 1e-8, "renyi " + fmt(r));
  for (double s : {0.5, 1.0, 3.0}) {
    const double f = fisher_information(MixtureDensity(ScalarMixerAtomic::single(s))).value;
    note(o, std::abs(f - 1.0 / (s * s)) < 1e-8, "fisher sigma=" + fmt(s));
  }
  const MixtureDensity cauchy(atomize(StableMixerSpec{StableKind::PositiveStablePower, 1.0, kSeed}, 1 << 14, kSeed));
  const double hc = entropy(cauchy).value;
  const double fc = fisher_information(cauchy).value;
  note(o, std::abs(hc - std::log(4 * std::numbers::pi)) < 5e-3, "cauchy entropy " + fmt(hc));
  note(o, std::abs(fc - 0.5) < 2e-2, "cauchy fisher " + fmt(fc));
  o.detail = o.pass ? "cauchy h=" + fmt(hc) + " I=" + fmt(fc) : o.detail;
  return o;
}

Outcome entropy_concavity() {
  Outcome o;
  Rng rng(derive_seed(kSeed, 2));
  std::vector<CheckReport> conc;
  for (int i = 0; i < 50; ++i) {
    const auto a = random_scalar_model(rng), b = random_scalar_model(rng);
    conc.push_back(check_entropy_concavity_t(a, b, 41, {}, 1e-6, 1e-8));
  }
  const CheckReport t = merge_reports(conc);
  note(o, t.all_pass(), "concavity in t margin " + fmt(t.worst_margin));
  double epi = INFINITY;
  for (const auto& r : conc) {
    for (const auto& c : r.companions) {
      if (c.name == "epi") epi = std::min(epi, c.worst_margin);
    }
  }
  for (double alpha : {1.0, 2.0}) {
    std::vector<CheckReport> parts;
    for (int i = 0; i < 50; ++i) {
      std::vector<MixtureDensity> models;
      for (int k = 0; k < 3; ++k) models.push_back(random_scalar_model(rng));
      parts.push_back(check_simplex_concavity(models, alpha, 3, rng.next(), {}, 1e-6));
    }
    const CheckReport s = merge_reports(parts);
    note(o, s.all_pass(), "simplex alpha=" + fmt(alpha) + " margin " + fmt(s.worst_margin));
  }
  if (o.pass) o.detail = "worst concavity margin " + fmt(t.worst_margin) + ", epi " + fmt(epi);
  return o;
}

Outcome schur() {
  Outcome o;
  Rng rng(derive_seed(kSeed, 3));
  std::vector<CheckReport> parts;
  for (std::size_t n : {3u, 4u}) {
    for (int i = 0; i < 10; ++i) {
      const std::vector<MixtureDensity> models(n, random_scalar_model(rng));
      parts.push_back(check_schur_concavity(models, 10, rng.next(), {}, 1.0, 1e-6));
    }
  }
  const CheckReport r = merge_reports(parts);
  note(o, r.all_pass(), "margin " + fmt(r.worst_margin));
  note(o, r.instances_tested >= 200, "only " + std::to_string(r.instances_tested) + " pairs");
  if (o.pass) o.detail = std::to_string(r.instances_tested) + " pairs, worst margin " + fmt(r.worst_margin);
  return o;
}

Outcome sandwich() {
  Outcome o;
  Rng rng(derive_seed(kSeed, 4));
  std::vector<MixtureDensity> models;
  for (int i = 0; i < 25; ++i) models.push_back(random_scalar_model(rng));
  for (int i = 0; i < 25; ++i) models.push_back(random_matrix_model(rng, 2));
  const CheckReport r = check_fisher_sandwich(models, {}, 1e-8);
  note(o, r.all_pass(), "sandwich margin " + fmt(r.worst_margin));
  const auto f = fisher_information(MixtureDensity(ScalarMixerAtomic({1.0, 2.0}, {0.5, 0.5})));
  note(o, f.value - f.error_bound > 0.4 && f.value + f.error_bound < 0.625, "I(X)=" + fmt(f.value));
  if (o.pass) o.detail = "I(X)=" + std::to_string(f.value);
  return o;
}

Outcome operator_convexity() {
  Outcome o;
  Rng rng(derive_seed(kSeed, 5));
  std::vector<CheckReport> parts;
  for (int i = 0; i < 50; ++i) {
    if (i < 25) {
      parts.push_back(check_fisher_jensen(random_scalar_model(rng), random_scalar_model(rng), 11, {}, 1e-8));
    } else {
      parts.push_back(check_fisher_jensen(random_matrix_model(rng, 2), random_matrix_model(rng, 2), 11, {}, 1e-8));
    }
  }
  const CheckReport j = merge_reports(parts);
  note(o, j.pass && j.instances_tested == 550, "jensen margin " + fmt(j.worst_margin));
  const CheckReport rc = check_R_convexity(10'000, derive_seed(kSeed, 6), 3, 1e-10);
  note(o, rc.pass && rc.instances_tested == 10'000, "R convexity margin " + fmt(rc.worst_margin));
  const CheckReport ce = verify_sqrtXYsqrtX_counterexample(1e-9);
  note(o, ce.all_pass(), "counterexample not confirmed");
  if (o.pass) o.detail = "jensen " + fmt(j.worst_margin) + ", R " + fmt(rc.worst_margin);
  return o;
}

Outcome clt() {
  Outcome o;
  CltConfig c;
  c.base_model = ScalarMixerAtomic({1.0, 2.0}, {0.5, 0.5});
  c.n_values = {4, 16, 64, 256, 1024, 4096};
  c.deltas = {0.25, 0.5, 1.0};
  c.seed = derive_seed(kSeed, 7);
  const auto rows = run_clt(c);
  std::string slopes;
  for (double delta : c.deltas) {
    std::vector<CltRow> sel;
    for (const auto& r : rows) {
      if (r.delta == delta) sel.push_back(r);
    }
    for (std::size_t i = 0; i < sel.size(); ++i) {
      note(o, sel[i].dev.method == "binomial", "n=" + std::to_string(sel[i].dev.n) + " not exact");
      note(o, sel[i].dev.min_eigenvalue >= -(sel[i].dev.error_bound + 1e-9), "negative deviation");
      if (i + 1 < sel.size()) {
        note(o, sel[i].dev.deviation - sel[i + 1].dev.deviation > sel[i].dev.error_bound + sel[i + 1].dev.error_bound,
             "not decreasing at n=" + std::to_string(sel[i].dev.n));
      }
    }
    const RateFit fit = fit_rate(sel);
    const ConstantFit cf = fit_constant(sel);
    note(o, fit.slope <= -clt_rate_exponent(delta) + 0.05, "slope " + fmt(fit.slope) + " delta " + fmt(delta));
    note(o, std::isfinite(cf.constant) && cf.stability_ratio <= 2.0 && cf.stability_ratio >= 0.5,
         "constant unstable " + fmt(cf.stability_ratio));
    slopes += (slopes.empty() ? "" : ", ") + std::string("delta ") + fmt(delta) + ": slope " + fmt(fit.slope) +
              " vs " + fmt(-clt_rate_exponent(delta));
  }
  if (o.pass) o.detail = slopes;
  return o;
}

Outcome rademacher() {
  Outcome o;
  double worst = 0.0;
  std::size_t run = 0, skipped = 0;
  for (int d : {2, 8}) {
    for (double p : {1.5, 2.0, 4.0, std::log(d + 1.0) + 1.0}) {
      for (double delta : {0.5, 1.0}) {
        if (p < 1.0 + delta) {
          ++skipped;
          continue;
        }
        const auto r = check_rademacher_type({p, delta, 12, d, 100, derive_seed(kSeed, 8), TypeNorm::Schatten});
        note(o, r.pass && r.exhaustive && r.sign_patterns == 4096, "p=" + fmt(p) + " d=" + std::to_string(d));
        worst = std::max(worst, r.worst_ratio);
        ++run;
      }
    }
    for (double delta : {0.5, 1.0}) {
      const auto r = check_rademacher_type({INFINITY, delta, 12, d, 100, derive_seed(kSeed, 9), TypeNorm::Operator});
      note(o, r.pass, "operator d=" + std::to_string(d));
      worst = std::max(worst, r.worst_ratio);
      ++run;
    }
  }
  Rng rng(derive_seed(kSeed, 10));
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + static_cast<int>(rng.below(7));
    Matrix a(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    }
    const double op = op_norm(a);
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const double s = schatten_norm(a, p);
      note(o, op <= s * (1 + 1e-14) && s <= std::pow(d, 1.0 / p) * op * (1 + 1e-14), "norm equivalence");
    }
  }
  if (o.pass) {
    o.detail = std::to_string(run) + " configurations, worst ratio " + fmt(worst) + ", " + std::to_string(skipped) +
               " not applicable (p < 1+delta)";
  }
  return o;
}

Outcome moments() {
  Outcome o;
  const StableMixerSpec gg{StableKind::GeneralizedGaussianMixer, 1.5, 0};
  note(o, moment_condition_report(gg, 0.2).admitted, "generalized gaussian rejected at 0.2");
  note(o, !moment_condition_report(gg, 0.3).admitted, "generalized gaussian admitted at 0.3");
  for (double delta : {0.05, 0.25, 0.5, 0.75, 1.0}) {
    note(o, !moment_condition_report(StableMixerSpec{StableKind::PositiveStablePower, 1.5, 0}, delta).admitted,
         "symmetric stable admitted at " + fmt(delta));
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "mixlab_acceptance";
  fs::remove_all(base);
  const std::string cli = MIXLAB_CLI_PATH;
  const std::string runs[] = {"a", "b", "c"};
  const std::string threads[] = {"1", "1", "8"};
  for (int i = 0; i < 3; ++i) {
    const std::string cmd = "\"" + cli + "\" --threads " + threads[i] + " suite --seed 7 --out-dir \"" +
                            (base / runs[i]).string() + "\" > /dev/null";
    note(o, std::system(cmd.c_str()) == 0, "suite run " + runs[i] + " failed");
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename();
    const std::string ref = slurp(entry.path());
    note(o, ref == slurp(base / "b" / name), name.string() + " differs between runs");
    note(o, ref == slurp(base / "c" / name), name.string() + " differs at 8 threads");
    ++files;
  }
  note(o, files >= 4, "missing suite outputs");
  if (o.pass) o.detail = std::to_string(files) + " files identical";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"calibration", calibration}, {"entropy concavity", entropy_concavity},
      {"schur concavity", schur},   {"fisher sandwich", sandwich},
      {"operator convexity", operator_convexity}, {"clt deviation", clt},
      {"rademacher type", rademacher}, {"moment gate", moments},
      {"determinism", determinism},
  };
  int failed = 0;
  int k = 0;
  for (const auto& [name, fn] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", k, name, secs, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
