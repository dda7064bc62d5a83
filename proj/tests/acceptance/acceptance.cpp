// Acceptance gate: one PASS/FAIL line per primary criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "swu/cli.hpp"
#include "swu/evaluation.hpp"
#include "swu/metrics.hpp"
#include "swu/parallel.hpp"
#include "swu/synth.hpp"
#include "swu/uncertainty.hpp"
#include "test_support.hpp"

using namespace swu;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guarded(const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Evaluated {
  EvalReport id;
  EvalReport combined;
};

// In-memory pipeline: generate, score every default method, evaluate.
Evaluated run_dataset(const SynthConfig& config, int workers) {
  const auto cases = generate_cases(config, workers);
  const auto methods = default_methods();
  std::vector<ScoreTable> parts(cases.size());
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    const auto& c = cases[i];
    for (const auto& m : methods) parts[i].methods.push_back(m.name());
    const auto scored = score_structures(c.ensemble, methods);
    append_case(parts[i], scored, connected_components(*c.ensemble.ground_truth()), c.provenance);
  });
  ScoreTable table;
  table.methods = parts.empty() ? std::vector<std::string>{} : parts.front().methods;
  std::vector<CaseSummary> summaries;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    for (auto& r : parts[i].rows) table.rows.push_back(std::move(r));
    summaries.push_back({cases[i].ensemble.case_id(), cases[i].provenance,
                         static_cast<std::int64_t>(connected_components(*cases[i].ensemble.ground_truth()).size())});
  }
  Evaluated out{evaluate(table, summaries, Split::ID), {}};
  if (config.ood_cases > 0) out.combined = evaluate(table, summaries, Split::Combined);
  return out;
}

double group_mean(const EvalReport& r, std::initializer_list<const char*> names) {
  double s = 0;
  for (const char* n : names) s += r.method(n).fp_reduction.value_or(0.0);
  return s / static_cast<double>(names.size());
}

std::vector<Detection> random_detections(std::mt19937_64& rng, std::int64_t* total_gt) {
  const int n = 1 + static_cast<int>(rng() % 80);
  const std::int64_t gts = 1 + static_cast<std::int64_t>(rng() % 20);
  std::uniform_int_distribution<int> score(0, 30);
  std::vector<Detection> d;
  for (int i = 0; i < n; ++i) {
    const bool tp = rng() % 2;
    d.push_back({static_cast<double>(score(rng)), tp, tp ? static_cast<std::int64_t>(rng() % gts) : -1});
  }
  *total_gt = gts;
  return d;
}

}  // namespace

int main() {
  const int workers = cli::default_workers();
  constexpr int kSeeds = 20;

  guarded("algebraic-identity", [] {
    const auto t0 = Clock::now();
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      const EnsembleCase c = swu::testing::random_ensemble({32, 32, 32}, 5, rng);
      const ScalarVolume mi = mutual_information_map(c), ae = average_entropy_map(c);
      const ScalarVolume h = entropy_map(mean_prediction(c));
      for (std::int64_t i = 0; i < mi.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(mi[i]) - (static_cast<double>(h[i]) - ae[i])));
      }
    }
    const double secs = seconds_since(t0);
    report(worst < 1e-6 && secs < 5.0, "algebraic-identity",
           "max |MI - (H(mean) - AE)| = " + fmt("%.3g", worst) + " over 100 ensembles (T=5, 32^3), " +
               fmt("%.2f s", secs) + " (limits 1e-6, 5 s)");
  });

  guarded("analytic-extremes", [] {
    const double h_half = binary_entropy(0.5), ln2 = std::log(2.0);
    const Shape g{2, 2, 2};
    const ScalarVolume zeros(g, kUnitSpacing, 0.0f), ones(g, kUnitSpacing, 1.0f);
    const ScalarVolume h0 = entropy_map(zeros), h1 = entropy_map(ones);
    const ScalarVolume var = variance_map(EnsembleCase("v", {zeros, ones}));
    bool ends_zero = binary_entropy(0.0) == 0.0 && binary_entropy(1.0) == 0.0;
    for (std::int64_t i = 0; i < h0.size(); ++i) ends_zero = ends_zero && h0[i] == 0.0f && h1[i] == 0.0f;
    double var_err = 0;
    for (float v : swu::testing::values(var)) var_err = std::max(var_err, std::abs(v - 0.25));
    std::mt19937_64 rng(1);
    const ScalarVolume m = swu::testing::random_volume({12, 12, 12}, rng);
    const EnsembleCase same("s", {m, m, m, m, m});
    bool pd_one = true;
    int structures = 0;
    for (const auto& s : connected_components(binarize(m, 0.5))) {
      pd_one = pd_one && pairwise_dice_score(same, s, 0.5) == 1.0;
      ++structures;
    }
    const bool ok = std::abs(h_half - ln2) <= 1e-9 && ends_zero && var_err <= 1e-9 && pd_one && structures > 0;
    report(ok, "analytic-extremes",
           "|H(0.5) - ln2| = " + fmt("%.2g", std::abs(h_half - ln2)) + ", H(0) = H(1) = 0: " +
               (ends_zero ? "yes" : "no") + ", |Var{0,1} - 0.25| = " + fmt("%.2g", var_err) +
               ", PD(identical) == 1 on " + std::to_string(structures) + " structures: " + (pd_one ? "yes" : "no"));
  });

  guarded("connected-components-oracle", [] {
    int mismatches = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      const BinaryMask mask = swu::testing::random_mask({32, 32, 32}, 0.2, rng);
      for (int conn : {6, 18, 26}) {
        const LabelVolume got = label_components(mask, parse_connectivity(conn));
        const auto expect = swu::testing::flood_fill_labels(mask, conn);
        if (!std::equal(got.labels.begin(), got.labels.end(), expect.begin())) ++mismatches;
      }
    }
    report(mismatches == 0, "connected-components-oracle",
           std::to_string(300 - mismatches) + "/300 partitions identical to flood fill (100 masks 32^3 x {6,18,26})");
  });

  guarded("metric-oracles", [] {
    const std::vector<Detection> toy{{0.9, true, 0}, {0.8, false, -1}, {0.7, false, -1}, {0.6, true, 1},
                                     {0.5, false, -1}, {0.4, true, 2}, {0.3, false, -1}};
    const FrocCurve c = froc_curve(toy, Orientation::Confidence, 3, 5);
    const auto fr = fp_reduction(c).value;
    const double ar = average_recall(c);
    const auto rho = spearman_abs(std::vector<double>{0.8, 0.5, 0.6}, std::vector<double>{0.9, 0.6, 0.4});
    const bool toy_ok = fr && *fr == 0.25 && std::abs(ar - 2.0 / 3) <= 1e-9 && rho && *rho == 0.5;

    std::mt19937_64 rng(2024);
    int monotone = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::int64_t gts = 0;
      const auto d = random_detections(rng, &gts);
      const FrocCurve r = froc_curve(d, trial % 2 ? Orientation::Confidence : Orientation::Uncertainty, gts, 4);
      bool ok = r.points.front().retained == 0 && r.points.back().retained == static_cast<std::int64_t>(d.size());
      for (std::size_t i = 1; i < r.points.size(); ++i) {
        ok = ok && r.points[i].recall >= r.points[i - 1].recall && r.points[i].avg_fp >= r.points[i - 1].avg_fp;
      }
      monotone += ok;
    }
    report(toy_ok && monotone == 1000, "metric-oracles",
           "toy staircase fp_reduction = " + fmt("%.17g", fr.value_or(NAN)) + " (0.25), average_recall = " +
               fmt("%.17g", ar) + " (2/3 +- 1e-9), |rho_TP| = " + fmt("%.17g", rho.value_or(NAN)) +
               " (0.5); monotone staircases " + std::to_string(monotone) + "/1000");
  });

  guarded("rank-invariance", [] {
    std::mt19937_64 rng(77);
    int unchanged = 0;
    const int trials = 500;
    for (int trial = 0; trial < trials; ++trial) {
      std::int64_t gts = 0;
      auto d = random_detections(rng, &gts);
      auto t = d;
      for (auto& x : t) x.score = std::exp(0.2 * x.score) + 3 * x.score;
      const auto o = trial % 2 ? Orientation::Confidence : Orientation::Uncertainty;
      const FrocCurve a = froc_curve(d, o, gts, 3), b = froc_curve(t, o, gts, 3);
      std::vector<double> dice(d.size()), s1(d.size()), s2(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        dice[i] = std::uniform_real_distribution<double>(0, 1)(rng);
        s1[i] = d[i].score;
        s2[i] = t[i].score;
      }
      unchanged += fp_reduction(a).value == fp_reduction(b).value && average_recall(a) == average_recall(b) &&
                   spearman_abs(dice, s1) == spearman_abs(dice, s2);
    }
    report(unchanged == trials, "rank-invariance",
           std::to_string(unchanged) + "/" + std::to_string(trials) +
               " random tables with identical fp_reduction, average_recall, |Spearman| after exp(0.2s)+3s");
  });

  // Datasets shared by the OOD and invariance criteria.
  std::vector<Evaluated> ood_runs(kSeeds);
  bool ood_ready = false;
  guarded("ood-discrepancy-advantage", [&] {
    double disc = 0, avg = 0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      SynthConfig c;
      c.n_cases = 10;
      c.ood_cases = 10;
      c.seed = 1000 + static_cast<std::uint64_t>(seed);
      ood_runs[seed] = run_dataset(c, workers);
      const EvalReport& r = ood_runs[seed].combined;
      disc += group_mean(r, {"MI:mean", "Variance:min", "PD"});
      avg += group_mean(r, {"Pred:max", "Pred:mean", "Logit:mean", "AE:min", "Entropy:mean", "Entropy:min",
                            "Entropy:sumlog"});
    }
    ood_ready = true;
    disc /= kSeeds;
    avg /= kSeeds;
    report(disc >= avg + 0.03, "ood-discrepancy-advantage",
           "mean fp_reduction {MI, Variance, PD} = " + fmt("%.4f", disc) + " vs {Pred, Logit, Entropy, AE} = " +
               fmt("%.4f", avg) + ", margin " + fmt("%.4f", disc - avg) +
               " (need >= 0.03; 20 seeds x (10 ID + 10 OOD), 64^3, T=5, combined split)");
  });

  guarded("sumlog-size-bias", [&] {
    double mean = 0, sumlog = 0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      SynthConfig c;
      c.n_cases = 20;
      c.radius_min = 2;
      c.radius_max = 12;
      c.seed = 2000 + static_cast<std::uint64_t>(seed);
      const EvalReport r = run_dataset(c, workers).id;
      mean += r.method("Entropy:mean").fp_reduction.value_or(0.0);
      sumlog += r.method("Entropy:sumlog").fp_reduction.value_or(0.0);
    }
    mean /= kSeeds;
    sumlog /= kSeeds;
    report(mean >= sumlog + 0.05, "sumlog-size-bias",
           "fp_reduction Entropy:mean = " + fmt("%.4f", mean) + " vs Entropy:sumlog = " + fmt("%.4f", sumlog) +
               " (need margin >= 0.05; radii 2-12, 20 seeds x 20 cases)");
  });

  guarded("tp-spearman-entropy", [&] {
    double rho = 0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      SynthConfig c;
      c.n_cases = 20;
      c.fp_quality_link = 1.0;
      c.seed = 3000 + static_cast<std::uint64_t>(seed);
      rho += run_dataset(c, workers).id.method("Entropy:mean").spearman_tp.value_or(0.0);
    }
    rho /= kSeeds;
    report(rho >= 0.5, "tp-spearman-entropy",
           "mean TP-only |Spearman| (Entropy:mean vs Dice) = " + fmt("%.4f", rho) +
               " (need >= 0.5; fp_quality_link = 1, 20 seeds)");
  });

  guarded("ood-spearman-invariance", [&] {
    if (!ood_ready) throw Error("OOD datasets unavailable");
    int same = 0, total = 0;
    for (const auto& run : ood_runs) {
      for (const auto& m : run.id.methods) {
        ++total;
        same += m.spearman_tp == run.combined.method(m.method).spearman_tp;
      }
    }
    report(same == total, "ood-spearman-invariance",
           std::to_string(same) + "/" + std::to_string(total) +
               " TP-only Spearman values bitwise equal between ID and ID+OOD evaluations");
  });

  guarded("performance", [&] {
    swu::testing::TempDir dir("accept");
    SynthConfig c;
    c.n_cases = 20;
    c.seed = 4242;
    {
      std::ofstream f(dir / "cfg.json");
      f << synth_config_json(c);
    }
    std::ostringstream out, err;
    const auto t0 = Clock::now();
    bool ok = cli::cmd_synth(dir / "cfg.json", dir / "ds", workers, out, err) == 0;
    cli::ScoreOptions so;
    so.manifest = dir / "ds" / "manifest.json";
    so.out = dir / "scores.csv";
    so.workers = workers;
    ok = ok && cli::cmd_score(so, out, err) == 0;
    ok = ok && cli::cmd_eval({so.out, so.manifest, dir / "eval", Split::ID, "perf"}, out, err) == 0;
    const double pipeline = seconds_since(t0);

    std::mt19937_64 rng(5);
    const ScalarVolume v = swu::testing::random_volume({128, 128, 128}, rng);
    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t1 = Clock::now();
      const ScalarVolume h = entropy_map(v);
      best = std::min(best, seconds_since(t1));
      if (h[0] < 0) ok = false;
    }
    const double mvox = static_cast<double>(v.size()) / best / 1e6;
    report(ok && pipeline < 60.0 && mvox >= 50.0, "performance",
           "pipeline (synth 20x64^3 T=5, score 11 methods, eval) " + fmt("%.2f s", pipeline) +
               " (limit 60 s); entropy kernel " + fmt("%.1f Mvoxel/s", mvox) + " (need >= 50)" +
               (ok ? "" : "; pipeline error: " + err.str()));
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
