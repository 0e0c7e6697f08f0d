// Copyright 2026 The botscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "CLI11.hpp"
#include "botscreen.hpp"
#include "support.hpp"

using namespace botscreen;

namespace {

// Gibbs sweeps for the 5,000-user topic model.
constexpr std::size_t kAcceptanceLdaIterations = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. Table arithmetic ---------------------------------------------------------

struct PublishedRow {
  const char* name;
  double p[3], r[3], f1[3];  // non-bot, bot, average
};

constexpr PublishedRow kTable[] = {
    {"Botometer Default", {0.974, 0.276, 0.625}, {0.919, 0.542, 0.730}, {0.945, 0.361, 0.653}},
    {"GB Botometer score", {0.963, 0.285, 0.624}, {0.962, 0.288, 0.625}, {0.962, 0.286, 0.624}},
    {"GB Botometer score + features", {0.985, 0.678, 0.831}, {0.982, 0.724, 0.853}, {0.984, 0.700, 0.842}},
};

Outcome criterion_1() {
  constexpr double kTol = 0.0005 + 1e-12;
  Outcome o;
  for (const auto& row : kTable) {
    ClassMetrics m = combine(prf_from(row.p[0], row.r[0]), prf_from(row.p[1], row.r[1]));
    const char* cls[] = {"non-bot", "bot"};
    double f1[] = {m.non_bot.f1, m.bot.f1};
    for (int c = 0; c < 2; ++c) {
      o.require(std::abs(f1[c] - row.f1[c]) <= kTol,
                std::string(row.name) + " " + cls[c] + " F1 " + fmt("%.5f vs published %.3f", f1[c], row.f1[c]));
    }
    double mp = (row.p[0] + row.p[1]) / 2, mr = (row.r[0] + row.r[1]) / 2, mf = (row.f1[0] + row.f1[1]) / 2;
    o.require(std::abs(mp - row.p[2]) <= kTol, std::string(row.name) + fmt(" macro P %.5f vs %.3f", mp, row.p[2]));
    o.require(std::abs(mr - row.r[2]) <= kTol, std::string(row.name) + fmt(" macro R %.5f vs %.3f", mr, row.r[2]));
    o.require(std::abs(mf - row.f1[2]) <= kTol, std::string(row.name) + fmt(" macro F1 %.5f vs %.3f", mf, row.f1[2]));
  }
  if (o.pass) o.detail = "all F1 and macro cells within 0.0005";
  return o;
}

// 2. Direction of improvement on synthetic data -------------------------------

Outcome criterion_2() {
  Outcome o;
  SyntheticConfig sc = load_synthetic_config(std::string(BOTSCREEN_CONFIG_DIR) + "/synth.toml");
  SyntheticCohort synth = generate_synthetic(sc);
  std::unordered_map<std::string, BotometerScore> scores;
  for (std::size_t i = 0; i < synth.cohort.size(); ++i) {
    const auto& id = synth.cohort.users()[i].user_id;
    scores[id] = {id, synth.scores[i], sc.start, ScoreSource::file};
  }
  PipelineConfig base;
  base.seed = 7;
  base.lda.iterations = kAcceptanceLdaIterations;

  std::map<System, double> bot_f1;
  std::optional<TopicModel> topics;
  for (System system : kAllSystems) {
    PipelineConfig c = base;
    c.system = system;
    if (system == System::gbm_full) topics = fit_topic_model(synth.cohort, c);
    FeatureTable table = featurize(synth.cohort, scores, topics ? &*topics : nullptr, system);
    TrainResult trained = train_system(table, c);
    if (system == System::botometer_threshold) c.tau.reset();
    EvaluationResult result = evaluate_system(table, trained.model, c);
    bot_f1[system] = result.metrics.bot.f1;
    if (result.test_rows != 1000) o.require(false, "held-out split is not 1000 users");
  }
  double full = bot_f1[System::gbm_full];
  double only = bot_f1[System::gbm_botometer_only];
  double thr = bot_f1[System::botometer_threshold];
  o.require(full - only >= 0.15, fmt("gbm-full minus gbm-botometer %.3f < 0.15", full - only));
  o.require(full - thr >= 0.10, fmt("gbm-full minus threshold %.3f < 0.10", full - thr));
  std::string summary = fmt("bot F1: threshold %.3f, gbm-botometer %.3f, ", thr, only) + fmt("gbm-full %.3f", full);
  o.detail = o.detail.empty() ? summary : summary + "; " + o.detail;
  return o;
}

// 3. GBM oracles ----------------------------------------------------------------

struct Dataset {
  Matrix x;
  std::vector<Label> y;
};

Dataset gbm_dataset(int kind, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{Matrix(0, 3), {}};
  for (int i = 0; i < 400; ++i) {
    double a = rng.normal(), b = rng.normal(), c = double(rng.below(5));
    bool bot = false;
    switch (kind) {
      case 0: bot = 0.8 * a - 0.6 * b > 0; break;                       // separable
      case 1: bot = rng.bernoulli(a > 0.5 ? 0.7 : 0.1); break;          // noisy
      case 2: bot = (a > 0) != (b > 0); break;                          // interaction
      default: bot = rng.bernoulli(0.05 + 0.1 * (c > 2)); break;       // imbalanced
    }
    d.x.append_row(std::vector<double>{a, b, c});
    d.y.push_back(bot ? Label::bot : Label::non_bot);
  }
  return d;
}

Outcome criterion_3() {
  Outcome o;
  Rng rng(2024);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    int y = rng.bernoulli(0.5) ? 1 : -1;
    double f = rng.uniform(-10.0, 10.0), h = 1e-6;
    double fd = -(exponential_loss(y, f + h) - exponential_loss(y, f - h)) / (2 * h);
    double g = neg_gradient(y, f);
    worst = std::max(worst, std::abs(fd - g) / std::abs(g));
  }
  o.require(worst <= 1e-5, fmt("finite-difference relative error %.3g", worst));

  Matrix x(0, 1);
  for (double v : {1.0, 2.0, 3.0, 4.0}) x.append_row(std::vector<double>{v});
  std::vector<Label> y{Label::non_bot, Label::non_bot, Label::bot, Label::bot};
  GbmModel stump = fit_gbm(x, y, {1, 0.1, 1, 1, 0});
  const auto& root = stump.trees.at(0).nodes().at(0);
  o.require(root.feature == 0 && root.threshold == 2.5, "stump does not split at 2.5");
  for (std::size_t i = 0; i < 4; ++i) {
    o.require(predict_label(stump, x.row(i)) == y[i], "stump partition differs on the 4-point example");
  }

  for (int kind = 0; kind < 4; ++kind) {
    Dataset d = gbm_dataset(kind, 100 + std::uint64_t(kind));
    double prev = INFINITY;
    bool monotone = true;
    auto model = fit_gbm(d.x, d.y, {200, 0.1, 3, 1, 0}, [&](std::size_t, double loss) {
      if (loss > prev * (1 + 1e-12)) monotone = false;
      prev = loss;
    });
    o.require(monotone, "training loss increased on dataset " + std::to_string(kind));
    model.schema = {"acceptance", {"a", "b", "c"}};
    auto back = gbm_from_json(nlohmann::json::parse(to_json(model).dump()));
    for (std::size_t i = 0; i < d.x.rows(); ++i) {
      double m1 = predict_margin(model, d.x.row(i)), m2 = predict_margin(back, d.x.row(i));
      if (std::memcmp(&m1, &m2, sizeof m1) != 0) {
        o.require(false, "round-tripped model margin differs on dataset " + std::to_string(kind));
        break;
      }
    }
  }
  if (o.pass) o.detail = fmt("max FD rel err %.2g; stump at 2.5; loss monotone on 4 datasets; bitwise round trip", worst);
  return o;
}

// 4. SMOTE properties ----------------------------------------------------------

Outcome criterion_4() {
  Outcome o;
  Rng rng(404);
  std::size_t synthetic_rows = 0;
  for (int trial = 0; trial < 60 && o.pass; ++trial) {
    std::size_t k = 1 + rng.below(6), dims = 1 + rng.below(8);
    std::size_t minority = k + 1 + rng.below(30), majority = minority + rng.below(400);
    Matrix x(0, dims);
    std::vector<Label> y;
    for (std::size_t i = 0; i < minority + majority; ++i) {
      bool bot = i < minority;
      std::vector<double> row(dims);
      for (double& v : row) v = rng.normal() * 2 + (bot ? 1.0 : 0.0);
      x.append_row(row);
      y.push_back(bot ? Label::bot : Label::non_bot);
    }
    double ratio = rng.bernoulli(0.5) ? 1.0 : rng.uniform(0.05, 1.0);
    SmoteConfig cfg{k, ratio, rng.next()};
    SmoteResult r = smote_rebalance(x, y, cfg);
    SmoteResult again = smote_rebalance(x, y, cfg);
    o.require(r.x == again.x && r.y == again.y, "fixed seed gave different output");
    std::size_t wanted = std::size_t(std::ceil(ratio * double(majority) - 1e-9));
    std::size_t expected = wanted > minority ? wanted - minority : 0;
    o.require(r.origins.size() == expected && r.x.rows() == x.rows() + expected,
              "augmented count does not match the target-ratio formula");
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (std::memcmp(r.x.row(i).data(), x.row(i).data(), dims * sizeof(double)) != 0 || r.y[i] != y[i]) {
        o.require(false, "original row changed");
        break;
      }
    }
    for (std::size_t s = 0; s < r.origins.size(); ++s) {
      const auto& org = r.origins[s];
      auto row = r.x.row(x.rows() + s);
      auto a = x.row(org.parent_a), b = x.row(org.parent_b);
      bool ok = y[org.parent_a] == Label::bot && y[org.parent_b] == Label::bot && org.u >= 0 && org.u <= 1 &&
                r.y[x.rows() + s] == Label::bot;
      for (std::size_t j = 0; j < dims; ++j) {
        ok = ok && std::abs(row[j] - ((1 - org.u) * a[j] + org.u * b[j])) <= 1e-9 &&
             row[j] >= std::min(a[j], b[j]) - 1e-9 && row[j] <= std::max(a[j], b[j]) + 1e-9;
      }
      o.require(ok, "synthetic row fails convexity/betweenness");
      if (!ok) break;
    }
    synthetic_rows += r.origins.size();
  }
  if (o.pass) o.detail = "60 random cases, " + std::to_string(synthetic_rows) + " synthetic rows checked";
  return o;
}

// 5. LDA -------------------------------------------------------------------------

Outcome criterion_5() {
  Outcome o;
  auto corpus = testing::planted_two_topics(300, 20, 25, 11);
  LdaParams p;
  p.topics = 2;
  p.iterations = 200;
  p.seed = 13;
  std::size_t sweeps = 0;
  bool conserved = true;
  TopicModel m = fit_lda(corpus.docs, p, [&](std::size_t, const LdaSampler& s) {
    ++sweeps;
    std::int64_t by_doc = 0, by_word = 0, by_topic = 0;
    std::size_t assigned = 0;
    for (std::size_t d = 0; d < s.assignments().size(); ++d) {
      assigned += s.assignments()[d].size();
      for (std::size_t k = 0; k < s.topics(); ++k) by_doc += s.doc_topic(d, k);
    }
    for (std::size_t k = 0; k < s.topics(); ++k) {
      by_topic += s.topic_total(k);
      for (std::size_t w = 0; w < s.vocab_size(); ++w) by_word += s.topic_word(k, w);
    }
    auto n = std::int64_t(s.token_count());
    conserved = conserved && std::int64_t(assigned) == n && by_doc == n && by_word == n && by_topic == n;
  });
  o.require(sweeps == 200 && conserved, "token-assignment counts not conserved every sweep");
  double phi_err = 0;
  for (std::size_t k = 0; k < m.topics; ++k) {
    double sum = 0;
    for (std::size_t w = 0; w < m.vocab_size(); ++w) sum += m.word_prob(k, w);
    phi_err = std::max(phi_err, std::abs(sum - 1));
  }
  double theta_err = 0;
  for (const auto& doc : corpus.docs) {
    auto theta = infer_theta(m, doc);
    double sum = 0;
    for (double t : theta) sum += t;
    theta_err = std::max(theta_err, std::abs(sum - 1));
  }
  o.require(phi_err <= 1e-9, fmt("phi row sum error %.3g", phi_err));
  o.require(theta_err <= 1e-9, fmt("theta sum error %.3g", theta_err));
  auto [purity, topic_a] = testing::planted_purity(m, corpus);
  o.require(purity >= 0.9, fmt("planted purity %.3f < 0.9", purity));
  TopicModel again = fit_lda(corpus.docs, p);
  o.require(to_json(again).dump() == to_json(m).dump(), "same seed gave a different model");
  if (o.pass) o.detail = fmt("purity %.3f, phi err %.2g, theta err %.2g", purity, phi_err, theta_err);
  return o;
}

// 6. Threshold calibration -------------------------------------------------------

Outcome criterion_6() {
  Outcome o;
  Rng rng(6);
  std::vector<double> scores;
  std::vector<Label> labels;
  for (int i = 0; i < 400; ++i) {
    bool bot = i < 20;
    scores.push_back(bot ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.45));
    labels.push_back(bot ? Label::bot : Label::non_bot);
  }
  auto cal = calibrate_threshold(scores, labels, 5, default_tau_grid(), 1);
  double best_f1 = 0;
  for (const auto& c : cal.candidates) {
    if (c.tau == cal.best.tau) best_f1 = c.mean_bot_f1;
  }
  o.require(best_f1 == 1.0, fmt("separable case: CV bot F1 %.4f at tau %.2f", best_f1, cal.best.tau));
  auto single = calibrate_threshold(scores, labels, 5, {0.47}, 1);
  o.require(single.best.tau == 0.47, "singleton grid did not return 0.47");
  if (o.pass) o.detail = fmt("separable tau %.2f with CV bot F1 1.0; singleton grid 0.47", cal.best.tau);
  return o;
}

// 7. Kappa -------------------------------------------------------------------------

Outcome criterion_7() {
  Outcome o;
  std::vector<std::string> a, b;
  auto add = [&](const char* x, const char* y, int n) {
    a.insert(a.end(), std::size_t(n), x);
    b.insert(b.end(), std::size_t(n), y);
  };
  add("bot", "bot", 40);
  add("bot", "non-bot", 5);
  add("non-bot", "bot", 10);
  add("non-bot", "non-bot", 45);
  double k = cohen_kappa(a, b).kappa;
  o.require(std::abs(k - 0.7) <= 1e-12, fmt("2x2 kappa %.15f", k));
  o.require(cohen_kappa(a, a).kappa == 1.0, "self-agreement is not 1");
  Rng rng(7);
  std::vector<std::string> cats{"a", "b", "c"}, ra, rb;
  for (int i = 0; i < 10000; ++i) {
    ra.push_back(cats[rng.below(3)]);
    rb.push_back(cats[rng.below(3)]);
  }
  double kr = cohen_kappa(ra, rb).kappa;
  o.require(std::abs(kr) <= 0.05, fmt("random kappa %.4f", kr));
  if (o.pass) o.detail = fmt("2x2 %.6f, self 1, random %.4f", k, kr);
  return o;
}

// 8. Split and fold stratification ------------------------------------------------

Outcome criterion_8() {
  Outcome o;
  Rng rng(8);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 5;
    std::size_t bots = k + rng.below(200), non_bots = k + rng.below(2000);
    std::vector<Label> y(bots, Label::bot);
    y.insert(y.end(), non_bots, Label::non_bot);
    rng.shuffle(y);
    auto folds = stratified_folds(y, k, rng.next());
    for (Label c : {Label::bot, Label::non_bot}) {
      double exact = double(c == Label::bot ? bots : non_bots) / double(k);
      std::vector<std::size_t> count(k, 0);
      for (std::size_t i = 0; i < y.size(); ++i) count[folds[i]] += y[i] == c;
      for (auto n : count) worst = std::max(worst, std::abs(double(n) - exact));
    }
  }
  o.require(worst < 1.0, fmt("fold count deviates %.3f from exact proportion", worst));
  std::vector<Label> cohort(413, Label::bot);
  cohort.insert(cohort.end(), 8262 - 413, Label::non_bot);
  Rng(9).shuffle(cohort);
  auto in_train = stratified_membership(cohort, {0.8, 1});
  auto test = std::size_t(std::count(in_train.begin(), in_train.end(), false));
  o.require(test == 1652, "8262-user cohort gives " + std::to_string(test) + " test users");
  if (o.pass) o.detail = fmt("max fold deviation %.2f; 8262 users -> %.0f test", worst, double(test));
  return o;
}

// 9. Leakage guard -----------------------------------------------------------------

struct RowTracker : CvObserver {
  std::mutex mu;
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::size_t>> seen, held;
  void note(std::size_t c, std::size_t f, std::span<const std::size_t> rows) {
    std::lock_guard lock(mu);
    seen[{c, f}].insert(rows.begin(), rows.end());
  }
  void standardization_fit(std::size_t c, std::size_t f, std::span<const std::size_t> rows) override { note(c, f, rows); }
  void smote_fit(std::size_t c, std::size_t f, std::span<const std::size_t> rows,
                 std::span<const std::size_t> parents) override {
    note(c, f, rows);
    note(c, f, parents);
  }
  void model_fit(std::size_t c, std::size_t f, std::span<const std::size_t> rows) override { note(c, f, rows); }
  void evaluated(std::size_t c, std::size_t f, std::span<const std::size_t> rows) override {
    std::lock_guard lock(mu);
    held[{c, f}].insert(rows.begin(), rows.end());
  }
};

Outcome criterion_9() {
  Outcome o;
  Rng rng(99);
  Matrix x(0, 4);
  std::vector<Label> y;
  for (int i = 0; i < 600; ++i) {
    bool bot = rng.bernoulli(0.08);
    x.append_row(std::vector<double>{rng.normal() + bot, rng.normal(), rng.normal() - bot, rng.uniform()});
    y.push_back(bot ? Label::bot : Label::non_bot);
  }
  FeatureSchema schema{"acceptance", {"a", "b", "c", "d"}};
  std::vector<GbmConfig> grid{{20, 0.1, 1, 1, 0}, {20, 0.1, 3, 5, 0}};
  CvOptions opt{5, 3, true, {5, 1.0, 4}, 0};
  RowTracker tracker;
  cross_validate(x, y, schema, grid, opt, &tracker);
  auto folds = stratified_folds(y, 5, 3);
  std::size_t cells = 0;
  for (const auto& [key, held] : tracker.held) {
    ++cells;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if ((folds[i] == key.second) != (held.count(i) == 1)) o.require(false, "validation rows differ from fold");
    }
    for (std::size_t r : tracker.seen[key]) {
      if (held.count(r)) {
        o.require(false, "row " + std::to_string(r) + " of fold " + std::to_string(key.second) + " reached fitting");
        break;
      }
    }
  }
  o.require(cells == 10, "expected 10 instrumented cells");

  // Perturbing fold 0's rows leaves the fold-0 model unchanged.
  Matrix perturbed = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (folds[i] == 0) perturbed(i, 0) += 100 * rng.normal();
  }
  auto report = cross_validate(perturbed, y, schema, {grid[0]}, opt);
  std::vector<std::size_t> train, valid;
  for (std::size_t i = 0; i < y.size(); ++i) (folds[i] == 0 ? valid : train).push_back(i);
  std::vector<Label> ty, vy;
  for (auto i : train) ty.push_back(y[i]);
  for (auto i : valid) vy.push_back(y[i]);
  auto direct = fit_classifier(x.select_rows(train), ty, schema, grid[0], true, opt.smote);
  auto expected = confusion(vy, predict_labels(direct.model, perturbed.select_rows(valid)));
  o.require(report.cells[0].confusion == expected, "perturbing validation rows changed the fitted model");
  if (o.pass) o.detail = "10 cells tracked, no validation row reached standardization, SMOTE or trees";
  return o;
}

struct Criterion {
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"published table arithmetic", 1, criterion_1},
      {"synthetic direction of improvement", 300, criterion_2},
      {"gbm oracles", 60, criterion_3},
      {"smote properties", 30, criterion_4},
      {"lda suite", 60, criterion_5},
      {"threshold calibration", 10, criterion_6},
      {"cohen kappa", 5, criterion_7},
      {"split and fold stratification", 10, criterion_8},
      {"cross-validation leakage guard", 60, criterion_9},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && std::size_t(only) != i + 1) continue;
    const auto& c = criteria[i];
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_seconds, fmt("runtime %.1f s over the %.0f s budget", secs, c.budget_seconds));
    std::printf("criterion %zu %s: %s (%s) [%.2f s]\n", i + 1, c.title, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
