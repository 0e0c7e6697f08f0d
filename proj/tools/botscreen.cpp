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

// botscreen: command-line pipeline for social-bot screening.
//
//   botscreen synth        --config synth.toml --out run/
//   botscreen fit-lda      --config pipeline.toml --out run/
//   botscreen fetch-scores --config pipeline.toml --out run/
//   botscreen featurize    --system gbm-full --out run/
//   botscreen train        --system gbm-full --out run/
//   botscreen evaluate     --out run/
//   botscreen kappa a.csv b.csv
//   botscreen dist         --out run/
//
// Exit codes: 0 success, 2 usage, 3 data/schema, 4 provider. Failures print
// one JSON line on stderr: {"error":"<kind>","exit":<code>,"message":"..."}.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "botscreen.hpp"

namespace fs = std::filesystem;
using namespace botscreen;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string system;
  std::optional<double> tau;
  std::optional<std::size_t> threads;
};

PipelineConfig resolve(const CommonFlags& flags) {
  PipelineConfig c = flags.config.empty() ? PipelineConfig{} : load_pipeline_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (!flags.out.empty()) c.paths.out_dir = flags.out;
  if (!flags.system.empty()) c.system = parse_system(flags.system);
  if (flags.tau) c.tau = *flags.tau;
  if (flags.threads) c.threads = *flags.threads;
  return c;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
}

std::ofstream open_output(const std::string& path) {
  auto parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

std::string out_file(const PipelineConfig& c, const char* name) {
  return (fs::path(c.paths.out_dir) / name).string();
}

int cmd_synth(const CommonFlags& flags) {
  SyntheticConfig config =
      flags.config.empty() ? default_synthetic_config() : load_synthetic_config(flags.config);
  if (flags.seed) config.seed = *flags.seed;
  std::string dir = flags.out.empty() ? "." : flags.out;
  SyntheticCohort synth = generate_synthetic(config);
  ensure_dir(dir);
  {
    auto out = open_output((fs::path(dir) / "users.jsonl").string());
    write_users(out, synth.cohort);
  }
  {
    auto out = open_output((fs::path(dir) / "tweets.jsonl").string());
    write_tweets(out, synth.cohort);
  }
  {
    auto out = open_output((fs::path(dir) / "scores.jsonl").string());
    for (std::size_t i = 0; i < synth.cohort.size(); ++i) {
      BotometerScore s{synth.cohort.users()[i].user_id, synth.scores[i], config.start,
                       ScoreSource::file};
      out << to_json(s).dump() << '\n';
    }
  }
  std::cout << "users=" << synth.cohort.size() << " bot=" << config.n_bot
            << " non-bot=" << config.n_nonbot << " tweets=" << synth.cohort.tweet_count() << '\n';
  return 0;
}

Cohort load_inputs(const PipelineConfig& c) {
  TweetLoadReport report;
  Cohort cohort = load_cohort(c.users_path(), c.tweets_path(), &report);
  if (report.orphans > 0) std::cerr << "note: " << report.orphans << " tweets without a user were skipped\n";
  return cohort;
}

int cmd_fit_lda(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  Cohort cohort = load_inputs(c);
  TopicModel model = fit_topic_model(cohort, c);
  write_json(c.lda_path(), to_json(model));
  std::cout << "topics=" << model.topics << " vocabulary=" << model.vocab_size()
            << " iterations=" << model.iterations << '\n';
  return 0;
}

int cmd_fetch_scores(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  Cohort cohort = load_users(c.users_path());
  std::vector<std::string> ids;
  for (const auto& u : cohort.users()) ids.push_back(u.user_id);
  ProviderConfig provider = c.provider_config();
  auto parent = fs::path(provider.cache_path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  FetchReport report = fetch_scores(provider, ids);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& o : report.outcomes) ++counts[std::size_t(o.status)];
  std::cout << "ok=" << counts[0] << " cached=" << counts[1] << " invalid-response=" << counts[2]
            << " unavailable=" << counts[3] << " requests=" << report.requests << '\n';
  if (!ids.empty() && counts[0] + counts[1] == 0) {
    throw ProviderError("no scores retrieved from " + provider.endpoint);
  }
  return 0;
}

int cmd_featurize(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  Cohort cohort = load_inputs(c);
  auto scores = load_scores(c.scores_path());
  std::optional<TopicModel> topics;
  if (c.system == System::gbm_full) {
    if (!fs::exists(c.lda_path())) {
      throw DataError("gbm-full features need an LDA model; '" + c.lda_path() +
                      "' does not exist (run fit-lda first)");
    }
    topics = load_topic_model(c.lda_path());
  }
  FeatureTable table = featurize(cohort, scores, topics ? &*topics : nullptr, c.system, c.threads);
  auto out = open_output(c.features_path());
  write_features_csv(out, table);
  std::cout << "rows=" << table.rows() << " features=" << table.schema.size()
            << " schema=" << table.schema.version << '\n';
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  FeatureTable table = load_features_csv(c.features_path());
  TrainResult result = train_system(table, c);
  write_json(c.model_path(), to_json(result.model));
  write_json(out_file(c, "cv_report.json"), result.cv_report);
  std::cout << "system=" << to_string(c.system);
  if (const auto* tm = std::get_if<ThresholdModel>(&result.model)) {
    std::cout << " tau=" << tm->threshold.tau;
  } else {
    const auto& m = std::get<GbmModel>(result.model);
    std::cout << " max_depth=" << m.config.max_depth
              << " min_samples_leaf=" << m.config.min_samples_leaf << " trees=" << m.trees.size();
  }
  std::cout << '\n';
  return 0;
}

int cmd_evaluate(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  FeatureTable table = load_features_csv(c.features_path());
  TrainedModel model;
  System system = c.system;
  if (c.system == System::botometer_threshold && c.tau && !fs::exists(c.model_path())) {
    model = ThresholdModel{Threshold(*c.tau)};
  } else {
    model = load_trained_model(c.model_path());
    if (std::holds_alternative<ThresholdModel>(model)) {
      system = System::botometer_threshold;
    } else if (system == System::botometer_threshold) {
      system = std::get<GbmModel>(model).schema.topic_count() > 0 ? System::gbm_full
                                                                 : System::gbm_botometer_only;
    }
  }
  EvaluationResult result = evaluate_system(table, model, c);
  write_json(out_file(c, "metrics.json"), result.to_json(system));
  std::printf("system=%s test=%zu bot_f1=%.3f non_bot_f1=%.3f macro_f1=%.3f\n",
              std::string(to_string(system)).c_str(), result.test_rows,
              result.metrics.bot.f1, result.metrics.non_bot.f1, result.metrics.macro.f1);
  return 0;
}

int cmd_kappa(const CommonFlags& flags, const std::string& a, const std::string& b) {
  auto joined = join_annotations(load_annotations(a), load_annotations(b));
  KappaReport report = cohen_kappa(joined.a, joined.b);
  nlohmann::ordered_json j = to_json(report);
  j["only_in_first"] = joined.only_a;
  j["only_in_second"] = joined.only_b;
  if (!flags.out.empty()) write_json((fs::path(flags.out) / "kappa.json").string(), j);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_dist(const CommonFlags& flags) {
  PipelineConfig c = resolve(flags);
  FeatureTable table = load_features_csv(c.features_path());
  auto dists = class_distributions(table.x, table.labels, table.schema.names);
  nlohmann::ordered_json j;
  j["schema"] = table.schema.version;
  j["features"] = to_json(dists);
  write_json(out_file(c, "distributions.json"), j);
  std::cout << "features=" << dists.size() << " rows=" << table.rows() << '\n';
  return 0;
}

int fail(const char* kind, int code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["exit"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-bot screening pipeline"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  CommonFlags flags;
  app.add_option("--config", flags.config, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Master seed (overrides the config)");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--system", flags.system, "botometer-threshold | gbm-botometer | gbm-full")
      ->check(CLI::IsMember({"botometer-threshold", "gbm-botometer", "gbm-full"}));
  app.add_option("--tau", flags.tau, "Score threshold for botometer-threshold")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--threads", flags.threads, "Worker threads (0 = hardware)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  auto* fit_lda_cmd = app.add_subcommand("fit-lda", "Fit the topic model on training users");
  auto* fetch = app.add_subcommand("fetch-scores", "Fetch bot scores from the provider");
  auto* featurize_cmd = app.add_subcommand("featurize", "Write features.csv");
  auto* train = app.add_subcommand("train", "Select and fit a classifier");
  auto* evaluate = app.add_subcommand("evaluate", "Score the held-out split");
  auto* kappa = app.add_subcommand("kappa", "Agreement between two annotation files");
  auto* dist = app.add_subcommand("dist", "Per-class feature distributions");
  std::string kappa_a, kappa_b;
  kappa->add_option("first", kappa_a, "Annotations CSV (user_id,label)")->required();
  kappa->add_option("second", kappa_b, "Annotations CSV (user_id,label)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("usage", 2, e.what());
  }

  try {
    if (synth->parsed()) return cmd_synth(flags);
    if (fit_lda_cmd->parsed()) return cmd_fit_lda(flags);
    if (fetch->parsed()) return cmd_fetch_scores(flags);
    if (featurize_cmd->parsed()) return cmd_featurize(flags);
    if (train->parsed()) return cmd_train(flags);
    if (evaluate->parsed()) return cmd_evaluate(flags);
    if (kappa->parsed()) return cmd_kappa(flags, kappa_a, kappa_b);
    if (dist->parsed()) return cmd_dist(flags);
  } catch (const UsageError& e) {
    return fail("usage", 2, e.what());
  } catch (const DataError& e) {
    return fail("data", 3, e.what());
  } catch (const ProviderError& e) {
    return fail("provider", 4, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail("data", 3, e.what());
  } catch (const std::exception& e) {
    return fail("internal", 1, e.what());
  }
  return fail("usage", 2, "no command given");
}
