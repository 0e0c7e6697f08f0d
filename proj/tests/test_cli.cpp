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


#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "json.hpp"
#include "mock_provider.hpp"
#include "support.hpp"

namespace botscreen {
namespace {

using testing::slurp;
using testing::TempDir;
using testing::write_file;

struct Run {
  int exit = -1;
  std::string out;
  std::string err;
};

Run run(const TempDir& dir, const std::string& args) {
  std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  std::string cmd = std::string("'") + BOTSCREEN_CLI + "' " + args + " >'" + out + "' 2>'" + err + "'";
  int status = std::system(cmd.c_str());
  Run r;
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t count_lines(const std::string& text) {
  return std::size_t(std::count(text.begin(), text.end(), '\n'));
}

// stderr carries exactly one JSON object line naming the exit code.
void expect_error_line(const Run& r, int code, const std::string& kind) {
  EXPECT_EQ(r.exit, code) << r.err;
  ASSERT_EQ(count_lines(r.err), 1u) << r.err;
  auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("error"), kind);
  EXPECT_EQ(j.at("exit"), code);
  EXPECT_FALSE(j.at("message").get<std::string>().empty());
}

const char* kSmallSynth = R"([synthetic]
n_bot = 20
n_nonbot = 180
seed = 4
max_tweets_per_user = 30
)";

const char* kSmallPipeline = R"([pipeline]
seed = 2
threads = 2
[gbm]
n_estimators = 15
[cv]
max_depth = [1, 2]
min_samples_leaf = [1]
[lda]
iterations = 20
)";

TEST(Cli, SynthDefaultIsDeterministic) {
  TempDir dir;
  auto a = run(dir, "synth --seed 5 --out '" + dir.file("a") + "'");
  ASSERT_EQ(a.exit, 0) << a.err;
  EXPECT_NE(a.out.find("users=500 bot=20 non-bot=480"), std::string::npos) << a.out;
  auto b = run(dir, "synth --seed 5 --out '" + dir.file("b") + "'");
  ASSERT_EQ(b.exit, 0) << b.err;
  for (const char* f : {"users.jsonl", "tweets.jsonl", "scores.jsonl"}) {
    auto left = slurp(dir.file(std::string("a/") + f));
    EXPECT_FALSE(left.empty());
    EXPECT_EQ(left, slurp(dir.file(std::string("b/") + f))) << f;
  }
  EXPECT_EQ(count_lines(slurp(dir.file("a/users.jsonl"))), 500u);
  auto c = run(dir, "synth --seed 6 --out '" + dir.file("c") + "'");
  EXPECT_NE(slurp(dir.file("a/tweets.jsonl")), slurp(dir.file("c/tweets.jsonl")));
}

TEST(Cli, EmptyCohortIsAUsageError) {
  TempDir dir;
  write_file(dir.file("empty.toml"), "[synthetic]\nn_bot = 0\nn_nonbot = 0\n");
  auto r = run(dir, "synth --config '" + dir.file("empty.toml") + "' --out '" + dir.file("o") + "'");
  expect_error_line(r, 2, "usage");
}

TEST(Cli, ParseErrorsExitTwo) {
  TempDir dir;
  expect_error_line(run(dir, "train --system svm"), 2, "usage");
  expect_error_line(run(dir, "evaluate --tau 1.5"), 2, "usage");
  expect_error_line(run(dir, "frobnicate"), 2, "usage");
  EXPECT_EQ(run(dir, "--help").exit, 0);
}

TEST(Cli, MissingInputsExitThree) {
  TempDir dir;
  expect_error_line(run(dir, "featurize --out '" + dir.file("nothing") + "'"), 3, "data");
  expect_error_line(run(dir, "train --out '" + dir.file("nothing") + "'"), 3, "data");
  write_file(dir.file("users.jsonl"), "{\"user_id\":\"1\"}\nnot json\n");
  write_file(dir.file("tweets.jsonl"), "");
  auto r = run(dir, "fit-lda --out '" + dir.file("") + "'");
  expect_error_line(r, 3, "data");
}

TEST(Cli, EndToEndPipeline) {
  TempDir dir;
  write_file(dir.file("synth.toml"), kSmallSynth);
  write_file(dir.file("pipeline.toml"), kSmallPipeline);
  std::string out = " --out '" + dir.file("run") + "'";
  std::string cfg = " --config '" + dir.file("pipeline.toml") + "'";
  ASSERT_EQ(run(dir, "synth --config '" + dir.file("synth.toml") + "'" + out).exit, 0);

  // gbm-full refuses to featurize before the topic model exists.
  expect_error_line(run(dir, "featurize --system gbm-full" + cfg + out), 3, "data");

  auto lda = run(dir, "fit-lda" + cfg + out);
  ASSERT_EQ(lda.exit, 0) << lda.err;
  EXPECT_NE(lda.out.find("topics=5"), std::string::npos);
  auto feat = run(dir, "featurize --system gbm-full" + cfg + out);
  ASSERT_EQ(feat.exit, 0) << feat.err;
  EXPECT_NE(feat.out.find("rows=200 features=14"), std::string::npos) << feat.out;
  auto train = run(dir, "train --system gbm-full" + cfg + out);
  ASSERT_EQ(train.exit, 0) << train.err;
  auto report = nlohmann::json::parse(slurp(dir.file("run/cv_report.json")));
  EXPECT_EQ(report.at("grid").size(), 2u);
  auto eval = run(dir, "evaluate --system gbm-full" + cfg + out);
  ASSERT_EQ(eval.exit, 0) << eval.err;
  auto metrics = nlohmann::json::parse(slurp(dir.file("run/metrics.json")));
  EXPECT_EQ(metrics.at("test_rows"), 40);
  EXPECT_EQ(metrics.at("system"), "gbm-full");
  for (const char* cls : {"bot", "non_bot"}) {
    for (const char* k : {"p", "r", "f1"}) EXPECT_TRUE(metrics.at("per_class").at(cls).contains(k));
  }
  auto dist = run(dir, "dist" + cfg + out);
  ASSERT_EQ(dist.exit, 0) << dist.err;
  auto d = nlohmann::json::parse(slurp(dir.file("run/distributions.json")));
  EXPECT_EQ(d.at("features").size(), 14u);

  // Fixed-threshold evaluation needs no trained model.
  std::string tout = " --out '" + dir.file("threshold") + "'";
  ASSERT_EQ(run(dir, "synth --config '" + dir.file("synth.toml") + "'" + tout).exit, 0);
  ASSERT_EQ(run(dir, "featurize --system botometer-threshold" + cfg + tout).exit, 0);
  auto fixed = run(dir, "evaluate --system botometer-threshold --tau 0.47" + cfg + tout);
  ASSERT_EQ(fixed.exit, 0) << fixed.err;
  EXPECT_NE(fixed.out.find("system=botometer-threshold test=40"), std::string::npos) << fixed.out;
}

TEST(Cli, KappaOfFileWithItselfIsOne) {
  TempDir dir;
  write_file(dir.file("a.csv"), "user_id,label\n1,bot\n2,non-bot\n3,bot\n4,non-bot\n");
  write_file(dir.file("b.csv"), "user_id,label\n1,bot\n2,bot\n3,bot\n4,non-bot\n5,bot\n");
  auto r = run(dir, "kappa '" + dir.file("a.csv") + "' '" + dir.file("a.csv") + "'");
  ASSERT_EQ(r.exit, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("kappa"), 1.0);
  auto ab = run(dir, "kappa '" + dir.file("a.csv") + "' '" + dir.file("b.csv") + "' --out '" + dir.file("k") + "'");
  ASSERT_EQ(ab.exit, 0) << ab.err;
  auto j = nlohmann::json::parse(slurp(dir.file("k/kappa.json")));
  EXPECT_EQ(j.at("n"), 4);
  EXPECT_EQ(j.at("only_in_second"), 1);
  EXPECT_NEAR(j.at("kappa").get<double>(), 0.5, 1e-12);
  write_file(dir.file("bad.csv"), "user_id,label\n1,bot,extra\n");
  expect_error_line(run(dir, "kappa '" + dir.file("bad.csv") + "' '" + dir.file("a.csv") + "'"), 3, "data");
}

TEST(Cli, FetchScores) {
  testing::MockProvider mock;
  TempDir dir;
  write_file(dir.file("users.jsonl"),
             "{\"user_id\":\"1\",\"screen_name\":\"a\",\"label\":\"bot\"}\n"
             "{\"user_id\":\"2\",\"screen_name\":\"b\",\"label\":\"non-bot\"}\n");
  mock.score("1", 0.8);
  mock.score("2", 0.1);
  write_file(dir.file("p.toml"), "[provider]\nendpoint = \"" + mock.endpoint() + "\"\nmax_retries = 0\n");
  std::string args = " --config '" + dir.file("p.toml") + "' --out '" + dir.file("") + "'";
  auto r = run(dir, "fetch-scores" + args);
  ASSERT_EQ(r.exit, 0) << r.err;
  EXPECT_NE(r.out.find("ok=2 cached=0"), std::string::npos) << r.out;
  EXPECT_EQ(count_lines(slurp(dir.file("scores.jsonl"))), 2u);
  auto again = run(dir, "fetch-scores" + args);
  EXPECT_NE(again.out.find("ok=0 cached=2 invalid-response=0 unavailable=0 requests=0"), std::string::npos)
      << again.out;
  EXPECT_EQ(mock.requests(), 2u);

  TempDir down;
  write_file(down.file("users.jsonl"), slurp(dir.file("users.jsonl")));
  std::string endpoint;
  {
    testing::MockProvider gone;
    endpoint = gone.endpoint();
  }
  write_file(down.file("p.toml"), "[provider]\nendpoint = \"" + endpoint + "\"\nmax_retries = 0\n");
  auto dead = run(down, "fetch-scores --config '" + down.file("p.toml") + "' --out '" + down.file("") + "'");
  expect_error_line(dead, 4, "provider");
}

}  // namespace
}  // namespace botscreen
