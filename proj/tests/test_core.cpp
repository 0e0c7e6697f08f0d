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

#include <cmath>
#include <set>

#include "botscreen/core.hpp"

namespace botscreen {
namespace {

TEST(Label, WireSpellingRoundTrips) {
  for (Label l : {Label::bot, Label::non_bot, Label::unavailable}) {
    EXPECT_EQ(parse_label(to_string(l)), l);
  }
  EXPECT_EQ(to_string(Label::non_bot), "non-bot");
  EXPECT_FALSE(parse_label("robot"));
  EXPECT_FALSE(parse_label("non_bot"));
}

TEST(Label, SignsAndBinary) {
  EXPECT_EQ(to_sign(Label::bot), 1);
  EXPECT_EQ(to_sign(Label::non_bot), -1);
  EXPECT_THROW(to_sign(Label::unavailable), DataError);
  EXPECT_TRUE(is_binary(Label::bot));
  EXPECT_FALSE(is_binary(Label::unlabeled));
}

TEST(Timestamp, ParsesAndFormats) {
  auto t = parse_timestamp("2019-01-01T00:00:00Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, 1546300800);
  EXPECT_EQ(format_timestamp(*t), "2019-01-01T00:00:00Z");
  auto leap = parse_timestamp("2020-02-29T23:59:59Z");
  ASSERT_TRUE(leap);
  EXPECT_EQ(format_timestamp(*leap), "2020-02-29T23:59:59Z");
}

TEST(Timestamp, RejectsMalformed) {
  for (const char* bad : {"", "2019-01-01", "2019-01-01 00:00:00Z", "2019-13-01T00:00:00Z",
                          "2019-02-30T00:00:00Z", "2019-01-01T24:00:00Z",
                          "2019-01-01T00:00:00", "2019-01-01T00:00:00+01:00",
                          "20x9-01-01T00:00:00Z"}) {
    EXPECT_FALSE(parse_timestamp(bad)) << bad;
  }
}

TEST(Timestamp, UtcDayFloorsNegativeTimes) {
  EXPECT_EQ(utc_day(0), 0);
  EXPECT_EQ(utc_day(86399), 0);
  EXPECT_EQ(utc_day(86400), 1);
  EXPECT_EQ(utc_day(-1), -1);
  EXPECT_EQ(format_timestamp(-1), "1969-12-31T23:59:59Z");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, SubstreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(substream_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(substream_seed(7, 3), substream_seed(7, 3));
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng rng(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++hist[rng.below(7)];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  for (int i = 0; i < 1000; ++i) {
    auto v = rng.between(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
  }
}

TEST(Rng, DistributionMoments) {
  Rng rng(5);
  const int n = 200000;
  double sn = 0, sn2 = 0, sg = 0, sb = 0, sp = 0, sp_big = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sg += rng.gamma(2.5);
    sb += rng.beta(2.0, 6.0);
    sp += double(rng.poisson(3.0));
    sp_big += double(rng.poisson(60.0));
  }
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
  EXPECT_NEAR(sg / n, 2.5, 0.03);
  EXPECT_NEAR(sb / n, 0.25, 0.005);
  EXPECT_NEAR(sp / n, 3.0, 0.03);
  EXPECT_NEAR(sp_big / n, 60.0, 0.2);
}

TEST(Rng, SmallShapeGammaIsPositive) {
  Rng rng(9);
  double sum = 0;
  for (int i = 0; i < 50000; ++i) {
    double g = rng.gamma(0.5);
    ASSERT_GT(g, 0.0);
    sum += g;
  }
  EXPECT_NEAR(sum / 50000, 0.5, 0.02);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto w = v;
  rng.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Matrix, AppendSelectAndCompare) {
  Matrix m(0, 2);
  m.append_row(std::vector<double>{1, 2});
  m.append_row(std::vector<double>{3, 4});
  m.append_row(std::vector<double>{5, 6});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m(1, 1), 4);
  EXPECT_THROW(m.append_row(std::vector<double>{1}), UsageError);
  std::vector<std::size_t> pick{2, 0};
  Matrix s = m.select_rows(pick);
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_EQ(s(0, 0), 5);
  EXPECT_EQ(s(1, 1), 2);
  EXPECT_TRUE(m == m);
  EXPECT_FALSE(m == s);
}

TEST(Stats, PopulationMomentsAndMedian) {
  std::vector<double> v{2, 0, 4};
  auto m = population_moments(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_NEAR(m.std, std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(median(v), 2.0);
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(median(even), 2.5);
  std::vector<double> one{7};
  EXPECT_DOUBLE_EQ(population_moments(one).std, 0.0);
}

TEST(Stats, MissingIsNan) {
  EXPECT_TRUE(is_missing(kMissing));
  EXPECT_FALSE(is_missing(0.0));
  EXPECT_TRUE(std::isnan(kMissing));
}

}  // namespace
}  // namespace botscreen
