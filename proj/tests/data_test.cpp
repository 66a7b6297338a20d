/*
 * Copyright 2026 The lgmml Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "lgmml/data.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace lgmml;

namespace {

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.dim != b.dim || a.queries.size() != b.queries.size()) return false;
  for (std::size_t q = 0; q < a.queries.size(); ++q) {
    const CandidateSet& ca = a.queries[q];
    const CandidateSet& cb = b.queries[q];
    if (ca.qid != cb.qid || ca.documents.size() != cb.documents.size()) {
      return false;
    }
    for (std::size_t i = 0; i < ca.documents.size(); ++i) {
      if (ca.documents[i].label != cb.documents[i].label) return false;
      if (!lgmml::testing::exactly_equal(ca.documents[i].features,
                                         cb.documents[i].features)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("parses a labeled sparse line with a comment") {
  std::istringstream in("2 qid:7 1:0.5 3:-1.2 # doc=abc\n");
  const Dataset ds = parse_letor(in);
  REQUIRE(ds.queries.size() == 1);
  REQUIRE(ds.dim == 3);
  const Document& doc = ds.queries[0].documents.at(0);
  CHECK(doc.label == 2);
  CHECK(doc.qid == 7);
  CHECK(doc.features(0) == doctest::Approx(0.5));
  CHECK(doc.features(1) == 0.0);
  CHECK(doc.features(2) == doctest::Approx(-1.2));
  CHECK(ds.grade_max == 2);
}

TEST_CASE("empty stream parses to an empty dataset") {
  std::istringstream in("");
  const Dataset ds = parse_letor(in);
  CHECK(ds.dim == 0);
  CHECK(ds.queries.empty());
}

TEST_CASE("documents group by qid preserving order") {
  std::istringstream in(
      "1 qid:3 1:1\n"
      "0 qid:3 1:2\n"
      "2 qid:5 1:3\n");
  const Dataset ds = parse_letor(in);
  REQUIRE(ds.queries.size() == 2);
  CHECK(ds.queries[0].qid == 3);
  CHECK(ds.queries[0].documents.size() == 2);
  CHECK(ds.queries[1].qid == 5);
  CHECK(ds.queries[1].documents.size() == 1);
  CHECK(ds.queries[0].positives == std::vector<int>{0});
  CHECK(ds.queries[0].negatives == std::vector<int>{1});
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_parse_error = [](const char* text, long line) {
    std::istringstream in(text);
    try {
      parse_letor(in);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_parse_error("1 qid:1 1:0.5\nbogus qid:1 1:1\n", 2);   // bad label
  expect_parse_error("-1 qid:1 1:0.5\n", 1);                   // negative label
  expect_parse_error("1 qid:1 1:0.5 1:0.7\n", 1);              // duplicate fid
  expect_parse_error("1 qid:x 1:0.5\n", 1);                    // bad qid
  expect_parse_error("1 qid:1 0:0.5\n", 1);                    // fid < 1
  expect_parse_error("1 qid:1 1:zzz\n", 1);                    // bad value
}

TEST_CASE("parse then serialize then parse is the identity") {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> label(0, 4);
  std::uniform_int_distribution<int> qid(1, 6);
  std::uniform_int_distribution<int> fid(1, 8);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  std::ostringstream source;
  source << "# generated header comment\n\n";
  for (int line = 0; line < 60; ++line) {
    source << label(rng) << " qid:" << qid(rng);
    int f1 = fid(rng), f2 = fid(rng);
    if (f2 == f1) f2 = (f2 % 8) + 1;
    if (f2 == f1) f2 = f1 == 8 ? 1 : f1 + 1;
    source << ' ' << f1 << ':' << value(rng);
    source << ' ' << f2 << ':' << value(rng);
    if (line % 7 == 0) source << " # trailing note";
    source << '\n';
  }
  std::istringstream first_pass(source.str());
  const Dataset parsed = parse_letor(first_pass);
  std::ostringstream serialized;
  write_letor(parsed, serialized);
  std::istringstream second_pass(serialized.str());
  const Dataset reparsed = parse_letor(second_pass);
  CHECK(datasets_equal(parsed, reparsed));
}

TEST_CASE("per-dimension normalization") {
  std::istringstream in("1 qid:1 1:3 2:4\n");
  Dataset ds = parse_letor(in);
  ds = normalize_l2_per_dimension(std::move(ds));
  CHECK(ds.queries[0].documents[0].features(0) == doctest::Approx(1.0));
  CHECK(ds.queries[0].documents[0].features(1) == doctest::Approx(1.0));
}

TEST_CASE("normalization scales columns and skips zero columns") {
  std::istringstream in(
      "1 qid:1 1:3 3:0\n"
      "0 qid:1 1:4 3:0\n");
  Dataset ds = parse_letor(in);
  ds = normalize_l2_per_dimension(std::move(ds));
  CHECK(ds.queries[0].documents[0].features(0) == doctest::Approx(0.6));
  CHECK(ds.queries[0].documents[1].features(0) == doctest::Approx(0.8));
  CHECK(ds.queries[0].documents[0].features(2) == 0.0);

  // Idempotent within 1e-9.
  Dataset again = normalize_l2_per_dimension(ds);
  for (std::size_t i = 0; i < ds.queries[0].documents.size(); ++i) {
    const Vector delta = again.queries[0].documents[i].features -
                         ds.queries[0].documents[i].features;
    CHECK(delta.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("relevance partition") {
  std::vector<Document> docs;
  for (int label : {0, 1, 4}) {
    docs.push_back(Document{1, Vector::Zero(2), label});
  }
  const CandidateSet cs = make_candidate_set(1, docs);
  const Partition part = partition_relevance(cs, 2);
  CHECK(part.positives == std::vector<int>{1, 2});
  CHECK(part.negatives == std::vector<int>{0});
  CHECK(part.hi == std::vector<int>{2});

  const CandidateSet zeros =
      make_candidate_set(2, {Document{2, Vector::Zero(2), 0}});
  CHECK(partition_relevance(zeros, 1).positives.empty());

  std::vector<Document> twos{Document{3, Vector::Zero(2), 2},
                             Document{3, Vector::Zero(2), 2}};
  const Partition hi2 = partition_relevance(make_candidate_set(3, twos), 2);
  CHECK(hi2.hi == std::vector<int>{0, 1});

  CHECK_THROWS_AS(partition_relevance(cs, 0), ConfigError);
}

TEST_CASE("synthetic generator is deterministic") {
  SynthConfig config;
  config.num_classes = 3;
  config.points_per_class = 12;
  config.dim = 4;
  config.center_spread = 15.0;
  config.seed = 99;
  const Dataset a = synth_gaussian(config);
  const Dataset b = synth_gaussian(config);
  CHECK(datasets_equal(a, b));
  CHECK(a.queries.size() == 4);  // one per class plus the mixed query
  CHECK(a.grade_max == 2);
}

TEST_CASE("single-class synthetic data has no positive labels") {
  SynthConfig config;
  config.num_classes = 1;
  config.points_per_class = 5;
  config.dim = 3;
  config.seed = 7;
  const Dataset ds = synth_gaussian(config);
  for (const CandidateSet& cs : ds.queries) {
    for (const Document& doc : cs.documents) CHECK(doc.label == 0);
  }
  CHECK(ds.grade_max == 0);
}

TEST_CASE("well-spread classes are separable by nearest center") {
  SynthConfig config;
  config.num_classes = 10;
  config.points_per_class = 100;
  config.dim = 20;
  config.center_spread = 50.0;
  config.seed = 4242;
  const Dataset ds = synth_gaussian(config);

  // Per-class points are the first points_per_class documents of the
  // class's own query, in generation order.
  std::vector<std::vector<Vector>> points(config.num_classes);
  for (int c = 0; c < config.num_classes; ++c) {
    const CandidateSet& cs = ds.queries[c];
    for (int i = 0; i < config.points_per_class; ++i) {
      points[c].push_back(cs.documents[i].features);
    }
  }
  std::vector<Vector> mean(config.num_classes, Vector::Zero(config.dim));
  for (int c = 0; c < config.num_classes; ++c) {
    for (const Vector& p : points[c]) mean[c] += p;
    mean[c] /= static_cast<double>(config.points_per_class);
  }
  int correct = 0, total = 0;
  for (int c = 0; c < config.num_classes; ++c) {
    for (const Vector& p : points[c]) {
      int nearest = 0;
      double best = (p - mean[0]).squaredNorm();
      for (int o = 1; o < config.num_classes; ++o) {
        const double dist = (p - mean[o]).squaredNorm();
        if (dist < best) {
          best = dist;
          nearest = o;
        }
      }
      correct += nearest == c;
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.95);
}

TEST_CASE("document split shares qids and strata") {
  SynthConfig config;
  config.num_classes = 4;
  config.points_per_class = 20;
  config.dim = 3;
  config.seed = 17;
  const Dataset ds = synth_gaussian(config);
  const auto [train, holdout] = split_by_documents(ds, 0.3);
  REQUIRE(train.queries.size() == ds.queries.size());
  REQUIRE(holdout.queries.size() == ds.queries.size());
  for (std::size_t q = 0; q < ds.queries.size(); ++q) {
    CHECK(train.queries[q].qid == ds.queries[q].qid);
    CHECK(holdout.queries[q].qid == ds.queries[q].qid);
    CHECK(train.queries[q].documents.size() +
              holdout.queries[q].documents.size() ==
          ds.queries[q].documents.size());
    // Both sides keep some positives when the query had them.
    if (!ds.queries[q].positives.empty()) {
      CHECK(!train.queries[q].positives.empty());
      CHECK(!holdout.queries[q].positives.empty());
    }
  }
}
