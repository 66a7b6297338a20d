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
#include "lgmml/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace lgmml;
using lgmml::testing::random_spd;
using lgmml::testing::random_vector;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

LocalMetric identity_local(Vector anchor) {
  const Eigen::Index dim = anchor.size();
  return LocalMetric{std::move(anchor), SpdMatrix::identity(dim)};
}

RankingModel single_metric_model(LocalMetric lm) {
  std::vector<LocalMetric> locals;
  locals.push_back(std::move(lm));
  return RankingModel(std::move(locals), {}, Vector::Ones(1), Hyper{});
}

RankingModel random_model(int m, Eigen::Index dim, std::mt19937_64& rng,
                          int phi_rows = 0) {
  std::vector<LocalMetric> locals;
  for (int r = 0; r < m; ++r) {
    locals.push_back(LocalMetric{random_vector(dim, rng),
                                 random_spd(dim, rng, 0.5, 2.0)});
  }
  std::map<QueryId, Vector> phi;
  std::uniform_real_distribution<double> weight_value(0.0, 2.0);
  for (int q = 0; q < phi_rows; ++q) {
    Vector row(m);
    for (int r = 0; r < m; ++r) row(r) = weight_value(rng);
    phi[q] = row;
  }
  Vector defaults(m);
  for (int r = 0; r < m; ++r) defaults(r) = weight_value(rng);
  Hyper hyper;
  hyper.zeta = 0.25;
  hyper.mu = 0.125;
  hyper.lambda = 1.0;
  hyper.iterations = 321;
  hyper.seed = 9;
  return RankingModel(std::move(locals), std::move(phi), std::move(defaults),
                      hyper);
}

}  // namespace

TEST_CASE("candidate sets partition by label") {
  std::vector<Document> docs;
  for (int label : {0, 2, 0, 1}) {
    docs.push_back(Document{4, Vector::Zero(3), label});
  }
  const CandidateSet cs = make_candidate_set(4, docs);
  CHECK(cs.positives == std::vector<int>{1, 3});
  CHECK(cs.negatives == std::vector<int>{0, 2});

  docs.push_back(Document{4, Vector::Zero(2), 1});
  CHECK_THROWS_AS(make_candidate_set(4, docs), DimMismatch);
}

TEST_CASE("metric norm hand cases") {
  const LocalMetric at_origin = identity_local(Vector::Zero(2));
  CHECK(metric_norm(Vector::Zero(2), at_origin) == 0.0);
  CHECK(metric_norm(vec2(3.0, 4.0), at_origin) == doctest::Approx(5.0));

  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 1.0;
  const LocalMetric scaled{Vector::Zero(2),
                           SpdMatrix::certify(SymMatrix(m))};
  CHECK(metric_norm(vec2(1.0, 1.0), scaled) ==
        doctest::Approx(std::sqrt(5.0)));

  CHECK_THROWS_AS(metric_norm(Vector::Zero(3), at_origin), DimMismatch);
}

TEST_CASE("metric norm vanishes only at the anchor") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const LocalMetric lm{random_vector(3, rng), random_spd(3, rng)};
    CHECK(metric_norm(lm.anchor, lm) == 0.0);
    const Vector off = lm.anchor + 1e-3 * random_vector(3, rng).normalized();
    CHECK(metric_norm(off, lm) > 0.0);
  }
}

TEST_CASE("weight hand cases") {
  const LocalMetric lm = identity_local(Vector::Zero(2));
  CHECK(weight(Vector::Zero(2), lm, 3.7) == doctest::Approx(1.0));
  CHECK(weight(vec2(0.4, -0.3), lm, 0.0) == doctest::Approx(1.0));
  // rho = 2 at unit distance.
  CHECK(weight(vec2(1.0, 0.0), lm, 2.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("weight is Lipschitz with the spectral norm as modulus") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 200; ++trial) {
    const LocalMetric lm{random_vector(3, rng), random_spd(3, rng, 0.2, 5.0)};
    const double rho = 1.5;
    const double spectral = lm.metric.eigen().values(0);
    const Vector p = random_vector(3, rng);
    const Vector q = p + 0.1 * random_vector(3, rng);
    const double gap = std::abs(weight(p, lm, rho) - weight(q, lm, rho));
    CHECK(gap <= 0.5 * rho * spectral * (p - q).norm() + 1e-12);
  }
}

TEST_CASE("combined metric with a single unit weight is the metric itself") {
  std::mt19937_64 rng(71);
  const SpdMatrix m1 = random_spd(2, rng);
  const RankingModel model =
      single_metric_model(LocalMetric{vec2(1.0, 2.0), m1});
  const SymMatrix combined =
      combined_metric(vec2(0.3, -0.7), model, Vector::Zero(1));
  CHECK((combined.mat() - m1.mat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("combined metric of a symmetric configuration shares one weight") {
  std::vector<LocalMetric> locals;
  locals.push_back(identity_local(vec2(1.0, 0.0)));
  Matrix m2 = Matrix::Zero(2, 2);
  m2(0, 0) = 1.0;
  m2(1, 1) = 2.0;
  locals.push_back(LocalMetric{vec2(-1.0, 0.0),
                               SpdMatrix::certify(SymMatrix(m2))});
  // p on the axis equidistant from both anchors, but the norms differ
  // unless the metrics agree on the separating direction; both give
  // |M (p - a)| = 1 here because the x-scales match.
  const Vector p = vec2(0.0, 0.0);
  const RankingModel model(locals, {}, Vector::Ones(2), Hyper{});
  const Vector rho = Vector::Constant(2, 1.3);
  const double shared_weight = std::exp(-0.5 * 1.3 * 1.0);
  const SymMatrix combined = combined_metric(p, model, rho);
  const Matrix expected =
      shared_weight * (locals[0].metric.mat() + locals[1].metric.mat());
  CHECK((combined.mat() - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("combined metric stays PSD at sampled points") {
  std::mt19937_64 rng(73);
  const RankingModel model = random_model(3, 4, rng);
  std::uniform_real_distribution<double> rho_value(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector rho(3);
    for (int r = 0; r < 3; ++r) rho(r) = rho_value(rng);
    const SymMatrix combined =
        combined_metric(random_vector(4, rng), model, rho);
    const SymEigen es = sym_eigen(combined);
    CHECK(es.values(es.values.size() - 1) >=
          -1e-10 * combined.mat().trace());
  }
}

TEST_CASE("score hand cases") {
  const RankingModel model =
      single_metric_model(identity_local(Vector::Zero(2)));
  CHECK(score(Vector::Zero(2), Vector::Ones(1), model) == 0.0);
  // Unit norm, unit weight: -exp(-1).
  CHECK(score(vec2(1.0, 0.0), Vector::Ones(1), model) ==
        doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));
  // All-zero weights degenerate to zero everywhere.
  CHECK(score(vec2(5.0, -2.0), Vector::Zero(1), model) == 0.0);
  CHECK(score(vec2(1.0, 0.0), Vector::Ones(1), model) < 0.0);
}

TEST_CASE("score is linear in the weights") {
  std::mt19937_64 rng(79);
  const RankingModel model = random_model(3, 4, rng);
  std::uniform_real_distribution<double> alpha_value(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector p = random_vector(4, rng);
    Vector phi(3);
    for (int r = 0; r < 3; ++r) phi(r) = alpha_value(rng);
    const double alpha = alpha_value(rng);
    CHECK(score(p, (alpha * phi).eval(), model) ==
          doctest::Approx(alpha * score(p, phi, model)));
  }
}

TEST_CASE("ranking follows the score, not raw distance") {
  const RankingModel model =
      single_metric_model(identity_local(Vector::Zero(2)));
  std::vector<Document> docs;
  docs.push_back(Document{1, vec2(0.5, 0.0), 1});  // norm 0.5
  docs.push_back(Document{1, vec2(2.0, 0.0), 0});  // norm 2.0
  const CandidateSet cs = make_candidate_set(1, docs);
  const std::vector<int> order = rank_candidates(cs, Vector::Ones(1), model);
  // -exp(-2)*2 = -0.2707 beats -exp(-0.5)*0.5 = -0.3033: the far document
  // ranks first because x exp(-x) is past its peak at x = 1.
  CHECK(order == std::vector<int>{1, 0});
  CHECK(score(docs[0].features, Vector::Ones(1), model) ==
        doctest::Approx(-0.3032653298563167));
  CHECK(score(docs[1].features, Vector::Ones(1), model) ==
        doctest::Approx(-0.2706705664732254));
}

TEST_CASE("ranking is deterministic with stable tie-breaks") {
  const RankingModel model =
      single_metric_model(identity_local(Vector::Zero(2)));
  std::vector<Document> docs(2, Document{1, vec2(0.3, 0.4), 0});
  const CandidateSet cs = make_candidate_set(1, docs);
  CHECK(rank_candidates(cs, Vector::Ones(1), model) ==
        std::vector<int>{0, 1});

  const CandidateSet single =
      make_candidate_set(2, {Document{2, vec2(1.0, 1.0), 1}});
  CHECK(rank_candidates(single, Vector::Ones(1), model) ==
        std::vector<int>{0});

  CHECK_THROWS_AS(rank_candidates(CandidateSet{}, Vector::Ones(1), model),
                  EmptyCandidateSet);
}

TEST_CASE("ranking is invariant under positive weight rescaling") {
  std::mt19937_64 rng(83);
  const RankingModel model = random_model(3, 3, rng);
  std::vector<Document> docs;
  for (int i = 0; i < 12; ++i) {
    docs.push_back(Document{1, random_vector(3, rng), i % 3});
  }
  const CandidateSet cs = make_candidate_set(1, docs);
  Vector phi(3);
  phi << 0.7, 1.9, 0.2;
  const auto base = rank_candidates(cs, phi, model);
  for (double alpha : {0.01, 3.0, 250.0}) {
    CHECK(rank_candidates(cs, (alpha * phi).eval(), model) == base);
  }
}

TEST_CASE("ranking output is a permutation") {
  std::mt19937_64 rng(89);
  const RankingModel model = random_model(2, 3, rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Document> docs;
    std::uniform_int_distribution<int> count(1, 9);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      docs.push_back(Document{1, random_vector(3, rng), 0});
    }
    const CandidateSet cs = make_candidate_set(1, docs);
    std::vector<int> order = rank_candidates(cs, Vector::Ones(2), model);
    std::sort(order.begin(), order.end());
    for (int i = 0; i < n; ++i) CHECK(order[i] == i);
  }
}

TEST_CASE("anchor selection hand case") {
  std::vector<Document> docs;
  docs.push_back(Document{1, vec2(0.0, 0.0), 2});
  docs.push_back(Document{1, vec2(0.1, 0.0), 1});
  docs.push_back(Document{1, vec2(5.0, 5.0), 0});
  const CandidateSet cs = make_candidate_set(1, docs);
  const AnchorChoice choice = select_anchor(SpdMatrix::identity(2), cs);
  CHECK(choice.document_index == 0);
  CHECK(choice.ndcg == doctest::Approx(1.0));
  CHECK(lgmml::testing::exactly_equal(choice.anchor, vec2(0.0, 0.0)));
}

TEST_CASE("anchor selection tie-breaks and errors") {
  // Two identical positives: the lowest index wins.
  std::vector<Document> docs(2, Document{1, vec2(1.0, 1.0), 1});
  docs.push_back(Document{1, vec2(4.0, 4.0), 0});
  const CandidateSet cs = make_candidate_set(1, docs);
  CHECK(select_anchor(SpdMatrix::identity(2), cs).document_index == 0);

  const CandidateSet lone =
      make_candidate_set(2, {Document{2, vec2(0.0, 1.0), 3}});
  CHECK(select_anchor(SpdMatrix::identity(2), lone).document_index == 0);

  const CandidateSet zeros =
      make_candidate_set(3, {Document{3, vec2(0.0, 1.0), 0}});
  CHECK_THROWS_AS(select_anchor(SpdMatrix::identity(2), zeros), NoPositives);
}

TEST_CASE("trivial model round-trips bit-for-bit") {
  std::map<QueryId, Vector> phi;
  phi[5] = Vector::Constant(1, 0.75);
  const RankingModel model(
      {identity_local(vec2(0.25, -1.5))}, phi, Vector::Constant(1, 0.75),
      Hyper{});
  std::ostringstream out;
  save_model(model, out);
  std::istringstream in(out.str());
  const RankingModel loaded = load_model(in);
  std::ostringstream again;
  save_model(loaded, again);
  CHECK(out.str() == again.str());
}

TEST_CASE("random models round-trip exactly") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const RankingModel model = random_model(3, 5, rng, 4);
    std::ostringstream out;
    save_model(model, out);
    std::istringstream in(out.str());
    const RankingModel loaded = load_model(in);
    CHECK(loaded.dim() == model.dim());
    CHECK(loaded.num_metrics() == model.num_metrics());
    for (int r = 0; r < model.num_metrics(); ++r) {
      CHECK(lgmml::testing::exactly_equal(loaded.locals()[r].anchor,
                                          model.locals()[r].anchor));
      CHECK(lgmml::testing::exactly_equal(loaded.locals()[r].metric.mat(),
                                          model.locals()[r].metric.mat()));
    }
    for (const auto& [qid, row] : model.phi()) {
      REQUIRE(loaded.has_phi(qid));
      CHECK(lgmml::testing::exactly_equal(loaded.phi_for(qid), row));
    }
    CHECK(lgmml::testing::exactly_equal(loaded.phi_default(),
                                        model.phi_default()));
    CHECK(loaded.hyper().zeta == model.hyper().zeta);
    CHECK(loaded.hyper().iterations == model.hyper().iterations);
  }
}

TEST_CASE("model loading rejects damaged input") {
  std::mt19937_64 rng(101);
  const RankingModel model = random_model(2, 3, rng, 2);
  std::ostringstream out;
  save_model(model, out);
  const std::string text = out.str();

  {
    std::istringstream bad("not-a-model 1\n");
    CHECK_THROWS_AS(load_model(bad), ModelFormatError);
  }
  {
    std::istringstream bad("lgmml-model 999\ndim 3\n");
    CHECK_THROWS_AS(load_model(bad), ModelFormatError);
  }
  {
    // Truncate in the middle of the metric rows.
    std::istringstream bad(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_model(bad), ModelFormatError);
  }
  {
    std::string nan_text = text;
    const auto pos = nan_text.find("phi_default ");
    nan_text.replace(pos + 12, nan_text.find(' ', pos + 12) - pos - 12,
                     "nan");
    std::istringstream bad(nan_text);
    CHECK_THROWS_AS(load_model(bad), ModelFormatError);
  }
}

TEST_CASE("unseen queries fall back to the default weight row") {
  std::map<QueryId, Vector> phi;
  phi[1] = Vector::Constant(1, 2.0);
  const RankingModel model({identity_local(vec2(0.0, 0.0))}, phi,
                           Vector::Constant(1, 0.5), Hyper{});
  CHECK(model.phi_for(1)(0) == 2.0);
  CHECK(model.phi_for(42)(0) == 0.5);
  CHECK(!model.has_phi(42));
}
