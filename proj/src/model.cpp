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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <utility>

#include "lgmml/metrics.hpp"
#include "text_util.hpp"

namespace lgmml {

namespace {

constexpr const char* kModelMagic = "lgmml-model";
constexpr int kModelVersion = 1;

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimMismatch(std::string(what) + ": size " + std::to_string(got) +
                      " does not match model dim " + std::to_string(want));
  }
}

}  // namespace

CandidateSet make_candidate_set(QueryId qid, std::vector<Document> documents) {
  CandidateSet cs;
  cs.qid = qid;
  cs.documents = std::move(documents);
  const Eigen::Index dim =
      cs.documents.empty() ? 0 : cs.documents.front().features.size();
  for (int i = 0; i < static_cast<int>(cs.documents.size()); ++i) {
    const Document& doc = cs.documents[i];
    if (doc.features.size() != dim) {
      throw DimMismatch("document " + std::to_string(i) + " of query " +
                        std::to_string(qid) + " has feature length " +
                        std::to_string(doc.features.size()) + ", expected " +
                        std::to_string(dim));
    }
    if (doc.label > 0) {
      cs.positives.push_back(i);
    } else {
      cs.negatives.push_back(i);
    }
  }
  return cs;
}

RankingModel::RankingModel(std::vector<LocalMetric> locals,
                           std::map<QueryId, Vector> phi, Vector phi_default,
                           Hyper hyper)
    : locals_(std::move(locals)),
      phi_(std::move(phi)),
      phi_default_(std::move(phi_default)),
      hyper_(std::move(hyper)) {
  if (locals_.empty()) {
    throw ConfigError("a ranking model needs at least one local metric");
  }
  const Eigen::Index d = locals_.front().anchor.size();
  for (const LocalMetric& lm : locals_) {
    if (lm.anchor.size() != d || lm.metric.dim() != d) {
      throw DimMismatch("local metrics disagree on dimension");
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(locals_.size());
  auto check_row = [m](const Vector& row, const std::string& name) {
    if (row.size() != m) {
      throw DimMismatch("weight row " + name + " has length " +
                        std::to_string(row.size()) + ", expected " +
                        std::to_string(m));
    }
    if (!row.allFinite() || (row.array() < 0.0).any()) {
      throw ModelFormatError("weight row " + name +
                             " must be finite and non-negative");
    }
  };
  check_row(phi_default_, "default");
  for (const auto& [qid, row] : phi_) {
    check_row(row, std::to_string(qid));
    if (row.isZero(0.0)) {
      std::cerr << "lgmml: warning: query " << qid
                << " has an all-zero weight row; its scores degenerate to 0\n";
    }
  }
  hyper_.num_metrics = static_cast<int>(m);
}

const Vector& RankingModel::phi_for(QueryId qid) const {
  auto it = phi_.find(qid);
  return it == phi_.end() ? phi_default_ : it->second;
}

double metric_norm(const Vector& p, const LocalMetric& lm) {
  check_dim(p.size(), lm.anchor.size(), "metric_norm point");
  return (lm.metric.mat() * (p - lm.anchor)).norm();
}

double weight(const Vector& p, const LocalMetric& lm, double rho) {
  return std::exp(-0.5 * rho * metric_norm(p, lm));
}

SymMatrix combined_metric(const Vector& p, const RankingModel& model,
                          const Vector& rho) {
  check_dim(p.size(), model.dim(), "combined_metric point");
  if (rho.size() != model.num_metrics()) {
    throw DimMismatch("rho has length " + std::to_string(rho.size()) +
                      ", expected " + std::to_string(model.num_metrics()));
  }
  Matrix sum = Matrix::Zero(model.dim(), model.dim());
  for (int r = 0; r < model.num_metrics(); ++r) {
    sum += weight(p, model.locals()[r], rho(r)) * model.locals()[r].metric.mat();
  }
  return SymMatrix(std::move(sum));
}

Vector score_components(const Vector& p, const RankingModel& model) {
  check_dim(p.size(), model.dim(), "score point");
  Vector comps(model.num_metrics());
  for (int r = 0; r < model.num_metrics(); ++r) {
    const double n = metric_norm(p, model.locals()[r]);
    comps(r) = std::exp(-n) * n;
  }
  return comps;
}

double score(const Vector& p, const Vector& phi_q, const RankingModel& model) {
  if (phi_q.size() != model.num_metrics()) {
    throw DimMismatch("phi has length " + std::to_string(phi_q.size()) +
                      ", expected " + std::to_string(model.num_metrics()));
  }
  return -phi_q.dot(score_components(p, model));
}

std::vector<int> rank_candidates(const CandidateSet& cs, const Vector& phi_q,
                                 const RankingModel& model) {
  if (cs.documents.empty()) {
    throw EmptyCandidateSet("query " + std::to_string(cs.qid) +
                            " has no candidate documents");
  }
  std::vector<double> scores(cs.documents.size());
  for (std::size_t i = 0; i < cs.documents.size(); ++i) {
    scores[i] = score(cs.documents[i].features, phi_q, model);
  }
  std::vector<int> order(cs.documents.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

AnchorChoice select_anchor(const SpdMatrix& metric,
                           const CandidateSet& candidates, int k) {
  if (candidates.documents.empty()) {
    throw EmptyCandidateSet("anchor selection over an empty candidate set");
  }
  if (candidates.positives.empty()) {
    throw NoPositives("anchor selection needs at least one positive document");
  }
  const int n = static_cast<int>(candidates.documents.size());
  const int depth = k > 0 ? k : n;

  AnchorChoice best;
  best.ndcg = -1.0;
  std::vector<double> sq_dist(n);
  std::vector<int> order(n);
  for (int pos : candidates.positives) {
    const LocalMetric probe{candidates.documents[pos].features, metric};
    for (int j = 0; j < n; ++j) {
      const double d = metric_norm(candidates.documents[j].features, probe);
      sq_dist[j] = d * d;
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&sq_dist](int a, int b) {
      if (sq_dist[a] != sq_dist[b]) return sq_dist[a] < sq_dist[b];
      return a < b;
    });
    RankedLabels labels(n);
    for (int j = 0; j < n; ++j) labels[j] = candidates.documents[order[j]].label;
    const double ndcg = ndcg_at_k(labels, depth);
    if (ndcg > best.ndcg) {
      best.ndcg = ndcg;
      best.document_index = pos;
      best.anchor = candidates.documents[pos].features;
    }
  }
  return best;
}

void save_model(const RankingModel& model, std::ostream& sink) {
  using detail::format_double;
  const Hyper& h = model.hyper();
  sink << kModelMagic << ' ' << kModelVersion << '\n';
  sink << "# localized geometric-mean ranking model\n";
  sink << "dim " << model.dim() << '\n';
  sink << "metrics " << model.num_metrics() << '\n';
  sink << "zeta " << format_double(h.zeta) << '\n';
  sink << "mu " << format_double(h.mu) << '\n';
  sink << "iterations " << h.iterations << '\n';
  sink << "lambda " << format_double(h.lambda) << '\n';
  sink << "seed " << h.seed << '\n';
  for (int r = 0; r < model.num_metrics(); ++r) {
    const LocalMetric& lm = model.locals()[r];
    sink << "anchor " << r;
    for (Eigen::Index i = 0; i < lm.anchor.size(); ++i) {
      sink << ' ' << format_double(lm.anchor(i));
    }
    sink << '\n';
    sink << "metric " << r;
    for (Eigen::Index i = 0; i < lm.metric.dim(); ++i) {
      for (Eigen::Index j = 0; j < lm.metric.dim(); ++j) {
        sink << ' ' << format_double(lm.metric.mat()(i, j));
      }
    }
    sink << '\n';
  }
  sink << "phi_rows " << model.phi().size() << '\n';
  for (const auto& [qid, row] : model.phi()) {
    sink << "phi " << qid;
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      sink << ' ' << format_double(row(i));
    }
    sink << '\n';
  }
  sink << "phi_default";
  for (Eigen::Index i = 0; i < model.phi_default().size(); ++i) {
    sink << ' ' << format_double(model.phi_default()(i));
  }
  sink << '\n';
  sink << "end\n";
}

namespace {

// Pulls the next non-comment, non-blank line, already tokenized.
class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::vector<std::string_view> next(const char* expected_key) {
    while (std::getline(in_, line_)) {
      if (!line_.empty() && line_[0] == '#') continue;
      tokens_ = detail::split_ws(line_);
      if (tokens_.empty()) continue;
      if (expected_key != nullptr && tokens_[0] != expected_key) {
        throw ModelFormatError("expected '" + std::string(expected_key) +
                               "', found '" + std::string(tokens_[0]) + "'");
      }
      return tokens_;
    }
    throw ModelFormatError(expected_key != nullptr
                               ? "truncated model file: missing '" +
                                     std::string(expected_key) + "'"
                               : "truncated model file");
  }

 private:
  std::istream& in_;
  std::string line_;
  std::vector<std::string_view> tokens_;
};

double field_double(const std::vector<std::string_view>& t, std::size_t i) {
  auto v = detail::parse_double(t[i]);
  if (!v || !std::isfinite(*v)) {
    throw ModelFormatError("bad numeric field '" + std::string(t[i]) + "'");
  }
  return *v;
}

template <typename Int>
Int field_int(const std::vector<std::string_view>& t, std::size_t i) {
  auto v = detail::parse_int<Int>(t[i]);
  if (!v) {
    throw ModelFormatError("bad integer field '" + std::string(t[i]) + "'");
  }
  return *v;
}

Vector read_vector(const std::vector<std::string_view>& t, std::size_t from,
                   Eigen::Index len) {
  if (t.size() != from + static_cast<std::size_t>(len)) {
    throw ModelFormatError("expected " + std::to_string(len) +
                           " values, found " + std::to_string(t.size() - from));
  }
  Vector v(len);
  for (Eigen::Index i = 0; i < len; ++i) {
    v(i) = field_double(t, from + static_cast<std::size_t>(i));
  }
  return v;
}

}  // namespace

RankingModel load_model(std::istream& source) {
  ModelReader reader(source);

  auto header = reader.next(nullptr);
  if (header.size() != 2 || header[0] != kModelMagic) {
    throw ModelFormatError("not a model file (bad magic)");
  }
  if (field_int<int>(header, 1) != kModelVersion) {
    throw ModelFormatError("unsupported model format version '" +
                           std::string(header[1]) + "'");
  }

  auto dim_line = reader.next("dim");
  const Eigen::Index dim = field_int<Eigen::Index>(dim_line, 1);
  auto metrics_line = reader.next("metrics");
  const int m = field_int<int>(metrics_line, 1);
  if (dim < 1 || m < 1) {
    throw ModelFormatError("model must have dim >= 1 and metrics >= 1");
  }

  Hyper hyper;
  hyper.zeta = field_double(reader.next("zeta"), 1);
  hyper.mu = field_double(reader.next("mu"), 1);
  hyper.iterations = field_int<std::int64_t>(reader.next("iterations"), 1);
  hyper.lambda = field_double(reader.next("lambda"), 1);
  hyper.seed = field_int<std::uint64_t>(reader.next("seed"), 1);
  hyper.num_metrics = m;

  std::vector<LocalMetric> locals;
  locals.reserve(m);
  for (int r = 0; r < m; ++r) {
    auto anchor_line = reader.next("anchor");
    if (field_int<int>(anchor_line, 1) != r) {
      throw ModelFormatError("anchor rows out of order");
    }
    Vector anchor = read_vector(anchor_line, 2, dim);
    auto metric_line = reader.next("metric");
    if (field_int<int>(metric_line, 1) != r) {
      throw ModelFormatError("metric rows out of order");
    }
    Vector flat = read_vector(metric_line, 2, dim * dim);
    Matrix mat = Eigen::Map<Matrix>(flat.data(), dim, dim).transpose();
    SpdMatrix metric = [&]() {
      try {
        return SpdMatrix::certify(SymMatrix(std::move(mat)));
      } catch (const Error& e) {
        throw ModelFormatError("stored metric " + std::to_string(r) +
                               " is invalid: " + e.what());
      }
    }();
    locals.push_back(LocalMetric{std::move(anchor), std::move(metric)});
  }

  const std::size_t rows =
      field_int<std::size_t>(reader.next("phi_rows"), 1);
  std::map<QueryId, Vector> phi;
  for (std::size_t i = 0; i < rows; ++i) {
    auto phi_line = reader.next("phi");
    const QueryId qid = field_int<QueryId>(phi_line, 1);
    if (!phi.emplace(qid, read_vector(phi_line, 2, m)).second) {
      throw ModelFormatError("duplicate phi row for query " +
                             std::to_string(qid));
    }
  }
  Vector phi_default = read_vector(reader.next("phi_default"), 1, m);
  reader.next("end");

  try {
    return RankingModel(std::move(locals), std::move(phi),
                        std::move(phi_default), hyper);
  } catch (const ModelFormatError&) {
    throw;
  } catch (const Error& e) {
    throw ModelFormatError(std::string("inconsistent model file: ") +
                           e.what());
  }
}

void save_model_file(const RankingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  save_model(model, out);
  out.flush();
  if (!out) {
    throw IoError("failed writing model to '" + path + "'");
  }
}

RankingModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open model file '" + path + "'");
  }
  return load_model(in);
}

}  // namespace lgmml
