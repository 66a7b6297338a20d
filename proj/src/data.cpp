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

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>

#include "text_util.hpp"

namespace lgmml {

namespace {

struct SparseDoc {
  int label = 0;
  QueryId qid = 0;
  std::vector<std::pair<Eigen::Index, double>> features;
};

SparseDoc parse_line(std::string_view line, long line_no) {
  const auto tokens = detail::split_ws(line);
  if (tokens.size() < 2) {
    throw ParseError("expected '<label> qid:<int> ...'", line_no);
  }
  SparseDoc doc;
  auto label = detail::parse_int<long>(tokens[0]);
  if (!label) {
    throw ParseError("malformed label '" + std::string(tokens[0]) + "'",
                     line_no);
  }
  if (*label < 0) {
    throw ParseError("negative relevance label " + std::to_string(*label),
                     line_no);
  }
  doc.label = static_cast<int>(*label);

  constexpr std::string_view kQidPrefix = "qid:";
  if (tokens[1].substr(0, kQidPrefix.size()) != kQidPrefix) {
    throw ParseError("expected qid:<int>, found '" + std::string(tokens[1]) +
                     "'", line_no);
  }
  auto qid = detail::parse_int<QueryId>(tokens[1].substr(kQidPrefix.size()));
  if (!qid || *qid < 0) {
    throw ParseError("malformed qid '" + std::string(tokens[1]) + "'",
                     line_no);
  }
  doc.qid = *qid;

  for (std::size_t i = 2; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("malformed feature token '" + std::string(tok) + "'",
                       line_no);
    }
    auto fid = detail::parse_int<Eigen::Index>(tok.substr(0, colon));
    auto value = detail::parse_double(tok.substr(colon + 1));
    if (!fid || *fid < 1 || !value || !std::isfinite(*value)) {
      throw ParseError("malformed feature token '" + std::string(tok) + "'",
                       line_no);
    }
    for (const auto& [seen_fid, unused] : doc.features) {
      if (seen_fid == *fid) {
        throw ParseError("duplicate feature id " + std::to_string(*fid),
                         line_no);
      }
    }
    doc.features.emplace_back(*fid, *value);
  }
  return doc;
}

}  // namespace

Dataset parse_letor(std::istream& text) {
  std::vector<SparseDoc> docs;
  Eigen::Index max_fid = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    std::string_view view = line;
    if (const std::size_t hash = view.find('#');
        hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    if (detail::split_ws(view).empty()) continue;
    docs.push_back(parse_line(view, line_no));
    for (const auto& [fid, unused] : docs.back().features) {
      max_fid = std::max(max_fid, fid);
    }
  }

  Dataset ds;
  ds.dim = max_fid;
  std::map<QueryId, std::size_t> slot_of;
  std::vector<std::vector<Document>> grouped;
  std::vector<QueryId> qid_order;
  for (const SparseDoc& sparse : docs) {
    Document doc;
    doc.qid = sparse.qid;
    doc.label = sparse.label;
    doc.features = Vector::Zero(max_fid);
    for (const auto& [fid, value] : sparse.features) {
      doc.features(fid - 1) = value;
    }
    ds.grade_max = std::max(ds.grade_max, doc.label);
    auto [it, inserted] = slot_of.emplace(sparse.qid, grouped.size());
    if (inserted) {
      grouped.emplace_back();
      qid_order.push_back(sparse.qid);
    }
    grouped[it->second].push_back(std::move(doc));
  }
  ds.queries.reserve(grouped.size());
  for (std::size_t i = 0; i < grouped.size(); ++i) {
    ds.queries.push_back(make_candidate_set(qid_order[i],
                                            std::move(grouped[i])));
  }
  return ds;
}

namespace {

bool has_gzip_suffix(const std::string& path) {
  for (const char* suffix : {".gz", ".gzip"}) {
    const std::string s(suffix);
    if (path.size() >= s.size() &&
        path.compare(path.size() - s.size(), s.size(), s) == 0) {
      return true;
    }
  }
  return false;
}

std::string inflate_gzip_file(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) {
    throw IoError("cannot open '" + path + "'");
  }
  std::string content;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(file, buf, sizeof(buf))) > 0) {
    content.append(buf, static_cast<std::size_t>(n));
  }
  const bool ok = n == 0;
  gzclose(file);
  if (!ok) {
    throw ParseError("gzip inflation failed for '" + path + "'");
  }
  return content;
}

}  // namespace

Dataset parse_letor_file(const std::string& path) {
  if (has_gzip_suffix(path)) {
    std::istringstream stream(inflate_gzip_file(path));
    return parse_letor(stream);
  }
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return parse_letor(in);
}

void write_letor(const Dataset& ds, std::ostream& out) {
  for (const CandidateSet& cs : ds.queries) {
    for (const Document& doc : cs.documents) {
      out << doc.label << " qid:" << doc.qid;
      for (Eigen::Index f = 0; f < doc.features.size(); ++f) {
        out << ' ' << (f + 1) << ':' << detail::format_double(doc.features(f));
      }
      out << '\n';
    }
  }
}

void write_letor_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_letor(ds, out);
  out.flush();
  if (!out) {
    throw IoError("failed writing dataset to '" + path + "'");
  }
}

Dataset normalize_l2_per_dimension(Dataset ds) {
  if (ds.dim == 0) return ds;
  Vector sq_norm = Vector::Zero(ds.dim);
  for (const CandidateSet& cs : ds.queries) {
    for (const Document& doc : cs.documents) {
      sq_norm += doc.features.cwiseProduct(doc.features);
    }
  }
  Vector scale(ds.dim);
  for (Eigen::Index f = 0; f < ds.dim; ++f) {
    scale(f) = sq_norm(f) > 0.0 ? 1.0 / std::sqrt(sq_norm(f)) : 1.0;
  }
  for (CandidateSet& cs : ds.queries) {
    for (Document& doc : cs.documents) {
      doc.features = doc.features.cwiseProduct(scale);
    }
  }
  return ds;
}

Partition partition_relevance(const CandidateSet& cs, int hi_label_threshold) {
  if (hi_label_threshold < 1) {
    throw ConfigError("hi-label threshold must be >= 1");
  }
  Partition part;
  for (int i = 0; i < static_cast<int>(cs.documents.size()); ++i) {
    const int label = cs.documents[i].label;
    if (label > 0) {
      part.positives.push_back(i);
      if (label >= hi_label_threshold) part.hi.push_back(i);
    } else {
      part.negatives.push_back(i);
    }
  }
  return part;
}

Dataset synth_gaussian(const SynthConfig& config) {
  if (config.num_classes < 1 || config.points_per_class < 1 ||
      config.dim < 1 || !(config.center_spread > 0.0)) {
    throw ConfigError("synthetic generator needs positive class count, "
                      "points per class, dim, and center spread");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, config.center_spread);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const boost::math::chi_squared chi2(static_cast<double>(config.dim));
  const double radius = std::sqrt(boost::math::quantile(chi2, 0.95));

  std::vector<Vector> centers(config.num_classes);
  for (Vector& center : centers) {
    center.resize(config.dim);
    for (Eigen::Index f = 0; f < config.dim; ++f) center(f) = uniform(rng);
  }

  // points[c] holds the class's samples, truncated at the 95% radius.
  std::vector<std::vector<Vector>> points(config.num_classes);
  for (int c = 0; c < config.num_classes; ++c) {
    points[c].reserve(config.points_per_class);
    for (int i = 0; i < config.points_per_class; ++i) {
      Vector offset(config.dim);
      do {
        for (Eigen::Index f = 0; f < config.dim; ++f) offset(f) = gauss(rng);
      } while (offset.norm() > radius);
      points[c].push_back(centers[c] + offset);
    }
  }

  const int grade_of_class = 4;  // grades cap here for the 5-level gain table
  auto grade = [grade_of_class](int c) { return std::min(c, grade_of_class); };
  const int balanced = std::max(1, config.points_per_class /
                                       config.num_classes);

  Dataset ds;
  ds.dim = config.dim;
  for (int c = 0; c < config.num_classes; ++c) {
    std::vector<Document> docs;
    docs.reserve(config.points_per_class +
                 balanced * (config.num_classes - 1));
    for (const Vector& p : points[c]) {
      docs.push_back(Document{c, p, grade(c)});
    }
    for (int other = 0; other < config.num_classes; ++other) {
      if (other == c) continue;
      std::vector<int> index(config.points_per_class);
      std::iota(index.begin(), index.end(), 0);
      for (int pick = 0; pick < balanced; ++pick) {
        std::uniform_int_distribution<int> choose(
            pick, config.points_per_class - 1);
        std::swap(index[pick], index[choose(rng)]);
        docs.push_back(Document{c, points[other][index[pick]], 0});
      }
    }
    ds.queries.push_back(make_candidate_set(c, std::move(docs)));
    ds.grade_max = std::max(ds.grade_max, grade(c));
  }
  if (config.include_mixed_query) {
    std::vector<Document> docs;
    docs.reserve(config.num_classes * config.points_per_class);
    const QueryId mixed_qid = config.num_classes;
    for (int c = 0; c < config.num_classes; ++c) {
      for (const Vector& p : points[c]) {
        docs.push_back(Document{mixed_qid, p, grade(c)});
      }
    }
    ds.queries.push_back(make_candidate_set(mixed_qid, std::move(docs)));
  }
  if (ds.grade_max == 0) {
    std::cerr << "lgmml: warning: synthetic dataset with "
              << config.num_classes
              << " class(es) has no positive labels; it is degenerate for "
                 "ranking\n";
  }
  return ds;
}

std::pair<Dataset, Dataset> split_by_documents(const Dataset& ds,
                                               double holdout_fraction) {
  if (!(holdout_fraction >= 0.0) || !(holdout_fraction < 1.0)) {
    throw ConfigError("holdout fraction must be in [0, 1)");
  }
  Dataset train, holdout;
  train.dim = holdout.dim = ds.dim;
  for (const CandidateSet& cs : ds.queries) {
    std::map<int, int> seen_of_label;
    std::vector<Document> kept, held;
    for (const Document& doc : cs.documents) {
      const int i = seen_of_label[doc.label]++;
      const bool hold =
          std::floor((i + 1) * holdout_fraction) >
          std::floor(i * holdout_fraction);
      (hold ? held : kept).push_back(doc);
    }
    auto append = [](Dataset& target, QueryId qid, std::vector<Document> docs) {
      if (docs.empty()) return;
      for (const Document& doc : docs) {
        target.grade_max = std::max(target.grade_max, doc.label);
      }
      target.queries.push_back(make_candidate_set(qid, std::move(docs)));
    };
    append(train, cs.qid, std::move(kept));
    append(holdout, cs.qid, std::move(held));
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace lgmml
