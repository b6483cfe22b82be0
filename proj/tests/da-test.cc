// tests/da-test.cc

// Copyright 2026  The ivnda Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ivnda/discriminant.h"
#include "oracles.h"
#include "test-util.h"

using namespace ivnda;

namespace {

LabeledVectors Make(const Matrix &x, const std::vector<int> &labels) {
  LabeledVectors d;
  d.vectors = x;
  d.labels = labels;
  return d;
}

// `per` samples around each of `num_c` random centres.
LabeledVectors Clusters(Rng *rng, int num_c, int per, int dim, double spread,
                        double noise) {
  Matrix x(num_c * per, dim);
  std::vector<int> labels;
  for (int c = 0; c < num_c; c++) {
    Vector centre = spread * rng->NormalVector(dim);
    for (int i = 0; i < per; i++) {
      x.row(c * per + i) = (centre + noise * rng->NormalVector(dim)).transpose();
      labels.push_back(c);
    }
  }
  return Make(x, labels);
}

int CountAbove(const Vector &ev, double rel) {
  double mx = ev.cwiseAbs().maxCoeff();
  int n = 0;
  for (int i = 0; i < ev.size(); i++) n += ev(i) > rel * mx;
  return n;
}

}  // namespace

TEST_CASE("within_scatter") {
  Matrix same(4, 2);
  same << 1, 2, 1, 2, -3, 0, -3, 0;
  CHECK(WithinScatter(Make(same, {0, 0, 1, 1})).isZero(0));

  Matrix one(2, 2);
  one << 0, 0, 2, 0;
  Matrix expect(2, 2);
  expect << 2, 0, 0, 0;
  CHECK(WithinScatter(Make(one, {0, 0})) == expect);

  Rng rng(1);
  Matrix x = oracle::RandomMatrix(&rng, 50, 5, 2.0);
  std::vector<int> labels(50);
  for (int i = 0; i < 50; i++) labels[i] = i % 5;
  Matrix sw = WithinScatter(Make(x, labels));
  CHECK(oracle::RelErr(sw, oracle::NaiveWithinScatter(x, labels)) < 1e-12);
  CHECK(sw.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() > -1e-10);

  labels[7] = 5;  // singleton class
  CHECK_KIND(WithinScatter(Make(x, labels)), kDegenerate);
}

TEST_CASE("knn_cosine") {
  Rng rng(2);
  Matrix pool = oracle::RandomMatrix(&rng, 200, 10);
  Neighbors self = KnnCosine(pool.row(17).transpose(), pool, 1);
  CHECK(self.indices == std::vector<int>{17});
  CHECK(std::abs(self.distances[0]) < 1e-15);

  Matrix p2(2, 2);
  p2 << 0, 1, 1, 1;
  Vector q(2);
  q << 1, 0;
  Neighbors nb = KnnCosine(q, p2, 1);
  CHECK(nb.indices == std::vector<int>{1});
  CHECK(nb.distances[0] == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-14));

  Vector query = rng.NormalVector(10);
  std::vector<std::pair<double, int>> all;
  for (int i = 0; i < 200; i++)
    all.emplace_back(oracle::CosineDistance(query, pool.row(i).transpose()), i);
  std::sort(all.begin(), all.end());
  Neighbors five = KnnCosine(query, pool, 5);
  for (int i = 0; i < 5; i++) CHECK(five.indices[i] == all[i].second);

  // Ties resolve to the lower index.
  Matrix dup(3, 2);
  dup << 2, 0, 1, 0, 0, 1;
  CHECK(KnnCosine(q, dup, 2).indices == std::vector<int>{0, 1});

  CHECK_KIND(KnnCosine(Vector::Zero(10), pool, 1), kNumeric);
  Matrix zero_row = pool;
  zero_row.row(3).setZero();
  CHECK_KIND(KnnCosine(query, zero_row, 1), kNumeric);
  CHECK_KIND(KnnCosine(query, pool, 201), kContract);
}

TEST_CASE("nda weight bounds") {
  for (double a : {0.0, 1e-6, 0.01, 0.3, 1.0, 1.7})
    for (double b : {0.0, 1e-6, 0.01, 0.3, 1.0, 1.7})
      for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        double w = NdaWeight(a, b, alpha);
        if (a == 0.0 && b == 0.0) {
          CHECK(w == 0.5);
        } else if (a > 0.0 && b > 0.0) {
          CHECK(w > 0.0);
          CHECK(w <= 0.5);
        }
        if (a < 0.01 * b && alpha >= 1.0) CHECK(w < 0.02);
      }
  CHECK(NdaWeight(1.0, 1.0, 2.0) == 0.5);
  CHECK(NdaWeight(1.0, 3.0, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("nda_between_scatter: hand case and brute-force oracle") {
  Matrix x(4, 2);
  x << 1, 0, 2, 1, 0, 1, 1, 2;
  std::vector<int> labels{0, 0, 1, 1};
  NdaOptions unit;
  unit.k = 1;
  unit.unit_weights = true;
  Matrix expect(2, 2);
  expect << 6, -2, -2, 6;
  CHECK(oracle::RelErr(NdaBetweenScatter(Make(x, labels), unit), expect) < 1e-14);

  Rng rng(3);
  for (int trial = 0; trial < 4; trial++) {
    int n = 24 + 4 * trial, dim = 2 + trial;
    Matrix r = oracle::RandomMatrix(&rng, n, dim);
    std::vector<int> lab(n);
    for (int i = 0; i < n; i++) lab[i] = i % 4;
    NdaOptions o;
    o.k = 3;
    o.alpha = 1.0 + trial;
    Matrix sb = NdaBetweenScatter(Make(r, lab), o);
    CHECK(oracle::RelErr(sb, oracle::NdaScatter(r, lab, 3, o.alpha, true)) < 1e-10);
    o.pairing = NdaPairing::kAllPairs;
    CHECK(oracle::RelErr(NdaBetweenScatter(Make(r, lab), o),
                         oracle::NdaScatter(r, lab, 3, o.alpha, false)) < 1e-10);
    CHECK(sb.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("nda_between_scatter: k equal to the complement size") {
  Rng rng(4);
  Matrix x = oracle::RandomMatrix(&rng, 12, 3);
  std::vector<int> lab{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  NdaOptions o;
  o.k = 8;
  o.unit_weights = true;
  Matrix brute = Matrix::Zero(3, 3);
  for (int l = 0; l < 12; l++) {
    Vector mean = Vector::Zero(3);
    for (int m = 0; m < 12; m++)
      if (lab[m] != lab[l]) mean += x.row(m).transpose();
    Vector d = x.row(l).transpose() - mean / 8.0;
    brute += d * d.transpose();
  }
  CHECK(oracle::RelErr(NdaBetweenScatter(Make(x, lab), o), brute) < 1e-12);
  o.k = 9;
  CHECK_KIND(NdaBetweenScatter(Make(x, lab), o), kDegenerate);
}

TEST_CASE("nda_between_scatter: shifted duplicate class separates along the shift") {
  Rng rng(5);
  const int per = 15;
  Matrix x(2 * per, 3);
  std::vector<int> lab;
  for (int i = 0; i < per; i++) {
    Eigen::RowVector3d p(0.0, 5.0, 5.0);
    p += 0.01 * rng.NormalVector(3).transpose();
    x.row(i) = p;
    x.row(per + i) = p + Eigen::RowVector3d(100.0, 0.0, 0.0);
  }
  for (int i = 0; i < 2 * per; i++) lab.push_back(i < per ? 0 : 1);
  NdaOptions o;
  o.k = 5;
  Matrix sb = NdaBetweenScatter(Make(x, lab), o);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sb);
  Vector top = es.eigenvectors().col(2);
  CHECK(std::acos(std::min(1.0, std::abs(top(0)))) < 1e-3);
}

TEST_CASE("scatters are invariant to sample order") {
  Rng rng(6);
  LabeledVectors d = Clusters(&rng, 4, 9, 5, 2.0, 1.0);
  std::vector<int> perm(d.NumSamples());
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = d.NumSamples() - 1; i > 0; i--) std::swap(perm[i], perm[rng.Below(i + 1)]);
  LabeledVectors p = d;
  for (int i = 0; i < d.NumSamples(); i++) {
    p.vectors.row(i) = d.vectors.row(perm[i]);
    p.labels[i] = d.labels[perm[i]];
  }
  NdaOptions o;
  o.k = 4;
  CHECK(oracle::RelErr(WithinScatter(p), WithinScatter(d)) < 1e-12);
  CHECK(oracle::RelErr(NdaBetweenScatter(p, o), NdaBetweenScatter(d, o)) < 1e-12);
  CHECK(oracle::RelErr(LdaBetweenScatter(p), LdaBetweenScatter(d)) < 1e-12);
}

TEST_CASE("compute_projection") {
  Rng rng(7);
  Matrix sb = oracle::RandomSpd(&rng, 4);
  Projection p = ComputeProjection(Matrix::Identity(4, 4), sb, 4, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sb);
  for (int i = 0; i < 4; i++) {
    CHECK(p.eigenvalues(i) == doctest::Approx(es.eigenvalues()(3 - i)).epsilon(1e-10));
    CHECK(std::abs(std::abs(p.basis.col(i).dot(es.eigenvectors().col(3 - i))) - 1.0) < 1e-10);
  }

  Matrix d2 = Matrix::Zero(2, 2);
  d2.diagonal() << 4, 1;
  Projection q = ComputeProjection(Matrix::Identity(2, 2), d2, 1);
  CHECK(q.basis.rows() == 2);
  CHECK(q.basis.cols() == 1);
  CHECK(std::abs(q.basis(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(q.basis(1, 0)) < 1e-12);
  CHECK(q.eigenvalues(0) == doctest::Approx(4.0).epsilon(1e-5));

  Matrix sw = oracle::RandomSpd(&rng, 6), sb6 = oracle::RandomSpd(&rng, 6);
  Projection r = ComputeProjection(sw, sb6, 6, 0.0);
  for (int i = 0; i < 6; i++) {
    Vector v = r.basis.col(i);
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    CHECK((sb6 * v - r.eigenvalues(i) * sw * v).norm() < 1e-8);
    Eigen::Index at;
    v.cwiseAbs().maxCoeff(&at);
    CHECK(v(at) > 0.0);
    if (i > 0) CHECK(r.eigenvalues(i) <= r.eigenvalues(i - 1));
  }

  Matrix neg = -Matrix::Identity(3, 3);
  CHECK_KIND(ComputeProjection(neg, Matrix::Identity(3, 3), 2), kNumeric);
  CHECK_KIND(ComputeProjection(Matrix::Identity(3, 3), Matrix::Identity(3, 3), 4), kContract);
  CHECK_KIND(ComputeProjection(Matrix::Identity(3, 3), Matrix::Identity(2, 2), 1), kShape);
}

TEST_CASE("compute_lda") {
  Rng rng(8);
  Matrix x(400, 2);
  std::vector<int> lab;
  for (int i = 0; i < 400; i++) {
    int c = i % 2;
    x(i, 0) = (c == 0 ? -1.0 : 1.0) + 0.3 * rng.Normal();
    x(i, 1) = 0.3 * rng.Normal();
    lab.push_back(c);
  }
  Projection p = ComputeLda(Make(x, lab), 1);
  CHECK(std::acos(std::min(1.0, std::abs(p.basis(0, 0)))) < 1e-2);

  LabeledVectors d = Clusters(&rng, 4, 10, 8, 3.0, 1.0);
  CHECK(CountAbove(ComputeLda(d, 8).eigenvalues, 1e-8) <= 3);

  // Pairs mirrored around a shared centre give identical class means.
  Matrix m(12, 3);
  std::vector<int> ml;
  for (int c = 0; c < 3; c++)
    for (int i = 0; i < 2; i++) {
      Vector e = rng.NormalVector(3);
      m.row(c * 4 + 2 * i) = e.transpose();
      m.row(c * 4 + 2 * i + 1) = -e.transpose();
      ml.push_back(c);
      ml.push_back(c);
    }
  Projection z = ComputeLda(Make(m, ml), 3);
  CHECK(z.eigenvalues.cwiseAbs().maxCoeff() <= 1e-8 * WithinScatter(Make(m, ml)).trace());
}

TEST_CASE("compute_nda: rank beyond C-1") {
  Rng rng(9);
  // Three classes, each a mixture of two far-apart modes.
  Matrix x(60, 10);
  std::vector<int> lab;
  std::vector<Vector> modes;
  for (int i = 0; i < 6; i++) modes.push_back(4.0 * rng.NormalVector(10));
  for (int i = 0; i < 60; i++) {
    int c = i % 3, mode = 2 * c + (i / 3) % 2;
    x.row(i) = (modes[mode] + 0.5 * rng.NormalVector(10)).transpose();
    lab.push_back(c);
  }
  NdaOptions o;
  o.k = 5;
  Projection nda = ComputeNda(Make(x, lab), o, 5);
  CHECK(CountAbove(nda.eigenvalues, 1e-8) == 5);
  Projection lda = ComputeLda(Make(x, lab), 10);
  CHECK(CountAbove(lda.eigenvalues, 1e-8) <= 2);
  CHECK(CountAbove(ComputeNda(Make(x, lab), o, 10).eigenvalues, 1e-8) > 2);
}

TEST_CASE("projection with sw = I preserves cosine ordering") {
  Rng rng(10);
  Projection p = ComputeProjection(Matrix::Identity(5, 5), oracle::RandomSpd(&rng, 5), 5, 0.0);
  Matrix x = oracle::RandomMatrix(&rng, 20, 5);
  Matrix y = Project(x, p);
  std::vector<int> pool(19);
  std::iota(pool.begin(), pool.end(), 1);
  CHECK(oracle::SortedByCosine(x, 0, pool) == oracle::SortedByCosine(y, 0, pool));
}

TEST_CASE("project") {
  Rng rng(11);
  Matrix x = oracle::RandomMatrix(&rng, 7, 4);
  Projection id{Matrix::Identity(4, 4), Vector::Ones(4)};
  CHECK(Project(x, id) == x);
  Projection e1{Matrix(Vector::Unit(4, 0)), Vector::Ones(1)};
  CHECK(Project(x, e1).col(0) == x.col(0));
  Projection r{oracle::RandomMatrix(&rng, 4, 3), Vector::Ones(3)};
  Matrix y = Project(x, r);
  for (int i = 0; i < 7; i++)
    for (int j = 0; j < 3; j++) {
      double dot = 0.0;
      for (int k = 0; k < 4; k++) dot += x(i, k) * r.basis(k, j);
      CHECK(std::abs(y(i, j) - dot) <= 1e-12);
    }
  CHECK((Project(Vector(x.row(2).transpose()), r) - y.row(2).transpose()).norm() <= 1e-12);
  CHECK_KIND(Project(oracle::RandomMatrix(&rng, 2, 3), r), kShape);
  CHECK_KIND(Project(rng.NormalVector(5), r), kShape);
}

TEST_CASE("da model file") {
  Rng rng(12);
  DaModel m;
  m.method = DaMethod::kLda;
  m.k = 0;
  m.projection = {oracle::RandomMatrix(&rng, 5, 2), Vector::LinSpaced(2, 2.0, 1.0)};
  std::string dir = testutil::TempDir("da");
  ArtifactHeader h;
  h.parent = 44;
  WriteDaModel(dir + "/lda", m, h);
  m.method = DaMethod::kNda;
  m.k = 10;
  m.alpha = 2.0;
  WriteDaModel(dir + "/nda", m, h);
  ArtifactHeader got;
  DaModel a = ReadDaModel(dir + "/lda", &got), b = ReadDaModel(dir + "/nda");
  CHECK(got.parent == 44);
  CHECK(a.method == DaMethod::kLda);
  CHECK(b.method == DaMethod::kNda);
  CHECK(b.k == 10);
  CHECK(b.alpha == 2.0);
  CHECK(b.projection.basis == m.projection.basis);
  CHECK(ReadFileBytes(dir + "/lda") != ReadFileBytes(dir + "/nda"));
}
