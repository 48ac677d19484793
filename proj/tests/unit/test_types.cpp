#include "expect.hpp"
#include "fosl/io.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace fosl;

namespace {

RawSamples raw_samples(int m, int r, double rate) {
  RawSamples raw;
  for (int k = 0; k < m; ++k) raw.timestamps.push_back(k / rate);
  raw.labels = fixture::labels(r);
  raw.angles = Matrix::Random(m, r);
  raw.speeds = Matrix::Random(m, r);
  return raw;
}

}  // namespace

TEST_CASE("validate_window accepts 1200 samples of 29 machines") {
  auto w = validate_window(raw_samples(1200, 29, 30.0), 30.0);
  CHECK(w.samples() == 1200);
  CHECK(w.machines() == 29);
  CHECK(w.sample_rate() == 30.0);
  CHECK(w.states().cols() == 58);
}

TEST_CASE("validate_window rejects malformed input") {
  CHECK(error_of([] { validate_window(raw_samples(3, 2, 30.0), 30.0); }) ==
        ErrorCode::TooShort);

  auto gap = raw_samples(10, 2, 30.0);
  for (std::size_t k = 2; k < gap.timestamps.size(); ++k) gap.timestamps[k] += 1.0 / 30.0;
  CHECK(error_of([&] { validate_window(gap, 30.0); }) == ErrorCode::NonUniformSampling);

  auto ragged = raw_samples(10, 2, 30.0);
  ragged.speeds = Matrix::Zero(10, 3);
  CHECK(error_of([&] { validate_window(ragged, 30.0); }) == ErrorCode::ShapeMismatch);

  auto dup = raw_samples(10, 2, 30.0);
  dup.labels = {"G1", "G1"};
  CHECK(error_of([&] { validate_window(dup, 30.0); }) == ErrorCode::InvalidArgument);

  auto nan = raw_samples(10, 2, 30.0);
  nan.angles(4, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_of([&] { validate_window(nan, 30.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("mean-centered flag is recorded, not applied") {
  auto raw = raw_samples(20, 2, 30.0);
  raw.angles.array() += 5.0;
  auto w = validate_window(raw, 30.0);
  CHECK_FALSE(w.mean_centered());
  CHECK(w.angles().mean() > 4.0);

  Matrix a = Matrix::Random(20, 2);
  Matrix s = Matrix::Random(20, 2);
  a.rowwise() -= a.colwise().mean();
  s.rowwise() -= s.colwise().mean();
  CHECK(fixture::window(a, s).mean_centered());
}

TEST_CASE("window serialization round-trips bit-exactly") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(50, 3), s(50, 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = g(rng) * std::pow(10.0, trial - 3);
      s.data()[i] = g(rng) * 1e-7;
    }
    auto w = fixture::window(a, s, 60.0);
    std::stringstream buf;
    write_window_csv(buf, w);
    auto back = parse_pmu_csv(buf).window;
    CHECK(back.angles() == w.angles());
    CHECK(back.speeds() == w.speeds());
    CHECK(back.timestamps() == w.timestamps());
    CHECK(back.labels() == w.labels());
    CHECK(back.sample_rate() == w.sample_rate());
  }
}

TEST_CASE("row slices, permutations and scaling") {
  Matrix a = Matrix::Random(8, 3), s = Matrix::Random(8, 3);
  auto w = fixture::window(a, s);
  auto head = w.rows(0, 3);
  CHECK(head.samples() == 3);
  CHECK(head.angles() == a.topRows(3));
  CHECK(error_of([&] { w.rows(6, 3); }) == ErrorCode::InvalidArgument);

  auto p = w.permuted({2, 0, 1});
  CHECK(p.labels() == std::vector<std::string>{"M3", "M1", "M2"});
  CHECK(p.speeds().col(0) == s.col(2));

  auto sc = w.scaled(2.0);
  CHECK(sc.angles() == 2.0 * a);
}

TEST_CASE("candidate sets are sorted and deduplicated") {
  FrequencyCandidateSet c({0.5, 0.2}, 0.025, 30.0);
  CHECK(c.frequencies() == std::vector<double>{0.2, 0.5});
  CHECK(error_of([] { FrequencyCandidateSet({0.2, 0.21}, 0.025, 30.0); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_of([] { FrequencyCandidateSet({15.0}, 0.025, 30.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("coefficient matrix block layout") {
  const int r = 2, n = 2;
  Matrix v = Matrix::Zero(1 + 2 * r + 2 * n, 2 * r);
  v(CoefficientMatrix::sin_row(r, 1), r + 1) = 3.0;
  v(CoefficientMatrix::sin_row(r, 1) + 1, r + 1) = 4.0;
  CoefficientMatrix xi(v, r, {0.2, 0.4});
  CHECK(xi.sin_coefficient(1, 1) == 3.0);
  CHECK(xi.cos_coefficient(1, 1) == 4.0);
  CHECK(xi.bias_block().rows() == 1);
  CHECK(xi.jacobian_block().rows() == 2 * r);
  CHECK(xi.forcing_block().rows() == 2 * n);
  CHECK(xi.equation_major().rows() == 2 * r);
  CHECK(error_of([&] { CoefficientMatrix(v, 3, {0.2}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("zeta from any coefficient matrix is non-negative") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 1 + trial % 5, n = trial % 4;
    Matrix v(1 + 2 * r + 2 * n, 2 * r);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
    CoefficientMatrix xi(v, r, std::vector<double>(n, 0.1));
    auto z = ZetaIndex::from_coefficients(xi, fixture::labels(r));
    CHECK((z.values().array() >= 0.0).all());
  }
}

TEST_CASE("verdict names round-trip") {
  for (auto v : {Verdict::Located, Verdict::NoSourceLocated, Verdict::NoCandidates,
                 Verdict::Unlocatable}) {
    CHECK(verdict_from_string(to_string(v)) == v);
  }
  CHECK_FALSE(verdict_from_string("maybe").has_value());
}
