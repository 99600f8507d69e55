#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qsample/quaternion.hpp"
#include "test_support.hpp"

using namespace qsample;
using qsample::testing::random_quaternion;
using qsample::testing::random_unit;

namespace {

bool close(const Quaternion& a, const Quaternion& b, double tol = 1e-14) {
  return max_abs_diff(a, b) <= tol;
}

const Quaternion I = Quaternion::i();
const Quaternion J = Quaternion::j();
const Quaternion K = Quaternion::k();

}  // namespace

TEST_CASE("multiplication table") {
  CHECK(close(I * J, K));
  CHECK(close(J * K, I));
  CHECK(close(K * I, J));
  CHECK(close(J * I, -K));
  CHECK(close(I * I, Quaternion(-1.0)));
  CHECK(close(I * J * K, Quaternion(-1.0)));
}

TEST_CASE("mul examples") {
  std::mt19937_64 rng(1);
  const auto q = random_quaternion(rng);
  CHECK(close(q * Quaternion(1.0), q));
  CHECK(close(mul(Quaternion(1, 1, 0, 0), Quaternion(1, 0, 1, 0)), Quaternion(1, 1, 1, 1)));
}

TEST_CASE("conj examples") {
  CHECK(close(conj(Quaternion(1, 1, 1, 1)), Quaternion(1, -1, -1, -1)));
  std::mt19937_64 rng(2);
  const auto q = random_quaternion(rng);
  CHECK(close(conj(conj(q)), q));
  CHECK(close(conj(I * J), -K));
  CHECK(close(conj(J) * conj(I), -K));
}

TEST_CASE("inverse examples") {
  CHECK(close(inverse(Quaternion(1.0)), Quaternion(1.0)));
  CHECK(close(inverse(I), -I));
  CHECK(close(inverse(Quaternion(1, 1, 0, 0)), Quaternion(0.5, -0.5, 0, 0)));
  CHECK_THROWS_AS(inverse(Quaternion{}), std::domain_error);
  CHECK_THROWS_AS(inverse(Quaternion(1e-301)), std::domain_error);
  CHECK_NOTHROW(inverse(Quaternion(2e-300)));
}

TEST_CASE("canonical representative") {
  auto c = canonical_complex_representative(Quaternion(1, 0, 1, 0));
  CHECK(c.real() == doctest::Approx(1.0));
  CHECK(c.imag() == doctest::Approx(1.0));
  c = canonical_complex_representative(Quaternion(3.0));
  CHECK(c.real() == 3.0);
  CHECK(c.imag() == 0.0);

  // i + j + k is similar to sqrt(3) i: u maps the unit axis (i+j+k)/sqrt(3)
  // onto i. Rotation by angle t about axis a is q -> u q u^-1 with
  // u = cos(t/2) + a sin(t/2); take a = normalize((i+j+k) x i) direction.
  const Quaternion q(0, 1, 1, 1);
  c = canonical_complex_representative(q);
  CHECK(c.real() == doctest::Approx(0.0));
  CHECK(c.imag() == doctest::Approx(std::sqrt(3.0)));
  const double ax = 0.0, ay = 1.0 / std::sqrt(2.0), az = -1.0 / std::sqrt(2.0);
  const double angle = std::acos(1.0 / std::sqrt(3.0));
  const Quaternion u(std::cos(angle / 2), ax * std::sin(angle / 2), ay * std::sin(angle / 2),
                     az * std::sin(angle / 2));
  CHECK(close(u * q * inverse(u), Quaternion(0, std::sqrt(3.0), 0, 0), 1e-12));
}

TEST_CASE("canonical representative is similarity invariant") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto q = random_quaternion(rng);
    const auto u = random_unit(rng);
    const auto a = canonical_complex_representative(q);
    const auto b = canonical_complex_representative(u * q * inverse(u));
    CHECK(std::abs(a - b) <= 1e-12);
  }
}

TEST_CASE("cis") {
  CHECK(close(cis(I, 0.0), Quaternion(1.0)));
  CHECK(close(cis(I, std::numbers::pi / 2), I, 1e-15));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(-10.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double theta = th(rng);
    CHECK(close(cis(J, theta) * cis(J, -theta), Quaternion(1.0), 1e-15));
    CHECK(norm(cis(K, theta)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(close(cis_i(0.3), cis(I, 0.3)));
  CHECK(close(cis_j(0.3), cis(J, 0.3)));
  CHECK_THROWS_AS(cis(Quaternion(0, 2, 0, 0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cis(Quaternion(0.1, 1, 0, 0) / norm(Quaternion(0.1, 1, 0, 0)), 1.0),
                  std::invalid_argument);
}

TEST_CASE("randomized algebra") {
  std::mt19937_64 rng(5);
  double worst_norm = 0.0, worst_assoc = 0.0, worst_conj = 0.0, worst_inv = 0.0, swapped = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto p = random_quaternion(rng, -10, 10);
    const auto q = random_quaternion(rng, -10, 10);
    const auto r = random_quaternion(rng, -10, 10);
    worst_norm = std::max(worst_norm, std::fabs(norm(p * q) - norm(p) * norm(q)) / (norm(p) * norm(q)));
    worst_assoc = std::max(worst_assoc, max_abs_diff((p * q) * r, p * (q * r)) /
                                            (norm(p) * norm(q) * norm(r)));
    worst_conj = std::max(worst_conj, max_abs_diff(conj(p * q), conj(q) * conj(p)));
    // the unswapped order must fail, or the check above proves nothing
    swapped = std::max(swapped, max_abs_diff(conj(p * q), conj(p) * conj(q)) / (norm(p) * norm(q)));
    worst_inv = std::max(worst_inv, norm(q * inverse(q) - Quaternion(1.0)));
    worst_inv = std::max(worst_inv, norm(inverse(q) * q - Quaternion(1.0)));
  }
  CHECK(worst_norm <= 1e-12);
  CHECK(worst_assoc <= 1e-12);
  CHECK(worst_conj <= 1e-13);
  CHECK(swapped >= 0.5);
  CHECK(worst_inv <= 1e-12);
}

TEST_CASE("canonical similarity") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 1000; ++t) {
    const auto q = random_quaternion(rng);
    const auto u = canonical_similarity(q);
    const auto c = canonical_complex_representative(q);
    CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(close(u * Quaternion(c.real(), c.imag(), 0, 0) * inverse(u), q, 1e-14));
  }
  CHECK(close(canonical_similarity(Quaternion(2, 3, 0, 0)), Quaternion(1.0)));
  CHECK(close(canonical_similarity(Quaternion(5.0)), Quaternion(1.0)));
  const Quaternion neg(1, -2, 0, 0);
  const auto u = canonical_similarity(neg);
  CHECK(close(u * Quaternion(1, 2, 0, 0) * inverse(u), neg, 1e-15));
}
