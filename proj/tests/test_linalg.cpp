#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "relaylab/channel.hpp"
#include "relaylab/linalg.hpp"
#include "relaylab/rng.hpp"

using namespace relaylab;

namespace {

CMat random_matrix(int rows, int cols, std::uint64_t stream) {
  SeededRng rng(11ULL, stream);
  return sample_channel(rows, cols, rng);
}

}  // namespace

TEST_CASE("eigensystem is descending, unitary, and reconstructs") {
  for (int n : {1, 2, 3, 5, 8}) {
    const CMat a = gram(random_matrix(n + 1, n, 100 + n));
    const Eigensystem es = hermitian_eig(a);
    for (int i = 0; i + 1 < n; ++i) {
      REQUIRE(es.values(i) >= es.values(i + 1));
    }
    REQUIRE(es.values(n - 1) >= 0.0);
    const CMat eye = CMat::Identity(n, n);
    REQUIRE((es.vectors.adjoint() * es.vectors - eye).norm() < 1e-10);
    const CMat rebuilt =
        es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
    REQUIRE((rebuilt - a).norm() <= 1e-10 * (1.0 + a.norm()));
  }
}

TEST_CASE("eigenvalues scale linearly with the matrix") {
  const CMat a = gram(random_matrix(4, 4, 7));
  const Eigensystem base = hermitian_eig(a);
  for (double c : {1e-6, 0.5, 3.0, 1e8}) {
    const Eigensystem scaled = hermitian_eig(CMat(c * a));
    for (int i = 0; i < 4; ++i) {
      REQUIRE(std::abs(scaled.values(i) - c * base.values(i)) <=
              1e-10 * c * base.values(0));
    }
  }
}

TEST_CASE("wide-channel gram matrices expose their rank deficiency") {
  // H is N_R x N_S with N_S > N_R: H^H H has exactly N_S - N_R null modes,
  // reported as exact zeros after clamping.
  const int ns = 5, nr = 3;
  const CMat a = gram(random_matrix(nr, ns, 12));
  const Eigensystem es = hermitian_eig(a);
  for (int i = 0; i < nr; ++i) REQUIRE(es.values(i) > 1e-6);
  for (int i = nr; i < ns; ++i) REQUIRE(es.values(i) == 0.0);
}

TEST_CASE("degeneracy gate rejects singular and keeps regular systems") {
  REQUIRE_NOTHROW(require_invertible(1e-3, 1e3));
  REQUIRE_THROWS_AS(require_invertible(0.0, 1.0), SingularSystem);
  REQUIRE_THROWS_AS(require_invertible(-1.0, 1.0), SingularSystem);
  REQUIRE_THROWS_AS(require_invertible(1e-15, 10.0), SingularSystem);
  const double nan = std::nan("");
  REQUIRE_THROWS_AS(require_invertible(nan, 1.0), SingularSystem);

  const CMat singular = CMat::Zero(2, 2);
  REQUIRE_THROWS_AS(inv_hpd(singular), SingularSystem);
}

TEST_CASE("hpd inverse and inverse square root invert") {
  for (int n : {1, 2, 4, 6}) {
    CMat a = gram(random_matrix(n + 2, n, 200 + n));
    a += 0.1 * CMat::Identity(n, n);
    const CMat eye = CMat::Identity(n, n);
    REQUIRE((inv_hpd(a) * a - eye).norm() < 1e-10);
    const CMat w = inv_sqrt_hpd(a);
    REQUIRE((w * a * w - eye).norm() < 1e-10);
    REQUIRE((w - w.adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("hermitize returns the hermitian part exactly") {
  const CMat a = random_matrix(4, 4, 55);
  const CMat h = hermitize(a);
  REQUIRE((h - h.adjoint()).norm() == 0.0);
  REQUIRE((h - (a + a.adjoint()) / 2.0).norm() == 0.0);
}
