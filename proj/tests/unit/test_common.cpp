#include <doctest.h>

#include <set>

#include "eoqt/common.hpp"
#include "eoqt/engine/rng.hpp"
#include "helpers.hpp"

using namespace eoqt;

TEST_CASE("philox known-answer vectors") {
    using B = Philox4x32::Block;
    CHECK(Philox4x32::bijection({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        seen.insert(x);
        seen.insert(c.next_u64());
        seen.insert(d.next_u64());
    }
    CHECK(seen.size() == 300);
}

TEST_CASE("rng moments") {
    Rng r(1, 0);
    const int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        su2 += u * u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(su2 / n - 1.0 / 3) < 5 * std::sqrt(4.0 / 45 / n));
    CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
    CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));
}

TEST_CASE("pauli algebra and kron ordering") {
    const Mat x = ops::sigma_x(), y = ops::sigma_y(), z = ops::sigma_z();
    CHECK((x * y - kI * z).norm() < 1e-15);
    const Mat k = ops::kron(ops::ket_bra(2, 1, 0), ops::identity(3));
    CHECK(k(3, 0) == Complex(1.0));
    CHECK(k.rows() == 6);
}

TEST_CASE("matrix exponentials") {
    std::mt19937_64 g(11);
    const Mat h = testutil::random_hermitian(g, 4);
    const Mat u = unitary_exp(h, 0.7);
    CHECK((u * u.adjoint() - Mat::Identity(4, 4)).norm() < 1e-12);
    CHECK((u - matrix_exp(Mat(-kI * 0.7 * h))).norm() < 1e-11);
    CHECK((hermitian_exp(h, -0.3) - matrix_exp(Mat(-0.3 * h))).norm() < 1e-11);
}

TEST_CASE("scaled unitary detection") {
    double s2 = 0;
    CHECK(is_scaled_unitary(2.0 * ops::sigma_y(), &s2));
    CHECK(s2 == doctest::Approx(4.0));
    CHECK(!is_scaled_unitary(ops::ket_bra(2, 1, 1)));
    CHECK(is_hermitian(ops::sigma_y()));
    CHECK(!is_hermitian(ops::ket_bra(2, 0, 1)));
}

TEST_CASE("entropies") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    RVec p(4);
    p << 0.25, 0.25, 0.25, 0.25;
    CHECK(shannon_bits(p) == doctest::Approx(2.0));
}
