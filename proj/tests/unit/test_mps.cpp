#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "eoqt/dense/dense_state.hpp"
#include "eoqt/tensor/mps.hpp"
#include "helpers.hpp"

using namespace eoqt;
using testutil::random_matrix;
using testutil::random_unitary;
using testutil::random_vector;
using testutil::state_distance;

namespace {

void check_right_canonical(const MpsState& s) {
    for (int j = 0; j < s.size(); ++j) {
        const auto m = s.site(j).grouped_right();
        CHECK((m * m.adjoint() - Mat::Identity(m.rows(), m.rows())).norm() < 1e-10);
    }
}

void check_lambdas(const MpsState& s, const dense::DenseState& ref) {
    for (int b = 1; b < s.size(); ++b) {
        Eigen::JacobiSVD<Mat> svd(ref.coefficient_matrix(b));
        const RVec sv = svd.singularValues();
        const RVec& lam = s.lambda(b);
        REQUIRE(lam.size() <= sv.size());
        for (int k = 0; k < lam.size(); ++k) CHECK(lam[k] == doctest::Approx(sv[k]).epsilon(1e-9));
        CHECK(std::abs(lam.squaredNorm() - 1.0) < 1e-12);
    }
}

}  // namespace

TEST_CASE("site tensor groupings share storage") {
    SiteTensor t(2, 3, 4);
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 3; ++i)
            for (int b = 0; b < 4; ++b) t(a, i, b) = Complex(100 * a + 10 * i + b, 0);
    CHECK(t.grouped_left()(1 + 2 * 2, 3) == Complex(123, 0));
    CHECK(t.grouped_right()(1, 2 + 3 * 3) == Complex(123, 0));
    CHECK(t.slice(2)(1, 3) == Complex(123, 0));
}

TEST_CASE("apply_physical contracts the physical leg") {
    std::mt19937_64 g(1);
    SiteTensor t(2, 3, 2);
    t.data = random_matrix(g, 6, 2);
    const Mat op = random_matrix(g, 3, 3);
    SiteTensor u = t;
    u.apply_physical(op);
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 3; ++i)
            for (int b = 0; b < 2; ++b) {
                Complex ref = 0;
                for (int k = 0; k < 3; ++k) ref += op(i, k) * t(a, k, b);
                CHECK(std::abs(u(a, i, b) - ref) < 1e-12);
            }
}

TEST_CASE("state vector round trip and canonical form") {
    std::mt19937_64 g(2);
    for (int d : {2, 3}) {
        const int n = d == 2 ? 5 : 4;
        const Vec psi = random_vector(g, static_cast<int>(std::pow(d, n)));
        MpsState s = MpsState::from_state_vector(psi, n, d, {256, 1e-14, 0.0});
        CHECK(s.is_canonical());
        CHECK(state_distance(s.to_dense(), psi) < 1e-10);
        check_right_canonical(s);
        check_lambdas(s, dense::DenseState(psi, n, d));
    }
}

TEST_CASE("product state has trivial bonds") {
    MpsState s = MpsState::product_state({Vec::Unit(2, 0), Vec::Unit(2, 1), Vec::Unit(2, 1)});
    CHECK(s.max_bond_dim() == 1);
    CHECK(s.entanglement_entropy(1) == doctest::Approx(0.0));
    CHECK(s.expectation(1, ops::sigma_z()).real() == doctest::Approx(-1.0));
}

TEST_CASE("two-site gates agree with the dense oracle") {
    std::mt19937_64 g(3);
    for (int d : {2, 3}) {
        const int n = 5;
        std::vector<Vec> kets(n);
        for (auto& k : kets) k = random_vector(g, d);
        MpsState s = MpsState::product_state(kets, {512, 1e-14, 0.0});
        dense::DenseState ref = dense::DenseState::product(kets);
        for (int layer = 0; layer < 6; ++layer)
            for (int j = layer % 2; j + 1 < n; j += 2) {
                const Mat u = random_unitary(g, d * d);
                s.apply_two_site_gate(j, u);
                ref.apply_two_site(j, u);
            }
        CHECK(state_distance(s.to_dense(), ref.vector()) < 1e-10);
        check_right_canonical(s);
        check_lambdas(s, ref);
        for (int b = 1; b < n; ++b) CHECK(s.entanglement_entropy(b) == doctest::Approx(ref.entanglement_entropy(b)).epsilon(1e-9));
        CHECK(s.discarded_weight() < 1e-20);
    }
}

TEST_CASE("truncation respects chi_max and reports discarded weight") {
    std::mt19937_64 g(4);
    const int n = 8;
    MpsState s = MpsState::from_state_vector(random_vector(g, 1 << n), n, 2, {4, 1e-14, 0.0});
    CHECK(s.max_bond_dim() <= 4);
    CHECK(s.discarded_weight() > 0.0);
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
    const double before = s.discarded_weight();
    const double w = s.apply_two_site_gate(3, random_unitary(g, 4));
    CHECK(w >= 0.0);
    CHECK(s.discarded_weight() == doctest::Approx(before + w));
}

TEST_CASE("non-unitary single-site operators keep sequential expectations exact") {
    std::mt19937_64 g(5);
    const int n = 5, d = 2;
    const Vec psi = random_vector(g, 1 << n);
    MpsState s = MpsState::from_state_vector(psi, n, d, {64, 1e-14, 0.0});
    dense::DenseState ref(psi, n, d);
    for (int step = 0; step < 12; ++step) {
        const int j = static_cast<int>(g() % n);
        const Mat op = random_matrix(g, d, d);
        s.apply_single_site(j, op);
        ref.apply_single_site(j, op);
        CHECK(!s.is_canonical());
        const int k = static_cast<int>(g() % n);
        const Mat obs = random_matrix(g, d, d);
        CHECK(std::abs(s.expectation(k, obs) - ref.expectation(k, obs)) < 1e-10);
        CHECK(std::abs(s.norm_squared() - 1.0) < 1e-10);
    }
    CHECK(state_distance(s.to_dense(), ref.vector()) < 1e-10);
    s.canonicalize();
    CHECK(s.is_canonical());
    check_right_canonical(s);
    check_lambdas(s, ref);
}

TEST_CASE("unitary single-site operators stay canonical") {
    std::mt19937_64 g(6);
    MpsState s = MpsState::from_state_vector(random_vector(g, 16), 4, 2);
    const RVec lam = s.lambda(2);
    s.apply_single_site(2, random_unitary(g, 2));
    CHECK(s.is_canonical());
    CHECK((s.lambda(2) - lam).norm() < 1e-12);
    s.apply_single_site(1, 3.0 * ops::sigma_x());
    CHECK(s.is_canonical());
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("gates in mixed gauge are rejected") {
    MpsState s = MpsState::product_state({Vec::Unit(2, 0), Vec::Unit(2, 0)});
    s.apply_single_site(0, ops::ket_bra(2, 0, 0) + 0.5 * ops::ket_bra(2, 1, 1));
    CHECK_THROWS_AS(s.apply_two_site_gate(0, Mat::Identity(4, 4)), NonCanonicalError);
    CHECK_THROWS_AS(s.lambda(1), NonCanonicalError);
}

TEST_CASE("reduced density matrix and products match dense") {
    std::mt19937_64 g(7);
    const int n = 4, d = 3;
    const Vec psi = random_vector(g, 81);
    MpsState s = MpsState::from_state_vector(psi, n, d);
    const Mat rho = psi * psi.adjoint();
    for (int j = 0; j < n; ++j) {
        const Mat ref = dense::partial_trace_keep(rho, {j}, n, d);
        CHECK((s.reduced_density_matrix(j) - ref).norm() < 1e-10);
    }
    s.canonicalize();
    const Mat a = random_matrix(g, d, d), b = random_matrix(g, d, d);
    const Complex ref = psi.dot(dense::embed_two(a, 0, b, 2, n, d) * psi);
    CHECK(std::abs(s.expectation_product({{2, b}, {0, a}}) - ref) < 1e-10);
    CHECK_THROWS(s.expectation_product({{1, a}, {1, b}}));
}

TEST_CASE("schmidt operator blocks agree with the dense oracle in both gauges") {
    std::mt19937_64 g(8);
    const int n = 4, d = 2;
    for (int trial = 0; trial < 6; ++trial) {
        const Vec psi = random_vector(g, 16);
        MpsState s = MpsState::from_state_vector(psi, n, d);
        dense::DenseState ref(psi, n, d);
        if (trial % 2 == 1) {
            const Mat op = random_matrix(g, d, d);
            const int j = static_cast<int>(g() % n);
            s.apply_single_site(j, op);
            ref.apply_single_site(j, op);
            s.move_center(static_cast<int>(g() % n));
        }
        for (int cut = 1; cut < n; ++cut)
            for (int site = 0; site < n; ++site) {
                const Mat c = random_matrix(g, d, d);
                const std::vector<Mat> ops{c, c.adjoint() * c};
                const SchmidtBlocks mb = schmidt_operator_blocks(s, cut, site, ops);
                const dense::DenseSchmidt db = dense::dense_schmidt_blocks(ref, cut, site, ops);
                CHECK(mb.op_right == (site >= cut));
                const int k = static_cast<int>(mb.weights.size());
                REQUIRE(db.weights.size() >= k);
                for (int i = 0; i < k; ++i) CHECK(mb.weights[i] == doctest::Approx(db.weights[i]).epsilon(1e-9));
                for (size_t o = 0; o < ops.size(); ++o) {
                    // Schmidt vectors carry a free phase each, so compare moduli and the diagonal.
                    const Mat& x = mb.blocks[o];
                    const Mat y = db.blocks[o].topLeftCorner(k, k);
                    CHECK((x.cwiseAbs() - y.cwiseAbs()).norm() < 1e-9);
                    CHECK((x.diagonal() - y.diagonal()).norm() < 1e-9);
                }
            }
    }
}

TEST_CASE("checkpoint round trip") {
    std::mt19937_64 g(9);
    MpsState s = MpsState::from_state_vector(random_vector(g, 27), 3, 3, {7, 1e-12, 0.0});
    const auto path = std::filesystem::temp_directory_path() / "eoqt_checkpoint_test.bin";
    s.write_checkpoint(path.string());
    MpsState t = MpsState::read_checkpoint(path.string());
    std::filesystem::remove(path);
    CHECK(t.size() == 3);
    CHECK(t.local_dim() == 3);
    CHECK(t.truncation().chi_max == 7);
    CHECK((t.to_dense() - s.to_dense()).norm() < 1e-15);
    for (int b = 1; b < 3; ++b) CHECK((t.lambda(b) - s.lambda(b)).norm() == 0.0);
}

TEST_CASE("corrupt checkpoint is rejected") {
    const auto path = std::filesystem::temp_directory_path() / "eoqt_checkpoint_bad.bin";
    {
        std::FILE* f = std::fopen(path.string().c_str(), "wb");
        std::fputs("NOTMPS00", f);
        std::fclose(f);
    }
    CHECK_THROWS(MpsState::read_checkpoint(path.string()));
    std::filesystem::remove(path);
}
