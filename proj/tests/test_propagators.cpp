#include <doctest.h>

#include <nnreach/errors.hpp>
#include <nnreach/propagators.hpp>
#include <nnreach/rng.hpp>

#include "test_util.hpp"

using namespace nnreach;

TEST_CASE("ibp on the identity net returns the input box") {
    Network net = testutil::identity_net(2);
    Vec lo(2), hi(2);
    lo << -1.0, -1.0;
    hi << 1.0, 1.0;
    IbpResult r = ibp(net, Hyperrect(lo, hi));
    CHECK(r.out.lower.isApprox(lo));
    CHECK(r.out.upper.isApprox(hi));
}

TEST_CASE("ibp interval sum for one affine layer") {
    Mat W(1, 2);
    W << 1.0, 1.0;
    Network net = testutil::affine_net(W, Vec::Zero(1));
    IbpResult r = ibp(net, testutil::unit_box(2));
    CHECK(r.out.lower[0] == doctest::Approx(0.0));
    CHECK(r.out.upper[0] == doctest::Approx(2.0));
}

TEST_CASE("ibp monte carlo soundness on a random net") {
    Network net = random_network({2, 10, 10, 2}, 4);
    Hyperrect in = testutil::unit_box(2);
    IbpResult r = ibp(net, in);
    Rng rng(8);
    for (int k = 0; k < 10000; ++k) {
        Vec x = rng.point(in.lower, in.upper);
        Vec y = net.forward(x);
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(y[i] >= r.out.lower[i]);
            CHECK(y[i] <= r.out.upper[i]);
        }
    }
}

TEST_CASE("ibp is monotone in the input set") {
    Network net = random_network({2, 8, 2}, 12);
    Vec lo(2), hi(2);
    lo << -0.5, -0.5;
    hi << 0.5, 0.5;
    IbpResult inner = ibp(net, Hyperrect(lo, hi));
    IbpResult outer = ibp(net, Hyperrect(2.0 * lo, 2.0 * hi));
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(outer.out.lower[i] <= inner.out.lower[i]);
        CHECK(outer.out.upper[i] >= inner.out.upper[i]);
    }
}

TEST_CASE("crown is exact on affine nets") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        Mat W(2, 3);
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) W(i, j) = rng.uniform(-2, 2);
        Vec b = rng.point(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
        Network net = testutil::affine_net(W, b);
        AffineBoundPair ab = crown_relax(net, testutil::unit_box(3));
        CHECK(ab.Psi.isApprox(W, 1e-12));
        CHECK(ab.Phi.isApprox(W, 1e-12));
        CHECK(ab.alpha.isApprox(b, 1e-12));
        CHECK(ab.beta.isApprox(b, 1e-12));

        // concretized box equals the exact interval image
        OutputBounds ob = propagate(PropagatorKind::CROWN, net, testutil::unit_box(3),
                                    Specification::identity(2));
        Vec ctr = Vec::Constant(3, 0.5);
        Vec rad = Vec::Constant(3, 0.5);
        Vec mid = W * ctr + b;
        Vec half = W.cwiseAbs() * rad;
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(ob.lo[i] == doctest::Approx(mid[i] - half[i]).epsilon(1e-12));
            CHECK(ob.hi[i] == doctest::Approx(mid[i] + half[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("crown is exact when every relu is stable-active") {
    // large positive biases keep all pre-activations positive on the unit box
    Network base = random_network({2, 6, 2}, 33);
    std::vector<Layer> layers = base.layers();
    layers[0].bias.array() += 50.0;
    Network net(layers);

    // composed affine map: W1 (W0 x + b0) + b1
    Mat Wc = layers[1].weights * layers[0].weights;
    Vec bc = layers[1].weights * layers[0].bias + layers[1].bias;

    Hyperrect in = testutil::unit_box(2);
    AffineBoundPair ab = crown_relax(net, in);
    CHECK(ab.Psi.isApprox(Wc, 1e-10));
    CHECK(ab.Phi.isApprox(Wc, 1e-10));
    CHECK(ab.alpha.isApprox(bc, 1e-10));
    CHECK(ab.beta.isApprox(bc, 1e-10));

    // exactness at the box vertices
    for (int mask = 0; mask < 4; ++mask) {
        Vec x(2);
        x << (mask & 1 ? 1.0 : 0.0), (mask & 2 ? 1.0 : 0.0);
        Vec y = net.forward(x);
        CHECK((ab.Psi * x + ab.alpha).isApprox(y, 1e-10));
    }
}

TEST_CASE("crown sandwich holds on sampled points") {
    Network net = random_network({2, 5, 5, 2}, 91);
    Vec ctr(2);
    ctr << 0.3, -0.2;
    WeightedBall in(ctr, Vec::Constant(2, 0.1), kInf);
    AffineBoundPair ab = crown_relax(net, in);
    Rng rng(14);
    Hyperrect box = in.bounding_rect();
    for (int k = 0; k < 10000; ++k) {
        Vec x = rng.point(box.lower, box.upper);
        Vec y = net.forward(x);
        Vec up = ab.Psi * x + ab.alpha;
        Vec dn = ab.Phi * x + ab.beta;
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(dn[i] <= y[i] + 1e-12);
            CHECK(y[i] <= up[i] + 1e-12);
        }
    }
}

TEST_CASE("crown with ibp intermediates is sound and no tighter") {
    Network net = random_network({2, 8, 8, 2}, 55);
    Hyperrect in = testutil::unit_box(2);
    OutputBounds tight = propagate(PropagatorKind::CROWN, net, in, Specification::identity(2));
    CrownOptions fast;
    fast.ibp_intermediates = true;
    OutputBounds loose =
        concretize(crown_relax(net, WeightedBall::from_rect(in), fast),
                   WeightedBall::from_rect(in), Specification::identity(2));
    Rng rng(3);
    for (int k = 0; k < 5000; ++k) {
        Vec y = net.forward(rng.point(in.lower, in.upper));
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(y[i] >= loose.lo[i]);
            CHECK(y[i] <= loose.hi[i]);
        }
    }
    // both variants bound the tight run's sampled range
    for (Eigen::Index i = 0; i < 2; ++i) CHECK(loose.lo[i] <= loose.hi[i]);
    (void)tight;
}

TEST_CASE("concretize on a scaling map") {
    Mat W(1, 1);
    W << 2.0;
    Network net = testutil::affine_net(W, Vec::Zero(1));
    WeightedBall in(Vec::Zero(1), Vec::Ones(1), kInf);
    OutputBounds ob = concretize(crown_relax(net, in), in, Specification{Mat::Ones(1, 1)});
    CHECK(ob.hi[0] == doctest::Approx(2.0));
    CHECK(ob.lo[0] == doctest::Approx(-2.0));
}

TEST_CASE("negated spec rows swap and negate bounds") {
    Network net = random_network({2, 6, 3}, 20);
    WeightedBall in(Vec::Zero(2), Vec::Constant(2, 0.4), kInf);
    Mat C(2, 3);
    C << 1.0, -0.5, 2.0, 0.0, 1.0, -1.0;
    AffineBoundPair ab = crown_relax(net, in);
    OutputBounds pos = concretize(ab, in, Specification{C});
    OutputBounds neg = concretize(ab, in, Specification{Mat(-C)});
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(neg.hi[i] == doctest::Approx(-pos.lo[i]).epsilon(1e-12));
        CHECK(neg.lo[i] == doctest::Approx(-pos.hi[i]).epsilon(1e-12));
    }
}

TEST_CASE("spec bounds contain sampled objective values") {
    Network net = random_network({3, 7, 4}, 61);
    Hyperrect in = testutil::unit_box(3);
    Mat C(2, 4);
    C << 1.0, 1.0, -1.0, 0.5, -2.0, 0.0, 1.0, 1.0;
    for (PropagatorKind kind : {PropagatorKind::IBP, PropagatorKind::CROWN}) {
        OutputBounds ob = propagate(kind, net, in, Specification{C});
        Rng rng(19);
        for (int k = 0; k < 10000; ++k) {
            Vec v = C * net.forward(rng.point(in.lower, in.upper));
            for (Eigen::Index i = 0; i < 2; ++i) {
                CHECK(v[i] >= ob.lo[i]);
                CHECK(v[i] <= ob.hi[i]);
            }
        }
    }
}

TEST_CASE("propagate(CROWN) equals concretize of crown_relax") {
    Network net = random_network({2, 5, 2}, 70);
    WeightedBall in(Vec::Zero(2), Vec::Constant(2, 0.3), kInf);
    Specification spec = Specification::identity(2);
    OutputBounds a = propagate(PropagatorKind::CROWN, net, in, spec);
    OutputBounds b = concretize(crown_relax(net, in), in, spec);
    CHECK(a.lo.isApprox(b.lo, 1e-14));
    CHECK(a.hi.isApprox(b.hi, 1e-14));
}

TEST_CASE("bounds collapse to the point value as the set shrinks") {
    Network net = random_network({2, 6, 6, 2}, 45);
    Vec ctr(2);
    ctr << 0.1, 0.2;
    Vec y0 = net.forward(ctr);
    // crude Lipschitz estimate from weight norms
    double lip = 1.0;
    for (const auto& l : net.layers()) lip *= l.weights.cwiseAbs().rowwise().sum().maxCoeff();
    for (double eps : {1e-3, 1e-6}) {
        for (PropagatorKind kind : {PropagatorKind::IBP, PropagatorKind::CROWN}) {
            OutputBounds ob = propagate(kind, net, WeightedBall(ctr, Vec::Constant(2, eps), kInf),
                                        Specification::identity(2));
            for (Eigen::Index i = 0; i < 2; ++i) {
                CHECK(ob.lo[i] <= y0[i]);
                CHECK(ob.hi[i] >= y0[i]);
                CHECK(ob.hi[i] - ob.lo[i] <= 10.0 * eps * lip);
            }
        }
    }
}

TEST_CASE("propagators reject dimension mismatch") {
    Network net = testutil::identity_net(2);
    CHECK_THROWS_AS(ibp(net, testutil::unit_box(3)), ShapeError);
    CHECK_THROWS_AS(crown_relax(net, testutil::unit_box(3)), ShapeError);
}
