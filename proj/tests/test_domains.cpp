#include "doctest.h"
#include "einkit/domains.hpp"

#include <cmath>

using namespace einkit;
using namespace einkit::domains;
using ein::EinPoint;
using forms::b_eval;
using forms::q_eval;

namespace {

DiamondSpec canonical_diamond(int p, int q) {
    return DiamondSpec::canonical(forms::make_orthonormal({p + 1, q + 1}));
}

}  // namespace

TEST_CASE("diamond membership basics") {
    auto spec = canonical_diamond(1, 2);
    CHECK(spec.member(spec.basepoint()));

    // a point with vanishing V1 component (an F0 point) is not a member
    Rng rng(2);
    CHECK_FALSE(spec.member(spec.sample_F0(rng)));
    CHECK_FALSE(spec.member(spec.sample_F1(rng)));

    // the dual diamond is disjoint from the original
    auto dual = spec.dual();
    for (int k = 0; k < 200; ++k) {
        CHECK_FALSE(spec.member(dual.sample_member(rng)));
        CHECK_FALSE(dual.member(spec.sample_member(rng)));
    }
}

TEST_CASE("Lemma-7.1-style barycenter members of the canonical diamond") {
    // ambient (p+1, q+1), orthonormal: minus m_0..m_p then plus p_0..p_q
    const int p = 2, q = 3;
    auto space = forms::make_orthonormal({p + 1, q + 1});
    auto spec = DiamondSpec::canonical(space);
    const int n = p + q + 2;
    auto minus = [&](int i) { return forms::Vec(forms::Vec::Unit(n, i)); };
    auto plus = [&](int j) { return forms::Vec(forms::Vec::Unit(n, p + 1 + j)); };

    const double r2 = std::sqrt(2.0);
    forms::Vec u = minus(0) + plus(0);
    CHECK(spec.member(EinPoint(space, u)));

    std::vector<forms::Vec> gens;
    for (int i = 1; i <= p; ++i) {
        gens.push_back(minus(0) + r2 * plus(0) + minus(i));
        gens.push_back(minus(0) + r2 * plus(0) - minus(i));
    }
    for (int j = 1; j <= q; ++j) {
        gens.push_back(plus(0) + r2 * minus(0) + plus(j));
        gens.push_back(plus(0) + r2 * minus(0) - plus(j));
    }
    forms::Vec combo = forms::Vec::Zero(n);
    const double ca = 1.0 / ((1.0 + r2) * 2 * p);
    const double cb = 1.0 / ((1.0 + r2) * 2 * q);
    for (size_t k = 0; k < gens.size(); ++k) {
        CHECK(spec.member(EinPoint(space, gens[k])));  // all generators are member lifts
        combo += (k < 2 * static_cast<size_t>(p) ? ca : cb) * gens[k];
    }
    // the barycenter recovers u: u is interior to the lifted convex hull
    CHECK((combo - u).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("diamond vs norm-ball model agreement") {
    for (auto [p, q] : {std::pair{1, 2}, std::pair{2, 2}}) {
        auto spec = canonical_diamond(p, q);
        auto ball = norm_ball_of_diamond(spec);
        CHECK(norm_ball_member(ball, ball.center));
        // boundary point in the Hq factor is excluded
        forms::Vec edge = ball.center + ball.radius * forms::Vec(ball.hq_basis.col(0));
        CHECK_FALSE(norm_ball_member(ball, edge));

        Rng rng(17 + p + q);
        int checked = 0;
        for (int k = 0; k < 10000; ++k) {
            forms::Vec m = 1.6 * rng.gaussian_vector(p + q);
            const double margin = ball.norm(m - ball.center) - ball.radius;
            if (std::abs(margin) < 1e-9) continue;  // skip the boundary shell
            EinPoint x = ein::chart_embed(*ball.chart, m);
            CHECK(spec.member(x) == norm_ball_member(ball, m));
            ++checked;
        }
        CHECK(checked > 9000);
    }
}

TEST_CASE("norm ball convexity of membership") {
    auto spec = canonical_diamond(2, 2);
    auto ball = norm_ball_of_diamond(spec);
    Rng rng(29);
    int done = 0;
    while (done < 10000) {
        forms::Vec a = 1.4 * rng.gaussian_vector(4);
        forms::Vec b = 1.4 * rng.gaussian_vector(4);
        if (!norm_ball_member(ball, a) || !norm_ball_member(ball, b)) continue;
        CHECK(norm_ball_member(ball, forms::Vec(0.5 * (a + b))));
        ++done;
    }
}

TEST_CASE("diamond membership is invariant under the block product group") {
    auto space = forms::make_orthonormal({2, 3});
    auto spec = DiamondSpec::canonical(space);
    // generators preserving (V0, e0-sheet) x (V1, e1-sheet): rotation in the
    // plus part of V0 and a boost inside V1
    const int n = 5;
    forms::Mat rot = forms::Mat::Identity(n, n);
    rot(3, 3) = std::cos(0.8);
    rot(3, 4) = -std::sin(0.8);
    rot(4, 3) = std::sin(0.8);
    rot(4, 4) = std::cos(0.8);
    forms::Mat boost = forms::Mat::Identity(n, n);
    boost(1, 1) = std::cosh(0.6);
    boost(1, 2) = std::sinh(0.6);
    boost(2, 1) = std::sinh(0.6);
    boost(2, 2) = std::cosh(0.6);
    Rng rng(31);
    for (const auto& g : {rot, boost}) {
        CHECK((g.transpose() * space->gram * g - space->gram).cwiseAbs().maxCoeff() < 1e-12);
        for (int k = 0; k < 200; ++k) {
            EinPoint x = ein::random_point(space, rng);
            CHECK(spec.member(x) == spec.member(ein::apply(g, x)));
        }
    }
}

TEST_CASE("diamond exact line solver matches the generic scan") {
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);
    Rng rng(37);
    for (int k = 0; k < 40; ++k) {
        EinPoint x = spec.sample_member(rng, 1.5);
        ein::Photon ph = ein::random_photon_through(x, rng);
        LineHit exact = spec.line_hit(ph.span_a(), ph.span_b());
        LineHit scanned = scan_line(dom, ph.span_a(), ph.span_b(), 2048);
        REQUIRE(exact.intervals.size() == scanned.intervals.size());
        CHECK(exact.contains_infinity == scanned.contains_infinity);
        for (size_t i = 0; i < exact.intervals.size(); ++i) {
            auto [a, b] = exact.intervals[i];
            auto [c, d] = scanned.intervals[i];
            if (std::isfinite(a) || std::isfinite(c)) CHECK(std::abs(a - c) < 1e-6 * (1 + std::abs(a)));
            if (std::isfinite(b) || std::isfinite(d)) CHECK(std::abs(b - d) < 1e-6 * (1 + std::abs(b)));
        }
    }
}

TEST_CASE("properness witness: diamond yes, full Ein and affine chart no") {
    Rng rng(41);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);
    auto witness = properness_witness(dom, rng);
    REQUIRE(witness.has_value());
    // a dual-diamond point is itself a witness: lightcones of dual members
    // miss the primal samples
    auto dual = spec.dual();
    auto cloud = member_cloud(dom, 300, rng);
    for (int k = 0; k < 20; ++k) {
        EinPoint xi = dual.sample_member(rng);
        int sign = 0;
        bool ok = true;
        for (const auto& x : cloud) {
            const double v = b_eval(spec.space(), xi.lift(), x.lift());
            const int s = v > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            ok = ok && (std::abs(v) > 0) && s == sign;
        }
        CHECK(ok);
    }

    CHECK_FALSE(properness_witness(oracle_full(spec.space_ptr()), rng).has_value());

    auto chart = std::make_shared<const ein::AffineChart>(
        ein::AffineChart::standard(forms::make_orthonormal({2, 3})));
    CHECK_FALSE(properness_witness(oracle_affine_chart(chart), rng).has_value());
}

TEST_CASE("sample_K of a diamond contains dual samples and the chart vertex") {
    Rng rng(43);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);
    auto kset = sample_K(dom, rng);
    REQUIRE(kset.size() >= 50);
    auto dual = spec.dual();
    int in_dual = 0;
    for (const auto& xi : kset)
        if (dual.member(xi)) ++in_dual;
    CHECK(in_dual > 0);

    // xi0 of the norm-ball chart (whose chart contains the closure) is in K
    auto ball = norm_ball_of_diamond(spec);
    EinPoint xi0 = ball.chart->xi0();
    auto cloud = member_cloud(dom, 1000, rng);
    for (const auto& x : cloud)
        CHECK(std::abs(b_eval(spec.space(), xi0.lift(), x.lift())) > 1e-12);

    // monotonicity: K-samples of a superset domain remain valid for a subset
    NormBallSpec small_ball(ball.chart, ball.hp_basis, ball.hq_basis, ball.center, 0.5);
    auto small_dom = oracle_from_norm_ball(small_ball, spec.space_ptr());
    auto small_cloud = member_cloud(small_dom, 300, rng);
    for (const auto& xi : kset) {
        int sign = 0;
        for (const auto& x : small_cloud) {
            const double v = b_eval(spec.space(), xi.lift(), x.lift());
            const int s = v > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            CHECK(s == sign);
            CHECK(std::abs(v) > 0);
        }
    }
}

TEST_CASE("dual convexity at diamond boundary points") {
    Rng rng(47);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);

    CHECK_THROWS_AS(dual_convexity_check(dom, spec.basepoint(), rng), std::invalid_argument);

    for (int k = 0; k < 10; ++k) {
        // generic exterior target gives a joint boundary point
        EinPoint target = ein::random_point(spec.space_ptr(), rng);
        if (spec.member(target)) continue;
        EinPoint a = boundary_toward(dom, target);
        auto vertex = dual_convexity_check(dom, a, rng);
        REQUIRE(vertex.has_value());
        // supporting vertex lies in F0 union F1 (one factor component vanishes
        // after projecting out the other)
        auto [w0, w1] = spec.decompose(vertex->lift());
        CHECK(std::min(w0.norm(), w1.norm()) < 1e-5);
        // and its lightcone misses sampled members
        auto cloud = member_cloud(dom, 400, rng);
        for (const auto& x : cloud)
            CHECK(std::abs(b_eval(spec.space(), vertex->lift(), x.lift())) > 1e-9);
    }
}

TEST_CASE("dual convexity generic search on the norm-ball oracle") {
    Rng rng(53);
    auto spec = canonical_diamond(1, 2);
    auto ball = norm_ball_of_diamond(spec);
    auto dom = oracle_from_norm_ball(ball, spec.space_ptr());  // no diamond fast path
    for (int k = 0; k < 3; ++k) {
        EinPoint target = ein::random_point(spec.space_ptr(), rng);
        if (dom.member(target)) continue;
        EinPoint a = boundary_toward(dom, target);
        auto vertex = dual_convexity_check(dom, a, rng);
        REQUIRE(vertex.has_value());
        CHECK(ein::on_common_photon(*vertex, a));
    }
}

TEST_CASE("projective hull finds photon-extremal corner points") {
    Rng rng(59);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);
    HullOptions opt;
    opt.directions = 40;
    auto extremes = projective_hull(dom, rng, opt);
    REQUIRE(extremes.size() >= 6);

    // hull of the diamond contains the member samples: sampled support test
    auto witness = properness_witness(dom, rng).value();
    auto cloud = member_cloud(dom, 200, rng);
    auto section = [&](const EinPoint& x) {
        return forms::Vec(x.lift() / b_eval(spec.space(), x.lift(), witness.lift()));
    };
    for (int d = 0; d < 25; ++d) {
        forms::Vec dir = rng.unit_vector(5);
        double best = -1e300;
        for (const auto& e : extremes) best = std::max(best, dir.dot(section(e)));
        for (const auto& x : cloud) CHECK(dir.dot(section(x)) <= best + 1e-6);
    }

    // every hull-extreme point is photon-extremal and on an F sphere
    for (const auto& e : extremes) {
        CHECK(extremality_check(dom, e));
        auto [w0, w1] = spec.decompose(e.lift());
        CHECK(std::min(w0.norm(), w1.norm()) < 1e-4);
    }
}

TEST_CASE("extremality: F points yes, joint midpoints and chart-cone points no") {
    Rng rng(61);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);

    for (int k = 0; k < 12; ++k) {
        CHECK(extremality_check(dom, spec.sample_F0(rng)));
        CHECK(extremality_check(dom, spec.sample_F1(rng)));
    }
    // generic joint boundary points lie mid-photon, hence are not extremal
    int tested = 0;
    for (int k = 0; k < 12 && tested < 6; ++k) {
        EinPoint target = ein::random_point(spec.space_ptr(), rng);
        if (spec.member(target)) continue;
        EinPoint a = boundary_toward(dom, target);
        auto [w0, w1] = spec.decompose(a.lift());
        if (std::min(w0.norm(), w1.norm()) < 1e-3) continue;  // skip corner hits
        CHECK_FALSE(extremality_check(dom, a));
        ++tested;
    }
    CHECK(tested > 0);

    // interior input is rejected
    CHECK_THROWS_AS(extremality_check(dom, spec.basepoint()), std::invalid_argument);

    // a mid-photon point of an affine chart's boundary lightcone
    auto chart = std::make_shared<const ein::AffineChart>(
        ein::AffineChart::standard(spec.space_ptr()));
    auto chart_dom = oracle_affine_chart(chart);
    ein::Photon cone_photon = ein::random_photon_through(chart->xi0(), rng);
    EinPoint mid = cone_photon.at_angle(0.7);
    CHECK_FALSE(extremality_check(chart_dom, mid));
}

TEST_CASE("extremal classification splits the two F spheres") {
    Rng rng(67);
    auto spec = canonical_diamond(2, 2);
    auto dom = oracle_from_diamond(spec);
    auto witness = properness_witness(dom, rng).value();
    auto cloud = member_cloud(dom, 500, rng);

    std::vector<ExtremalClass> f0_classes, f1_classes;
    for (int k = 0; k < 10; ++k) {
        f0_classes.push_back(classify_extremal(dom, spec.sample_F0(rng), witness, cloud));
        f1_classes.push_back(classify_extremal(dom, spec.sample_F1(rng), witness, cloud));
    }
    for (auto c : f0_classes) CHECK(c == f0_classes.front());
    for (auto c : f1_classes) CHECK(c == f1_classes.front());
    CHECK(f0_classes.front() != f1_classes.front());

    // Lemma 7.4(3)-style orthogonality: lifts from opposite classes pair to 0
    for (int k = 0; k < 20; ++k) {
        const double v = b_eval(spec.space(), spec.sample_F0(rng).lift(), spec.sample_F1(rng).lift());
        CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("splitting component table") {
    using forms::Signature;
    // p0*q1 = 1, p1*q0 >= 2
    auto t1 = classify_splitting_components(Signature{1, 2}, Signature{2, 1});
    CHECK(t1.components == 3);
    CHECK(t1.proper == 2);

    auto t2 = classify_splitting_components(Signature{1, 1}, Signature{1, 1});
    CHECK(t2.components == 4);
    CHECK(t2.proper == 4);
    CHECK(t2.lorentzian_diamonds);

    auto t3 = classify_splitting_components(Signature{0, 2}, Signature{2, 2});
    CHECK(t3.components == 1);
    CHECK(t3.dense);

    auto t4 = classify_splitting_components(Signature{1, 2}, Signature{2, 2});
    CHECK(t4.components == 2);
    CHECK(t4.proper == 0);

    CHECK_THROWS_AS(classify_splitting_components(Signature{-1, 2}, Signature{2, 2}),
                    std::invalid_argument);
}

TEST_CASE("boundary_toward lands on the boundary") {
    Rng rng(71);
    auto spec = canonical_diamond(1, 2);
    auto dom = oracle_from_diamond(spec);
    for (int k = 0; k < 10; ++k) {
        EinPoint target = ein::random_point(spec.space_ptr(), rng);
        if (spec.member(target)) continue;
        EinPoint a = boundary_toward(dom, target);
        CHECK_FALSE(spec.member(a));
        CHECK(std::abs(spec.member_margin(a)) < 1e-6);
    }
}
