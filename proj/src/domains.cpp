#include "einkit/domains.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace einkit::domains {

using ein::canonical_lift;
using ein::project_to_cone;
using ein::projective_angle;
using forms::b_eval;
using forms::q_eval;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Isotropic vector inside span(basis), driven by a seed vector.
Vec isotropic_in_subspace(const FormSpace& sp, const Mat& basis, const Vec& seed) {
    Mat S = basis.transpose() * sp.gram * basis;
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    Vec neg = Vec::Zero(basis.cols()), pos = Vec::Zero(basis.cols());
    for (int i = 0; i < basis.cols(); ++i) {
        const Vec dir = es.eigenvectors().col(i);
        if (es.eigenvalues()[i] < 0)
            neg += seed[i] * dir;
        else
            pos += seed[i] * dir;
    }
    const double qn = -neg.dot(S * neg), qp = pos.dot(S * pos);
    if (qn < 1e-14 || qp < 1e-14)
        throw std::invalid_argument("isotropic_in_subspace: subspace is definite or seed degenerate");
    return basis * (neg / std::sqrt(qn) + pos / std::sqrt(qp));
}

// Projective path between two (unit) lifts staying on the null cone: the cone
// projection of the Euclidean segment. Well defined as long as the segment
// keeps components in both definite eigenspaces of the gram.
Vec cone_path_lift(const FormSpace& sp, const Vec& u, const Vec& w, double t) {
    Vec c = (1.0 - t) * u + t * w;
    Vec neg = Vec::Zero(sp.dim), pos = Vec::Zero(sp.dim);
    for (int i = 0; i < sp.dim; ++i) {
        const Vec dir = sp.eigvecs.col(i);
        const double coef = dir.dot(c);
        if (sp.eigvals[i] < 0)
            neg += coef * dir;
        else
            pos += coef * dir;
    }
    const double qn = -neg.dot(sp.gram * neg), qp = pos.dot(sp.gram * pos);
    if (qn < 1e-28 || qp < 1e-28)
        throw std::runtime_error("cone path degenerates (segment meets a definite eigenspace)");
    return neg / std::sqrt(qn) + pos / std::sqrt(qp);
}

Vec aligned_lift(const EinPoint& from, const EinPoint& to) {
    Vec w = to.lift();
    if (from.lift().dot(w) < 0) w = -w;
    return w;
}

// sign consistency of b(xi, .) over a cloud; the margin (min |b|) or -1 when
// signs are mixed or an incidence occurs
double k_margin(const FormSpace& sp, const EinPoint& xi, const std::vector<EinPoint>& cloud) {
    double margin = kInf;
    int sign = 0;
    for (const auto& x : cloud) {
        const double v = b_eval(sp, xi.lift(), x.lift());
        const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0) return -1.0;
        if (sign == 0) sign = s;
        if (s != sign) return -1.0;
        margin = std::min(margin, std::abs(v));
    }
    return margin;
}

}  // namespace

std::optional<std::pair<double, double>> LineHit::component_containing(double s) const {
    for (const auto& iv : intervals)
        if (s > iv.first && s < iv.second) return iv;
    return std::nullopt;
}

DiamondSpec::DiamondSpec(FormSpacePtr space, Mat v0_basis, Mat v1_basis, Vec e0, Vec e1)
    : space_(std::move(space)), V0_(std::move(v0_basis)), V1_(std::move(v1_basis)),
      e0_(std::move(e0)), e1_(std::move(e1)) {
    const FormSpace& sp = *space_;
    const int n = sp.dim;
    if (V0_.rows() != n || V1_.rows() != n || V0_.cols() + V1_.cols() != n)
        throw std::invalid_argument("DiamondSpec: bases must decompose the ambient space");
    auto s0 = forms::signature_of_subspace(sp, V0_);
    auto s1 = forms::signature_of_subspace(sp, V1_);
    if (s0.degenerate || s1.degenerate || s0.sig.p != 1 || s1.sig.q != 1)
        throw std::invalid_argument("DiamondSpec: factors must have signatures (1,q) and (p,1)");
    if (s0.sig.q + 1 != sp.sig.q || s1.sig.p + 1 != sp.sig.p)
        throw std::invalid_argument("DiamondSpec: factor signatures do not sum to the ambient one");
    if ((V0_.transpose() * sp.gram * V1_).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("DiamondSpec: factors are not orthogonal");

    const double q0 = q_eval(sp, e0_), q1 = q_eval(sp, e1_);
    if (q0 >= 0 || q1 <= 0) throw std::invalid_argument("DiamondSpec: need q(e0) < 0 < q(e1)");
    e0_ /= std::sqrt(-q0);
    e1_ /= std::sqrt(q1);

    Mat G0 = V0_.transpose() * sp.gram * V0_;
    proj0_ = V0_ * G0.ldlt().solve(V0_.transpose() * sp.gram);
    if ((proj0_ * e0_ - e0_).norm() > 1e-8 || (proj0_ * e1_).norm() > 1e-8)
        throw std::invalid_argument("DiamondSpec: e0 must lie in V0 and e1 in V1");
}

DiamondSpec DiamondSpec::canonical(const FormSpacePtr& space) {
    const int P = space->sig.p, n = space->dim;
    if (P < 2 || space->sig.q < 2)
        throw std::invalid_argument("DiamondSpec::canonical: ambient signature must be (p+1,q+1) with p,q >= 1");
    if ((space->gram - FormSpace::orthonormal(space->sig).gram).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("DiamondSpec::canonical: requires the orthonormal layout");
    // V1 = span{minus_1 .. minus_p, plus_0}, V0 = span{minus_0, plus_1 .. plus_q}
    Mat V1 = Mat::Zero(n, P);
    for (int i = 1; i < P; ++i) V1(i, i - 1) = 1.0;
    V1(P, P - 1) = 1.0;
    Mat V0 = Mat::Zero(n, n - P);
    V0(0, 0) = 1.0;
    for (int j = P + 1; j < n; ++j) V0(j, j - P) = 1.0;
    Vec e0 = V0.col(0);
    Vec e1 = -Vec(V1.col(P - 1));  // sign makes P(e1 - e0) a member
    return DiamondSpec(space, std::move(V0), std::move(V1), std::move(e0), std::move(e1));
}

DiamondSpec DiamondSpec::from_splitting(const FormSpacePtr& space, const Mat& v0_basis,
                                        const Mat& v1_basis, const EinPoint& interior) {
    const FormSpace& sp = *space;
    Mat B0 = v0_basis, B1 = v1_basis;
    auto s0 = forms::signature_of_subspace(sp, B0);
    if (s0.sig.p != 1 || s0.sig.q != sp.sig.q - 1) std::swap(B0, B1);  // accept either order

    auto pick_unit = [&](const Mat& B, bool negative) {
        Mat S = B.transpose() * sp.gram * B;
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        const int idx = negative ? 0 : static_cast<int>(S.rows()) - 1;
        Vec v = B * es.eigenvectors().col(idx);
        return Vec(v / std::sqrt(std::abs(q_eval(sp, v))));
    };
    DiamondSpec spec(space, B0, B1, pick_unit(B0, true), pick_unit(B1, false));
    auto [w0, w1] = spec.decompose(interior.lift());
    if (q_eval(sp, w1) <= 0)
        throw std::invalid_argument("DiamondSpec::from_splitting: interior point not in U0 of this splitting");
    if (b_eval(sp, w0, spec.e0_) * b_eval(sp, w1, spec.e1_) < 0) spec.e1_ = -spec.e1_;
    return spec;
}

Signature DiamondSpec::ein_signature() const {
    return Signature{static_cast<int>(V1_.cols()) - 1, static_cast<int>(V0_.cols()) - 1};
}

std::pair<Vec, Vec> DiamondSpec::decompose(const Vec& v) const {
    Vec w0 = proj0_ * v;
    return {w0, v - w0};
}

bool DiamondSpec::member(const EinPoint& x) const { return member_margin(x) > 0; }

double DiamondSpec::member_margin(const EinPoint& x) const {
    const Vec& v = x.lift();  // unit lift
    auto [w0, w1] = decompose(v);
    const double c1 = q_eval(*space_, w1);
    const double c2 = b_eval(*space_, w0, e0_) * b_eval(*space_, w1, e1_);
    return std::min(c1, c2);
}

std::pair<Vec, Vec> DiamondSpec::sheet_components(const EinPoint& x) const {
    auto [w0, w1] = decompose(x.lift());
    const double q0 = q_eval(*space_, w0), q1 = q_eval(*space_, w1);
    if (q1 <= 0 || q0 >= 0) throw std::invalid_argument("sheet_components: point is not a member");
    Vec h0 = w0 / std::sqrt(-q0);
    Vec h1 = w1 / std::sqrt(q1);
    if (b_eval(*space_, h0, e0_) > 0) {
        h0 = -h0;
        h1 = -h1;
    }
    return {h0, h1};
}

DiamondSpec DiamondSpec::dual() const { return DiamondSpec(space_, V0_, V1_, e0_, -e1_); }

EinPoint DiamondSpec::basepoint() const { return EinPoint(space_, e1_ - e0_); }

EinPoint DiamondSpec::sample_F0(Rng& rng) const {
    return EinPoint(space_, isotropic_in_subspace(*space_, V0_, rng.gaussian_vector(V0_.cols())));
}

EinPoint DiamondSpec::sample_F1(Rng& rng) const {
    return EinPoint(space_, isotropic_in_subspace(*space_, V1_, rng.gaussian_vector(V1_.cols())));
}

EinPoint DiamondSpec::sample_member(Rng& rng, double radius) const {
    // Product-model sampling: points on the sheet of e0 in V0 and of -e1 in
    // V1, at factor arc length <= radius from the sheet centers.
    const FormSpace& sp = *space_;
    auto sheet_sample = [&](const Mat& B, const Vec& center) {
        Mat S = B.transpose() * sp.gram * B;
        Vec c_coords = (B.transpose() * B).ldlt().solve(B.transpose() * center);
        Vec t = rng.gaussian_vector(B.cols());
        Vec Sc = S * c_coords;
        t -= (t.dot(Sc) / c_coords.dot(Sc)) * c_coords;
        Vec dir = B * t;
        const double qd = q_eval(sp, dir);
        if (std::abs(qd) < 1e-20) return center;
        dir /= std::sqrt(std::abs(qd));
        const double s = radius * rng.uniform();
        return Vec(std::cosh(s) * center + std::sinh(s) * dir);
    };
    Vec h0 = sheet_sample(V0_, e0_);
    Vec h1 = sheet_sample(V1_, -e1_);
    return EinPoint(space_, h0 + h1);
}

std::vector<EinPoint> DiamondSpec::supporting_vertices(const EinPoint& boundary_pt) const {
    const FormSpace& sp = *space_;
    auto [w0, w1] = decompose(boundary_pt.lift());
    const double n0 = w0.norm(), n1 = w1.norm();
    const double eps = 1e-6;
    if (n1 < eps || n0 < eps) return {boundary_pt};  // F corner: its own lightcone supports
    if (std::abs(q_eval(sp, w0)) > 1e-5 * n0 * n0 || std::abs(q_eval(sp, w1)) > 1e-5 * n1 * n1)
        throw std::invalid_argument("supporting_vertices: point is not on the diamond boundary");
    return {EinPoint(space_, w0), EinPoint(space_, w1)};
}

LineHit DiamondSpec::line_hit(const Vec& u, const Vec& w) const {
    const FormSpace& sp = *space_;
    auto member_raw = [&](const Vec& v) {
        Vec w0 = proj0_ * v;
        Vec w1 = v - w0;
        return q_eval(sp, w1) > 0 && b_eval(sp, w0, e0_) * b_eval(sp, w1, e1_) > 0;
    };

    auto [u0, u1] = decompose(u);
    auto [w0, w1] = decompose(w);
    std::vector<double> roots;
    const double A = q_eval(sp, u1), B = b_eval(sp, u1, w1), C = q_eval(sp, w1);
    if (std::abs(C) > 1e-14) {
        const double disc = B * B - A * C;
        if (disc >= 0) {
            roots.push_back((-B + std::sqrt(disc)) / C);
            roots.push_back((-B - std::sqrt(disc)) / C);
        }
    } else if (std::abs(B) > 1e-14) {
        roots.push_back(-A / (2 * B));
    }
    for (auto [num, den] : {std::pair{b_eval(sp, u0, e0_), b_eval(sp, w0, e0_)},
                            std::pair{b_eval(sp, u1, e1_), b_eval(sp, w1, e1_)}}) {
        if (std::abs(den) > 1e-14) roots.push_back(-num / den);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-13; }),
                roots.end());

    LineHit hit;
    hit.contains_infinity = member_raw(w);
    std::vector<std::pair<double, double>> cells;
    std::vector<double> probes;
    if (roots.empty()) {
        cells.push_back({-kInf, kInf});
        probes.push_back(0.0);
    } else {
        cells.push_back({-kInf, roots.front()});
        probes.push_back(roots.front() - 1.0);
        for (size_t i = 0; i + 1 < roots.size(); ++i) {
            cells.push_back({roots[i], roots[i + 1]});
            probes.push_back(0.5 * (roots[i] + roots[i + 1]));
        }
        cells.push_back({roots.back(), kInf});
        probes.push_back(roots.back() + 1.0);
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        if (!member_raw(u + probes[i] * w)) continue;
        if (!hit.intervals.empty() && hit.intervals.back().second == cells[i].first)
            hit.intervals.back().second = cells[i].second;  // merge across a spurious root
        else
            hit.intervals.push_back(cells[i]);
    }
    return hit;
}

DiamondSpec DiamondSpec::transformed(const Mat& g) const {
    return DiamondSpec(space_, g * V0_, g * V1_, g * e0_, g * e1_);
}

NormBallSpec::NormBallSpec(std::shared_ptr<const AffineChart> chart_in, Mat hp, Mat hq, Vec c, double r)
    : chart(std::move(chart_in)), hp_basis(std::move(hp)), hq_basis(std::move(hq)),
      center(std::move(c)), radius(r) {
    if (radius <= 0) throw std::invalid_argument("NormBallSpec: radius must be positive");
    for (int i = 0; i < hp_basis.cols(); ++i)
        for (int j = 0; j < hq_basis.cols(); ++j)
            if (std::abs(chart->chart_b(hp_basis.col(i), hq_basis.col(j))) > 1e-10)
                throw std::invalid_argument("NormBallSpec: factors must be orthogonal");
    for (int i = 0; i < hp_basis.cols(); ++i)
        if (chart->chart_q(hp_basis.col(i)) >= 0)
            throw std::invalid_argument("NormBallSpec: Hp must be negative definite");
    for (int j = 0; j < hq_basis.cols(); ++j)
        if (chart->chart_q(hq_basis.col(j)) <= 0)
            throw std::invalid_argument("NormBallSpec: Hq must be positive definite");
}

double NormBallSpec::norm(const Vec& m) const {
    Mat all(hp_basis.rows(), hp_basis.cols() + hq_basis.cols());
    all << hp_basis, hq_basis;
    Vec coords = all.colPivHouseholderQr().solve(m);
    Vec mp = hp_basis * coords.head(hp_basis.cols());
    Vec mq = hq_basis * coords.tail(hq_basis.cols());
    return std::sqrt(std::max(0.0, -chart->chart_q(mp))) +
           std::sqrt(std::max(0.0, chart->chart_q(mq)));
}

bool diamond_member(const DiamondSpec& spec, const EinPoint& x) { return spec.member(x); }

bool norm_ball_member(const NormBallSpec& spec, const Vec& m) { return spec.member(m); }

NormBallSpec norm_ball_of_diamond(const DiamondSpec& spec) {
    const FormSpacePtr& sp = spec.space_ptr();
    const int n = sp->dim;
    EinPoint xi0(sp, spec.e0() + spec.e1());
    EinPoint xi_inf(sp, spec.e1() - spec.e0());
    // b-orthogonal complement of e inside span(B), Euclidean-orthonormalized
    auto complement = [&](const Mat& B, const Vec& e) {
        Mat out(n, B.cols() - 1);
        int k = 0;
        const double qe = q_eval(*sp, e);
        for (int j = 0; j < B.cols() && k < out.cols(); ++j) {
            Vec v = B.col(j);
            v -= (b_eval(*sp, v, e) / qe) * e;
            for (int i = 0; i < k; ++i) v -= v.dot(out.col(i)) * out.col(i);
            if (v.norm() > 1e-8) out.col(k++) = v.normalized();
        }
        if (k != out.cols())
            throw std::runtime_error("norm_ball_of_diamond: complement construction failed");
        return out;
    };
    Mat comp(n, n - 2);
    comp << complement(spec.v1_basis(), spec.e1()), complement(spec.v0_basis(), spec.e0());
    auto chart = std::make_shared<const AffineChart>(xi0, xi_inf, comp);
    const int p = static_cast<int>(spec.v1_basis().cols()) - 1;
    const int q = static_cast<int>(spec.v0_basis().cols()) - 1;
    Mat hp = Mat::Identity(p + q, p + q).leftCols(p);
    Mat hq = Mat::Identity(p + q, p + q).rightCols(q);
    NormBallSpec ball(chart, hp, hq, Vec::Zero(p + q), 1.0);
    // Calibrate the radius off a projected F corner (the chart normalization
    // fixes the coordinate scale only up to the lift scaling of xi0).
    Rng rng(0x5eedF0F1);
    const double r0 = ball.norm(ein::chart_project(*chart, spec.sample_F0(rng)));
    const double r1 = ball.norm(ein::chart_project(*chart, spec.sample_F1(rng)));
    if (std::abs(r0 - r1) > 1e-9 * (r0 + r1))
        throw std::runtime_error("norm_ball_of_diamond: inconsistent corner radii");
    ball.radius = r0;
    return ball;
}

DomainOracle oracle_from_diamond(const DiamondSpec& spec) {
    auto shared = std::make_shared<const DiamondSpec>(spec);
    DomainOracle dom(spec.space_ptr(), "diamond",
                     [shared](const EinPoint& x) { return shared->member(x); },
                     spec.basepoint());
    dom.line_solver = [shared](const Vec& u, const Vec& w) { return shared->line_hit(u, w); };
    dom.diamond = shared;
    return dom;
}

DomainOracle oracle_from_norm_ball(const NormBallSpec& spec, const FormSpacePtr& space) {
    auto shared = std::make_shared<const NormBallSpec>(spec);
    return DomainOracle(space, "chart-body",
                        [shared](const EinPoint& x) {
                            auto m = ein::try_chart_project(*shared->chart, x);
                            return m && shared->member(*m);
                        },
                        ein::chart_embed(*shared->chart, shared->center));
}

DomainOracle oracle_full(const FormSpacePtr& space) {
    Vec v = Vec::Zero(space->dim);
    v[0] = 1;
    v[space->dim - 1] = 1;
    DomainOracle dom(space, "full", [](const EinPoint&) { return true; },
                     project_to_cone(space, v));
    dom.line_solver = [](const Vec&, const Vec&) {
        LineHit hit;
        hit.intervals.push_back({-kInf, kInf});
        hit.contains_infinity = true;
        return hit;
    };
    return dom;
}

DomainOracle oracle_affine_chart(const std::shared_ptr<const AffineChart>& chart) {
    const FormSpacePtr sp = chart->space_ptr();
    const EinPoint xi0 = chart->xi0();
    return DomainOracle(sp, "affine-chart",
                        [sp, xi0](const EinPoint& x) {
                            return std::abs(b_eval(*sp, x.lift(), xi0.lift())) >
                                   sp->tol * sp->gram_scale;
                        },
                        chart->xi_inf());
}

LineHit scan_line(const DomainOracle& dom, const Vec& u, const Vec& w, int grid) {
    const Vec un = u.normalized(), wn = w.normalized();
    auto member_at = [&](double theta) {
        return dom.member(EinPoint(dom.space, std::cos(theta) * un + std::sin(theta) * wn));
    };
    const double pi = 3.141592653589793, half_pi = 0.5 * pi;
    std::vector<double> thetas(grid);
    std::vector<bool> inside(grid);
    for (int k = 0; k < grid; ++k) {
        thetas[k] = -half_pi + pi * (k + 0.5) / grid;
        inside[k] = member_at(thetas[k]);
    }
    auto refine = [&](double lo, double hi, bool lo_in) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (member_at(mid) == lo_in ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<double> cuts;
    for (int k = 0; k < grid; ++k) {
        const int nk = (k + 1) % grid;
        if (inside[k] == inside[nk]) continue;
        const double hi = (nk == 0) ? thetas[0] + pi : thetas[nk];
        double t = refine(thetas[k], hi, inside[k]);
        if (t >= half_pi) t -= pi;
        cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    LineHit hit;
    hit.contains_infinity = dom.member(EinPoint(dom.space, wn));
    if (cuts.empty()) {
        if (inside[grid / 2]) hit.intervals.push_back({-kInf, kInf});
        return hit;
    }
    std::vector<std::pair<double, double>> cells;
    cells.push_back({-half_pi, cuts.front()});
    for (size_t i = 0; i + 1 < cuts.size(); ++i) cells.push_back({cuts[i], cuts[i + 1]});
    cells.push_back({cuts.back(), half_pi});
    for (auto& c : cells) {
        if (!member_at(0.5 * (c.first + c.second))) continue;
        const double lo = (c.first <= -half_pi + 1e-14) ? -kInf : std::tan(c.first);
        const double hi = (c.second >= half_pi - 1e-14) ? kInf : std::tan(c.second);
        hit.intervals.push_back({lo, hi});
    }
    return hit;
}

LineHit solve_line(const DomainOracle& dom, const Vec& u, const Vec& w) {
    if (dom.line_solver) return dom.line_solver(u, w);
    return scan_line(dom, u, w);
}

EinPoint boundary_toward(const DomainOracle& dom, const EinPoint& target) {
    const FormSpace& sp = *dom.space;
    if (!dom.member(dom.basepoint))
        throw std::invalid_argument("boundary_toward: basepoint not a member");
    if (dom.member(target)) throw std::invalid_argument("boundary_toward: target must be outside");
    const Vec u = dom.basepoint.lift();
    const Vec w = aligned_lift(dom.basepoint, target);
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        bool in = false;
        try {
            in = dom.member(EinPoint(dom.space, cone_path_lift(sp, u, w, mid)));
        } catch (const std::runtime_error&) {
        }
        (in ? lo : hi) = mid;
    }
    // the hi side has been probed non-member: resolve onto the exterior side
    return EinPoint(dom.space, cone_path_lift(sp, u, w, hi));
}

std::vector<EinPoint> member_cloud(const DomainOracle& dom, int count, Rng& rng) {
    std::vector<EinPoint> cloud;
    cloud.reserve(count);
    const FormSpace& sp = *dom.space;
    const Vec base = dom.basepoint.lift();
    int guard = 0;
    while (static_cast<int>(cloud.size()) < count && guard < 200 * count + 10000) {
        ++guard;
        if (dom.diamond && guard % 2 == 0) {
            cloud.push_back(dom.diamond->sample_member(rng));
            continue;
        }
        EinPoint cand = ein::random_point(dom.space, rng);
        if (dom.member(cand)) {
            cloud.push_back(cand);
            continue;
        }
        // keep an interior point of the arc from the basepoint towards the
        // rejected candidate
        try {
            const Vec w = aligned_lift(dom.basepoint, cand);
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                bool in = false;
                try {
                    in = dom.member(EinPoint(dom.space, cone_path_lift(sp, base, w, mid)));
                } catch (const std::runtime_error&) {
                }
                (in ? lo : hi) = mid;
            }
            const double t = lo * std::sqrt(rng.uniform());
            EinPoint pt(dom.space, cone_path_lift(sp, base, w, t));
            if (dom.member(pt)) cloud.push_back(pt);
        } catch (const std::runtime_error&) {
        }
    }
    if (static_cast<int>(cloud.size()) < count)
        throw std::runtime_error("member_cloud: sampling budget exhausted");
    return cloud;
}

std::optional<EinPoint> properness_witness(const DomainOracle& dom, Rng& rng,
                                           const WitnessOptions& opt) {
    auto cloud = member_cloud(dom, opt.cloud, rng);
    std::optional<EinPoint> best;
    double best_margin = 0.0;
    for (int k = 0; k < opt.candidates; ++k) {
        EinPoint cand = [&]() {
            if (dom.diamond) {
                switch (k % 4) {
                    case 0: return dom.diamond->dual().sample_member(rng);
                    case 1: return dom.diamond->sample_F0(rng);
                    case 2: return dom.diamond->sample_F1(rng);
                    default: break;
                }
            }
            return ein::random_point(dom.space, rng);
        }();
        const double margin = k_margin(*dom.space, cand, cloud);
        if (margin > best_margin) {
            best_margin = margin;
            best = cand;
        }
    }
    if (best_margin >= opt.gap) return best;
    return std::nullopt;
}

std::vector<EinPoint> sample_K(const DomainOracle& dom, Rng& rng, const KSampleOptions& opt) {
    auto cloud = member_cloud(dom, opt.cloud, rng);
    std::vector<EinPoint> out;
    for (int k = 0; k < opt.candidates && static_cast<int>(out.size()) < opt.target; ++k) {
        EinPoint cand = [&]() {
            if (dom.diamond) {
                switch (k % 4) {
                    case 0: return dom.diamond->dual().sample_member(rng);
                    case 1: return dom.diamond->sample_F0(rng);
                    case 2: return dom.diamond->sample_F1(rng);
                    default: break;
                }
            }
            return ein::random_point(dom.space, rng);
        }();
        if (k_margin(*dom.space, cand, cloud) >= opt.gap) out.push_back(cand);
    }
    return out;
}

std::optional<EinPoint> dual_convexity_check(const DomainOracle& dom, const EinPoint& boundary_pt,
                                             Rng& rng, const DualConvexityOptions& opt) {
    if (dom.member(boundary_pt))
        throw std::invalid_argument("dual_convexity_check: input is an interior point, not boundary");
    auto cloud = member_cloud(dom, opt.cloud, rng);
    auto valid = [&](const EinPoint& b) { return k_margin(*dom.space, b, cloud) >= opt.margin; };

    if (dom.diamond) {
        try {
            for (const auto& v : dom.diamond->supporting_vertices(boundary_pt))
                if (valid(v)) return v;
        } catch (const std::invalid_argument&) {
        }
    }
    if (valid(boundary_pt)) return boundary_pt;  // corner supported by its own lightcone
    for (int j = 0; j < opt.photons; ++j) {
        ein::Photon ph = ein::random_photon_through(boundary_pt, rng);
        for (int a = 1; a < opt.angles; ++a) {
            EinPoint cand = ph.at_angle(3.141592653589793 * a / opt.angles);
            if (valid(cand)) return cand;
        }
    }
    return std::nullopt;
}

std::vector<EinPoint> projective_hull(const DomainOracle& dom, Rng& rng, const HullOptions& opt) {
    const FormSpace& sp = *dom.space;
    if (sp.sig.p < 2) throw std::invalid_argument("projective_hull: requires p >= 1");
    auto witness = properness_witness(dom, rng);
    if (!witness) throw std::runtime_error("projective_hull: no properness witness found");
    const Vec xi = witness->lift();

    auto cloud = member_cloud(dom, opt.cloud, rng);
    {
        int sign = 0;
        for (const auto& x : cloud) {
            const double d = b_eval(sp, x.lift(), xi);
            const int s = d > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            if (d == 0 || s != sign)
                throw std::runtime_error("projective_hull: domain not liftable with given samples");
        }
    }
    auto section = [&](const EinPoint& x) -> Vec { return x.lift() / b_eval(sp, x.lift(), xi); };

    const Vec base = dom.basepoint.lift();
    auto boundary_along = [&](const Vec& target_lift) -> std::optional<EinPoint> {
        Vec w = target_lift.normalized();
        if (base.dot(w) < 0) w = -w;
        double hi_t = 1.0;
        bool found_out = false;
        for (int it = 0; it < 24 && !found_out; ++it) {
            try {
                if (!dom.member(EinPoint(dom.space, cone_path_lift(sp, base, w, hi_t))))
                    found_out = true;
                else
                    hi_t = 2.0 * hi_t + 0.25;
            } catch (const std::runtime_error&) {
                found_out = true;
            }
        }
        if (!found_out) return std::nullopt;
        double lo = 0.0, hi = hi_t;
        for (int it = 0; it < 52; ++it) {
            const double mid = 0.5 * (lo + hi);
            bool in = false;
            try {
                in = dom.member(EinPoint(dom.space, cone_path_lift(sp, base, w, mid)));
            } catch (const std::runtime_error&) {
            }
            (in ? lo : hi) = mid;
        }
        try {
            return EinPoint(dom.space, cone_path_lift(sp, base, w, 0.5 * (lo + hi)));
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
    };

    std::vector<EinPoint> extremes;
    for (int d = 0; d < opt.directions; ++d) {
        const Vec dir = rng.unit_vector(sp.dim);
        int best = 0;
        double best_val = -kInf;
        for (size_t i = 0; i < cloud.size(); ++i) {
            const double v = dir.dot(section(cloud[i]));
            if (v > best_val) {
                best_val = v;
                best = static_cast<int>(i);
            }
        }
        Vec target = cloud[best].lift();
        auto bd = boundary_along(target);
        if (!bd) continue;
        // coarse pattern sweep to spread the seeds, then purify to a
        // photon-extremal point by sliding along boundary photon segments
        double cur_val = dir.dot(section(*bd));
        double step = 0.3;
        for (int it = 0; it < opt.refine_steps; ++it) {
            bool improved = false;
            for (int axis = 0; axis < sp.dim && !improved; ++axis) {
                for (double sgn : {1.0, -1.0}) {
                    Vec cand_target = (target + sgn * step * Vec::Unit(sp.dim, axis)).normalized();
                    auto cand_bd = boundary_along(cand_target);
                    if (!cand_bd) continue;
                    const double v = dir.dot(section(*cand_bd));
                    if (v > cur_val + 1e-15) {
                        cur_val = v;
                        target = cand_target;
                        bd = cand_bd;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
            if (step < 1e-3) break;
        }
        try {
            *bd = slide_to_extremal(dom, *bd, &dir);
        } catch (const std::exception&) {
            continue;
        }
        bool dup = false;
        for (const auto& e : extremes)
            if (projective_angle(e, *bd) < opt.dedupe_angle) {
                dup = true;
                break;
            }
        if (!dup) extremes.push_back(*bd);
    }
    return extremes;
}

namespace {

// Closure membership at working scale h: the inward probe depth is tied to
// the probe offset so that photons within ~1/50 radian of a boundary stratum
// are recognized while corner points at the same offset are not.
bool closure_member_impl(const DomainOracle& dom, const EinPoint& z, double h) {
    if (dom.member(z)) return true;
    const FormSpace& sp = *dom.space;
    const Vec w = aligned_lift(z, dom.basepoint);
    for (double t : {1e-10, h / 500.0, h / 50.0}) {
        try {
            if (dom.member(EinPoint(dom.space, cone_path_lift(sp, z.lift(), w, t)))) return true;
        } catch (const std::runtime_error&) {
        }
    }
    return false;
}

// angle of the endpoint of the closure segment through angle 0, in direction
// sign (+1/-1); assumes closure_member at +-h near 0
double closure_exit_angle(const DomainOracle& dom, const ein::Photon& ph, double sign, double h) {
    double inside = sign * h;
    double outside = inside;
    bool found = false;
    for (int it = 0; it < 48; ++it) {
        outside = outside * 2.0;
        if (std::abs(outside) > 3.141592653589793) {
            outside = sign * 3.141592653589793;
            found = !closure_member_impl(dom, ph.at_angle(outside), h);
            break;
        }
        if (!closure_member_impl(dom, ph.at_angle(outside), h)) {
            found = true;
            break;
        }
        inside = outside;
    }
    if (!found) return sign * 3.141592653589793;  // photon closure wraps fully
    for (int it = 0; it < 52; ++it) {
        const double mid = 0.5 * (inside + outside);
        (closure_member_impl(dom, ph.at_angle(mid), h) ? inside : outside) = mid;
    }
    return outside;  // resolved onto the exterior side
}

}  // namespace

EinPoint slide_to_extremal(const DomainOracle& dom, EinPoint a, const Vec* objective, int fan,
                           int max_rounds) {
    const double h0 = 1e-5;
    // Re-fit the photon through the two exit points (boundary photon segments
    // are flat) until the endpoints settle at probe scale h.
    auto settle = [&](ein::Photon& ph, EinPoint& ep, EinPoint& em, double h) {
        for (int it = 0; it < 30; ++it) {
            Vec mlift = em.lift();
            if (ep.lift().dot(mlift) < 0) mlift = -mlift;
            bool settled = true;
            try {
                ein::Photon secant(dom.space, ep.lift() + mlift, ep.lift());
                if (closure_member_impl(dom, secant.at_angle(h), h) &&
                    closure_member_impl(dom, secant.at_angle(-h), h)) {
                    const double sp2 = closure_exit_angle(dom, secant, +1.0, h);
                    const double sm2 = closure_exit_angle(dom, secant, -1.0, h);
                    EinPoint ep2 = secant.at_angle(sp2), em2 = secant.at_angle(sm2);
                    settled = projective_angle(ep2, ep) < 1e-12 && projective_angle(em2, em) < 1e-12;
                    ph = secant;
                    ep = ep2;
                    em = em2;
                }
            } catch (const std::invalid_argument&) {
            }
            if (settled) break;
        }
    };
    for (int round = 0; round < max_rounds; ++round) {
        bool moved = false;
        for (int k = 0; k < fan && !moved; ++k) {
            ein::Photon ph = ein::halton_photon_through(a, static_cast<std::uint64_t>(k));
            if (!closure_member_impl(dom, ph.at_angle(h0), h0) ||
                !closure_member_impl(dom, ph.at_angle(-h0), h0))
                continue;
            double tp = closure_exit_angle(dom, ph, +1.0, h0);
            double tm = closure_exit_angle(dom, ph, -1.0, h0);
            EinPoint ep = ph.at_angle(tp), em = ph.at_angle(tm);
            // settle at h0, then polish the endpoints at finer probe scales
            // (the closure fuzz h/50 limits the endpoint resolution)
            settle(ph, ep, em, h0);
            settle(ph, ep, em, h0 * 1e-2);
            settle(ph, ep, em, h0 * 1e-4);
            EinPoint next = ep;
            if (objective) {
                const double vp = objective->dot(ep.lift());
                const double vm = objective->dot(em.lift());
                next = (std::abs(vp) >= std::abs(vm)) ? ep : em;
            }
            if (next.same_point(a)) next = next.same_point(ep) ? em : ep;
            if (next.same_point(a)) continue;
            a = next;
            moved = true;
        }
        if (!moved) break;
    }
    return a;
}

bool extremality_check(const DomainOracle& dom, const EinPoint& a, const ExtremalityOptions& opt) {
    if (dom.member(a)) throw std::invalid_argument("extremality_check: point is interior, not boundary");
    const FormSpace& sp = *dom.space;
    auto closure_member = [&](const EinPoint& z) { return closure_member_impl(dom, z, opt.step); };
    {
        // boundary gate
        const Vec w = aligned_lift(a, dom.basepoint);
        bool near = false;
        for (double t : {1e-7, 1e-5, 1e-3}) {
            try {
                if (dom.member(EinPoint(dom.space, cone_path_lift(sp, a.lift(), w, t)))) {
                    near = true;
                    break;
                }
            } catch (const std::runtime_error&) {
            }
        }
        if (!near) throw std::invalid_argument("extremality_check: point is not on the boundary");
    }
    for (int k = 0; k < opt.photons; ++k) {
        ein::Photon ph = ein::halton_photon_through(a, static_cast<std::uint64_t>(k));
        if (closure_member(ph.at_angle(opt.step)) && closure_member(ph.at_angle(-opt.step)))
            return false;  // a lies in the interior of photon cap closure
    }
    return true;
}

ExtremalClass classify_extremal(const DomainOracle& dom, const EinPoint& a,
                                const EinPoint& witness, const std::vector<EinPoint>& cloud) {
    const FormSpace& sp = *dom.space;
    const double ba_xi = b_eval(sp, a.lift(), witness.lift());
    if (std::abs(ba_xi) <= sp.tol * sp.gram_scale)
        throw std::runtime_error("classify_extremal: extremal point incident to the witness cone");
    int pos = 0, neg = 0;
    for (const auto& x : cloud) {
        const double bx_xi = b_eval(sp, x.lift(), witness.lift());
        const double v = b_eval(sp, a.lift(), x.lift()) / (ba_xi * bx_xi);
        if (std::abs(v) <= sp.tol * sp.gram_scale)
            throw std::runtime_error("classify_extremal: C(a) meets Omega (domain non-certifiable)");
        (v > 0 ? pos : neg)++;
    }
    if (pos && neg)
        throw std::runtime_error("classify_extremal: C(a) meets Omega (domain non-certifiable)");
    return pos ? ExtremalClass::Timelike : ExtremalClass::Spacelike;
}

ComponentTable classify_splitting_components(Signature sig0, Signature sig1) {
    if (sig0.p < 0 || sig0.q < 0 || sig1.p < 0 || sig1.q < 0)
        throw std::invalid_argument("classify_splitting_components: negative signature entries");
    if (sig0.p + sig1.p < 1 || sig0.q + sig1.q < 1)
        throw std::invalid_argument("classify_splitting_components: signatures do not split any Ein^{p,q}");
    ComponentTable t;
    if (sig0.p == 0 || sig0.q == 0 || sig1.p == 0 || sig1.q == 0) {
        t.components = 1;
        t.proper = 0;
        t.dense = true;
        t.description = "connected, homogeneous, dense, non-proper";
        return t;
    }
    const int a = sig0.p * sig1.q;
    const int b = sig1.p * sig0.q;
    if (a == 1 && b == 1) {
        t.components = 4;
        t.proper = 4;
        t.lorentzian_diamonds = true;
        t.description = "4 connected components, all Lorentzian diamonds";
    } else if (a == 1 || b == 1) {
        t.components = 3;
        t.proper = 2;
        t.description = "3 connected components, two proper and isomorphic";
    } else {
        t.components = 2;
        t.proper = 0;
        t.description = "2 connected components, symmetric and non-proper";
    }
    return t;
}

}  // namespace einkit::domains
