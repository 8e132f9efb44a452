#include "einkit/einstein.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace einkit::ein {

using forms::b_eval;
using forms::q_eval;

Vec canonical_lift(Vec v) {
    const double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("EinPoint: zero lift");
    v /= n;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-7) {
            if (v[i] < 0) v = -v;
            break;
        }
    }
    return v;
}

EinPoint::EinPoint(FormSpacePtr space, Vec lift) : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("EinPoint: null space");
    lift_ = canonical_lift(std::move(lift));
    const double q = q_eval(*space_, lift_);
    if (std::abs(q) > 1e4 * space_->tol * space_->gram_scale)
        throw std::invalid_argument("EinPoint: lift is not isotropic (q = " + std::to_string(q) + ")");
}

bool EinPoint::same_point(const EinPoint& other) const {
    if (lift_.size() != other.lift_.size()) return false;
    return std::abs(1.0 - std::abs(lift_.dot(other.lift_))) < space_->tol;
}

EinPoint project_to_cone(const FormSpacePtr& space, const Vec& v) {
    Vec neg = Vec::Zero(space->dim), pos = Vec::Zero(space->dim);
    for (int i = 0; i < space->dim; ++i) {
        const Vec dir = space->eigvecs.col(i);
        const double c = dir.dot(v);
        if (space->eigvals[i] < 0)
            neg += c * dir;
        else
            pos += c * dir;
    }
    // Rescale so that the negative and positive parts carry opposite q.
    const double qn = -q_eval(*space, neg), qp = q_eval(*space, pos);
    if (qn < 1e-14 || qp < 1e-14)
        throw std::invalid_argument("project_to_cone: vector lies in a definite eigenspace");
    return EinPoint(space, neg / std::sqrt(qn) + pos / std::sqrt(qp));
}

EinPoint random_point(const FormSpacePtr& space, Rng& rng) {
    return project_to_cone(space, rng.gaussian_vector(space->dim));
}

Photon::Photon(FormSpacePtr space, Vec a, Vec b) : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("Photon: null space");
    if (a.size() != space_->dim || b.size() != space_->dim)
        throw std::invalid_argument("Photon: span dimension mismatch");
    a_ = canonical_lift(std::move(a));
    b -= a_.dot(b) * a_;
    const double nb = b.norm();
    if (nb < 1e-10) throw std::invalid_argument("Photon: spanning vectors are dependent");
    b_ = canonical_lift(b / nb);
    const double s = space_->tol * space_->gram_scale;
    if (std::abs(q_eval(*space_, a_)) > 1e4 * s || std::abs(q_eval(*space_, b_)) > 1e4 * s ||
        std::abs(b_eval(*space_, a_, b_)) > 1e4 * s)
        throw std::invalid_argument("Photon: span is not a totally isotropic 2-plane");
}

EinPoint Photon::at_angle(double theta) const {
    return EinPoint(space_, std::cos(theta) * a_ + std::sin(theta) * b_);
}

bool Photon::contains(const EinPoint& x) const {
    const Vec& v = x.lift();
    const double residual = (v - a_.dot(v) * a_ - b_.dot(v) * b_).norm();
    return residual < 1e3 * space_->tol;
}

bool on_common_photon(const EinPoint& x, const EinPoint& y) {
    const FormSpace& space = x.space();
    if (y.lift().size() != space.dim)
        throw std::invalid_argument("on_common_photon: dimension mismatch");
    // lifts are unit vectors, so the tolerance is already scale-free
    return std::abs(b_eval(space, x.lift(), y.lift())) <= space.tol * space.gram_scale;
}

Photon photon_through(const EinPoint& x, const EinPoint& y) {
    if (x.same_point(y)) throw std::invalid_argument("photon_through: equal points");
    if (!on_common_photon(x, y))
        throw std::invalid_argument("photon_through: points are not incident");
    return Photon(x.space_ptr(), x.lift(), y.lift());
}

AffineChart::AffineChart(EinPoint xi0, EinPoint xi_inf, Mat comp_basis)
    : xi0_(std::move(xi0)), xi_inf_(std::move(xi_inf)), comp_basis_(std::move(comp_basis)) {
    const FormSpace& sp = xi0_.space();
    const double pairing = b_eval(sp, xi0_.lift(), xi_inf_.lift());
    if (std::abs(pairing) < 1e3 * sp.tol * sp.gram_scale)
        throw std::invalid_argument("AffineChart: b(xi0, xi_inf) must be nonzero");
    xi0_lift_ = xi0_.lift();
    xi_inf_lift_ = xi_inf_.lift() / pairing;  // now b(xi0, xi_inf) = 1

    if (comp_basis_.rows() != sp.dim || comp_basis_.cols() != sp.dim - 2)
        throw std::invalid_argument("AffineChart: comp_basis must be dim x (dim-2)");
    // b-orthonormalize the complement basis (Gram-Schmidt), minus vectors first.
    Mat cols = comp_basis_;
    std::vector<Vec> ortho;
    std::vector<double> signs;
    for (int j = 0; j < cols.cols(); ++j) {
        Vec v = cols.col(j);
        for (size_t k = 0; k < ortho.size(); ++k)
            v -= signs[k] * b_eval(sp, ortho[k], v) * ortho[k];
        const double q = q_eval(sp, v);
        if (std::abs(q) < 1e3 * sp.tol * sp.gram_scale * v.squaredNorm())
            throw std::invalid_argument("AffineChart: comp_basis is degenerate for this form");
        v /= std::sqrt(std::abs(q));
        ortho.push_back(v);
        signs.push_back(q > 0 ? 1.0 : -1.0);
    }
    // reorder: minus first
    int p = 0;
    for (double s : signs)
        if (s < 0) ++p;
    Mat sorted(sp.dim, cols.cols());
    Vec msigns(cols.cols());
    int a = 0, b = p;
    for (size_t k = 0; k < ortho.size(); ++k) {
        if (signs[k] < 0) {
            sorted.col(a) = ortho[k];
            msigns[a++] = -1.0;
        } else {
            sorted.col(b) = ortho[k];
            msigns[b++] = 1.0;
        }
    }
    comp_basis_ = std::move(sorted);
    metric_signs_ = std::move(msigns);
    sig_ = Signature{p, static_cast<int>(cols.cols()) - p};

    for (int j = 0; j < comp_basis_.cols(); ++j) {
        const Vec c = comp_basis_.col(j);
        if (std::abs(b_eval(sp, c, xi0_lift_)) > 1e-7 ||
            std::abs(b_eval(sp, c, xi_inf_lift_)) > 1e-7)
            throw std::invalid_argument("AffineChart: comp_basis not orthogonal to xi0, xi_inf");
    }
}

AffineChart AffineChart::standard(const FormSpacePtr& space) {
    const int n = space->dim;
    const int p1 = space->sig.p;  // p+1 minus vectors expected first in orthonormal layout
    Mat g = space->gram;
    // This constructor assumes the orthonormal diag(-I, +I) layout.
    Vec e0 = Vec::Zero(n), elast = Vec::Zero(n);
    e0[0] = 1.0;
    elast[n - 1] = 1.0;
    EinPoint xi0(space, e0 + elast);
    EinPoint xi_inf(space, elast - e0);
    Mat comp(n, n - 2);
    for (int j = 1; j <= n - 2; ++j) {
        Vec c = Vec::Zero(n);
        c[j] = 1.0;
        comp.col(j - 1) = c;
    }
    (void)p1;
    return AffineChart(std::move(xi0), std::move(xi_inf), std::move(comp));
}

double AffineChart::chart_q(const Vec& m) const {
    double q = 0;
    for (int i = 0; i < m.size(); ++i) q += metric_signs_[i] * m[i] * m[i];
    return q;
}

double AffineChart::chart_b(const Vec& m1, const Vec& m2) const {
    double q = 0;
    for (int i = 0; i < m1.size(); ++i) q += metric_signs_[i] * m1[i] * m2[i];
    return q;
}

Vec AffineChart::embed_lift(const Vec& m) const {
    if (m.size() != comp_basis_.cols())
        throw std::invalid_argument("chart_embed: chart vector dimension mismatch");
    return xi_inf_lift_ + comp_basis_ * m - 0.5 * chart_q(m) * xi0_lift_;
}

EinPoint chart_embed(const AffineChart& chart, const Vec& m) {
    return EinPoint(chart.space_ptr(), chart.embed_lift(m));
}

std::optional<Vec> try_chart_project(const AffineChart& chart, const EinPoint& x) {
    const FormSpace& sp = chart.space();
    const double denom = b_eval(sp, x.lift(), chart.xi0_lift_);
    if (std::abs(denom) <= sp.tol * sp.gram_scale) return std::nullopt;
    const Vec u = x.lift() / denom;  // now b(u, xi0) = 1, so u = xi_inf + m - (q/2) xi0
    Vec m(chart.comp_basis_.cols());
    for (int j = 0; j < chart.comp_basis_.cols(); ++j)
        m[j] = chart.metric_signs_[j] * b_eval(sp, u, chart.comp_basis_.col(j));
    return m;
}

Vec chart_project(const AffineChart& chart, const EinPoint& x) {
    auto m = try_chart_project(chart, x);
    if (!m)
        throw std::invalid_argument("chart_project: point lies on C(xi0) (at infinity for this chart)");
    return *m;
}

double cross_ratio_modulus(const EinPoint& xi1, const EinPoint& x, const EinPoint& y,
                           const EinPoint& xi2) {
    const FormSpace& sp = x.space();
    const double cut = sp.tol * sp.gram_scale;
    const double a = b_eval(sp, xi1.lift(), x.lift());
    const double b = b_eval(sp, xi2.lift(), y.lift());
    const double c = b_eval(sp, xi2.lift(), x.lift());
    const double d = b_eval(sp, xi1.lift(), y.lift());
    if (std::abs(a) <= cut || std::abs(b) <= cut || std::abs(c) <= cut || std::abs(d) <= cut)
        throw std::invalid_argument("cross_ratio_modulus: undefined cross-ratio (incidence)");
    return std::abs((a * b) / (c * d));
}

PhotonParam::PhotonParam(EinPoint anchor, EinPoint dir)
    : anchor_(std::move(anchor)), dir_(std::move(dir)) {
    if (anchor_.same_point(dir_)) throw std::invalid_argument("PhotonParam: anchor equals dir");
    photon_through(anchor_, dir_);  // validates incidence
}

EinPoint PhotonParam::at(double s) const {
    return EinPoint(anchor_.space_ptr(), anchor_.lift() + s * dir_.lift());
}

std::optional<double> PhotonParam::parameter_of(const EinPoint& x) const {
    // x ~ anchor + s dir: solve in the least-squares sense on unit lifts.
    const Vec& u = anchor_.lift();
    const Vec& w = dir_.lift();
    Vec v = x.lift();
    // Align sign so that the anchor coefficient is nonnegative.
    const double ca = u.dot(v) - (u.dot(w)) * (w.dot(v));  // component along u after removing w
    (void)ca;
    Mat A(u.size(), 2);
    A.col(0) = u;
    A.col(1) = w;
    Eigen::Vector2d coeff = (A.transpose() * A).ldlt().solve(A.transpose() * v);
    if ((A * coeff - v).norm() > 1e-7)
        throw std::invalid_argument("PhotonParam: point is not on the photon");
    if (std::abs(coeff[0]) < 1e-12) return std::nullopt;  // P(dir)
    return coeff[1] / coeff[0];
}

Mat perp_basis(const EinPoint& x) {
    const FormSpace& sp = x.space();
    const Vec normal = sp.gram * x.lift();  // x^perp = Euclidean complement of G x
    Eigen::HouseholderQR<Mat> qr(normal);
    Mat Q = qr.householderQ();
    return Q.rightCols(sp.dim - 1);
}

Vec null_direction_in_perp(const EinPoint& x, const Vec& seed) {
    const FormSpace& sp = x.space();
    if (sp.sig.p < 2 || sp.sig.q < 2)
        throw std::invalid_argument("null_direction_in_perp: no photons unless p,q >= 1");
    Mat B = perp_basis(x);
    Mat S = B.transpose() * sp.gram * B;  // rank dim-2, kernel = coords of lift(x)
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const double cut = 1e-9 * es.eigenvalues().cwiseAbs().maxCoeff();
    Vec neg = Vec::Zero(B.cols()), pos = Vec::Zero(B.cols());
    if (seed.size() != B.cols())
        throw std::invalid_argument("null_direction_in_perp: seed must have dim-1 entries");
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double e = es.eigenvalues()[i];
        if (std::abs(e) <= cut) continue;  // kernel direction (x itself)
        const Vec dir = es.eigenvectors().col(i);
        if (e < 0)
            neg += seed[i] * dir;
        else
            pos += seed[i] * dir;
    }
    const double qn = -neg.dot(S * neg), qp = pos.dot(S * pos);
    if (qn < 1e-14 || qp < 1e-14)
        throw std::invalid_argument("null_direction_in_perp: seed misses a definite block");
    Vec combo = neg / std::sqrt(qn) + pos / std::sqrt(qp);
    return B * combo;
}

Photon random_photon_through(const EinPoint& x, Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        try {
            Vec w = null_direction_in_perp(x, rng.gaussian_vector(x.space().dim - 1));
            return Photon(x.space_ptr(), x.lift(), w);
        } catch (const std::invalid_argument&) {
            if (x.space().sig.p < 2 || x.space().sig.q < 2) throw;
        }
    }
    throw std::runtime_error("random_photon_through: failed to draw a photon");
}

namespace {

// Low-discrepancy point on S^k driven by coords in [0,1)^k; for k >= 3 the
// coordinates seed a deterministic scramble instead.
Vec sphere_point(int k, const Vec& coords) {
    Vec out(k + 1);
    const double two_pi = 6.283185307179586;
    if (k == 0) {
        out[0] = 1.0;
    } else if (k == 1) {
        out[0] = std::cos(two_pi * coords[0]);
        out[1] = std::sin(two_pi * coords[0]);
    } else if (k == 2) {
        const double z = 2.0 * coords[0] - 1.0;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out[0] = r * std::cos(two_pi * coords[1]);
        out[1] = r * std::sin(two_pi * coords[1]);
        out[2] = z;
    } else {
        std::uint64_t s = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < k; ++i)
            s ^= static_cast<std::uint64_t>(coords[i] * 9007199254740992.0) + (s << 6) + (s >> 2);
        Rng scraper(s);
        out = scraper.unit_vector(k + 1);
    }
    return out;
}

}  // namespace

Photon halton_photon_through(const EinPoint& x, std::uint64_t index) {
    const FormSpace& sp = x.space();
    if (sp.sig.p < 2 || sp.sig.q < 2)
        throw std::invalid_argument("halton_photon_through: no photons unless p,q >= 1");
    // The null directions in the quotient x^perp / x form (a fold of)
    // S^{p-1} x S^{q-1}; sample the product structure directly so that
    // low-index fans already cover every photon family through x.
    Mat B = perp_basis(x);
    Mat S = B.transpose() * sp.gram * B;
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const double cut = 1e-9 * es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<int> neg, pos;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        if (std::abs(es.eigenvalues()[i]) <= cut) continue;
        (es.eigenvalues()[i] < 0 ? neg : pos).push_back(i);
    }
    const int kp = static_cast<int>(neg.size()) - 1;
    const int kq = static_cast<int>(pos.size()) - 1;
    const int dims = std::max(1, kp + kq);
    Vec h = halton_point(index, dims);
    Vec sn = sphere_point(kp, h.head(std::max(1, kp)));
    Vec sq = sphere_point(kq, h.tail(std::max(1, kq)));
    Vec ncomb = Vec::Zero(B.cols()), pcomb = Vec::Zero(B.cols());
    for (size_t i = 0; i < neg.size(); ++i) ncomb += sn[i] * es.eigenvectors().col(neg[i]);
    for (size_t i = 0; i < pos.size(); ++i) pcomb += sq[i] * es.eigenvectors().col(pos[i]);
    const double qn = -ncomb.dot(S * ncomb), qp = pcomb.dot(S * pcomb);
    Vec dir = B * (ncomb / std::sqrt(qn) + pcomb / std::sqrt(qp));
    return Photon(x.space_ptr(), x.lift(), dir);
}

EinPoint random_incident_point(const EinPoint& x, Rng& rng) {
    Photon ph = random_photon_through(x, rng);
    // any angle away from x works; keep clear of x itself
    for (int attempt = 0; attempt < 32; ++attempt) {
        EinPoint y = ph.at_angle(rng.uniform(0.1, 3.0));
        if (!y.same_point(x)) return y;
    }
    throw std::runtime_error("random_incident_point: degenerate draw");
}

EinPoint apply(const Mat& g, const EinPoint& x) {
    return EinPoint(x.space_ptr(), g * x.lift());
}

double projective_angle(const EinPoint& x, const EinPoint& y) {
    const double c = std::min(1.0, std::abs(x.lift().dot(y.lift())));
    return std::acos(c);
}

}  // namespace einkit::ein
