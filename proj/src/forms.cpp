#include "einkit/forms.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace einkit::forms {

namespace {

void check_dim(const FormSpace& space, const Vec& v, const char* what) {
    if (v.size() != space.dim)
        throw std::invalid_argument(std::string(what) + ": vector dimension " +
                                    std::to_string(v.size()) + " does not match space dimension " +
                                    std::to_string(space.dim));
}

Signature count_inertia(const Eigen::VectorXd& eigs, double tol, int* degenerate) {
    const double scale = eigs.cwiseAbs().maxCoeff();
    const double cut = tol * std::max(scale, 1e-300);
    Signature s;
    int deg = 0;
    for (int i = 0; i < eigs.size(); ++i) {
        if (eigs[i] < -cut)
            ++s.p;
        else if (eigs[i] > cut)
            ++s.q;
        else
            ++deg;
    }
    if (degenerate) *degenerate = deg;
    return s;
}

}  // namespace

FormSpace::FormSpace(Mat gram_matrix, Signature s, double tolerance)
    : dim(static_cast<int>(gram_matrix.rows())), gram(std::move(gram_matrix)), sig(s), tol(tolerance) {
    if (gram.rows() != gram.cols()) throw std::invalid_argument("FormSpace: gram must be square");
    if (sig.p + sig.q != dim) throw std::invalid_argument("FormSpace: signature does not match dimension");
    if (tol <= 0) throw std::invalid_argument("FormSpace: tol must be positive");
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gram.cwiseAbs().maxCoeff())
        throw std::invalid_argument("FormSpace: gram must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    int deg = 0;
    Signature found = count_inertia(es.eigenvalues(), 1e-12, &deg);
    if (deg != 0) throw std::invalid_argument("FormSpace: form is degenerate");
    if (found != sig) throw std::invalid_argument("FormSpace: eigenvalue sign count does not match signature");
    gram_scale = es.eigenvalues().cwiseAbs().maxCoeff();
    eigvecs = es.eigenvectors();
    eigvals = es.eigenvalues();
}

FormSpace FormSpace::orthonormal(Signature s, double tolerance) {
    Mat g = Mat::Zero(s.dim(), s.dim());
    for (int i = 0; i < s.p; ++i) g(i, i) = -1.0;
    for (int i = s.p; i < s.dim(); ++i) g(i, i) = 1.0;
    return FormSpace(std::move(g), s, tolerance);
}

FormSpace FormSpace::split(int p, int q, double tolerance) {
    if (p < 0 || q < p) throw std::invalid_argument("FormSpace::split requires 0 <= p <= q");
    const int n = p + q + 2;
    Mat g = Mat::Zero(n, n);
    for (int i = 0; i <= p; ++i) {
        g(i, n - 1 - i) = 0.5;
        g(n - 1 - i, i) = 0.5;
    }
    for (int j = p + 1; j <= q; ++j) g(j, j) = 1.0;
    return FormSpace(std::move(g), Signature{p + 1, q + 1}, tolerance);
}

Mat FormSpace::split_to_orthonormal(int p, int q) {
    // Orthonormal basis ordering: m_0..m_p (minus), then s_0..s_p, u_{p+1}..u_q (plus).
    // For the split gram, m_i = e_i - e_{n-1-i} has q = -1 and s_i = e_i + e_{n-1-i}
    // has q = +1, with b(m_i, s_i) = 0; invert for the columns below.
    const int n = p + q + 2;
    Mat T = Mat::Zero(n, n);
    for (int i = 0; i <= p; ++i) {
        // split basis vector e_i = (m_i + s_i)/2; e_{n-1-i} = (s_i - m_i)/2
        T(i, i) = 0.5;           // m_i coefficient of e_i
        T(p + 1 + i, i) = 0.5;   // s_i coefficient of e_i
        T(i, n - 1 - i) = -0.5;
        T(p + 1 + i, n - 1 - i) = 0.5;
    }
    for (int j = p + 1; j <= q; ++j) T(p + 1 + j, j) = 1.0;  // middle plus vectors
    return T;
}

FormSpacePtr make_orthonormal(Signature s, double tol) {
    return std::make_shared<const FormSpace>(FormSpace::orthonormal(s, tol));
}

FormSpacePtr make_split(int p, int q, double tol) {
    return std::make_shared<const FormSpace>(FormSpace::split(p, q, tol));
}

double q_eval(const FormSpace& space, const Vec& v) {
    check_dim(space, v, "q_eval");
    return v.dot(space.gram * v);
}

double b_eval(const FormSpace& space, const Vec& u, const Vec& v) {
    check_dim(space, u, "b_eval");
    check_dim(space, v, "b_eval");
    return u.dot(space.gram * v);
}

CausalType classify_vector(const FormSpace& space, const Vec& v) {
    check_dim(space, v, "classify_vector");
    const double n2 = v.squaredNorm();
    if (n2 == 0.0) throw std::invalid_argument("classify_vector: zero vector");
    const double q = q_eval(space, v) / n2;  // scale-free
    if (std::abs(q) <= space.tol * space.gram_scale) return CausalType::Lightlike;
    return q < 0 ? CausalType::Timelike : CausalType::Spacelike;
}

bool is_isotropic(const FormSpace& space, const Vec& v) {
    return classify_vector(space, v) == CausalType::Lightlike;
}

double hyperboloid_distance(const FormSpace& space, const Vec& u, const Vec& v,
                            int sheet_sign) {
    check_dim(space, u, "hyperboloid_distance");
    check_dim(space, v, "hyperboloid_distance");
    if (sheet_sign != 1 && sheet_sign != -1)
        throw std::invalid_argument("hyperboloid_distance: sheet_sign must be +-1");
    const double target = static_cast<double>(sheet_sign);
    const double qu = q_eval(space, u), qv = q_eval(space, v);
    const double slack = 1e-6 + 100 * space.tol * space.gram_scale;
    if (std::abs(qu - target) > slack || std::abs(qv - target) > slack)
        throw std::invalid_argument("hyperboloid_distance: point off the quadric {q = sheet_sign}");
    // On a common sheet, sheet_sign * b(u,v) >= 1.
    const double c = sheet_sign * b_eval(space, u, v);
    if (c < 1.0 - 1e-9)
        throw std::invalid_argument("hyperboloid_distance: points on opposite sheets");
    return std::acosh(std::max(c, 1.0));
}

SubspaceSignature signature_of_subspace(const FormSpace& space, const std::vector<Vec>& basis) {
    if (basis.empty()) return {};
    Mat B(space.dim, static_cast<int>(basis.size()));
    for (int j = 0; j < static_cast<int>(basis.size()); ++j) {
        check_dim(space, basis[j], "signature_of_subspace");
        B.col(j) = basis[j];
    }
    return signature_of_subspace(space, B);
}

SubspaceSignature signature_of_subspace(const FormSpace& space, const Mat& basis) {
    if (basis.rows() != space.dim)
        throw std::invalid_argument("signature_of_subspace: basis row count mismatch");
    const int k = static_cast<int>(basis.cols());
    Eigen::JacobiSVD<Mat> svd(basis);
    if (k > 0 && svd.singularValues()(k - 1) < 1e-10 * svd.singularValues()(0))
        throw std::invalid_argument("signature_of_subspace: basis is linearly dependent");
    Mat restricted = basis.transpose() * space.gram * basis;
    Eigen::SelfAdjointEigenSolver<Mat> es(restricted, Eigen::EigenvaluesOnly);
    SubspaceSignature out;
    // Gauge the degeneracy cut against the ambient form and the basis size,
    // not against the restricted eigenvalues themselves (a null line would
    // otherwise come out nondegenerate).
    const double scale = space.gram_scale * basis.colwise().norm().maxCoeff();
    const double cut = std::max(space.tol * scale * scale, 1e-300);
    int deg = 0;
    for (int i = 0; i < k; ++i) {
        const double e = es.eigenvalues()[i];
        if (e < -cut)
            ++out.sig.p;
        else if (e > cut)
            ++out.sig.q;
        else
            ++deg;
    }
    out.degenerate = deg;
    return out;
}

Vec geodesic_point_dir(const Vec& u, const Vec& w, double s) {
    return std::cosh(s) * u + std::sinh(s) * w;
}

Vec geodesic_point(const FormSpace& space, const Vec& u, const Vec& v, int sheet_sign, double s) {
    const double d = hyperboloid_distance(space, u, v, sheet_sign);
    if (d < 1e-14) {
        if (std::abs(s) < 1e-14) return u;
        throw std::invalid_argument("geodesic_point: direction undefined for coincident points");
    }
    Vec w = (v - std::cosh(d) * u) / std::sinh(d);
    return geodesic_point_dir(u, w, s);
}

}  // namespace einkit::forms
