#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace einkit::forms {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Signature (p,q): p minus signs, q plus signs.
struct Signature {
    int p = 0;
    int q = 0;

    int dim() const { return p + q; }
    bool operator==(const Signature& o) const { return p == o.p && q == o.q; }
    bool operator!=(const Signature& o) const { return !(*this == o); }
};

/// An ambient real vector space carrying a nondegenerate symmetric bilinear
/// form of signature (p,q). Immutable after construction.
struct FormSpace {
    int dim = 0;
    Mat gram;        // symmetric dim x dim
    Signature sig;
    double tol = 1e-9;  // relative tolerance for isotropy / incidence tests

    // cached scale of the form, used to make tolerance tests dimensionless
    double gram_scale = 1.0;
    // cached eigendecomposition of gram (ascending eigenvalues)
    Mat eigvecs;
    Vec eigvals;

    FormSpace() = default;
    FormSpace(Mat gram_matrix, Signature s, double tolerance = 1e-9);

    /// diag(-1,...,-1,+1,...,+1) with p minus entries first.
    static FormSpace orthonormal(Signature s, double tolerance = 1e-9);

    /// The split (Witt) basis in which the form reads
    /// v_0 v_{n-1} + v_1 v_{n-2} + ... + v_p v_{n-1-p} + sum of middle squares,
    /// for a space of signature (p+1, q+1) with n = p+q+2 and p <= q.
    /// Pairs (i, n-1-i), i = 0..p, are hyperbolic; indices p+1..q are unit plus.
    static FormSpace split(int p, int q, double tolerance = 1e-9);

    /// Basis-change matrix T (split coords -> orthonormal coords) satisfying
    /// T^t G_orth T = G_split for the pair of spaces above.
    static Mat split_to_orthonormal(int p, int q);
};

using FormSpacePtr = std::shared_ptr<const FormSpace>;

FormSpacePtr make_orthonormal(Signature s, double tol = 1e-9);
FormSpacePtr make_split(int p, int q, double tol = 1e-9);

/// b(v,v).
double q_eval(const FormSpace& space, const Vec& v);

/// b(u,v), symmetric.
double b_eval(const FormSpace& space, const Vec& u, const Vec& v);

enum class CausalType { Timelike, Lightlike, Spacelike };

/// Sign classification of q_eval after Euclidean unit normalization.
CausalType classify_vector(const FormSpace& space, const Vec& v);

bool is_isotropic(const FormSpace& space, const Vec& v);

/// Distance on the quadric sheets {q = -1} (sheet_sign = -1; arccosh(-b)) or
/// {q = +1} inside signature (m,1) (sheet_sign = +1; arccosh(+b)).
/// Throws if the points are off the quadric or on opposite sheets.
double hyperboloid_distance(const FormSpace& space, const Vec& u, const Vec& v,
                            int sheet_sign);

struct SubspaceSignature {
    Signature sig;
    int degenerate = 0;  // dimension of the kernel of the restricted form
};

/// Inertia of the form restricted to span(basis). Throws on dependent input.
SubspaceSignature signature_of_subspace(const FormSpace& space,
                                        const std::vector<Vec>& basis);
SubspaceSignature signature_of_subspace(const FormSpace& space, const Mat& basis);

/// Point at arc length s from u along the quadric geodesic through u, v.
/// Both points must lie on the same sheet (same conventions as
/// hyperboloid_distance). For u == v any direction is degenerate and u is
/// returned when s == 0.
Vec geodesic_point(const FormSpace& space, const Vec& u, const Vec& v,
                   int sheet_sign, double s);

/// Point at arc length s from u in the unit tangent direction w
/// (q(w) = -sheet_sign, b(u,w) = 0).
Vec geodesic_point_dir(const Vec& u, const Vec& w, double s);

}  // namespace einkit::forms
